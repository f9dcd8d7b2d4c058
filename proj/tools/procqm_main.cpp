#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "procqm/acceptance.hpp"
#include "procqm/dd.hpp"
#include "procqm/dp.hpp"
#include "procqm/errors.hpp"
#include "procqm/harness.hpp"
#include "procqm/pd.hpp"
#include "procqm/ppp.hpp"

namespace {

using procqm::ConfigError;
using procqm::harness::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailed = 1;
constexpr int kExitConfigError = 2;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// A JSON config file provides defaults; explicit flags override it.
void apply_config_file(const std::string& path, RunConfig& cfg) {
    const auto doc = nlohmann::json::parse(read_file(path));
    if (doc.contains("model")) cfg.model = doc["model"].get<std::string>();
    if (doc.contains("grid")) cfg.grid_spec = doc["grid"].get<std::string>();
    if (doc.contains("resolution")) cfg.resolution = doc["resolution"].get<int>();
    if (doc.contains("trials")) cfg.trials = doc["trials"].get<long long>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();
    if (doc.contains("z")) cfg.z = doc["z"].get<double>();
    if (doc.contains("out")) cfg.out_base = doc["out"].get<std::string>();
    if (doc.contains("prep")) cfg.prep = doc["prep"].get<std::string>();
    if (doc.contains("chain")) cfg.chain = doc["chain"].get<std::vector<std::string>>();
    if (doc.contains("extended")) cfg.dp_extended = doc["extended"].get<bool>();
    if (doc.contains("instance")) cfg.instance_path = doc["instance"].get<std::string>();
    if (doc.contains("preps")) cfg.preps_path = doc["preps"].get<std::string>();
}

nlohmann::json frequency_report_json(const procqm::harness::FrequencyReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"prep", row.prep},
                        {"chain", row.chain},
                        {"outcome_seq", row.outcome_seq},
                        {"count", row.count},
                        {"emp_freq", row.emp_freq},
                        {"theory", row.theory},
                        {"se", row.se},
                        {"quant_bound", row.quant_bound},
                        {"verdict", row.pass ? "pass" : "fail"}});
    }
    return {{"trials", report.trials},
            {"resolution", report.resolution},
            {"z", report.z},
            {"seed", report.seed},
            {"rows", rows}};
}

void emit(const RunConfig& cfg, const std::string& csv, const std::string& json) {
    if (cfg.out_base.empty()) {
        std::cout << csv;
        return;
    }
    write_file(cfg.out_base + ".csv", csv);
    write_file(cfg.out_base + ".json", json);
    std::cout << "wrote " << cfg.out_base << ".csv and " << cfg.out_base << ".json\n";
}

int run_simulate(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.model == "dd") {
        const std::vector<procqm::harness::ChainTask> tasks = {{cfg.prep, cfg.chain}};
        const auto report = procqm::harness::run_dd_trials(tasks, cfg);
        const std::string csv =
            std::string(procqm::harness::kCsvHeader) + "\n" + report.to_csv_rows();
        emit(cfg, csv, frequency_report_json(report).dump(2) + "\n");
        return kExitOk;
    }
    if (cfg.model == "dp") {
        const auto table = procqm::dp::outcome_table(procqm::dp::builtin_model(cfg.dp_extended));
        const std::string csv = procqm::dp::table_to_csv(table);
        nlohmann::json doc;
        doc["table_csv"] = csv;
        emit(cfg, csv, doc.dump(2) + "\n");
        return kExitOk;
    }
    if (cfg.model == "pd") {
        const auto inst = cfg.instance_path.empty()
                              ? procqm::pd::builtin_minimal_instance()
                              : procqm::pd::load_instance(cfg.instance_path);
        const auto validation = procqm::pd::validate_rules(inst);
        std::ostringstream csv;
        csv << "prep,measurement,outcome,probability\n";
        nlohmann::json marginals = nlohmann::json::array();
        for (const auto& prep : inst.preparations) {
            for (const auto& meas : inst.measurements) {
                for (const auto& [outcome, p] :
                     procqm::pd::outcome_probabilities(inst, prep.name, meas.name)) {
                    csv << prep.name << "," << meas.name << "," << outcome << "," << p.str()
                        << "\n";
                    marginals.push_back({{"prep", prep.name},
                                         {"measurement", meas.name},
                                         {"outcome", outcome},
                                         {"probability", p.str()}});
                }
            }
        }
        nlohmann::json doc;
        doc["marginals"] = marginals;
        doc["violations"] = validation.violations.size();
        emit(cfg, csv.str(), doc.dump(2) + "\n");
        return kExitOk;
    }
    if (cfg.model == "standard-check") {
        const auto grid = procqm::harness::grid_from_spec(cfg.grid_spec, cfg.resolution);
        const auto report =
            procqm::ppp::check_reproduction(procqm::ppp::delta_quantum_model(*grid), *grid);
        std::ostringstream csv;
        csv << "prep,axis_id,sign,model_probability,quantum_probability,verdict\n";
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : report.rows) {
            csv << row.prep << "," << row.axis_id << "," << (row.sign > 0 ? "+" : "-") << ","
                << row.model_probability << "," << row.quantum_probability << ","
                << (row.pass ? "pass" : "fail") << "\n";
            rows.push_back({{"prep", row.prep},
                            {"axis_id", row.axis_id},
                            {"sign", row.sign},
                            {"model_probability", row.model_probability},
                            {"quantum_probability", row.quantum_probability},
                            {"verdict", row.pass ? "pass" : "fail"}});
        }
        nlohmann::json doc;
        doc["rows"] = rows;
        doc["all_pass"] = report.all_pass;
        emit(cfg, csv.str(), doc.dump(2) + "\n");
        return report.all_pass ? kExitOk : kExitVerificationFailed;
    }
    // ppp goes through the classify path.
    return kExitConfigError;
}

nlohmann::json classes_json(const std::vector<procqm::ppp::PathClass>& classes) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& cls : classes) {
        nlohmann::json row;
        row["size"] = cls.members.size();
        if (cls.matched_state) {
            row["matched_state"] = {{"axis_id", cls.matched_state->axis.id},
                                    {"sign", cls.matched_state->sign}};
        }
        nlohmann::json members = nlohmann::json::array();
        for (const auto& member : cls.members) {
            members.push_back(nlohmann::json::parse(procqm::dd::path_to_json(member)));
        }
        row["members"] = std::move(members);
        out.push_back(std::move(row));
    }
    return out;
}

int run_ppp_classify(const RunConfig& cfg, const std::string& preps_path) {
    const auto doc = nlohmann::json::parse(read_file(preps_path));
    const std::string grid_spec = doc.value("grid", cfg.grid_spec);
    const int resolution = doc.value("resolution", cfg.resolution);
    const auto grid = procqm::harness::grid_from_spec(grid_spec, resolution);

    std::vector<procqm::ppp::PathPrep> preps;
    for (const auto& entry : doc.at("preps")) {
        procqm::ppp::PathPrep prep;
        prep.label = entry.at("label").get<std::string>();
        if (entry.contains("state")) {
            prep.state =
                procqm::harness::parse_state_token(*grid, entry.at("state").get<std::string>());
        }
        if (entry.contains("generate")) {
            if (!prep.state) throw ConfigError("generated preps need a state token");
            const auto& gen = entry.at("generate");
            const procqm::dd::DdPreparation dd_prep(*prep.state, grid, resolution);
            auto family = procqm::ppp::path_family(dd_prep, prep.label,
                                                   gen.value("count", 50),
                                                   gen.value("seed", cfg.seed));
            prep.support = std::move(family.support);
        }
        if (entry.contains("paths")) {
            for (const auto& item : entry.at("paths")) {
                auto path = procqm::dd::path_from_json(item.at("visits").dump(), grid->size());
                prep.support[std::move(path)] += item.at("probability").get<double>();
            }
        }
        if (prep.support.empty()) {
            throw ConfigError("prep " + prep.label + " declares no paths");
        }
        prep.validate();
        preps.push_back(std::move(prep));
    }

    std::vector<procqm::Direction> measurements;
    if (doc.contains("measurements")) {
        for (const auto& token : doc.at("measurements")) {
            measurements.push_back(
                procqm::harness::parse_axis_token(*grid, token.get<std::string>()).first);
        }
    } else {
        for (int d = 0; d < grid->size(); ++d) measurements.push_back(grid->direction(d));
    }

    std::vector<procqm::dd::ProcessPath> space;
    for (const auto& prep : preps) {
        for (const auto& entry : prep.support) space.push_back(entry.first);
    }
    std::unique_ptr<procqm::ppp::PathResponse> response;
    if (doc.contains("response")) {
        response = procqm::ppp::response_from_json_text(doc.at("response").dump(), *grid);
    } else {
        response = std::make_unique<procqm::ppp::RelativeFrequencyResponse>();
    }
    const auto classes =
        procqm::ppp::q_equivalence_classes(space, *response, measurements, *grid, resolution);
    const auto classification = procqm::ppp::classify_state(preps);

    nlohmann::json out;
    out["classes"] = classes_json(classes);
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& verdict : classification.paths) {
        verdicts.push_back(
            {{"prep_labels", verdict.prep_labels},
             {"determines_state", verdict.determines_state},
             {"path", nlohmann::json::parse(procqm::dd::path_to_json(verdict.path))}});
    }
    out["path_verdicts"] = std::move(verdicts);
    nlohmann::json visits = nlohmann::json::array();
    for (const auto& [state, labels] : classification.ontic_visits) {
        visits.push_back({{"direction_id", state.direction_id},
                          {"sign", state.sign},
                          {"visited_by", labels}});
    }
    out["ontic_visits"] = std::move(visits);

    const std::string text = out.dump(2) + "\n";
    if (cfg.out_base.empty()) {
        std::cout << text;
    } else {
        write_file(cfg.out_base + ".json", text);
        std::cout << "wrote " << cfg.out_base << ".json\n";
    }
    return kExitOk;
}

int run_verify(const RunConfig& cfg) {
    procqm::accept::AcceptanceConfig acc;
    acc.seed = cfg.seed;
    acc.trials = cfg.trials;
    acc.resolution = cfg.resolution;
    acc.workers = cfg.workers;
    acc.z = cfg.z;

    procqm::accept::ReportBundle bundle;
    const auto results = procqm::accept::run_all(acc, &bundle);
    bool all_pass = true;
    for (const auto& result : results) {
        std::cout << procqm::accept::format_criterion_line(result) << "\n";
        all_pass = all_pass && result.pass;
    }

    if (!cfg.out_base.empty()) {
        write_file(cfg.out_base + ".csv", bundle.csv);
        write_file(cfg.out_base + ".json", bundle.json);
        std::cout << "wrote " << cfg.out_base << ".csv and " << cfg.out_base << ".json\n";
    }
    return all_pass ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"process-based qubit models: simulation and verification"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::string instance_arg;
    std::string preps_arg;

    // The config file is applied before flag parsing, so flags win.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    try {
        if (!config_path.empty()) apply_config_file(config_path, cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    app.add_option("--config", config_path, "JSON config file with flag defaults");

    auto add_common = [&cfg, &config_path](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file with flag defaults");
        sub->add_option("--seed", cfg.seed, "root seed");
        sub->add_option("--trials", cfg.trials, "trials per (prep, chain)");
        sub->add_option("--resolution", cfg.resolution, "visits per direction pair");
        sub->add_option("--grid", cfg.grid_spec, "grid spec (default|greatcircle:N|axis list)");
        sub->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
        sub->add_option("--out", cfg.out_base, "output base path");
        sub->add_option("--z", cfg.z, "verdict z-score");
    };

    auto* simulate = app.add_subcommand("simulate", "sample or enumerate one model");
    add_common(simulate);
    simulate->add_option("--model", cfg.model, "dd|dp|pd|ppp|standard-check");
    simulate->add_option("--prep", cfg.prep, "preparation token, e.g. z+ or polar:30-");
    simulate->add_option("--chain", cfg.chain, "measurement chain axis tokens")->delimiter(',');
    simulate->add_flag("--extended", cfg.dp_extended, "include the fourth cyclic preparation");
    simulate->add_option("--instance", cfg.instance_path, "trajectory-model instance JSON");
    simulate->add_option("--preps", cfg.preps_path, "path-preps JSON (model ppp)");

    auto* verify = app.add_subcommand("verify", "run every acceptance criterion");
    add_common(verify);

    auto* dp_table = app.add_subcommand("dp-table", "emit the extended cyclic-model table CSV");
    add_common(dp_table);

    auto* pd_validate = app.add_subcommand("pd-validate", "validate a trajectory-model instance");
    add_common(pd_validate);
    pd_validate->add_option("instance", instance_arg, "instance JSON file")->required();

    auto* ppp_classify =
        app.add_subcommand("ppp-classify", "equivalence classes and onticity verdicts");
    add_common(ppp_classify);
    ppp_classify->add_option("preps", preps_arg, "path-preps JSON file")->required();

    auto* trace = app.add_subcommand("trace", "dump one generated path as JSON");
    add_common(trace);
    trace->add_option("--prep", cfg.prep, "preparation token");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (simulate->parsed()) {
            if (cfg.model == "ppp") {
                if (cfg.preps_path.empty()) {
                    throw ConfigError("model ppp needs --preps <file.json>");
                }
                return run_ppp_classify(cfg, cfg.preps_path);
            }
            return run_simulate(cfg);
        }
        if (verify->parsed()) {
            return run_verify(cfg);
        }
        if (dp_table->parsed()) {
            const std::string csv = procqm::dp::table_to_csv(procqm::dp::spekkens_table());
            if (cfg.out_base.empty()) {
                std::cout << csv;
            } else {
                write_file(cfg.out_base + ".csv", csv);
                std::cout << "wrote " << cfg.out_base << ".csv\n";
            }
            return kExitOk;
        }
        if (pd_validate->parsed()) {
            const auto inst = procqm::pd::load_instance(instance_arg);
            const auto report = procqm::pd::validate_rules(inst);
            for (const auto& violation : report.violations) {
                std::cout << "violation " << violation.rule << " at " << violation.trajectory
                          << ": " << violation.detail << "\n";
            }
            for (const auto& note : report.notes) {
                std::cout << "note: " << note << "\n";
            }
            std::cout << report.violations.size() << " violation(s)\n";
            return report.violations.empty() ? kExitOk : kExitVerificationFailed;
        }
        if (ppp_classify->parsed()) {
            return run_ppp_classify(cfg, preps_arg);
        }
        if (trace->parsed()) {
            const auto grid = procqm::harness::grid_from_spec(cfg.grid_spec, cfg.resolution);
            const auto psi = procqm::harness::parse_state_token(*grid, cfg.prep);
            const procqm::dd::DdPreparation prep(psi, grid, cfg.resolution);
            const auto path = procqm::dd::generate_path(prep, cfg.seed);
            const std::string text = procqm::dd::path_to_json(path) + "\n";
            if (cfg.out_base.empty()) {
                std::cout << text;
            } else {
                write_file(cfg.out_base + ".json", text);
                std::cout << "wrote " << cfg.out_base << ".json\n";
            }
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const procqm::MalformedInstanceError& e) {
        std::cerr << "malformed instance: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerificationFailed;
    }
    return kExitConfigError;
}
