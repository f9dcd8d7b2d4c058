#include "procqm/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "procqm/dp.hpp"
#include "procqm/pd.hpp"
#include "procqm/rng.hpp"

namespace procqm::accept {

namespace {

using harness::ChainTask;
using harness::FrequencyReport;
using harness::RunConfig;

std::string axis_token(int id) {
    if (id == 0) return "z";
    if (id == 6) return "x";
    if (id == 12) return "y";
    return "polar:" + std::to_string(15 * id);
}

constexpr int kGridAxes = 13;
constexpr int kSharedAxisX = 6;
constexpr int kFamilyPaths = 60;

RunConfig base_config(const AcceptanceConfig& cfg) {
    RunConfig rc;
    rc.model = "dd";
    rc.grid_spec = "default";
    rc.resolution = cfg.resolution;
    rc.trials = cfg.trials;
    rc.seed = cfg.seed;
    rc.workers = cfg.workers;
    rc.z = cfg.z;
    return rc;
}

int effective_workers(const AcceptanceConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

nlohmann::json report_to_json(const FrequencyReport& report) {
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
    return rows;
}

nlohmann::json dp_section() {
    const auto table = dp::outcome_table(dp::builtin_model(false));
    const auto model = dp::builtin_model(false);
    nlohmann::json section;
    section["table_csv"] = dp::table_to_csv(table);
    int distinguishing = 0;
    for (const auto& rule : dp::enumerate_two_outcome_rules()) {
        if (dp::distinguishability(model.preparations[0], model.preparations[1], rule)
                .one_shot_distinguishable) {
            ++distinguishing;
        }
    }
    section["distinguishing_rules_z+_m+"] = distinguishing;
    const auto analysis =
        dp::distinguishability(model.preparations[0], model.preparations[1], model.rules[0]);
    nlohmann::json posterior = nlohmann::json::array();
    for (const auto& row : analysis.rows) {
        posterior.push_back({{"outcome", row.outcome},
                             {"likelihoods", {row.likelihood1.str(), row.likelihood2.str()}},
                             {"posterior", {row.posterior1.str(), row.posterior2.str()}},
                             {"support_share",
                              {row.support_share1.str(), row.support_share2.str()}}});
    }
    section["z+_m+_posterior_under_rule_i"] = posterior;
    return section;
}

nlohmann::json pd_validation_json(const pd::ValidationReport& report) {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& violation : report.violations) {
        violations.push_back({{"trajectory", violation.trajectory},
                              {"rule", violation.rule},
                              {"detail", violation.detail}});
    }
    return {{"violations", violations}, {"notes", report.notes}};
}

nlohmann::json pd_section() {
    nlohmann::json section;
    section["builtin"] = pd_validation_json(pd::validate_rules(pd::builtin_minimal_instance()));
    section["counterexample_rule_a"] =
        pd_validation_json(pd::validate_rules(pd::counterexample_rule_a()));
    section["counterexample_rule_b"] =
        pd_validation_json(pd::validate_rules(pd::counterexample_rule_b()));
    return section;
}

}  // namespace

std::vector<std::string> verify_preps() { return {"z+", "polar:30+", "y+"}; }

VerifyRun run_verify_pipeline(const AcceptanceConfig& cfg) {
    const RunConfig rc = base_config(cfg);
    rc.validate();

    std::vector<ChainTask> sweep_tasks;
    for (const auto& prep : verify_preps()) {
        for (int axis = 0; axis < kGridAxes; ++axis) {
            sweep_tasks.push_back({prep, {axis_token(axis)}});
        }
    }
    std::vector<ChainTask> repeat_tasks;
    for (int axis = 0; axis < kGridAxes; ++axis) {
        repeat_tasks.push_back({"z+", {axis_token(axis), axis_token(axis)}});
    }
    const std::vector<ChainTask> sequential_tasks = {{"z+", {"x", "z"}}};

    FrequencyReport sweep = harness::run_dd_trials(sweep_tasks, rc);
    FrequencyReport repeats = harness::run_dd_trials(repeat_tasks, rc);
    FrequencyReport sequential = harness::run_dd_trials(sequential_tasks, rc);

    // Path classification material: sampled families for z+ and x+.
    const auto grid = harness::grid_from_spec(rc.grid_spec, rc.resolution);
    const dd::DdPreparation prep_z(harness::parse_state_token(*grid, "z+"), grid, rc.resolution);
    const dd::DdPreparation prep_x(harness::parse_state_token(*grid, "x+"), grid, rc.resolution);
    std::vector<ppp::PathPrep> families = {
        ppp::path_family(prep_z, "z+", kFamilyPaths, cfg.seed),
        ppp::path_family(prep_x, "x+", kFamilyPaths, cfg.seed),
    };

    std::vector<dd::ProcessPath> space;
    for (const auto& family : families) {
        for (const auto& entry : family.support) space.push_back(entry.first);
    }
    std::vector<Direction> measurements;
    for (int d = 0; d < grid->size(); ++d) measurements.push_back(grid->direction(d));
    const ppp::RelativeFrequencyResponse response;
    auto classes =
        ppp::q_equivalence_classes(space, response, measurements, *grid, rc.resolution);
    auto classification = ppp::classify_state(families);

    nlohmann::json doc;
    doc["config"] = {{"grid", rc.grid_spec},   {"resolution", rc.resolution},
                     {"trials", rc.trials},    {"seed", rc.seed},
                     {"z", rc.z},              {"model", "verify"}};
    doc["dd"] = {{"sweep", report_to_json(sweep)},
                 {"repeats", report_to_json(repeats)},
                 {"sequential", report_to_json(sequential)}};
    doc["dp"] = dp_section();
    doc["pd"] = pd_section();

    nlohmann::json ppp_json;
    nlohmann::json class_rows = nlohmann::json::array();
    for (const auto& cls : classes) {
        nlohmann::json row;
        row["size"] = cls.members.size();
        if (cls.matched_state) {
            row["matched_state"] = {{"axis_id", cls.matched_state->axis.id},
                                    {"sign", cls.matched_state->sign}};
        }
        class_rows.push_back(std::move(row));
    }
    ppp_json["classes"] = class_rows;
    int determines = 0;
    int shared = 0;
    for (const auto& verdict : classification.paths) {
        (verdict.determines_state ? determines : shared) += 1;
    }
    ppp_json["path_verdicts"] = {{"determines_state", determines}, {"shared", shared}};
    const auto shared_state = dd::OnticStateId{kSharedAxisX, +1};
    ppp_json["x_plus_visited_by"] = classification.ontic_visits.count(shared_state)
                                        ? classification.ontic_visits.at(shared_state)
                                        : std::vector<std::string>{};
    doc["ppp"] = std::move(ppp_json);

    ReportBundle bundle;
    bundle.csv = std::string(harness::kCsvHeader) + "\n" + sweep.to_csv_rows() +
                 repeats.to_csv_rows() + sequential.to_csv_rows();
    bundle.json = doc.dump(2) + "\n";

    return VerifyRun{std::move(sweep), std::move(repeats), std::move(sequential),
                     std::move(bundle), std::move(classes), std::move(classification)};
}

namespace {

CriterionResult criterion_1(const VerifyRun& run) {
    int passed = 0;
    for (const auto& row : run.sweep.rows) passed += row.pass ? 1 : 0;
    const bool pass = run.sweep.all_pass();
    return {1, "born-rule reproduction over the sweep",
            pass,
            std::to_string(passed) + "/" + std::to_string(run.sweep.rows.size()) +
                " frequency rows pass (3 preps x 13 axes)"};
}

CriterionResult criterion_2(const VerifyRun& run) {
    const std::map<std::string, std::string> own_axis = {
        {"z+", "z"}, {"polar:30+", "polar:30"}, {"y+", "y"}};
    bool pass = true;
    std::ostringstream detail;
    for (const auto& [prep, axis] : own_axis) {
        for (const auto& row : run.sweep.rows) {
            if (row.prep != prep || row.chain != axis) continue;
            const long long expected = row.outcome_seq == "+" ? run.sweep.trials : 0;
            if (row.count != expected) {
                pass = false;
                detail << prep << " on " << axis << " gave " << row.outcome_seq << " x"
                       << row.count << "; ";
            }
        }
    }
    if (pass) detail << "prepared sign observed in N/N trials, opposite in 0/N, for all preps";
    return {2, "trivial probabilities exact on the preparation axis", pass, detail.str()};
}

CriterionResult criterion_3(const VerifyRun& run) {
    bool pass = true;
    long long mismatched = 0;
    for (const auto& row : run.repeats.rows) {
        if (row.outcome_seq == "+-" || row.outcome_seq == "-+") {
            if (row.count != 0) {
                pass = false;
                mismatched += row.count;
            }
        }
    }
    return {3, "repeatability of an immediate same-axis measurement", pass,
            pass ? "equal outcomes in N/N trials for every grid axis"
                 : std::to_string(mismatched) + " unequal outcome pairs observed"};
}

CriterionResult criterion_4(const VerifyRun& run) {
    for (const auto& row : run.sequential.rows) {
        if (row.outcome_seq != "++") continue;
        std::ostringstream detail;
        detail << "(+,+) frequency " << row.emp_freq << " vs 0.25, chain bound "
               << 2.0 * (run.sequential.z * row.se + 0.5 / run.sequential.resolution);
        return {4, "sequential chain z+ -> [x, z] matches the collapse product", row.pass,
                detail.str()};
    }
    return {4, "sequential chain z+ -> [x, z] matches the collapse product", false,
            "(+,+) row missing"};
}

CriterionResult criterion_5() {
    const auto model = dp::builtin_model(false);
    const auto table = dp::outcome_table(model);

    const Rational one(1), zero(0), half(1, 2);
    using Cell = std::array<Rational, 2>;
    const std::vector<std::vector<Cell>> expected = {
        {{one, zero}, {half, half}, {half, half}},  // z+
        {{half, half}, {one, zero}, {half, half}},  // m+
        {{zero, one}, {half, half}, {half, half}},  // z-
    };
    bool pass = table.cells.size() == expected.size();
    for (std::size_t p = 0; pass && p < expected.size(); ++p) {
        for (std::size_t r = 0; pass && r < expected[p].size(); ++r) {
            pass = table.cells[p][r] == expected[p][r];
        }
    }

    int distinguishing = 0;
    for (const auto& rule : dp::enumerate_two_outcome_rules()) {
        if (dp::distinguishability(model.preparations[0], model.preparations[1], rule)
                .one_shot_distinguishable) {
            ++distinguishing;
        }
    }
    pass = pass && distinguishing == 0;
    return {5, "cyclic-model exact table and exhaustive rule scan", pass,
            "9 exact cells checked; " + std::to_string(distinguishing) +
                " distinguishing rules found for (z+, m+) among 14 partitions"};
}

CriterionResult criterion_6() {
    const auto builtin = pd::validate_rules(pd::builtin_minimal_instance());
    const auto broken_a = pd::validate_rules(pd::counterexample_rule_a());
    const auto broken_b = pd::validate_rules(pd::counterexample_rule_b());

    const bool pass = builtin.violations.empty() && broken_a.violations.size() == 1 &&
                      broken_a.violations[0].rule == "a" && broken_b.violations.size() == 1 &&
                      broken_b.violations[0].rule == "b.ii";
    std::ostringstream detail;
    detail << "builtin: " << builtin.violations.size() << " violations; planted a: "
           << broken_a.violations.size() << " (" <<
        (broken_a.violations.empty() ? "-" : broken_a.violations[0].rule) << "); planted b: "
           << broken_b.violations.size() << " ("
           << (broken_b.violations.empty() ? "-" : broken_b.violations[0].rule) << ")";
    return {6, "trajectory-rule validation and planted counterexamples", pass, detail.str()};
}

// Random path over the given grid: every direction pair gets 1..3 visits.
dd::ProcessPath random_small_path(const DirectionGrid& grid, Rng& rng) {
    std::vector<dd::OnticStateId> visits;
    for (int d = 0; d < grid.size(); ++d) {
        const auto total = 1 + static_cast<int>(rng.below(3));
        const auto plus = static_cast<int>(rng.below(static_cast<std::uint64_t>(total + 1)));
        for (int i = 0; i < plus; ++i) visits.push_back({d, +1});
        for (int i = 0; i < total - plus; ++i) visits.push_back({d, -1});
    }
    rng.shuffle(visits);
    return dd::ProcessPath(grid.size(), std::move(visits));
}

CriterionResult criterion_7(const AcceptanceConfig& cfg) {
    std::ostringstream detail;
    bool pass = true;

    const auto grid3 = harness::grid_from_spec("z,x,y", cfg.resolution);
    std::vector<Direction> meas3;
    for (int d = 0; d < grid3->size(); ++d) meas3.push_back(grid3->direction(d));
    const ppp::RelativeFrequencyResponse response;

    // (a) equivalence laws on 1000 random small paths. The exact response
    // profile is the ground truth: m_equivalent must agree with profile
    // equality, which makes it an equivalence relation.
    {
        Rng rng(SeedStream{cfg.seed}.task_seed("criterion7/a"));
        std::vector<dd::ProcessPath> paths;
        std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> profiles;
        for (int i = 0; i < 1000; ++i) {
            auto path = random_small_path(*grid3, rng);
            std::vector<std::pair<std::int64_t, std::int64_t>> profile;
            for (int d = 0; d < grid3->size(); ++d) {
                const auto plus = path.counts().count({d, +1});
                const auto total = path.counts().pair_total(d);
                const auto g = std::gcd(plus, total);
                profile.emplace_back(plus / std::max<std::int64_t>(g, 1),
                                     total / std::max<std::int64_t>(g, 1));
            }
            paths.push_back(std::move(path));
            profiles.push_back(std::move(profile));
        }
        bool laws = true;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            laws = laws && ppp::m_equivalent(paths[i], paths[i], response, meas3);
        }
        for (int k = 0; k < 4000 && laws; ++k) {
            const auto i = static_cast<std::size_t>(rng.below(paths.size()));
            const auto j = static_cast<std::size_t>(rng.below(paths.size()));
            const bool forward = ppp::m_equivalent(paths[i], paths[j], response, meas3);
            const bool backward = ppp::m_equivalent(paths[j], paths[i], response, meas3);
            laws = forward == backward && forward == (profiles[i] == profiles[j]);
        }
        pass = pass && laws;
        detail << "laws " << (laws ? "hold" : "fail") << " on 1000 paths; ";
    }

    // (b) permutations of a path are m-equivalent.
    {
        Rng rng(SeedStream{cfg.seed}.task_seed("criterion7/b"));
        bool permutations = true;
        for (int i = 0; i < 200 && permutations; ++i) {
            const auto path = random_small_path(*grid3, rng);
            auto visits = path.visits();
            rng.shuffle(visits);
            const dd::ProcessPath permuted(grid3->size(), std::move(visits));
            permutations = ppp::m_equivalent(path, permuted, response, meas3);
        }
        pass = pass && permutations;
        detail << "permutations " << (permutations ? "equivalent" : "differ") << "; ";
    }

    // (c) reduce/lift round-trip on 100 random singleton models.
    {
        Rng rng(SeedStream{cfg.seed}.task_seed("criterion7/c"));
        bool round_trip = true;
        for (int i = 0; i < 100 && round_trip; ++i) {
            ppp::StandardModel model;
            for (int d = 0; d < grid3->size(); ++d) {
                for (const int sign : {+1, -1}) {
                    if (rng.below(3) > 0) model.states.push_back({d, sign});
                }
            }
            if (model.states.empty()) model.states.push_back({0, +1});
            const int preps = 1 + static_cast<int>(rng.below(3));
            for (int p = 0; p < preps; ++p) {
                ppp::StandardModel::Prep prep{"prep" + std::to_string(p), std::nullopt, {}};
                double total = 0.0;
                for (std::size_t s = 0; s < model.states.size(); ++s) {
                    prep.weights.push_back(1.0 + static_cast<double>(rng.below(9)));
                    total += prep.weights.back();
                }
                for (auto& w : prep.weights) w /= total;
                model.preparations.push_back(std::move(prep));
            }
            for (const auto& axis : meas3) {
                ppp::StandardModel::Meas meas{axis, {}};
                for (std::size_t s = 0; s < model.states.size(); ++s) {
                    const double p = static_cast<double>(rng.below(11)) / 10.0;
                    meas.response.push_back({p, 1.0 - p});
                }
                model.measurements.push_back(std::move(meas));
            }
            model.validate();

            auto [lifted, table] = ppp::lift_to_paths(model);
            const auto reduced = ppp::reduce_to_standard(lifted, table, meas3);

            round_trip = reduced.states == model.states &&
                         reduced.preparations.size() == model.preparations.size();
            for (std::size_t p = 0; round_trip && p < model.preparations.size(); ++p) {
                round_trip = reduced.preparations[p].label == model.preparations[p].label &&
                             reduced.preparations[p].weights == model.preparations[p].weights;
            }
            for (std::size_t m = 0; round_trip && m < model.measurements.size(); ++m) {
                round_trip = reduced.measurements[m].axis.id == model.measurements[m].axis.id &&
                             reduced.measurements[m].response == model.measurements[m].response;
            }
        }
        pass = pass && round_trip;
        detail << "round-trip " << (round_trip ? "identity" : "broken") << " on 100 models; ";
    }

    // (d) the delta/quantum point model reproduces the quantum statistics.
    {
        const auto grid = harness::grid_from_spec("default", cfg.resolution);
        const auto report = ppp::check_reproduction(ppp::delta_quantum_model(*grid), *grid, 1e-9);
        pass = pass && report.all_pass;
        detail << "delta/quantum reproduction " << (report.all_pass ? "passes" : "fails") << " ("
               << report.rows.size() << " triples); ";
    }

    // (e) overlap witness on a constructed overlapping orthogonal pair; none
    // on sampled disjoint families.
    {
        const auto grid = harness::grid_from_spec("default", cfg.resolution);
        std::vector<Direction> measurements;
        for (int d = 0; d < grid->size(); ++d) measurements.push_back(grid->direction(d));

        std::vector<dd::OnticStateId> neutral_visits;
        for (int d = 0; d < grid->size(); ++d) {
            neutral_visits.push_back({d, +1});
            neutral_visits.push_back({d, -1});
        }
        const dd::ProcessPath neutral(grid->size(), neutral_visits);

        const dd::DdPreparation prep_z(harness::parse_state_token(*grid, "z+"), grid,
                                       cfg.resolution);
        const dd::DdPreparation prep_zm(harness::parse_state_token(*grid, "z-"), grid,
                                        cfg.resolution);

        ppp::PathPrep overlap_plus{"z+", prep_z.psi, {}};
        overlap_plus.support.emplace(dd::generate_path(prep_z, cfg.seed), 0.9);
        overlap_plus.support.emplace(neutral, 0.1);
        ppp::PathPrep overlap_minus{"z-", prep_zm.psi, {}};
        overlap_minus.support.emplace(dd::generate_path(prep_zm, cfg.seed), 0.9);
        overlap_minus.support.emplace(neutral, 0.1);

        const auto witness =
            ppp::overlap_contradiction(overlap_plus, overlap_minus, response, measurements);

        const auto family_plus = ppp::path_family(prep_z, "z+", 40, cfg.seed);
        const auto family_minus = ppp::path_family(prep_zm, "z-", 40, cfg.seed);
        const auto no_witness =
            ppp::overlap_contradiction(family_plus, family_minus, response, measurements);

        const bool witnessed = witness.has_value() && !no_witness.has_value();
        pass = pass && witnessed;
        detail << "overlap witness " << (witness ? "found" : "missing") << ", disjoint pair "
               << (no_witness ? "falsely witnessed" : "clean");
    }

    return {7, "path-framework structure", pass, detail.str()};
}

CriterionResult criterion_8(const VerifyRun& run) {
    bool all_determine = !run.classification.paths.empty();
    for (const auto& verdict : run.classification.paths) {
        all_determine = all_determine && verdict.determines_state;
    }
    const auto shared_state = dd::OnticStateId{kSharedAxisX, +1};
    const auto it = run.classification.ontic_visits.find(shared_state);
    const bool shared_visited =
        it != run.classification.ontic_visits.end() && it->second.size() == 2;
    const bool pass = all_determine && shared_visited;
    std::ostringstream detail;
    detail << run.classification.paths.size() << " paths all determine their preparation: "
           << (all_determine ? "yes" : "no") << "; x+ ontic state visited by "
           << (it == run.classification.ontic_visits.end() ? 0 : it->second.size())
           << " preparations";
    return {8, "paths determine the state while ontic states are shared", pass, detail.str()};
}

CriterionResult criterion_9(const AcceptanceConfig& cfg, const VerifyRun& first) {
    AcceptanceConfig repeat = cfg;
    const VerifyRun second = run_verify_pipeline(repeat);

    AcceptanceConfig flipped = cfg;
    flipped.workers = effective_workers(cfg) == 1 ? 8 : 1;
    const VerifyRun third = run_verify_pipeline(flipped);

    const bool same_run = first.bundle.csv == second.bundle.csv &&
                          first.bundle.json == second.bundle.json;
    const bool same_workers = first.bundle.csv == third.bundle.csv &&
                              first.bundle.json == third.bundle.json;
    std::ostringstream detail;
    detail << "repeat run " << (same_run ? "byte-identical" : "differs") << "; workers "
           << effective_workers(cfg) << " vs " << flipped.workers << " "
           << (same_workers ? "byte-identical" : "differs");
    return {9, "byte-identical reports across runs and worker counts", same_run && same_workers,
            detail.str()};
}

}  // namespace

std::vector<CriterionResult> run_all(const AcceptanceConfig& cfg, ReportBundle* bundle_out) {
    const VerifyRun run = run_verify_pipeline(cfg);
    if (bundle_out) *bundle_out = run.bundle;
    std::vector<CriterionResult> results;
    results.push_back(criterion_1(run));
    results.push_back(criterion_2(run));
    results.push_back(criterion_3(run));
    results.push_back(criterion_4(run));
    results.push_back(criterion_5());
    results.push_back(criterion_6());
    results.push_back(criterion_7(cfg));
    results.push_back(criterion_8(run));
    results.push_back(criterion_9(cfg, run));
    return results;
}

std::string format_criterion_line(const CriterionResult& result) {
    return std::string(result.pass ? "[PASS]" : "[FAIL]") + " criterion " +
           std::to_string(result.id) + ": " + result.name + " -- " + result.detail;
}

}  // namespace procqm::accept
