#include "procqm/ppp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "procqm/errors.hpp"

namespace procqm::ppp {

void PathPrep::validate(double tol) const {
    double sum = 0.0;
    for (const auto& [path, p] : support) {
        if (p < 0.0) throw Error("path probabilities are nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol) throw Error("path probabilities must sum to 1");
}

double RelativeFrequencyResponse::prob(const ProcessPath& path, const Direction& axis,
                                       int outcome_sign) const {
    require_sign(outcome_sign);
    if (axis.id < 0 || axis.id >= path.direction_count()) {
        throw ConfigError("axis outside the path's grid");
    }
    const auto total = path.counts().pair_total(axis.id);
    if (total == 0) throw EmptyVisibleSetError("path never visits the measured axis");
    return static_cast<double>(path.counts().count({axis.id, outcome_sign})) /
           static_cast<double>(total);
}

void TableResponse::set(const ProcessPath& path, int axis_id, double p_plus) {
    p_plus_[{path, axis_id}] = p_plus;
}

double TableResponse::prob(const ProcessPath& path, const Direction& axis,
                           int outcome_sign) const {
    require_sign(outcome_sign);
    const auto it = p_plus_.find({path, axis.id});
    if (it == p_plus_.end()) throw Error("path outside the response table");
    return outcome_sign > 0 ? it->second : 1.0 - it->second;
}

bool m_equivalent(const ProcessPath& a, const ProcessPath& b, const PathResponse& response,
                  const std::vector<Direction>& measurements, double tol) {
    for (const auto& axis : measurements) {
        for (const int sign : {+1, -1}) {
            if (std::abs(response.prob(a, axis, sign) - response.prob(b, axis, sign)) > tol) {
                return false;
            }
        }
    }
    return true;
}

std::vector<PathClass> q_equivalence_classes(const std::vector<ProcessPath>& space,
                                             const PathResponse& response,
                                             const std::vector<Direction>& measurements,
                                             const DirectionGrid& grid, int resolution) {
    if (resolution < 2) throw ConfigError("resolution must be >= 2");
    std::vector<PathClass> classes;
    for (const auto& path : space) {
        bool placed = false;
        for (auto& cls : classes) {
            if (m_equivalent(path, cls.members.front(), response, measurements)) {
                cls.members.push_back(path);
                placed = true;
                break;
            }
        }
        if (!placed) classes.push_back(PathClass{{path}, std::nullopt});
    }

    // Q-equivalence: the class profile matches some grid eigenstate within the
    // quantization tolerance.
    const double tol = 0.5 / resolution + 1e-12;
    for (auto& cls : classes) {
        const ProcessPath& representative = cls.members.front();
        for (int d = 0; d < grid.size() && !cls.matched_state; ++d) {
            for (const int sign : {+1, -1}) {
                const QubitState candidate = grid.state(d, sign);
                bool matches = true;
                for (const auto& axis : measurements) {
                    const double model = response.prob(representative, axis, +1);
                    const double quantum = born_probability(candidate, axis, +1);
                    if (std::abs(model - quantum) > tol) {
                        matches = false;
                        break;
                    }
                }
                if (matches) {
                    cls.matched_state = candidate;
                    break;
                }
            }
        }
    }

    // Canonical ordering: by smallest member, members sorted.
    for (auto& cls : classes) std::sort(cls.members.begin(), cls.members.end());
    std::sort(classes.begin(), classes.end(), [](const PathClass& a, const PathClass& b) {
        return a.members.front() < b.members.front();
    });
    return classes;
}

void StandardModel::validate(double tol) const {
    if (states.empty()) throw Error("model needs at least one state");
    for (const auto& prep : preparations) {
        if (prep.weights.size() != states.size()) throw Error("preparation weight size mismatch");
        double sum = 0.0;
        for (double w : prep.weights) {
            if (w < 0.0) throw Error("preparation weights are nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > tol) throw Error("preparation weights must sum to 1");
    }
    for (const auto& meas : measurements) {
        if (meas.response.size() != states.size()) throw Error("response size mismatch");
        for (const auto& pair : meas.response) {
            if (pair[0] < -tol || pair[1] < -tol || std::abs(pair[0] + pair[1] - 1.0) > tol) {
                throw Error("state responses must be a distribution over outcomes");
            }
        }
    }
}

StandardModel reduce_to_standard(const std::vector<PathPrep>& preps, const PathResponse& response,
                                 const std::vector<Direction>& measurements) {
    std::vector<OnticStateId> states;
    std::map<std::vector<OnticStateId>, const ProcessPath*> singletons;
    for (const auto& prep : preps) {
        prep.validate();
        for (const auto& [path, p] : prep.support) {
            if (path.visits().size() != 1) {
                throw NotSingletonError("preparation " + prep.label +
                                        " supports a path of length " +
                                        std::to_string(path.visits().size()));
            }
            if (singletons.emplace(path.visits(), &path).second) {
                states.push_back(path.visits().front());
            }
        }
    }
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());

    StandardModel model;
    model.states = states;
    auto index_of = [&states](OnticStateId s) {
        return static_cast<std::size_t>(
            std::lower_bound(states.begin(), states.end(), s) - states.begin());
    };

    for (const auto& prep : preps) {
        StandardModel::Prep reduced{prep.label, prep.state,
                                    std::vector<double>(states.size(), 0.0)};
        for (const auto& [path, p] : prep.support) {
            reduced.weights[index_of(path.visits().front())] += p;
        }
        model.preparations.push_back(std::move(reduced));
    }

    for (const auto& axis : measurements) {
        StandardModel::Meas meas{axis, {}};
        meas.response.reserve(states.size());
        for (const auto& s : states) {
            const ProcessPath* path = singletons.at({s});
            meas.response.push_back(
                {response.prob(*path, axis, +1), response.prob(*path, axis, -1)});
        }
        model.measurements.push_back(std::move(meas));
    }
    model.validate();
    return model;
}

StandardModel reduce_to_standard(const PathPrep& prep, const PathResponse& response,
                                 const std::vector<Direction>& measurements) {
    return reduce_to_standard(std::vector<PathPrep>{prep}, response, measurements);
}

std::pair<std::vector<PathPrep>, TableResponse> lift_to_paths(const StandardModel& model) {
    model.validate();
    const int direction_count =
        1 + std::max_element(model.states.begin(), model.states.end(),
                             [](const OnticStateId& a, const OnticStateId& b) {
                                 return a.direction_id < b.direction_id;
                             })
            ->direction_id;

    std::vector<ProcessPath> singleton_paths;
    singleton_paths.reserve(model.states.size());
    for (const auto& s : model.states) {
        singleton_paths.emplace_back(direction_count, std::vector<OnticStateId>{s});
    }

    std::vector<PathPrep> preps;
    for (const auto& prep : model.preparations) {
        PathPrep lifted{prep.label, prep.state, {}};
        for (std::size_t i = 0; i < model.states.size(); ++i) {
            if (prep.weights[i] > 0.0) {
                lifted.support.emplace(singleton_paths[i], prep.weights[i]);
            }
        }
        preps.push_back(std::move(lifted));
    }

    TableResponse response;
    for (const auto& meas : model.measurements) {
        for (std::size_t i = 0; i < model.states.size(); ++i) {
            response.set(singleton_paths[i], meas.axis.id, meas.response[i][0]);
        }
    }
    return {std::move(preps), std::move(response)};
}

ReproductionReport check_reproduction(const StandardModel& model, const DirectionGrid& grid,
                                      double tol) {
    model.validate();
    ReproductionReport report;
    for (const auto& prep : model.preparations) {
        if (!prep.state) {
            throw Error("reproduction check needs an eigenstate label per preparation");
        }
        for (const auto& meas : model.measurements) {
            for (const int sign : {+1, -1}) {
                double total = 0.0;
                for (std::size_t i = 0; i < model.states.size(); ++i) {
                    total += prep.weights[i] * meas.response[i][sign > 0 ? 0 : 1];
                }
                const double quantum =
                    born_probability(*prep.state, grid.direction(meas.axis.id), sign);
                ReproductionRow row{prep.label, meas.axis.id, sign, total, quantum,
                                    std::abs(total - quantum) <= tol};
                report.all_pass = report.all_pass && row.pass;
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

StandardModel delta_quantum_model(const DirectionGrid& grid) {
    StandardModel model;
    for (int d = 0; d < grid.size(); ++d) {
        model.states.push_back({d, +1});
        model.states.push_back({d, -1});
    }
    for (int d = 0; d < grid.size(); ++d) {
        for (const int sign : {+1, -1}) {
            const QubitState psi = grid.state(d, sign);
            StandardModel::Prep prep{"axis" + std::to_string(d) + (sign > 0 ? "+" : "-"), psi, {}};
            prep.weights.assign(model.states.size(), 0.0);
            for (std::size_t i = 0; i < model.states.size(); ++i) {
                if (model.states[i] == OnticStateId{d, sign}) prep.weights[i] = 1.0;
            }
            model.preparations.push_back(std::move(prep));
        }
    }
    for (int d = 0; d < grid.size(); ++d) {
        StandardModel::Meas meas{grid.direction(d), {}};
        meas.response.reserve(model.states.size());
        for (const auto& s : model.states) {
            const QubitState lambda_state = grid.state(s.direction_id, s.sign);
            meas.response.push_back({born_probability(lambda_state, grid.direction(d), +1),
                                     born_probability(lambda_state, grid.direction(d), -1)});
        }
        model.measurements.push_back(std::move(meas));
    }
    model.validate();
    return model;
}

std::optional<OverlapWitness> overlap_contradiction(const PathPrep& prep1, const PathPrep& prep2,
                                                    const PathResponse& response,
                                                    const std::vector<Direction>& measurements) {
    if (!prep1.state || !prep2.state) {
        throw NotOrthogonalError("both preparations must be labeled with grid eigenstates");
    }
    if (prep1.state->axis.id != prep2.state->axis.id ||
        prep1.state->sign == prep2.state->sign) {
        throw NotOrthogonalError(
            "the overlap check applies to eigenstates of one axis with opposite signs");
    }
    const int axis_id = prep1.state->axis.id;
    const auto shared_axis =
        std::find_if(measurements.begin(), measurements.end(),
                     [axis_id](const Direction& m) { return m.id == axis_id; });
    if (shared_axis == measurements.end()) {
        throw ConfigError("measurement list must include the shared axis");
    }

    for (const auto& [path, p1] : prep1.support) {
        if (p1 <= 0.0) continue;
        const auto it = prep2.support.find(path);
        if (it == prep2.support.end() || it->second <= 0.0) continue;

        const double prob_plus = response.prob(path, *shared_axis, +1);
        const std::string note =
            "shared path carries probability " + std::to_string(p1) + " and " +
            std::to_string(it->second) +
            "; the shared-axis measurement answers + with probability " +
            std::to_string(prob_plus) +
            " on it, so it cannot be certain for both preparations";
        return OverlapWitness{path, axis_id, prob_plus, note};
    }
    return std::nullopt;
}

StateClassification classify_state(const std::vector<PathPrep>& preps) {
    if (preps.empty()) throw ConfigError("classification needs at least one preparation");
    StateClassification result;

    std::map<ProcessPath, std::vector<std::string>> owners;
    for (const auto& prep : preps) {
        for (const auto& [path, p] : prep.support) {
            if (p <= 0.0) continue;
            auto& labels = owners[path];
            if (std::find(labels.begin(), labels.end(), prep.label) == labels.end()) {
                labels.push_back(prep.label);
            }
            for (const auto& visit : path.visits()) {
                auto& visitors = result.ontic_visits[visit];
                if (std::find(visitors.begin(), visitors.end(), prep.label) == visitors.end()) {
                    visitors.push_back(prep.label);
                }
            }
        }
    }
    for (auto& [path, labels] : owners) {
        std::sort(labels.begin(), labels.end());
        result.paths.push_back({path, labels, labels.size() == 1});
    }
    for (auto& [state, labels] : result.ontic_visits) std::sort(labels.begin(), labels.end());
    return result;
}

Taggings grid_taggings(const DirectionGrid& grid) {
    Taggings taggings;
    for (int d = 0; d < grid.size(); ++d) {
        taggings.per_axis[d] = {std::vector<OnticStateId>{{d, +1}},
                                std::vector<OnticStateId>{{d, -1}}};
    }
    return taggings;
}

IndistinguishabilityResult indistinguishability_condition(const PathPrep& prep1,
                                                          const PathPrep& prep2,
                                                          const Taggings& taggings) {
    IndistinguishabilityResult result;
    result.vacuous = taggings.per_axis.empty();
    result.holds = true;

    auto touches = [](const PathPrep& prep, const std::vector<OnticStateId>& tags) {
        for (const auto& [path, p] : prep.support) {
            if (p <= 0.0) continue;
            for (const auto& tag : tags) {
                if (path.counts().count(tag) > 0) return true;
            }
        }
        return false;
    };

    for (const auto& [axis_id, tag_sets] : taggings.per_axis) {
        IndistinguishabilityResult::PerMeasurement detail{axis_id, false, 0};
        for (const int sign : {+1, -1}) {
            const auto& tags = tag_sets[sign > 0 ? 0 : 1];
            if (touches(prep1, tags) && touches(prep2, tags)) {
                detail.satisfied = true;
                detail.witness_sign = sign;
                break;
            }
        }
        result.holds = result.holds && detail.satisfied;
        result.detail.push_back(detail);
    }
    return result;
}

PathPrep path_family(const dd::DdPreparation& prep, const std::string& label, int path_count,
                     std::uint64_t root_seed) {
    if (path_count < 1) throw ConfigError("path family needs at least one path");
    PathPrep family;
    family.label = label;
    family.state = prep.psi;
    const SeedStream stream{root_seed};
    const std::uint64_t task = stream.task_seed("paths/" + label);
    const double weight = 1.0 / path_count;
    for (int i = 0; i < path_count; ++i) {
        ProcessPath path =
            dd::generate_path(prep, SeedStream::trial_seed(task, static_cast<std::uint64_t>(i)));
        family.support[std::move(path)] += weight;
    }
    return family;
}

namespace {

nlohmann::json path_to_json_value(const ProcessPath& path) {
    nlohmann::json visits = nlohmann::json::array();
    for (const auto& v : path.visits()) {
        visits.push_back({{"direction_id", v.direction_id}, {"sign", v.sign}});
    }
    return visits;
}

ProcessPath path_from_json_value(const nlohmann::json& value, int direction_count) {
    std::vector<OnticStateId> visits;
    for (const auto& item : value) {
        visits.push_back(
            {item.at("direction_id").get<int>(), require_sign(item.at("sign").get<int>())});
    }
    return ProcessPath(direction_count, std::move(visits));
}

}  // namespace

std::string path_prep_to_json_text(const PathPrep& prep) {
    nlohmann::json doc;
    doc["label"] = prep.label;
    if (prep.state) {
        doc["state"] = {{"axis_id", prep.state->axis.id}, {"sign", prep.state->sign}};
    }
    doc["paths"] = nlohmann::json::array();
    for (const auto& [path, p] : prep.support) {
        doc["paths"].push_back({{"probability", p}, {"visits", path_to_json_value(path)}});
    }
    return doc.dump(2);
}

PathPrep path_prep_from_json_text(const std::string& text, const DirectionGrid& grid) {
    const auto doc = nlohmann::json::parse(text);
    PathPrep prep;
    prep.label = doc.at("label").get<std::string>();
    if (doc.contains("state")) {
        prep.state = grid.state(doc["state"].at("axis_id").get<int>(),
                                doc["state"].at("sign").get<int>());
    }
    for (const auto& entry : doc.at("paths")) {
        prep.support.emplace(path_from_json_value(entry.at("visits"), grid.size()),
                             entry.at("probability").get<double>());
    }
    return prep;
}

std::string witness_to_json_text(const OverlapWitness& witness) {
    nlohmann::json doc;
    doc["axis_id"] = witness.axis_id;
    doc["prob_plus"] = witness.prob_plus;
    doc["note"] = witness.note;
    doc["path"] = path_to_json_value(witness.path);
    return doc.dump(2);
}

std::string response_to_json_text(const RelativeFrequencyResponse&) {
    return nlohmann::json{{"type", "relative_frequency"}}.dump(2);
}

std::string response_to_json_text(const TableResponse& response) {
    nlohmann::json doc;
    doc["type"] = "table";
    doc["entries"] = nlohmann::json::array();
    for (const auto& [key, p_plus] : response.entries()) {
        doc["entries"].push_back({{"visits", path_to_json_value(key.first)},
                                  {"axis_id", key.second},
                                  {"p_plus", p_plus}});
    }
    return doc.dump(2);
}

std::unique_ptr<PathResponse> response_from_json_text(const std::string& text,
                                                      const DirectionGrid& grid) {
    const auto doc = nlohmann::json::parse(text);
    const auto type = doc.at("type").get<std::string>();
    if (type == "relative_frequency") {
        return std::make_unique<RelativeFrequencyResponse>();
    }
    if (type == "table") {
        auto table = std::make_unique<TableResponse>();
        for (const auto& entry : doc.at("entries")) {
            table->set(path_from_json_value(entry.at("visits"), grid.size()),
                       entry.at("axis_id").get<int>(), entry.at("p_plus").get<double>());
        }
        return table;
    }
    throw Error("unknown response type: " + type);
}

}  // namespace procqm::ppp
