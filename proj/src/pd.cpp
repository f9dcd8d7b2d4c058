#include "procqm/pd.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "procqm/errors.hpp"

namespace procqm::pd {

namespace {

bool contains(const std::vector<int>& sorted_set, int value) {
    return std::binary_search(sorted_set.begin(), sorted_set.end(), value);
}

bool intersects(const std::vector<int>& sorted_set, const std::vector<int>& points) {
    for (int p : points) {
        if (contains(sorted_set, p)) return true;
    }
    return false;
}

std::string trajectory_key(const Instance& inst, const Trajectory& traj) {
    return "[" + inst.points[static_cast<std::size_t>(traj.start)] + "; " +
           inst.measurements[static_cast<std::size_t>(traj.measurement)].name + "]";
}

}  // namespace

int Instance::point_index(const std::string& name) const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] == name) return static_cast<int>(i);
    }
    throw MalformedInstanceError("unknown point: " + name);
}

int Instance::measurement_index(const std::string& name) const {
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        if (measurements[i].name == name) return static_cast<int>(i);
    }
    throw MalformedInstanceError("unknown measurement: " + name);
}

int Instance::preparation_index(const std::string& name) const {
    for (std::size_t i = 0; i < preparations.size(); ++i) {
        if (preparations[i].name == name) return static_cast<int>(i);
    }
    throw MalformedInstanceError("unknown preparation: " + name);
}

const Trajectory* Instance::find_trajectory(int start, int measurement) const {
    for (const auto& traj : trajectories) {
        if (traj.start == start && traj.measurement == measurement) return &traj;
    }
    return nullptr;
}

const Trajectory& Instance::trajectory(int start, int measurement) const {
    const Trajectory* traj = find_trajectory(start, measurement);
    if (!traj) {
        throw MalformedInstanceError(
            "no trajectory declared for start " + points.at(static_cast<std::size_t>(start)) +
            " under " + measurements.at(static_cast<std::size_t>(measurement)).name);
    }
    return *traj;
}

void Instance::check_structure() const {
    if (points.empty()) throw MalformedInstanceError("instance has no points");
    std::set<std::string> names(points.begin(), points.end());
    if (names.size() != points.size()) throw MalformedInstanceError("duplicate point names");

    const int n = static_cast<int>(points.size());
    for (const auto& meas : measurements) {
        if (meas.outcomes.size() < 2) {
            throw MalformedInstanceError("measurement " + meas.name + " needs >= 2 outcomes");
        }
        if (meas.tags.size() != meas.outcomes.size()) {
            throw MalformedInstanceError("measurement " + meas.name +
                                         " taggings do not match outcomes");
        }
        std::set<int> seen;
        for (const auto& tag_set : meas.tags) {
            for (int p : tag_set) {
                if (p < 0 || p >= n) {
                    throw MalformedInstanceError("tagging references unknown point");
                }
                if (!seen.insert(p).second) {
                    throw MalformedInstanceError("tag sets of " + meas.name +
                                                 " must be disjoint");
                }
            }
            if (!std::is_sorted(tag_set.begin(), tag_set.end())) {
                throw MalformedInstanceError("tag sets must be sorted");
            }
        }
    }

    std::set<std::pair<int, int>> traj_keys;
    for (const auto& traj : trajectories) {
        if (traj.start < 0 || traj.start >= n) {
            throw MalformedInstanceError("trajectory start out of range");
        }
        if (traj.measurement < 0 || traj.measurement >= static_cast<int>(measurements.size())) {
            throw MalformedInstanceError("trajectory measurement out of range");
        }
        if (traj.points.empty() || traj.points.front() != traj.start) {
            throw MalformedInstanceError("trajectory must be non-empty and begin at its start");
        }
        for (int p : traj.points) {
            if (p < 0 || p >= n) throw MalformedInstanceError("trajectory point out of range");
        }
        if (!traj_keys.insert({traj.start, traj.measurement}).second) {
            throw MalformedInstanceError("duplicate trajectory for one (start, measurement)");
        }
        if (!traj.outcome_weights.empty()) {
            const auto& meas = measurements[static_cast<std::size_t>(traj.measurement)];
            if (traj.outcome_weights.size() != meas.outcomes.size()) {
                throw MalformedInstanceError("outcome weights do not match outcomes");
            }
            for (const auto& w : traj.outcome_weights) {
                if (w.num < 0) throw MalformedInstanceError("outcome weights are nonnegative");
            }
        }
    }

    for (const auto& prep : preparations) {
        Rational sum(0);
        for (const auto& [p, prob] : prep.distribution) {
            if (p < 0 || p >= n) throw MalformedInstanceError("preparation point out of range");
            if (prob.num < 0) throw MalformedInstanceError("preparation probabilities >= 0");
            sum = sum + prob;
        }
        if (sum != Rational(1)) {
            throw MalformedInstanceError("preparation " + prep.name + " must sum to 1");
        }
    }
}

std::vector<Rational> effective_weights(const Instance& inst, const Trajectory& traj) {
    const auto& meas = inst.measurements.at(static_cast<std::size_t>(traj.measurement));
    if (!traj.outcome_weights.empty()) return traj.outcome_weights;
    std::vector<Rational> weights(meas.outcomes.size(), Rational(0));
    for (std::size_t o = 0; o < meas.outcomes.size(); ++o) {
        std::int64_t visits = 0;
        for (int p : traj.points) {
            if (contains(meas.tags[o], p)) ++visits;
        }
        weights[o] = Rational(visits);
    }
    return weights;
}

std::vector<Rational> trajectory_outcome_distribution(const Instance& inst,
                                                      const Trajectory& traj) {
    const auto weights = effective_weights(inst, traj);
    Rational total(0);
    for (const auto& w : weights) total = total + w;
    if (!total.is_positive()) {
        throw MalformedInstanceError("trajectory " + trajectory_key(inst, traj) +
                                     " triggers no outcome");
    }
    std::vector<Rational> dist;
    dist.reserve(weights.size());
    for (const auto& w : weights) dist.push_back(w / total);
    return dist;
}

ValidationReport validate_rules(const Instance& inst) {
    inst.check_structure();
    ValidationReport report;

    for (const auto& traj : inst.trajectories) {
        const auto& meas = inst.measurements.at(static_cast<std::size_t>(traj.measurement));
        const std::string key = trajectory_key(inst, traj);

        // Rule (a): outcome probability positive iff a tag point lies on the path.
        const auto weights = effective_weights(inst, traj);
        for (std::size_t o = 0; o < meas.outcomes.size(); ++o) {
            const bool positive = weights[o].is_positive();
            const bool tagged = intersects(meas.tags[o], traj.points);
            if (positive && !tagged) {
                report.violations.push_back(
                    {key, "a",
                     "outcome " + meas.outcomes[o] +
                         " has positive probability but no tag point on the path"});
            } else if (!positive && tagged) {
                report.violations.push_back(
                    {key, "a",
                     "outcome " + meas.outcomes[o] +
                         " has a tag point on the path but zero probability"});
            }
        }

        // Rule (b) constrains trajectories that start at a tag point.
        bool start_is_tag = false;
        for (std::size_t m = 0; m < inst.measurements.size(); ++m) {
            const auto& tag_meas = inst.measurements[m];
            for (std::size_t o = 0; o < tag_meas.outcomes.size(); ++o) {
                if (!contains(tag_meas.tags[o], traj.start)) continue;
                start_is_tag = true;
                const bool same_measurement = static_cast<int>(m) == traj.measurement;
                if (!intersects(tag_meas.tags[o], traj.points)) {
                    report.violations.push_back(
                        {key, same_measurement ? "b.ii" : "b.i",
                         "start tag " + tag_meas.outcomes[o] + " missing from the path"});
                }
                for (std::size_t oc = 0; oc < tag_meas.outcomes.size(); ++oc) {
                    if (oc == o) continue;
                    const bool complement_on_path = intersects(tag_meas.tags[oc], traj.points);
                    if (same_measurement && complement_on_path) {
                        report.violations.push_back(
                            {key, "b.ii",
                             "complement tag " + tag_meas.outcomes[oc] +
                                 " lies on a same-measurement path"});
                    } else if (!same_measurement && !complement_on_path) {
                        report.violations.push_back(
                            {key, "b.i",
                             "complement tag " + tag_meas.outcomes[oc] +
                                 " missing from a cross-measurement path"});
                    }
                }
            }
        }
        if (!start_is_tag) {
            report.notes.push_back(key + " starts at a non-tag point; rule (b) does not apply");
        }
    }
    return report;
}

Instance builtin_minimal_instance() {
    Instance inst;
    inst.points = {"Lz+", "Lz-", "Lx+", "Lx-", "u", "v"};
    const int zp = 0, zm = 1, xp = 2, xm = 3, u = 4, v = 5;

    inst.measurements = {
        {"Mz", {"z+", "z-"}, {{zp}, {zm}}},
        {"Mx", {"x+", "x-"}, {{xp}, {xm}}},
    };
    const int Mz = 0, Mx = 1;

    inst.trajectories = {
        // Eigenstate starts keep the complement tag off the path; z+ and z-
        // run through disjoint points under Mz.
        {zp, Mz, {zp, u}, {}},
        {zm, Mz, {zm, v}, {}},
        {xp, Mx, {xp, u}, {}},
        {xm, Mx, {xm, v}, {}},
        // Cross-measurement starts pick up both tags of the start's own
        // measurement and both tags of the triggering one.
        {xp, Mz, {xp, xm, zp, zm}, {}},
        {xm, Mz, {xm, xp, zm, zp}, {}},
        {zp, Mx, {zp, zm, xp, xm}, {}},
        {zm, Mx, {zm, zp, xm, xp}, {}},
    };

    inst.preparations = {
        {"z+", {{zp, Rational(1)}}},
        {"z-", {{zm, Rational(1)}}},
        {"x+", {{xp, Rational(1)}}},
    };
    inst.check_structure();
    return inst;
}

Instance counterexample_rule_a() {
    Instance inst = builtin_minimal_instance();
    // Outcome z- is forced positive although Lz- is not on [Lz+; Mz].
    inst.trajectories[0].outcome_weights = {Rational(1), Rational(1)};
    return inst;
}

Instance counterexample_rule_b() {
    Instance inst = builtin_minimal_instance();
    // The complement tag Lz- is inserted into the same-measurement path [Lz+; Mz].
    inst.trajectories[0].points = {0, 1, 4};
    return inst;
}

std::vector<std::pair<std::string, Rational>> outcome_probabilities(
    const Instance& inst, const std::string& prep, const std::string& measurement) {
    inst.check_structure();
    const auto& preparation = inst.preparations.at(
        static_cast<std::size_t>(inst.preparation_index(prep)));
    const int m = inst.measurement_index(measurement);
    const auto& meas = inst.measurements.at(static_cast<std::size_t>(m));

    std::vector<Rational> marginal(meas.outcomes.size(), Rational(0));
    for (const auto& [point, prob] : preparation.distribution) {
        if (!prob.is_positive()) continue;
        const auto dist = trajectory_outcome_distribution(inst, inst.trajectory(point, m));
        for (std::size_t o = 0; o < dist.size(); ++o) {
            marginal[o] = marginal[o] + prob * dist[o];
        }
    }
    std::vector<std::pair<std::string, Rational>> result;
    for (std::size_t o = 0; o < meas.outcomes.size(); ++o) {
        result.emplace_back(meas.outcomes[o], marginal[o]);
    }
    return result;
}

std::string sample_outcome(const Instance& inst, const std::string& prep,
                           const std::string& measurement, Rng& rng) {
    const auto& preparation = inst.preparations.at(
        static_cast<std::size_t>(inst.preparation_index(prep)));
    const int m = inst.measurement_index(measurement);
    const auto& meas = inst.measurements.at(static_cast<std::size_t>(m));

    // Draw the starting point, then the outcome from the trajectory's
    // distribution. 2^53 grains are plenty for a test cross-check.
    const double u = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    int start = preparation.distribution.back().first;
    for (const auto& [point, prob] : preparation.distribution) {
        acc += prob.value();
        if (u < acc) {
            start = point;
            break;
        }
    }
    const auto dist = trajectory_outcome_distribution(inst, inst.trajectory(start, m));
    const double w = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
    acc = 0.0;
    for (std::size_t o = 0; o < dist.size(); ++o) {
        acc += dist[o].value();
        if (w < acc) return meas.outcomes[o];
    }
    return meas.outcomes.back();
}

std::string pair_class_name(PairClass c) {
    switch (c) {
        case PairClass::orthogonal_distinguishable:
            return "orthogonal-distinguishable";
        case PairClass::indistinguishable:
            return "indistinguishable";
        case PairClass::neither:
            return "neither";
    }
    return "neither";
}

PairClass classify_pair(const Instance& inst, const std::string& prep1,
                        const std::string& prep2) {
    inst.check_structure();
    const auto& p1 = inst.preparations.at(static_cast<std::size_t>(inst.preparation_index(prep1)));
    const auto& p2 = inst.preparations.at(static_cast<std::size_t>(inst.preparation_index(prep2)));

    auto support = [](const Preparation& prep) {
        std::set<int> points;
        for (const auto& [p, prob] : prep.distribution) {
            if (prob.is_positive()) points.insert(p);
        }
        return points;
    };
    const auto supp1 = support(p1);
    const auto supp2 = support(p2);

    bool supports_disjoint = true;
    for (int p : supp1) {
        if (supp2.count(p)) {
            supports_disjoint = false;
            break;
        }
    }

    // Orthogonal-distinguishable: some measurement separates the pair with
    // non-intersecting trajectory families and disjoint outcome supports.
    if (supports_disjoint) {
        for (std::size_t m = 0; m < inst.measurements.size(); ++m) {
            bool families_disjoint = true;
            for (int a : supp1) {
                const auto& ta = inst.trajectory(a, static_cast<int>(m));
                for (int b : supp2) {
                    const auto& tb = inst.trajectory(b, static_cast<int>(m));
                    for (int pa : ta.points) {
                        if (std::find(tb.points.begin(), tb.points.end(), pa) != tb.points.end()) {
                            families_disjoint = false;
                            break;
                        }
                    }
                    if (!families_disjoint) break;
                }
                if (!families_disjoint) break;
            }
            if (!families_disjoint) continue;

            const auto& name = inst.measurements[m].name;
            const auto out1 = outcome_probabilities(inst, prep1, name);
            const auto out2 = outcome_probabilities(inst, prep2, name);
            bool outcomes_disjoint = true;
            for (std::size_t o = 0; o < out1.size(); ++o) {
                if (out1[o].second.is_positive() && out2[o].second.is_positive()) {
                    outcomes_disjoint = false;
                    break;
                }
            }
            if (outcomes_disjoint) return PairClass::orthogonal_distinguishable;
        }
    }

    // Indistinguishable: under every measurement some pair of triggered paths
    // intersects at a tag point of one of its outcomes.
    bool all_measurements_touch = true;
    for (std::size_t m = 0; m < inst.measurements.size() && all_measurements_touch; ++m) {
        const auto& meas = inst.measurements[m];
        bool touched = false;
        for (int a : supp1) {
            const auto& ta = inst.trajectory(a, static_cast<int>(m));
            for (int b : supp2) {
                const auto& tb = inst.trajectory(b, static_cast<int>(m));
                for (const auto& tag_set : meas.tags) {
                    for (int tag : tag_set) {
                        const bool on_a =
                            std::find(ta.points.begin(), ta.points.end(), tag) != ta.points.end();
                        const bool on_b =
                            std::find(tb.points.begin(), tb.points.end(), tag) != tb.points.end();
                        if (on_a && on_b) {
                            touched = true;
                            break;
                        }
                    }
                    if (touched) break;
                }
                if (touched) break;
            }
            if (touched) break;
        }
        all_measurements_touch = touched;
    }
    if (!inst.measurements.empty() && all_measurements_touch) {
        return PairClass::indistinguishable;
    }
    return PairClass::neither;
}

Instance instance_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedInstanceError(std::string("instance JSON parse error: ") + e.what());
    }
    Instance inst;
    try {
        for (const auto& p : doc.at("points")) inst.points.push_back(p.get<std::string>());

        for (const auto& m : doc.at("measurements")) {
            Measurement meas;
            meas.name = m.at("name").get<std::string>();
            for (const auto& o : m.at("outcomes")) {
                meas.outcomes.push_back(o.at("name").get<std::string>());
                std::vector<int> tags;
                for (const auto& t : o.at("tags")) {
                    tags.push_back(inst.point_index(t.get<std::string>()));
                }
                std::sort(tags.begin(), tags.end());
                meas.tags.push_back(std::move(tags));
            }
            inst.measurements.push_back(std::move(meas));
        }

        for (const auto& t : doc.at("trajectories")) {
            Trajectory traj;
            traj.start = inst.point_index(t.at("start").get<std::string>());
            traj.measurement = inst.measurement_index(t.at("measurement").get<std::string>());
            for (const auto& p : t.at("path")) {
                traj.points.push_back(inst.point_index(p.get<std::string>()));
            }
            if (t.contains("outcome_weights")) {
                const auto& meas =
                    inst.measurements[static_cast<std::size_t>(traj.measurement)];
                traj.outcome_weights.assign(meas.outcomes.size(), Rational(0));
                for (const auto& [outcome, weight] : t.at("outcome_weights").items()) {
                    const auto it =
                        std::find(meas.outcomes.begin(), meas.outcomes.end(), outcome);
                    if (it == meas.outcomes.end()) {
                        throw MalformedInstanceError("weight for unknown outcome: " + outcome);
                    }
                    traj.outcome_weights[static_cast<std::size_t>(
                        it - meas.outcomes.begin())] =
                        rational_from_string(weight.get<std::string>());
                }
            }
            inst.trajectories.push_back(std::move(traj));
        }

        for (const auto& p : doc.at("preparations")) {
            Preparation prep;
            prep.name = p.at("name").get<std::string>();
            for (const auto& [point, prob] : p.at("distribution").items()) {
                prep.distribution.emplace_back(inst.point_index(point),
                                               rational_from_string(prob.get<std::string>()));
            }
            inst.preparations.push_back(std::move(prep));
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInstanceError(std::string("instance JSON: ") + e.what());
    }
    inst.check_structure();
    return inst;
}

std::string instance_to_json_text(const Instance& inst) {
    nlohmann::json doc;
    doc["points"] = inst.points;
    doc["measurements"] = nlohmann::json::array();
    for (const auto& meas : inst.measurements) {
        nlohmann::json m;
        m["name"] = meas.name;
        m["outcomes"] = nlohmann::json::array();
        for (std::size_t o = 0; o < meas.outcomes.size(); ++o) {
            nlohmann::json tags = nlohmann::json::array();
            for (int t : meas.tags[o]) tags.push_back(inst.points[static_cast<std::size_t>(t)]);
            m["outcomes"].push_back({{"name", meas.outcomes[o]}, {"tags", tags}});
        }
        doc["measurements"].push_back(std::move(m));
    }
    doc["trajectories"] = nlohmann::json::array();
    for (const auto& traj : inst.trajectories) {
        nlohmann::json t;
        t["start"] = inst.points[static_cast<std::size_t>(traj.start)];
        t["measurement"] = inst.measurements[static_cast<std::size_t>(traj.measurement)].name;
        t["path"] = nlohmann::json::array();
        for (int p : traj.points) t["path"].push_back(inst.points[static_cast<std::size_t>(p)]);
        if (!traj.outcome_weights.empty()) {
            const auto& meas = inst.measurements[static_cast<std::size_t>(traj.measurement)];
            nlohmann::json weights;
            for (std::size_t o = 0; o < meas.outcomes.size(); ++o) {
                weights[meas.outcomes[o]] = traj.outcome_weights[o].str();
            }
            t["outcome_weights"] = std::move(weights);
        }
        doc["trajectories"].push_back(std::move(t));
    }
    doc["preparations"] = nlohmann::json::array();
    for (const auto& prep : inst.preparations) {
        nlohmann::json distribution;
        for (const auto& [p, prob] : prep.distribution) {
            distribution[inst.points[static_cast<std::size_t>(p)]] = prob.str();
        }
        doc["preparations"].push_back({{"name", prep.name}, {"distribution", distribution}});
    }
    return doc.dump(2) + "\n";
}

Instance load_instance(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw ConfigError("cannot open instance file: " + file_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return instance_from_json_text(buffer.str());
}

}  // namespace procqm::pd
