#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "procqm/rational.hpp"
#include "procqm/rng.hpp"

namespace procqm::pd {

// A two-outcome measurement over the instance's point set. Each outcome has a
// set of tag points that trigger it; tag sets of distinct outcomes are
// disjoint.
struct Measurement {
    std::string name;
    std::vector<std::string> outcomes;
    std::vector<std::vector<int>> tags;  // per outcome: sorted point indices
};

// The trajectory triggered by one measurement on a system starting at one
// point. Non-empty, begins at `start`.
struct Trajectory {
    int start = 0;
    int measurement = 0;
    std::vector<int> points;
    // Optional explicit outcome weights (per outcome of the triggering
    // measurement). Empty means the default policy: weight an outcome by the
    // number of visits its tag points receive on the trajectory.
    std::vector<Rational> outcome_weights;
};

struct Preparation {
    std::string name;
    std::vector<std::pair<int, Rational>> distribution;  // point index -> probability
};

// A finite point-preparation / trajectory-measurement instance.
struct Instance {
    std::vector<std::string> points;
    std::vector<Measurement> measurements;
    std::vector<Trajectory> trajectories;
    std::vector<Preparation> preparations;

    int point_index(const std::string& name) const;        // MalformedInstanceError if unknown
    int measurement_index(const std::string& name) const;  // likewise
    int preparation_index(const std::string& name) const;  // likewise
    const Trajectory& trajectory(int start, int measurement) const;
    const Trajectory* find_trajectory(int start, int measurement) const;

    // Structural checks: unique names, index ranges, disjoint tag sets,
    // normalized distributions, trajectory invariants. Throws
    // MalformedInstanceError on the first failure.
    void check_structure() const;
};

// Effective outcome weights of a trajectory (explicit override or tag-visit
// counts) and the normalized outcome distribution. The distribution throws
// MalformedInstanceError when no outcome is triggerable at all.
std::vector<Rational> effective_weights(const Instance& inst, const Trajectory& traj);
std::vector<Rational> trajectory_outcome_distribution(const Instance& inst,
                                                      const Trajectory& traj);

struct Violation {
    std::string trajectory;  // "[start; measurement]"
    std::string rule;        // "a", "b.i" or "b.ii"
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::string> notes;  // e.g. trajectories from non-tag starts
};

// Checks rule (a) (an outcome has positive probability iff one of its tag
// points lies on the trajectory) and rule (b) for every trajectory whose
// start is a tag point: measuring the tag's own measurement keeps every
// complement tag off the path; any other measurement puts both the tag and
// its complements on the path. Trajectories from non-tag starts are listed as
// notes, not violations.
ValidationReport validate_rules(const Instance& inst);

// Six points, two measurements (Mz: z+/z-, Mx: x+/x-), preparations z+, z-
// and x+ as point distributions on the corresponding tag points. Constructed
// so that validate_rules passes, z+ and z- follow non-intersecting
// trajectories under Mz, and the z+/x+ trajectories touch a tag point of
// every measurement.
Instance builtin_minimal_instance();

// builtin with an explicit weight override giving an off-path outcome
// positive probability: exactly one rule (a) violation.
Instance counterexample_rule_a();

// builtin with a complement tag inserted into a same-measurement trajectory:
// exactly one rule (b.ii) violation.
Instance counterexample_rule_b();

// Marginal outcome distribution of a preparation under a measurement,
// computed exactly by summing over the preparation's support.
std::vector<std::pair<std::string, Rational>> outcome_probabilities(const Instance& inst,
                                                                    const std::string& prep,
                                                                    const std::string& measurement);

// One sampled outcome (test cross-check for the exact marginal).
std::string sample_outcome(const Instance& inst, const std::string& prep,
                           const std::string& measurement, Rng& rng);

enum class PairClass { orthogonal_distinguishable, indistinguishable, neither };

std::string pair_class_name(PairClass c);

// orthogonal_distinguishable: disjoint point supports and some measurement
// under which the two trajectory families share no point and the outcome
// supports are disjoint. indistinguishable: under every measurement the
// triggered paths intersect at a tag point of some outcome (which both then
// assign positive probability). Otherwise neither.
PairClass classify_pair(const Instance& inst, const std::string& prep1, const std::string& prep2);

// JSON document format; see the schema section of the README.
Instance instance_from_json_text(const std::string& text);
std::string instance_to_json_text(const Instance& inst);
Instance load_instance(const std::string& file_path);

}  // namespace procqm::pd
