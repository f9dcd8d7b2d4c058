#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "procqm/dd.hpp"
#include "procqm/qubit.hpp"

namespace procqm::ppp {

using dd::OnticStateId;
using dd::ProcessPath;

// A distribution over paths, p(path | psi). `state` is set when the label
// names a grid eigenstate (needed by the overlap and reproduction checks).
struct PathPrep {
    std::string label;
    std::optional<QubitState> state;
    std::map<ProcessPath, double> support;

    void validate(double tol = 1e-12) const;  // nonnegative, sums to 1
};

// Outcome probabilities conditioned on a whole path, p(outcome | path, M).
class PathResponse {
   public:
    virtual ~PathResponse() = default;
    virtual double prob(const ProcessPath& path, const Direction& axis, int outcome_sign) const = 0;
};

// The traversal-ratio response: N(axis, sign) / (N(axis,+) + N(axis,-)).
// Depends only on the path's visit counts. Throws EmptyVisibleSetError for a
// path that never touches the axis.
class RelativeFrequencyResponse final : public PathResponse {
   public:
    double prob(const ProcessPath& path, const Direction& axis, int outcome_sign) const override;
};

// Explicit per-path response table (used for point-model lifts and
// hand-built cases). Stores p(+ | path, axis); the - outcome is 1 - p.
class TableResponse final : public PathResponse {
   public:
    void set(const ProcessPath& path, int axis_id, double p_plus);
    double prob(const ProcessPath& path, const Direction& axis, int outcome_sign) const override;

    const std::map<std::pair<ProcessPath, int>, double>& entries() const { return p_plus_; }

    friend bool operator==(const TableResponse&, const TableResponse&) = default;

   private:
    std::map<std::pair<ProcessPath, int>, double> p_plus_;
};

// True iff the two paths induce identical outcome probabilities for every
// configured measurement (within tol; the traversal-ratio response yields
// exact rationals, so the tolerance is effectively an equality test).
bool m_equivalent(const ProcessPath& a, const ProcessPath& b, const PathResponse& response,
                  const std::vector<Direction>& measurements, double tol = 1e-12);

struct PathClass {
    std::vector<ProcessPath> members;          // sorted
    std::optional<QubitState> matched_state;   // set when the class is Q-equivalent
};

// Partitions the path space by m_equivalent and tags every class whose
// response profile matches some grid eigenstate's outcome probabilities
// within the quantization tolerance 1/(2*resolution). Classes are ordered by
// their smallest member, so the result is independent of input order.
std::vector<PathClass> q_equivalence_classes(const std::vector<ProcessPath>& space,
                                             const PathResponse& response,
                                             const std::vector<Direction>& measurements,
                                             const DirectionGrid& grid, int resolution);

// A point-based model: finite state list, preparation distributions and
// per-state outcome probabilities.
struct StandardModel {
    struct Prep {
        std::string label;
        std::optional<QubitState> state;
        std::vector<double> weights;  // p(lambda | psi), one per state
    };
    struct Meas {
        Direction axis;
        std::vector<std::array<double, 2>> response;  // [lambda][+1,-1]
    };

    std::vector<OnticStateId> states;
    std::vector<Prep> preparations;
    std::vector<Meas> measurements;

    // Normalization invariants: weights sum to 1, responses sum to 1 per state.
    void validate(double tol = 1e-9) const;
};

// Collapses path preps whose every supported path has length 1 into the
// induced point-based model. Throws NotSingletonError otherwise; the error
// signals that the reduction premise fails, not a bug.
StandardModel reduce_to_standard(const std::vector<PathPrep>& preps, const PathResponse& response,
                                 const std::vector<Direction>& measurements);
StandardModel reduce_to_standard(const PathPrep& prep, const PathResponse& response,
                                 const std::vector<Direction>& measurements);

// The inverse embedding: each state becomes a singleton path.
std::pair<std::vector<PathPrep>, TableResponse> lift_to_paths(const StandardModel& model);

struct ReproductionRow {
    std::string prep;
    int axis_id = 0;
    int sign = 0;
    double model_probability = 0.0;
    double quantum_probability = 0.0;
    bool pass = false;
};

struct ReproductionReport {
    std::vector<ReproductionRow> rows;
    bool all_pass = true;
};

// Exact finite sum over states of p(lambda|psi) p(outcome|lambda,M) compared
// against the quantum probability, per (preparation, measurement, outcome).
ReproductionReport check_reproduction(const StandardModel& model, const DirectionGrid& grid,
                                      double tol = 1e-9);

// The delta/quantum point model over the grid's eigenstates: p(lambda|psi)
// concentrated on the preparation's own state, responses equal to the quantum
// probabilities. Reproduces the quantum statistics by construction.
StandardModel delta_quantum_model(const DirectionGrid& grid);

struct OverlapWitness {
    ProcessPath path;     // shared by both preparations with positive probability
    int axis_id = 0;      // the measurement that should distinguish the pair
    double prob_plus = 0.0;  // the shared path's response on that axis
    std::string note;
};

// For an orthogonal eigenstate pair: a shared positive-probability path makes
// it impossible for the shared-axis measurement to answer + with certainty on
// one preparation and - with certainty on the other; the witness names that
// path and the response it forces. Returns nullopt when the supports are
// disjoint. Throws NotOrthogonalError unless the two preparations are labeled
// with eigenstates of one axis and opposite signs, and ConfigError when the
// measurement list misses the shared axis.
std::optional<OverlapWitness> overlap_contradiction(const PathPrep& prep1, const PathPrep& prep2,
                                                    const PathResponse& response,
                                                    const std::vector<Direction>& measurements);

struct StateClassification {
    struct PathVerdict {
        ProcessPath path;
        std::vector<std::string> prep_labels;  // preparations giving it positive probability
        bool determines_state = false;         // exactly one label
    };
    std::vector<PathVerdict> paths;
    // For every visited ontic state: the preparations whose paths visit it.
    std::map<OnticStateId, std::vector<std::string>> ontic_visits;
};

StateClassification classify_state(const std::vector<PathPrep>& preps);

// Tag sets per measurement and outcome sign.
struct Taggings {
    std::map<int, std::array<std::vector<OnticStateId>, 2>> per_axis;  // [0]=+1, [1]=-1
};

// The natural tagging for grid measurements: (m, s) is tagged by its own
// ontic state.
Taggings grid_taggings(const DirectionGrid& grid);

struct IndistinguishabilityResult {
    bool holds = false;
    bool vacuous = false;  // no measurements configured
    struct PerMeasurement {
        int axis_id = 0;
        bool satisfied = false;
        int witness_sign = 0;  // outcome whose tag set touches both supports
    };
    std::vector<PerMeasurement> detail;
};

// True iff for every tagged measurement there is an outcome whose tag set
// intersects some positive-probability path of both preparations.
IndistinguishabilityResult indistinguishability_condition(const PathPrep& prep1,
                                                          const PathPrep& prep2,
                                                          const Taggings& taggings);

// Monte Carlo path family for a prepared system: path_count seeded paths with
// uniform weight (duplicates merge).
PathPrep path_family(const dd::DdPreparation& prep, const std::string& label, int path_count,
                     std::uint64_t root_seed);

// JSON wire formats (see README).
std::string path_prep_to_json_text(const PathPrep& prep);
PathPrep path_prep_from_json_text(const std::string& text, const DirectionGrid& grid);
std::string witness_to_json_text(const OverlapWitness& witness);

// Responses serialize as {"type":"relative_frequency"} or
// {"type":"table","entries":[{"visits":[...],"axis_id":..,"p_plus":..}]}.
std::string response_to_json_text(const RelativeFrequencyResponse& response);
std::string response_to_json_text(const TableResponse& response);
std::unique_ptr<PathResponse> response_from_json_text(const std::string& text,
                                                      const DirectionGrid& grid);

}  // namespace procqm::ppp
