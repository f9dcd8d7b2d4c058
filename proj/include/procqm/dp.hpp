#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "procqm/rational.hpp"

namespace procqm::dp {

// The four abstract ontic states of the cyclic model.
enum class Ontic : int { a = 0, b = 1, c = 2, d = 3 };

constexpr std::array<Ontic, 4> kAllOntic = {Ontic::a, Ontic::b, Ontic::c, Ontic::d};

char ontic_char(Ontic s);
Ontic ontic_from_char(char c);

// A preparation that cycles deterministically through two distinct states.
struct CyclicPrep {
    std::string name;
    std::array<Ontic, 2> cycle;
};

// A two-outcome detection rule: a partition of {a,b,c,d} into two labelled
// classes. Every ontic state triggers exactly one outcome.
struct DetectionRule {
    std::string name;
    std::array<std::string, 2> outcome_names;
    std::array<int, 4> outcome_of;  // per state: 0 or 1

    void validate() const;  // both classes nonempty, entries in {0,1}
};

struct Model {
    std::vector<CyclicPrep> preparations;
    std::vector<DetectionRule> rules;
    bool extended = false;
};

// The three cyclic preparations z+=(a,b), m+=(b,c), z-=(c,d) and the three
// rules i) {a,b}|{c,d}, ii) {b,c}|{d,a}, iii) {b,d}|{a,c}. With `extended`
// a fourth preparation m-=(d,a) is added; it completes the toy-model analogy
// and is kept out of the exact-table checks.
Model builtin_model(bool extended = false);

// Exact distribution over the rule's two outcomes: uniform enumeration of the
// two cycle slots (the stationary distribution of the 2-cycle).
std::array<Rational, 2> outcome_distribution(const CyclicPrep& prep, const DetectionRule& rule);

struct OutcomeRow {
    std::string outcome;
    Rational likelihood1, likelihood2;  // P(outcome | prep_i)
    bool possible = false;              // likelihood1 + likelihood2 > 0
    Rational posterior1, posterior2;    // Bayes under a uniform prior over the pair
    // Uniform share over the preparations that can trigger the outcome at all
    // (the "which preparations are feasible" reading; differs from the
    // posterior whenever the likelihoods differ).
    Rational support_share1, support_share2;
};

struct PairAnalysis {
    bool one_shot_distinguishable = false;  // outcome supports are disjoint
    std::vector<OutcomeRow> rows;
};

// Verdict plus the exact posterior table for a preparation pair under a rule.
PairAnalysis distinguishability(const CyclicPrep& prep1, const CyclicPrep& prep2,
                                const DetectionRule& rule);

// All 14 labelled two-outcome partitions of {a,b,c,d} (7 bipartitions, both
// outcome orientations).
std::vector<DetectionRule> enumerate_two_outcome_rules();

// Scans every two-outcome rule; returns the first that one-shot-distinguishes
// the pair, or nullopt when none exists.
std::optional<DetectionRule> find_distinguishing_rule(const CyclicPrep& prep1,
                                                      const CyclicPrep& prep2);

struct Table {
    std::vector<std::string> prep_names;
    std::vector<std::string> rule_names;
    std::vector<std::array<std::string, 2>> rule_outcomes;
    // cells[p][r] = distribution over the rule's two outcomes
    std::vector<std::vector<std::array<Rational, 2>>> cells;
};

Table outcome_table(const Model& model);

// The extended 4x3 table with the rules tagged by their toy-model reading
// (i: z, ii: y, iii: x).
Table spekkens_table();

// Rows: preparation; columns: measurement; cells: outcome:probability pairs.
std::string table_to_csv(const Table& table);

}  // namespace procqm::dp
