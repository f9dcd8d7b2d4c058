#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "procqm/dd.hpp"
#include "procqm/qubit.hpp"

namespace procqm::harness {

// Run parameters shared by the CLI subcommands. `workers` 0 means use the
// hardware concurrency. Worker count never affects results, only wall time,
// and is therefore excluded from serialized reports.
struct RunConfig {
    std::string model = "dd";  // dd | dp | pd | ppp | standard-check
    std::string grid_spec = "default";
    int resolution = 100;
    long long trials = 100000;
    std::uint64_t seed = 42;
    int workers = 0;
    double z = 4.0;
    std::string out_base;  // "<base>.csv" / "<base>.json"; empty = stdout only
    std::string prep = "z+";
    std::vector<std::string> chain = {"z"};
    bool dp_extended = false;
    std::string instance_path;  // pd instance JSON
    std::string preps_path;     // ppp preps JSON

    void validate() const;  // throws ConfigError
};

// Grid specs: "default" (12 axes over the x-z great circle plus y),
// "greatcircle:N", or a comma-separated axis list. Axis tokens: "x", "y",
// "z", "polar:<degrees>" (angle from z in the x-z plane) or "v:<x>;<y>;<z>".
std::shared_ptr<const DirectionGrid> grid_from_spec(const std::string& spec, int resolution);

// "-x" or "polar:210" resolve to the stored antipodal axis with flip -1;
// measured outcome signs are multiplied by the flip.
std::pair<Direction, int> parse_axis_token(const DirectionGrid& grid, const std::string& token);

// A state token is an axis token with a trailing '+' or '-': "z+", "polar:30-".
QubitState parse_state_token(const DirectionGrid& grid, const std::string& token);

// Statistical acceptance: |empirical - theoretical| within
// chain_len * (z * sqrt(th*(1-th)/trials) + 1/(2*resolution)).
// Degenerate theoretical values 0 and 1 require exact agreement.
bool verdict(double empirical, double theoretical, long long trials, int resolution, double z,
             int chain_len = 1);

struct FrequencyRow {
    std::string prep;
    std::string chain;
    std::string outcome_seq;
    long long count = 0;
    double emp_freq = 0.0;
    double theory = 0.0;
    double se = 0.0;
    double quant_bound = 0.0;
    bool pass = false;
};

struct FrequencyReport {
    long long trials = 0;
    int resolution = 0;
    double z = 0.0;
    std::uint64_t seed = 0;
    std::vector<FrequencyRow> rows;

    bool all_pass() const;
    // Fixed columns: prep,chain,outcome_seq,count,emp_freq,theory,se,quant_bound,verdict
    std::string to_csv_rows() const;
};

inline constexpr const char* kCsvHeader =
    "prep,chain,outcome_seq,count,emp_freq,theory,se,quant_bound,verdict";

// One measurement chain to sample: a preparation token and axis tokens.
struct ChainTask {
    std::string prep_token;
    std::vector<std::string> chain_tokens;
};

// Runs `trials` independent trials per task, fanned out over the worker pool.
// Each trial draws its seed from the (task id, trial index) substream, so the
// report is bit-identical for identical configs regardless of worker count.
// Rows cover all outcome sequences of each chain; counts per chain sum to the
// trial count.
FrequencyReport run_dd_trials(const std::vector<ChainTask>& tasks, const RunConfig& cfg);

}  // namespace procqm::harness
