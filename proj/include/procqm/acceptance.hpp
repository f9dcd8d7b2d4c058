#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "procqm/harness.hpp"
#include "procqm/ppp.hpp"

namespace procqm::accept {

struct AcceptanceConfig {
    std::uint64_t seed = 42;
    long long trials = 100000;
    int resolution = 100;
    int workers = 0;  // 0 = hardware concurrency
    double z = 4.0;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

// The deterministic artifact `verify` writes: one CSV with every sampled
// frequency row and one JSON with the full sections (sampled rows, exact
// cyclic-model table and rule scan, instance validations, path
// classification). Worker count is excluded, so the bytes are comparable
// across worker settings.
struct ReportBundle {
    std::string csv;
    std::string json;
};

// One full pass of the verification pipeline at the given config.
struct VerifyRun {
    harness::FrequencyReport sweep;       // preps x all grid axes, single shot
    harness::FrequencyReport repeats;     // [m, m] chains for every grid axis
    harness::FrequencyReport sequential;  // z+ measured along [x, z]
    ReportBundle bundle;
    std::vector<ppp::PathClass> classes;          // z+/x+ family partition
    ppp::StateClassification classification;      // path and ontic-state verdicts
};

// The three preparations used by the sampled sections: z+, polar:30+ and y+.
std::vector<std::string> verify_preps();

VerifyRun run_verify_pipeline(const AcceptanceConfig& cfg);

// Evaluates all nine criteria in order. Criteria 1-4 read the pipeline run;
// 5-8 are exact or seeded property checks; 9 regenerates the bundle twice
// (same config, then the flipped worker count) and compares bytes. When
// bundle_out is given it receives the first run's report bundle.
std::vector<CriterionResult> run_all(const AcceptanceConfig& cfg,
                                     ReportBundle* bundle_out = nullptr);

std::string format_criterion_line(const CriterionResult& result);

}  // namespace procqm::accept
