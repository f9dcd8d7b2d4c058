#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <iostream>

#include "procqm/acceptance.hpp"

// The acceptance suite. Every criterion runs at its stated scale: seed 42,
// 1e5 trials per (prep, chain), resolution 100, z = 4, the 13-axis default
// grid. One pass/fail line prints per criterion.

namespace {

const std::vector<procqm::accept::CriterionResult>& results() {
    static const std::vector<procqm::accept::CriterionResult> cached = [] {
        procqm::accept::AcceptanceConfig cfg;
        cfg.seed = 42;
        cfg.trials = 100000;
        cfg.resolution = 100;
        cfg.workers = 0;
        cfg.z = 4.0;
        return procqm::accept::run_all(cfg);
    }();
    return cached;
}

void check_criterion(int id) {
    const auto& all = results();
    REQUIRE(all.size() == 9);
    const auto& result = all[static_cast<std::size_t>(id - 1)];
    REQUIRE(result.id == id);
    std::cout << procqm::accept::format_criterion_line(result) << std::endl;
    CHECK_MESSAGE(result.pass, result.detail);
}

}  // namespace

TEST_CASE("criterion 1: born-rule reproduction over 3 preps x 13 axes") { check_criterion(1); }

TEST_CASE("criterion 2: preparation-axis outcomes are exact") { check_criterion(2); }

TEST_CASE("criterion 3: repeated same-axis measurements agree exactly") { check_criterion(3); }

TEST_CASE("criterion 4: two-step chain matches the collapse product") { check_criterion(4); }

TEST_CASE("criterion 5: cyclic-model table and exhaustive rule scan") { check_criterion(5); }

TEST_CASE("criterion 6: trajectory rules and planted violations") { check_criterion(6); }

TEST_CASE("criterion 7: path-framework structure") { check_criterion(7); }

TEST_CASE("criterion 8: paths determine the state, ontic states are shared") {
    check_criterion(8);
}

TEST_CASE("criterion 9: reports are byte-identical across runs and workers") {
    check_criterion(9);
}
