#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "procqm/dd.hpp"
#include "procqm/harness.hpp"
#include "spinor_oracle.hpp"

using namespace procqm;
using dd::DdPreparation;
using dd::OnticStateId;
using dd::ProcessPath;
using dd::VisitCounts;

namespace {

// Outcome frequency of a fixed path under one axis, by scanning the visit
// sequence directly (the enumeration oracle for the uniform choice).
double enumerated_plus_share(const ProcessPath& path, int axis_id) {
    long long plus = 0;
    long long total = 0;
    for (const auto& v : path.visits()) {
        if (v.direction_id != axis_id) continue;
        ++total;
        if (v.sign > 0) ++plus;
    }
    REQUIRE(total > 0);
    return static_cast<double>(plus) / static_cast<double>(total);
}

}  // namespace

TEST_SUITE("dd") {

TEST_CASE("quantized counts at R=4") {
    const auto grid = harness::grid_from_spec("z,x,polar:60", 4);
    const DdPreparation prep(grid->state(0, +1), grid, 4);
    const VisitCounts counts = dd::quantized_counts(prep);

    CHECK(counts.count({0, +1}) == 4);
    CHECK(counts.count({0, -1}) == 0);
    CHECK(counts.count({1, +1}) == 2);
    CHECK(counts.count({1, -1}) == 2);
    CHECK(counts.count({2, +1}) == 3);  // round(4 * 0.75)
    CHECK(counts.count({2, -1}) == 1);
    CHECK(counts.total() == 12);

    // Per trial, measuring the tilted axis answers + on exactly 3 of the 4
    // visible visits.
    const ProcessPath path = dd::generate_path(prep, 1);
    CHECK(enumerated_plus_share(path, 2) == doctest::Approx(0.75));
}

TEST_CASE("relative frequency rule holds within the quantization bound") {
    for (const int R : {2, 3, 4, 7, 100}) {
        const auto grid = DirectionGrid::default_grid(R);
        for (int s = 0; s < grid->size(); ++s) {
            for (const int sign : {+1, -1}) {
                const DdPreparation prep(grid->state(s, sign), grid, R);
                const VisitCounts counts = dd::quantized_counts(prep);
                for (int d = 0; d < grid->size(); ++d) {
                    const double p = born_probability(prep.psi, grid->direction(d), +1);
                    const double ratio = static_cast<double>(counts.count({d, +1})) /
                                         static_cast<double>(counts.pair_total(d));
                    CHECK(counts.pair_total(d) == R);
                    CHECK(std::abs(ratio - p) <= 0.5 / R + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("the excluded ontic state is never traversed") {
    const auto grid = DirectionGrid::default_grid(6);
    const DdPreparation prep(grid->state(0, +1), grid, 6);
    const OnticStateId excluded{0, -1};
    CHECK(dd::quantized_counts(prep).count(excluded) == 0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ProcessPath path = dd::generate_path(prep, seed);
        CHECK(path.counts().count(excluded) == 0);
        for (const auto& v : path.visits()) {
            CHECK(v != excluded);
        }
    }
}

TEST_CASE("generated paths realize the quantized counts") {
    const auto grid = harness::grid_from_spec("z,x", 2);
    const DdPreparation prep(grid->state(0, +1), grid, 2);
    const ProcessPath path = dd::generate_path(prep, 11);
    CHECK(path.counts() == dd::quantized_counts(prep));
    // A permutation of (z+, z+, x+, x-).
    CHECK(path.visits().size() == 4);
    CHECK(path.counts().count({0, +1}) == 2);
    CHECK(path.counts().count({1, +1}) == 1);
    CHECK(path.counts().count({1, -1}) == 1);

    // One allowed state only.
    const auto solo_grid = harness::grid_from_spec("z", 2);
    const ProcessPath solo = dd::generate_path(DdPreparation(solo_grid->state(0, +1), solo_grid), 3);
    CHECK(solo.visits() == std::vector<OnticStateId>{{0, +1}, {0, +1}});
}

TEST_CASE("path generation is deterministic per seed") {
    const auto grid = DirectionGrid::default_grid(8);
    const DdPreparation prep(grid->state(2, -1), grid, 8);
    CHECK(dd::generate_path(prep, 42) == dd::generate_path(prep, 42));
    CHECK_FALSE(dd::generate_path(prep, 42) == dd::generate_path(prep, 43));
}

TEST_CASE("round-robin ordering interleaves directions") {
    const auto grid = DirectionGrid::default_grid(4);
    const DdPreparation prep(grid->state(0, +1), grid, 4, dd::PathOrdering::round_robin);
    Rng rng(1);
    const ProcessPath path = dd::generate_path(prep, rng);
    CHECK(path.counts() == dd::quantized_counts(prep));
    // First sweep touches every direction once, in grid order.
    for (int d = 0; d < grid->size(); ++d) {
        CHECK(path.visits()[static_cast<std::size_t>(d)].direction_id == d);
    }
    Rng rng2(99);
    CHECK(path == dd::generate_path(prep, rng2));  // no randomness consumed
}

TEST_CASE("measurement picks uniformly among visible visits") {
    const auto grid = harness::grid_from_spec("z,x", 4);
    const DdPreparation prep(grid->state(0, +1), grid, 4);
    // Hand-built path: three z visits (2 plus, 1 minus), one x visit.
    const ProcessPath path(2, {{0, +1}, {1, +1}, {0, +1}, {0, -1}});

    CHECK(enumerated_plus_share(path, 0) == doctest::Approx(2.0 / 3.0));

    long long plus = 0;
    const int trials = 30000;
    for (int t = 0; t < trials; ++t) {
        Rng rng(SeedStream{9}.task_seed("measure") + static_cast<std::uint64_t>(t));
        if (dd::measure(prep, path, grid->direction(0), rng).outcome > 0) ++plus;
    }
    const double freq = static_cast<double>(plus) / trials;
    const double se = std::sqrt((2.0 / 9.0) / trials);
    CHECK(std::abs(freq - 2.0 / 3.0) <= 5 * se);
}

TEST_CASE("measurement distribution is permutation invariant") {
    const auto grid = harness::grid_from_spec("z,x,y", 5);
    const DdPreparation prep(grid->state(1, +1), grid, 5);
    const ProcessPath path = dd::generate_path(prep, 17);
    auto visits = path.visits();
    Rng rng(3);
    rng.shuffle(visits);
    const ProcessPath permuted(grid->size(), visits);
    for (int d = 0; d < grid->size(); ++d) {
        CHECK(enumerated_plus_share(path, d) == enumerated_plus_share(permuted, d));
        CHECK(path.counts().count({d, +1}) == permuted.counts().count({d, +1}));
    }
}

TEST_CASE("measuring regenerates a compatible preparation") {
    const auto grid = DirectionGrid::default_grid(10);
    const DdPreparation prep(grid->state(0, +1), grid, 10);
    Rng rng(21);
    const ProcessPath path = dd::generate_path(prep, rng);
    const auto result = dd::measure(prep, path, grid->direction(6), rng);
    CHECK(result.post.psi.axis.id == 6);
    CHECK(result.post.psi.sign == result.outcome);
    CHECK(result.post.resolution == prep.resolution);
    // The regenerated process never visits the state opposite to the outcome.
    const ProcessPath next = dd::generate_path(result.post, rng);
    CHECK(next.counts().count({6, -result.outcome}) == 0);
}

TEST_CASE("repeated measurement of one axis is exact") {
    const auto grid = DirectionGrid::default_grid(8);
    const DdPreparation prep(grid->state(0, +1), grid, 8);
    for (int axis = 0; axis < grid->size(); ++axis) {
        const std::vector<Direction> chain = {grid->direction(axis), grid->direction(axis)};
        for (std::uint64_t seed = 0; seed < 400; ++seed) {
            const auto outcomes = dd::run_sequential(prep, chain, seed);
            REQUIRE(outcomes.size() == 2);
            CHECK(outcomes[0] == outcomes[1]);
            // Measuring the preparation axis itself is certain.
            if (axis == 0) CHECK(outcomes[0] == +1);
        }
    }
}

TEST_CASE("sequential outcome frequencies match the collapse product") {
    const auto grid = DirectionGrid::default_grid(50);
    const DdPreparation prep(grid->state(0, +1), grid, 50);
    const std::vector<Direction> chain = {grid->direction(6), grid->direction(0)};

    const int trials = 20000;
    long long both_plus = 0;
    const SeedStream stream{2718};
    const auto task = stream.task_seed("seq");
    for (int t = 0; t < trials; ++t) {
        const auto outcomes =
            dd::run_sequential(prep, chain, SeedStream::trial_seed(task, t));
        if (outcomes[0] > 0 && outcomes[1] > 0) ++both_plus;
    }
    const double freq = static_cast<double>(both_plus) / trials;
    const double expected = sequential_probability(
        prep.psi, {{grid->direction(6), +1}, {grid->direction(0), +1}});
    CHECK(expected == doctest::Approx(0.25).epsilon(1e-12));
    const double se = std::sqrt(expected * (1 - expected) / trials);
    CHECK(std::abs(freq - expected) <= 2 * (5 * se + 0.5 / 50));
}

TEST_CASE("error paths") {
    const auto grid = harness::grid_from_spec("z,x", 4);
    const DdPreparation prep(grid->state(0, +1), grid, 4);

    // A hand-built path that never visits x.
    const ProcessPath z_only(2, {{0, +1}, {0, +1}});
    Rng rng(1);
    CHECK_THROWS_AS(dd::measure(prep, z_only, grid->direction(1), rng), EmptyVisibleSetError);

    // Axis outside the grid.
    CHECK_THROWS_AS(dd::measure(prep, z_only, Direction{{0, 1, 0}, -1}, rng), ConfigError);

    // Resolution below 2.
    CHECK_THROWS_AS(DdPreparation(grid->state(0, +1), grid, 1), ConfigError);

    // Preparation state outside the grid.
    CHECK_THROWS_AS(DdPreparation(QubitState{Direction{{0, 1, 0}, 7}, +1}, grid, 4), ConfigError);

    // Paths must be non-empty.
    CHECK_THROWS_AS(ProcessPath(2, {}), Error);
}

TEST_CASE("path JSON round trip") {
    const auto grid = DirectionGrid::default_grid(5);
    const DdPreparation prep(grid->state(4, -1), grid, 5);
    const ProcessPath path = dd::generate_path(prep, 123);
    const ProcessPath parsed = dd::path_from_json(dd::path_to_json(path), grid->size());
    CHECK(parsed == path);

    CHECK_THROWS_AS(dd::path_from_json("{}", 5), Error);
    CHECK_THROWS_AS(dd::path_from_json(R"([{"direction_id": 99, "sign": 1}])", 5), Error);
}

}  // TEST_SUITE
