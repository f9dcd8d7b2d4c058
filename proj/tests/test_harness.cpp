#include <doctest.h>

#include <set>

#include "procqm/harness.hpp"
#include "procqm/rng.hpp"

using namespace procqm;
using harness::ChainTask;
using harness::RunConfig;

TEST_SUITE("harness") {

TEST_CASE("verdict margins") {
    CHECK(harness::verdict(1.0, 1.0, 1000, 100, 4.0));
    CHECK(harness::verdict(0.0, 0.0, 1000, 100, 4.0));
    CHECK_FALSE(harness::verdict(0.999, 1.0, 1000, 100, 4.0));
    CHECK_FALSE(harness::verdict(0.001, 0.0, 1000, 100, 4.0));

    // 0.003 <= 4 * sqrt(0.25/1e5) + 1/200 = 0.01132...
    CHECK(harness::verdict(0.503, 0.5, 100000, 100, 4.0));
    // 0.1 is far outside the same margin.
    CHECK_FALSE(harness::verdict(0.6, 0.5, 100000, 100, 4.0));

    // The chain length compounds the margin.
    CHECK_FALSE(harness::verdict(0.27, 0.25, 100000, 100, 4.0, 1));
    CHECK(harness::verdict(0.27, 0.25, 100000, 100, 4.0, 2));

    CHECK_THROWS_AS(harness::verdict(0.5, 0.5, 0, 100, 4.0), ConfigError);
}

TEST_CASE("seed substreams are pure and collision-free across trials") {
    const SeedStream stream{42};
    const auto task_a = stream.task_seed("z+/x");
    const auto task_b = stream.task_seed("z+/z");
    CHECK(task_a == stream.task_seed("z+/x"));
    CHECK(task_a != task_b);

    std::set<std::uint64_t> seeds;
    for (std::uint64_t t = 0; t < 5000; ++t) {
        seeds.insert(SeedStream::trial_seed(task_a, t));
    }
    CHECK(seeds.size() == 5000);

    CHECK(SeedStream{1}.task_seed("a") != SeedStream{2}.task_seed("a"));
}

TEST_CASE("rng bounded draws stay in range and hit every residue") {
    Rng rng(7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = rng.below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("grid specs") {
    CHECK(harness::grid_from_spec("default", 10)->size() == 13);
    CHECK(harness::grid_from_spec("", 10)->size() == 13);
    CHECK(harness::grid_from_spec("greatcircle:5", 10)->size() == 5);
    CHECK(harness::grid_from_spec("z,x,y", 10)->size() == 3);
    CHECK(harness::grid_from_spec("v:1;1;0", 10)->size() == 1);
    CHECK_THROWS_AS(harness::grid_from_spec("v:1,1,0", 10), ConfigError);

    CHECK_THROWS_AS(harness::grid_from_spec("z,z", 10), ConfigError);
    CHECK_THROWS_AS(harness::grid_from_spec("z,-z", 10), ConfigError);
    CHECK_THROWS_AS(harness::grid_from_spec("q", 10), ConfigError);
    CHECK_THROWS_AS(harness::grid_from_spec("greatcircle:zero", 10), ConfigError);
    CHECK_THROWS_AS(harness::grid_from_spec("polar:sideways", 10), ConfigError);
}

TEST_CASE("axis and state tokens resolve against the grid") {
    const auto grid = harness::grid_from_spec("default", 10);

    const auto [x_axis, x_flip] = harness::parse_axis_token(*grid, "x");
    CHECK(x_axis.id == 6);
    CHECK(x_flip == +1);

    const auto [neg_x, neg_flip] = harness::parse_axis_token(*grid, "-x");
    CHECK(neg_x.id == 6);
    CHECK(neg_flip == -1);

    // polar:210 is the antipode of polar:30.
    const QubitState tilted = harness::parse_state_token(*grid, "polar:210+");
    CHECK(tilted.axis.id == 2);
    CHECK(tilted.sign == -1);

    CHECK(harness::parse_state_token(*grid, "z-").sign == -1);
    CHECK_THROWS_AS(harness::parse_state_token(*grid, "z"), ConfigError);
    CHECK_THROWS_AS(harness::parse_state_token(*grid, "+"), ConfigError);
    CHECK_THROWS_AS(harness::parse_axis_token(*grid, "v:0;0.7;0.7"), ConfigError);
}

TEST_CASE("config validation") {
    RunConfig cfg;
    cfg.validate();

    RunConfig bad_model = cfg;
    bad_model.model = "quantum";
    CHECK_THROWS_AS(bad_model.validate(), ConfigError);

    RunConfig bad_trials = cfg;
    bad_trials.trials = 0;
    CHECK_THROWS_AS(bad_trials.validate(), ConfigError);

    RunConfig bad_resolution = cfg;
    bad_resolution.resolution = 1;
    CHECK_THROWS_AS(bad_resolution.validate(), ConfigError);

    RunConfig bad_z = cfg;
    bad_z.z = 0.0;
    CHECK_THROWS_AS(bad_z.validate(), ConfigError);
}

TEST_CASE("trivial chain is exact over all trials") {
    RunConfig cfg;
    cfg.trials = 500;
    cfg.resolution = 20;
    cfg.seed = 9;
    const auto report = harness::run_dd_trials({{"z+", {"z"}}}, cfg);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].outcome_seq == "+");
    CHECK(report.rows[0].count == 500);
    CHECK(report.rows[0].pass);
    CHECK(report.rows[1].count == 0);
    CHECK(report.rows[1].pass);
}

TEST_CASE("counts are conserved and verdicts hold at moderate scale") {
    RunConfig cfg;
    cfg.trials = 4000;
    cfg.resolution = 50;
    cfg.seed = 31;
    const auto report = harness::run_dd_trials({{"z+", {"x"}}, {"z+", {"polar:60"}}}, cfg);
    REQUIRE(report.rows.size() == 4);

    long long x_total = 0;
    long long tilted_total = 0;
    for (const auto& row : report.rows) {
        (row.chain == "x" ? x_total : tilted_total) += row.count;
        CHECK(row.pass);
    }
    CHECK(x_total == 4000);
    CHECK(tilted_total == 4000);
}

TEST_CASE("repeat chains never produce unequal outcomes") {
    RunConfig cfg;
    cfg.trials = 1500;
    cfg.resolution = 30;
    cfg.seed = 12;
    const auto report = harness::run_dd_trials({{"z+", {"x", "x"}}}, cfg);
    long long unequal = 0;
    long long total = 0;
    for (const auto& row : report.rows) {
        total += row.count;
        if (row.outcome_seq == "+-" || row.outcome_seq == "-+") unequal += row.count;
        CHECK(row.pass);
    }
    CHECK(total == 1500);
    CHECK(unequal == 0);
}

TEST_CASE("reports are identical across worker counts") {
    RunConfig cfg;
    cfg.trials = 3000;
    cfg.resolution = 25;
    cfg.seed = 77;

    RunConfig serial = cfg;
    serial.workers = 1;
    RunConfig parallel = cfg;
    parallel.workers = 3;

    const std::vector<ChainTask> tasks = {{"z+", {"x"}}, {"polar:30+", {"z", "x"}}};
    const auto a = harness::run_dd_trials(tasks, serial);
    const auto b = harness::run_dd_trials(tasks, parallel);
    CHECK(a.to_csv_rows() == b.to_csv_rows());

    const auto again = harness::run_dd_trials(tasks, serial);
    CHECK(a.to_csv_rows() == again.to_csv_rows());
}

TEST_CASE("antipodal chain tokens flip reported outcomes") {
    RunConfig cfg;
    cfg.trials = 400;
    cfg.resolution = 20;
    cfg.seed = 5;
    // Measuring along -z on z+ reports the - outcome with certainty.
    const auto report = harness::run_dd_trials({{"z+", {"-z"}}}, cfg);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].outcome_seq == "+");
    CHECK(report.rows[0].count == 0);
    CHECK(report.rows[0].theory == 0.0);
    CHECK(report.rows[1].outcome_seq == "-");
    CHECK(report.rows[1].count == 400);
    CHECK(report.rows[1].theory == 1.0);
    CHECK(report.all_pass());
}

TEST_CASE("csv header stays fixed") {
    CHECK(std::string(harness::kCsvHeader) ==
          "prep,chain,outcome_seq,count,emp_freq,theory,se,quant_bound,verdict");
}

}  // TEST_SUITE
