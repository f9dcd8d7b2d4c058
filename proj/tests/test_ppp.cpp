#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "procqm/harness.hpp"
#include "procqm/ppp.hpp"

using namespace procqm;
using dd::DdPreparation;
using dd::OnticStateId;
using dd::ProcessPath;
using ppp::PathPrep;

namespace {

ProcessPath path_from_counts(int direction_count,
                             const std::vector<std::pair<int, int>>& plus_minus, Rng& rng) {
    std::vector<OnticStateId> visits;
    for (int d = 0; d < direction_count; ++d) {
        for (int i = 0; i < plus_minus[static_cast<std::size_t>(d)].first; ++i) {
            visits.push_back({d, +1});
        }
        for (int i = 0; i < plus_minus[static_cast<std::size_t>(d)].second; ++i) {
            visits.push_back({d, -1});
        }
    }
    rng.shuffle(visits);
    return ProcessPath(direction_count, visits);
}

}  // namespace

TEST_SUITE("ppp") {

TEST_CASE("m-equivalence depends only on visit ratios") {
    const auto grid = harness::grid_from_spec("z,x,y", 4);
    std::vector<Direction> meas;
    for (int d = 0; d < grid->size(); ++d) meas.push_back(grid->direction(d));
    const ppp::RelativeFrequencyResponse response;

    Rng rng(8);
    const auto base = path_from_counts(3, {{2, 2}, {1, 3}, {4, 0}}, rng);

    // Reflexive, and invariant under permutations.
    CHECK(ppp::m_equivalent(base, base, response, meas));
    auto visits = base.visits();
    rng.shuffle(visits);
    const ProcessPath permuted(3, visits);
    CHECK(ppp::m_equivalent(base, permuted, response, meas));

    // Same ratios with doubled totals are still equivalent.
    const auto doubled = path_from_counts(3, {{4, 4}, {2, 6}, {8, 0}}, rng);
    CHECK(ppp::m_equivalent(base, doubled, response, meas));

    // A different ratio on one direction breaks it.
    const auto skewed = path_from_counts(3, {{3, 1}, {1, 3}, {4, 0}}, rng);
    CHECK_FALSE(ppp::m_equivalent(base, skewed, response, meas));
}

TEST_CASE("q-equivalence classes tag matching eigenstates") {
    const int R = 4;
    const auto grid = harness::grid_from_spec("z,x,y", R);
    std::vector<Direction> meas;
    for (int d = 0; d < grid->size(); ++d) meas.push_back(grid->direction(d));
    const ppp::RelativeFrequencyResponse response;

    const DdPreparation prep_zp(grid->state(0, +1), grid, R);
    const DdPreparation prep_zm(grid->state(0, -1), grid, R);

    std::vector<ProcessPath> space;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        space.push_back(dd::generate_path(prep_zp, seed));
    }
    auto classes = ppp::q_equivalence_classes(space, response, meas, *grid, R);
    REQUIRE(classes.size() == 1);
    CHECK(classes[0].members.size() == 6);
    REQUIRE(classes[0].matched_state.has_value());
    CHECK(classes[0].matched_state->axis.id == 0);
    CHECK(classes[0].matched_state->sign == +1);

    // Opposite preparations split into two classes.
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        space.push_back(dd::generate_path(prep_zm, seed));
    }
    classes = ppp::q_equivalence_classes(space, response, meas, *grid, R);
    REQUIRE(classes.size() == 2);
    CHECK(classes[0].matched_state->sign != classes[1].matched_state->sign);

    // A balanced path matches no eigenstate: every axis answers 1/2, but an
    // eigenstate is deterministic on its own axis.
    Rng rng(3);
    space.push_back(path_from_counts(3, {{2, 2}, {2, 2}, {2, 2}}, rng));
    classes = ppp::q_equivalence_classes(space, response, meas, *grid, R);
    REQUIRE(classes.size() == 3);
    int untagged = 0;
    for (const auto& cls : classes) untagged += cls.matched_state ? 0 : 1;
    CHECK(untagged == 1);
}

TEST_CASE("class ordering is input-order independent") {
    const int R = 4;
    const auto grid = harness::grid_from_spec("z,x", R);
    std::vector<Direction> meas = {grid->direction(0), grid->direction(1)};
    const ppp::RelativeFrequencyResponse response;

    std::vector<ProcessPath> space;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        space.push_back(dd::generate_path(DdPreparation(grid->state(0, +1), grid, R), seed));
        space.push_back(dd::generate_path(DdPreparation(grid->state(1, +1), grid, R), seed));
    }
    auto reversed = space;
    std::reverse(reversed.begin(), reversed.end());

    const auto a = ppp::q_equivalence_classes(space, response, meas, *grid, R);
    const auto b = ppp::q_equivalence_classes(reversed, response, meas, *grid, R);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].members == b[i].members);
    }
}

TEST_CASE("singleton reduction and its round trip") {
    const auto grid = harness::grid_from_spec("z,x", 4);
    std::vector<Direction> meas = {grid->direction(0), grid->direction(1)};

    const ProcessPath lambda1(2, {OnticStateId{0, +1}});
    const ProcessPath lambda2(2, {OnticStateId{1, -1}});

    PathPrep prep{"psi", grid->state(0, +1), {}};
    prep.support.emplace(lambda1, 0.5);
    prep.support.emplace(lambda2, 0.5);

    ppp::TableResponse response;
    response.set(lambda1, 0, 1.0);
    response.set(lambda1, 1, 0.5);
    response.set(lambda2, 0, 0.25);
    response.set(lambda2, 1, 0.0);

    const auto model = ppp::reduce_to_standard(prep, response, meas);
    REQUIRE(model.states.size() == 2);
    CHECK(model.preparations[0].weights == std::vector<double>{0.5, 0.5});
    CHECK(model.measurements[0].response[0][0] == 1.0);
    CHECK(model.measurements[1].response[1][1] == 1.0);

    const auto [lifted, table] = ppp::lift_to_paths(model);
    const auto reduced_again = ppp::reduce_to_standard(lifted, table, meas);
    CHECK(reduced_again.states == model.states);
    CHECK(reduced_again.preparations[0].weights == model.preparations[0].weights);
    CHECK(reduced_again.measurements[1].response == model.measurements[1].response);

    // Any generated process path has length >= 2, so reduction must refuse.
    PathPrep dd_prep{"z+", grid->state(0, +1), {}};
    dd_prep.support.emplace(dd::generate_path(DdPreparation(grid->state(0, +1), grid, 4), 1), 1.0);
    CHECK_THROWS_AS(ppp::reduce_to_standard(dd_prep, response, meas), NotSingletonError);
}

TEST_CASE("reproduction check on the delta/quantum model") {
    const auto grid = DirectionGrid::default_grid(10);
    const auto model = ppp::delta_quantum_model(*grid);
    const auto report = ppp::check_reproduction(model, *grid, 1e-9);
    CHECK(report.all_pass);
    CHECK(report.rows.size() == static_cast<std::size_t>(26 * 13 * 2));

    // The same statistics survive a lift to singleton paths and back.
    std::vector<Direction> meas;
    for (int d = 0; d < grid->size(); ++d) meas.push_back(grid->direction(d));
    const auto [lifted, table] = ppp::lift_to_paths(model);
    const auto reduced = ppp::reduce_to_standard(lifted, table, meas);
    CHECK(ppp::check_reproduction(reduced, *grid, 1e-9).all_pass);
}

TEST_CASE("reproduction check flags a flat response model") {
    const auto grid = harness::grid_from_spec("z,x", 4);
    ppp::StandardModel model;
    model.states = {{0, +1}, {0, -1}};
    model.preparations.push_back({"z+", grid->state(0, +1), {1.0, 0.0}});
    model.measurements.push_back(
        {grid->direction(0), {{0.5, 0.5}, {0.5, 0.5}}});
    const auto report = ppp::check_reproduction(model, *grid, 1e-9);
    CHECK_FALSE(report.all_pass);
    // (z+, z, +) claims 1/2 instead of 1.
    CHECK(report.rows[0].model_probability == doctest::Approx(0.5));
    CHECK(report.rows[0].quantum_probability == 1.0);

    // No measurements, no rows.
    model.measurements.clear();
    CHECK(ppp::check_reproduction(model, *grid, 1e-9).rows.empty());
}

TEST_CASE("overlap contradiction witnesses and clean pairs") {
    const int R = 6;
    const auto grid = DirectionGrid::default_grid(R);
    std::vector<Direction> meas;
    for (int d = 0; d < grid->size(); ++d) meas.push_back(grid->direction(d));
    const ppp::RelativeFrequencyResponse response;

    const DdPreparation prep_zp(grid->state(0, +1), grid, R);
    const DdPreparation prep_zm(grid->state(0, -1), grid, R);

    // A neutral path shared by both preparations at probability 0.1.
    std::vector<OnticStateId> neutral_visits;
    for (int d = 0; d < grid->size(); ++d) {
        neutral_visits.push_back({d, +1});
        neutral_visits.push_back({d, -1});
    }
    const ProcessPath neutral(grid->size(), neutral_visits);

    PathPrep overlapping_plus{"z+", grid->state(0, +1), {}};
    overlapping_plus.support.emplace(dd::generate_path(prep_zp, 1), 0.9);
    overlapping_plus.support.emplace(neutral, 0.1);
    PathPrep overlapping_minus{"z-", grid->state(0, -1), {}};
    overlapping_minus.support.emplace(dd::generate_path(prep_zm, 1), 0.9);
    overlapping_minus.support.emplace(neutral, 0.1);

    const auto witness =
        ppp::overlap_contradiction(overlapping_plus, overlapping_minus, response, meas);
    REQUIRE(witness.has_value());
    CHECK(witness->axis_id == 0);
    CHECK(witness->path == neutral);
    CHECK(witness->prob_plus == doctest::Approx(0.5));

    // Disjoint supports: the exclusion structure keeps eigenpair families apart.
    const auto family_plus = ppp::path_family(prep_zp, "z+", 25, 7);
    const auto family_minus = ppp::path_family(prep_zm, "z-", 25, 7);
    CHECK_FALSE(ppp::overlap_contradiction(family_plus, family_minus, response, meas)
                    .has_value());

    // Identical labels are not an orthogonal pair.
    CHECK_THROWS_AS(ppp::overlap_contradiction(family_plus, family_plus, response, meas),
                    NotOrthogonalError);

    // Unlabeled preparations cannot be checked.
    PathPrep unlabeled{"anon", std::nullopt, {}};
    unlabeled.support.emplace(neutral, 1.0);
    CHECK_THROWS_AS(ppp::overlap_contradiction(unlabeled, family_minus, response, meas),
                    NotOrthogonalError);

    // The shared axis must be present in the measurement list.
    const std::vector<Direction> missing = {grid->direction(3)};
    CHECK_THROWS_AS(ppp::overlap_contradiction(family_plus, family_minus, response, missing),
                    ConfigError);

    // The witness serializes with the full path contents.
    const auto text = ppp::witness_to_json_text(*witness);
    CHECK(text.find("\"axis_id\"") != std::string::npos);
    CHECK(text.find("\"direction_id\"") != std::string::npos);
}

TEST_CASE("paths determine the state while ontic states are shared") {
    const int R = 8;
    const auto grid = DirectionGrid::default_grid(R);
    const DdPreparation prep_z(grid->state(0, +1), grid, R);
    const DdPreparation prep_x(grid->state(6, +1), grid, R);

    const auto family_z = ppp::path_family(prep_z, "z+", 20, 5);
    const auto family_x = ppp::path_family(prep_x, "x+", 20, 5);
    const auto result = ppp::classify_state({family_z, family_x});

    CHECK_FALSE(result.paths.empty());
    for (const auto& verdict : result.paths) {
        CHECK(verdict.determines_state);
        CHECK(verdict.prep_labels.size() == 1);
    }
    const auto& visitors = result.ontic_visits.at({6, +1});
    CHECK(visitors == std::vector<std::string>{"x+", "z+"});

    // A single preparation trivially determines every path.
    const auto solo = ppp::classify_state({family_z});
    for (const auto& verdict : solo.paths) CHECK(verdict.determines_state);
}

TEST_CASE("indistinguishability condition over tag sets") {
    const int R = 8;
    const auto grid = DirectionGrid::default_grid(R);
    const auto tags = ppp::grid_taggings(*grid);

    const auto family_z =
        ppp::path_family(DdPreparation(grid->state(0, +1), grid, R), "z+", 10, 2);
    const auto family_x =
        ppp::path_family(DdPreparation(grid->state(6, +1), grid, R), "x+", 10, 2);
    const auto family_zm =
        ppp::path_family(DdPreparation(grid->state(0, -1), grid, R), "z-", 10, 2);

    const auto compatible = ppp::indistinguishability_condition(family_z, family_x, tags);
    CHECK(compatible.holds);
    CHECK_FALSE(compatible.vacuous);

    // With only the shared axis configured, the orthogonal pair fails: no
    // single outcome tag touches both supports.
    ppp::Taggings only_z;
    only_z.per_axis[0] = tags.per_axis.at(0);
    const auto orthogonal = ppp::indistinguishability_condition(family_z, family_zm, only_z);
    CHECK_FALSE(orthogonal.holds);

    const auto vacuous = ppp::indistinguishability_condition(family_z, family_zm, ppp::Taggings{});
    CHECK(vacuous.holds);
    CHECK(vacuous.vacuous);
}

TEST_CASE("path prep JSON round trip") {
    const auto grid = harness::grid_from_spec("z,x", 4);
    const auto family =
        ppp::path_family(DdPreparation(grid->state(0, +1), grid, 4), "z+", 5, 11);
    const auto text = ppp::path_prep_to_json_text(family);
    const auto parsed = ppp::path_prep_from_json_text(text, *grid);
    CHECK(parsed.label == family.label);
    CHECK(parsed.support == family.support);
    REQUIRE(parsed.state.has_value());
    CHECK(parsed.state->axis.id == 0);
    CHECK(parsed.state->sign == +1);

    PathPrep bad{"bad", std::nullopt, {}};
    bad.support.emplace(ProcessPath(2, {OnticStateId{0, +1}}), 0.5);
    CHECK_THROWS_AS(bad.validate(), Error);
}

}  // TEST_SUITE
