#include "procqm/qubit.hpp"

#include <cmath>
#include <numbers>

namespace procqm {

DirectionGrid::DirectionGrid(int resolution) : resolution_(resolution) {
    if (resolution < 2) throw ConfigError("grid resolution must be >= 2");
}

int DirectionGrid::add_axis(const Vec3& v) {
    const Vec3 unit = v.normalized();
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const double d = unit.dot(axes_[i]);
        if (d > 1.0 - 1e-9 || d < -1.0 + 1e-9) {
            throw ConfigError("duplicate grid axis (axes are identified up to sign)");
        }
    }
    axes_.push_back(unit);
    return static_cast<int>(axes_.size()) - 1;
}

Direction DirectionGrid::direction(int id) const {
    if (id < 0 || id >= size()) throw ConfigError("direction id out of range");
    return Direction{axes_[static_cast<std::size_t>(id)], id};
}

QubitState DirectionGrid::state(int id, int sign) const {
    return QubitState{direction(id), require_sign(sign)};
}

std::optional<std::pair<int, int>> DirectionGrid::find(const Vec3& v) const {
    const Vec3 unit = v.normalized();
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const double d = unit.dot(axes_[i]);
        if (d > 1.0 - 1e-9) return std::pair{static_cast<int>(i), +1};
        if (d < -1.0 + 1e-9) return std::pair{static_cast<int>(i), -1};
    }
    return std::nullopt;
}

std::shared_ptr<const DirectionGrid> DirectionGrid::great_circle(int axis_count, int resolution) {
    if (axis_count < 1) throw ConfigError("great circle needs at least one axis");
    auto grid = std::make_shared<DirectionGrid>(resolution);
    for (int k = 0; k < axis_count; ++k) {
        const double angle = std::numbers::pi * k / axis_count;
        grid->add_axis({std::sin(angle), 0.0, std::cos(angle)});
    }
    return grid;
}

std::shared_ptr<const DirectionGrid> DirectionGrid::default_grid(int resolution) {
    auto grid = std::make_shared<DirectionGrid>(resolution);
    for (int k = 0; k < 12; ++k) {
        const double angle = std::numbers::pi * k / 12;
        grid->add_axis({std::sin(angle), 0.0, std::cos(angle)});
    }
    grid->add_axis({0.0, 1.0, 0.0});
    return grid;
}

double born_probability(const QubitState& state, const Direction& axis, int outcome_sign) {
    require_sign(outcome_sign);
    // Same grid axis: exact 1/0, independent of floating-point normalization.
    if (state.axis.id >= 0 && state.axis.id == axis.id) {
        return state.sign == outcome_sign ? 1.0 : 0.0;
    }
    const double p = 0.5 * (1.0 + state.sign * outcome_sign * state.axis.unit.dot(axis.unit));
    if (p < 0.0) return 0.0;
    if (p > 1.0) return 1.0;
    return p;
}

double sequential_probability(const QubitState& prep,
                              const std::vector<std::pair<Direction, int>>& chain) {
    if (chain.empty()) throw ConfigError("sequential chain must be non-empty");
    QubitState current = prep;
    double p = 1.0;
    for (const auto& [axis, sign] : chain) {
        p *= born_probability(current, axis, sign);
        if (p == 0.0) return 0.0;
        current = QubitState{axis, sign};
    }
    return p;
}

}  // namespace procqm
