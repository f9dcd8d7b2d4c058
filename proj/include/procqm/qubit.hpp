#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "procqm/errors.hpp"

namespace procqm {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 operator-() const { return {-x, -y, -z}; }

    Vec3 normalized() const {
        const double n = norm();
        if (n == 0.0) throw ConfigError("cannot normalize a zero vector");
        return {x / n, y / n, z / n};
    }

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

// A measurement axis. Axes issued by a grid carry the index they were
// registered under; id < 0 marks a free direction outside any grid.
struct Direction {
    Vec3 unit;
    int id = -1;
};

// Spin eigenstate |axis, sign> along a grid axis. sign is +1 or -1.
struct QubitState {
    Direction axis;
    int sign = +1;
};

inline int require_sign(int sign) {
    if (sign != +1 && sign != -1) throw ConfigError("sign must be +1 or -1");
    return sign;
}

// Finite ordered set of measurement axes. Antipodal vectors are identified:
// looking up -m yields m's id together with a -1 sign factor, so each axis is
// stored exactly once. Immutable once built (construction happens through the
// factories or a chain of add_axis calls before first use).
class DirectionGrid {
   public:
    explicit DirectionGrid(int resolution = 100);

    // Registers a new axis; rejects duplicates and antipodal duplicates.
    int add_axis(const Vec3& v);

    int size() const { return static_cast<int>(axes_.size()); }
    int resolution() const { return resolution_; }

    Direction direction(int id) const;
    QubitState state(int id, int sign) const;

    // Matches v against the stored axes up to sign.
    // Returns {axis id, +1} for a match, {axis id, -1} for an antipode.
    std::optional<std::pair<int, int>> find(const Vec3& v) const;

    // axis_count axes at polar angles k*pi/axis_count in the x-z plane
    // (k = 0 is z; for even counts the midpoint is x).
    static std::shared_ptr<const DirectionGrid> great_circle(int axis_count, int resolution);

    // The default 13-axis grid: 12 axes spread over the x-z great circle
    // (z and x among them) plus y.
    static std::shared_ptr<const DirectionGrid> default_grid(int resolution = 100);

   private:
    std::vector<Vec3> axes_;
    int resolution_;
};

// Outcome probability for measuring `state` along `axis`:
// (1 + s*t*(n.m))/2 for state vector n with sign s and axis m with outcome t.
// When state and axis share a grid id the result is exactly 1 or 0.
double born_probability(const QubitState& state, const Direction& axis, int outcome_sign);

// Probability of observing the given outcome signs in order, collapsing onto
// each step's outcome eigenstate before the next step.
double sequential_probability(const QubitState& prep,
                              const std::vector<std::pair<Direction, int>>& chain);

}  // namespace procqm
