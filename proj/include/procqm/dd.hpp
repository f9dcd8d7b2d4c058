#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "procqm/qubit.hpp"
#include "procqm/rng.hpp"

namespace procqm::dd {

// One point of the ontic space: (direction, sign).
struct OnticStateId {
    int direction_id = 0;
    int sign = +1;

    friend bool operator==(const OnticStateId&, const OnticStateId&) = default;
    // Within a direction the + state sorts first, matching the slot layout.
    friend std::strong_ordering operator<=>(const OnticStateId& a, const OnticStateId& b) {
        if (const auto c = a.direction_id <=> b.direction_id; c != 0) return c;
        return b.sign <=> a.sign;
    }
};

// Visit tallies per grid direction, N(theta, +/-).
class VisitCounts {
   public:
    explicit VisitCounts(int direction_count);

    std::int64_t count(OnticStateId s) const;
    std::int64_t pair_total(int direction_id) const;
    std::int64_t total() const { return total_; }
    int direction_count() const { return static_cast<int>(counts_.size()); }

    void add(OnticStateId s, std::int64_t n = 1);

    friend bool operator==(const VisitCounts&, const VisitCounts&) = default;

   private:
    std::vector<std::array<std::int64_t, 2>> counts_;  // [dir][0]=+1, [dir][1]=-1
    std::int64_t total_ = 0;
};

struct DdPreparation;

// One realized traversal of the ontic space during a measurement window.
// The derived visit counts always match the sequence.
class ProcessPath {
   public:
    ProcessPath(int direction_count, std::vector<OnticStateId> visits);

    const std::vector<OnticStateId>& visits() const { return visits_; }
    const VisitCounts& counts() const { return counts_; }
    int direction_count() const { return counts_.direction_count(); }

    friend bool operator==(const ProcessPath& a, const ProcessPath& b) {
        return a.visits_ == b.visits_;
    }
    friend bool operator<(const ProcessPath& a, const ProcessPath& b) {
        return a.visits_ < b.visits_;
    }

   private:
    // Trusted construction for generators that already realized the counts.
    ProcessPath(std::vector<OnticStateId> visits, VisitCounts counts);
    friend ProcessPath generate_path(const DdPreparation& prep, Rng& rng);

    std::vector<OnticStateId> visits_;
    VisitCounts counts_;
};

enum class PathOrdering { shuffled, round_robin };

// A prepared system: the eigenstate it was prepared in plus the parameters of
// the traversal (grid, visits per direction pair, ordering policy).
struct DdPreparation {
    QubitState psi;
    std::shared_ptr<const DirectionGrid> grid;
    int resolution = 0;
    PathOrdering ordering = PathOrdering::shuffled;

    // resolution 0 takes the grid's own; the effective value must be >= 2.
    DdPreparation(QubitState psi, std::shared_ptr<const DirectionGrid> grid, int resolution = 0,
                  PathOrdering ordering = PathOrdering::shuffled);
};

// Per-direction counts N(theta,+) = round(R * p(+)), N(theta,-) = R - N(theta,+),
// rounding halves away from zero. The state orthogonal to psi gets exactly 0.
VisitCounts quantized_counts(const DdPreparation& prep);

// A seeded traversal realizing quantized_counts: uniform shuffle or
// direction-interleaved order depending on the preparation's policy.
ProcessPath generate_path(const DdPreparation& prep, Rng& rng);
ProcessPath generate_path(const DdPreparation& prep, std::uint64_t seed);

struct MeasureResult {
    int outcome = 0;
    DdPreparation post;
};

// Selects one visit uniformly at random among the path's visits along `axis`;
// the outcome is that visit's sign. The returned preparation restarts the
// traversal from the outcome eigenstate with the same grid, resolution and
// ordering. Throws EmptyVisibleSetError when the path never touches the axis.
MeasureResult measure(const DdPreparation& prep, const ProcessPath& path, const Direction& axis,
                      Rng& rng);
MeasureResult measure(const DdPreparation& prep, const ProcessPath& path, const Direction& axis,
                      std::uint64_t seed);

// Chains measurements: each step regenerates the path from the previous
// step's post-preparation, then measures.
std::vector<int> run_sequential(const DdPreparation& prep, const std::vector<Direction>& axes,
                                Rng& rng);
std::vector<int> run_sequential(const DdPreparation& prep, const std::vector<Direction>& axes,
                                std::uint64_t seed);

// Trace wire format: [{"direction_id":0,"sign":1}, ...]
std::string path_to_json(const ProcessPath& path);
ProcessPath path_from_json(const std::string& text, int direction_count);

}  // namespace procqm::dd
