#include "procqm/dd.hpp"

#include <cmath>
#include <utility>

#include <nlohmann/json.hpp>

namespace procqm::dd {

namespace {

int sign_slot(int sign) { return sign > 0 ? 0 : 1; }

}  // namespace

VisitCounts::VisitCounts(int direction_count)
    : counts_(static_cast<std::size_t>(direction_count), {0, 0}) {
    if (direction_count <= 0) throw ConfigError("visit counts need at least one direction");
}

std::int64_t VisitCounts::count(OnticStateId s) const {
    return counts_.at(static_cast<std::size_t>(s.direction_id))[sign_slot(s.sign)];
}

std::int64_t VisitCounts::pair_total(int direction_id) const {
    const auto& pair = counts_.at(static_cast<std::size_t>(direction_id));
    return pair[0] + pair[1];
}

void VisitCounts::add(OnticStateId s, std::int64_t n) {
    if (n < 0) throw Error("visit counts are nonnegative");
    counts_.at(static_cast<std::size_t>(s.direction_id))[sign_slot(s.sign)] += n;
    total_ += n;
}

ProcessPath::ProcessPath(int direction_count, std::vector<OnticStateId> visits)
    : visits_(std::move(visits)), counts_(direction_count) {
    if (visits_.empty()) throw Error("a path must be non-empty");
    for (const auto& v : visits_) {
        require_sign(v.sign);
        counts_.add(v);
    }
}

ProcessPath::ProcessPath(std::vector<OnticStateId> visits, VisitCounts counts)
    : visits_(std::move(visits)), counts_(std::move(counts)) {}

DdPreparation::DdPreparation(QubitState psi_, std::shared_ptr<const DirectionGrid> grid_,
                             int resolution_, PathOrdering ordering_)
    : psi(psi_), grid(std::move(grid_)), resolution(resolution_), ordering(ordering_) {
    if (!grid) throw ConfigError("preparation needs a grid");
    if (resolution == 0) resolution = grid->resolution();
    if (resolution < 2) throw ConfigError("resolution must be >= 2");
    if (psi.axis.id < 0 || psi.axis.id >= grid->size()) {
        throw ConfigError("preparation state must be an eigenstate of a grid axis");
    }
    require_sign(psi.sign);
}

VisitCounts quantized_counts(const DdPreparation& prep) {
    VisitCounts counts(prep.grid->size());
    for (int d = 0; d < prep.grid->size(); ++d) {
        const double p = born_probability(prep.psi, prep.grid->direction(d), +1);
        // Halves round away from zero, i.e. toward the + outcome.
        const auto plus = static_cast<std::int64_t>(std::llround(prep.resolution * p));
        counts.add({d, +1}, plus);
        counts.add({d, -1}, prep.resolution - plus);
    }
    return counts;
}

ProcessPath generate_path(const DdPreparation& prep, Rng& rng) {
    VisitCounts counts = quantized_counts(prep);
    std::vector<OnticStateId> visits;
    visits.reserve(static_cast<std::size_t>(counts.total()));

    if (prep.ordering == PathOrdering::shuffled) {
        for (int d = 0; d < prep.grid->size(); ++d) {
            const std::int64_t plus = counts.count({d, +1});
            const std::int64_t minus = counts.count({d, -1});
            for (std::int64_t i = 0; i < plus; ++i) visits.push_back({d, +1});
            for (std::int64_t i = 0; i < minus; ++i) visits.push_back({d, -1});
        }
        rng.shuffle(visits);
    } else {
        // Round-robin over directions; within a direction, emit the sign with
        // more visits remaining (ties go to +).
        std::vector<std::array<std::int64_t, 2>> remaining(
            static_cast<std::size_t>(prep.grid->size()));
        for (int d = 0; d < prep.grid->size(); ++d) {
            remaining[static_cast<std::size_t>(d)] = {counts.count({d, +1}), counts.count({d, -1})};
        }
        std::int64_t left = counts.total();
        while (left > 0) {
            for (int d = 0; d < prep.grid->size(); ++d) {
                auto& pair = remaining[static_cast<std::size_t>(d)];
                if (pair[0] + pair[1] == 0) continue;
                const int slot = pair[0] >= pair[1] ? 0 : 1;
                visits.push_back({d, slot == 0 ? +1 : -1});
                --pair[slot];
                --left;
            }
        }
    }
    // The visit list realizes `counts` by construction; skip the rescan.
    return ProcessPath(std::move(visits), std::move(counts));
}

ProcessPath generate_path(const DdPreparation& prep, std::uint64_t seed) {
    Rng rng(seed);
    return generate_path(prep, rng);
}

MeasureResult measure(const DdPreparation& prep, const ProcessPath& path, const Direction& axis,
                      Rng& rng) {
    if (axis.id < 0 || axis.id >= path.direction_count()) {
        throw ConfigError("measurement axis must belong to the path's grid");
    }
    const std::int64_t visible = path.counts().pair_total(axis.id);
    if (visible == 0) {
        throw EmptyVisibleSetError("path has no visit along the measured axis");
    }
    // Uniform choice among the visits visible to this axis.
    auto k = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(visible)));
    int outcome = 0;
    for (const auto& v : path.visits()) {
        if (v.direction_id != axis.id) continue;
        if (k == 0) {
            outcome = v.sign;
            break;
        }
        --k;
    }
    DdPreparation post(prep.grid->state(axis.id, outcome), prep.grid, prep.resolution,
                       prep.ordering);
    return MeasureResult{outcome, std::move(post)};
}

MeasureResult measure(const DdPreparation& prep, const ProcessPath& path, const Direction& axis,
                      std::uint64_t seed) {
    Rng rng(seed);
    return measure(prep, path, axis, rng);
}

std::vector<int> run_sequential(const DdPreparation& prep, const std::vector<Direction>& axes,
                                Rng& rng) {
    std::vector<int> outcomes;
    outcomes.reserve(axes.size());
    DdPreparation current = prep;
    for (const auto& axis : axes) {
        const ProcessPath path = generate_path(current, rng);
        MeasureResult result = measure(current, path, axis, rng);
        outcomes.push_back(result.outcome);
        current = std::move(result.post);
    }
    return outcomes;
}

std::vector<int> run_sequential(const DdPreparation& prep, const std::vector<Direction>& axes,
                                std::uint64_t seed) {
    Rng rng(seed);
    return run_sequential(prep, axes, rng);
}

std::string path_to_json(const ProcessPath& path) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : path.visits()) {
        out.push_back({{"direction_id", v.direction_id}, {"sign", v.sign}});
    }
    return out.dump();
}

ProcessPath path_from_json(const std::string& text, int direction_count) {
    const auto parsed = nlohmann::json::parse(text);
    if (!parsed.is_array()) throw Error("path JSON must be an array");
    std::vector<OnticStateId> visits;
    visits.reserve(parsed.size());
    for (const auto& item : parsed) {
        const int d = item.at("direction_id").get<int>();
        const int s = item.at("sign").get<int>();
        if (d < 0 || d >= direction_count) throw Error("path JSON: direction id out of range");
        visits.push_back({d, require_sign(s)});
    }
    return ProcessPath(direction_count, std::move(visits));
}

}  // namespace procqm::dd
