#include "procqm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "procqm/rng.hpp"

namespace procqm::harness {

void RunConfig::validate() const {
    static const std::vector<std::string> kModels = {"dd", "dp", "pd", "ppp", "standard-check"};
    if (std::find(kModels.begin(), kModels.end(), model) == kModels.end()) {
        throw ConfigError("unknown model: " + model);
    }
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (resolution < 2) throw ConfigError("resolution must be >= 2");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (z <= 0.0) throw ConfigError("z must be positive");
    if (chain.empty()) throw ConfigError("chain must name at least one axis");
}

namespace {

Vec3 axis_vector_from_token(const std::string& token) {
    if (token == "x") return {1, 0, 0};
    if (token == "y") return {0, 1, 0};
    if (token == "z") return {0, 0, 1};
    if (token == "-x") return {-1, 0, 0};
    if (token == "-y") return {0, -1, 0};
    if (token == "-z") return {0, 0, -1};
    if (token.rfind("polar:", 0) == 0) {
        try {
            const double degrees = std::stod(token.substr(6));
            const double radians = degrees * std::acos(-1.0) / 180.0;
            return {std::sin(radians), 0.0, std::cos(radians)};
        } catch (const std::exception&) {
            throw ConfigError("bad polar axis token: " + token);
        }
    }
    if (token.rfind("v:", 0) == 0) {
        Vec3 v;
        // Semicolon-separated so the token survives comma-separated lists.
        if (std::sscanf(token.c_str() + 2, "%lf;%lf;%lf", &v.x, &v.y, &v.z) != 3) {
            throw ConfigError("bad vector axis token: " + token);
        }
        return v;
    }
    throw ConfigError("unknown axis token: " + token);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

std::string format_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

}  // namespace

std::shared_ptr<const DirectionGrid> grid_from_spec(const std::string& spec, int resolution) {
    if (spec.empty() || spec == "default") return DirectionGrid::default_grid(resolution);
    if (spec.rfind("greatcircle:", 0) == 0) {
        int count = 0;
        try {
            count = std::stoi(spec.substr(12));
        } catch (const std::exception&) {
            throw ConfigError("bad grid spec: " + spec);
        }
        return DirectionGrid::great_circle(count, resolution);
    }
    auto grid = std::make_shared<DirectionGrid>(resolution);
    for (const auto& token : split(spec, ',')) {
        if (token.empty()) throw ConfigError("empty axis token in grid spec");
        grid->add_axis(axis_vector_from_token(token));
    }
    return grid;
}

std::pair<Direction, int> parse_axis_token(const DirectionGrid& grid, const std::string& token) {
    const Vec3 v = axis_vector_from_token(token);
    const auto found = grid.find(v);
    if (!found) throw ConfigError("axis is not in the grid: " + token);
    return {grid.direction(found->first), found->second};
}

QubitState parse_state_token(const DirectionGrid& grid, const std::string& token) {
    if (token.size() < 2) throw ConfigError("bad state token: " + token);
    const char suffix = token.back();
    if (suffix != '+' && suffix != '-') {
        throw ConfigError("state token must end in + or -: " + token);
    }
    const auto [axis, flip] = parse_axis_token(grid, token.substr(0, token.size() - 1));
    return QubitState{axis, (suffix == '+' ? +1 : -1) * flip};
}

bool verdict(double empirical, double theoretical, long long trials, int resolution, double z,
             int chain_len) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (theoretical == 0.0 || theoretical == 1.0) {
        // Exclusion / eigenstate cases are exact: the quantized counts hit
        // the degenerate probability with no rounding error.
        return empirical == theoretical;
    }
    const double se = std::sqrt(theoretical * (1.0 - theoretical) / static_cast<double>(trials));
    const double margin = chain_len * (z * se + 0.5 / resolution);
    return std::abs(empirical - theoretical) <= margin;
}

bool FrequencyReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const FrequencyRow& r) { return r.pass; });
}

std::string FrequencyReport::to_csv_rows() const {
    std::ostringstream out;
    for (const auto& row : rows) {
        out << row.prep << "," << row.chain << "," << row.outcome_seq << "," << row.count << ","
            << format_double(row.emp_freq) << "," << format_double(row.theory) << ","
            << format_double(row.se) << "," << format_double(row.quant_bound) << ","
            << (row.pass ? "pass" : "fail") << "\n";
    }
    return out.str();
}

FrequencyReport run_dd_trials(const std::vector<ChainTask>& tasks, const RunConfig& cfg) {
    cfg.validate();
    const auto grid = grid_from_spec(cfg.grid_spec, cfg.resolution);
    const SeedStream stream{cfg.seed};
    const long long trials = cfg.trials;
    int workers = cfg.workers;
    if (workers == 0) {
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    workers = static_cast<int>(std::min<long long>(workers, trials));

    FrequencyReport report;
    report.trials = trials;
    report.resolution = cfg.resolution;
    report.z = cfg.z;
    report.seed = cfg.seed;

    for (const auto& task : tasks) {
        const QubitState psi = parse_state_token(*grid, task.prep_token);
        const dd::DdPreparation prep(psi, grid, cfg.resolution);

        std::vector<Direction> axes;
        std::vector<int> flips;
        std::string chain_name;
        for (const auto& token : task.chain_tokens) {
            const auto [axis, flip] = parse_axis_token(*grid, token);
            axes.push_back(axis);
            flips.push_back(flip);
            if (!chain_name.empty()) chain_name += "|";
            chain_name += token;
        }
        const auto chain_len = static_cast<int>(axes.size());
        if (chain_len == 0) throw ConfigError("empty measurement chain");
        if (chain_len > 20) throw ConfigError("chains longer than 20 are not supported");

        const std::uint64_t task_seed =
            stream.task_seed(task.prep_token + "/" + chain_name);

        // Outcome sequences index a bitmask: bit i set means step i gave -1
        // (after the flip).
        const std::size_t sequence_count = std::size_t{1} << chain_len;
        std::vector<long long> counts(sequence_count, 0);

        auto run_range = [&](long long lo, long long hi, std::vector<long long>& local) {
            for (long long t = lo; t < hi; ++t) {
                Rng rng(SeedStream::trial_seed(task_seed, static_cast<std::uint64_t>(t)));
                const auto outcomes = dd::run_sequential(prep, axes, rng);
                std::size_t index = 0;
                for (int i = 0; i < chain_len; ++i) {
                    if (outcomes[static_cast<std::size_t>(i)] * flips[static_cast<std::size_t>(i)] < 0) {
                        index |= std::size_t{1} << i;
                    }
                }
                ++local[index];
            }
        };

        if (workers <= 1) {
            run_range(0, trials, counts);
        } else {
            std::vector<std::vector<long long>> partial(
                static_cast<std::size_t>(workers), std::vector<long long>(sequence_count, 0));
            std::vector<std::thread> pool;
            const long long chunk = (trials + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const long long lo = w * chunk;
                const long long hi = std::min(trials, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back(run_range, lo, hi,
                                  std::ref(partial[static_cast<std::size_t>(w)]));
            }
            for (auto& thread : pool) thread.join();
            for (const auto& local : partial) {
                for (std::size_t i = 0; i < sequence_count; ++i) counts[i] += local[i];
            }
        }

        for (std::size_t index = 0; index < sequence_count; ++index) {
            std::string sequence;
            std::vector<std::pair<Direction, int>> theory_chain;
            for (int i = 0; i < chain_len; ++i) {
                const int sign = (index >> i) & 1 ? -1 : +1;
                sequence += sign > 0 ? '+' : '-';
                theory_chain.emplace_back(axes[static_cast<std::size_t>(i)],
                                          sign * flips[static_cast<std::size_t>(i)]);
            }
            FrequencyRow row;
            row.prep = task.prep_token;
            row.chain = chain_name;
            row.outcome_seq = sequence;
            row.count = counts[index];
            row.emp_freq = static_cast<double>(counts[index]) / static_cast<double>(trials);
            row.theory = sequential_probability(psi, theory_chain);
            row.se = std::sqrt(row.theory * (1.0 - row.theory) / static_cast<double>(trials));
            row.quant_bound = chain_len * 0.5 / cfg.resolution;
            row.pass = verdict(row.emp_freq, row.theory, trials, cfg.resolution, cfg.z, chain_len);
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace procqm::harness
