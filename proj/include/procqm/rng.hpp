#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace procqm {

// splitmix64 step: the one fixed mixing function behind all seed derivation.
// Bijective on uint64, so distinct inputs always map to distinct outputs.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Deterministic splitmix64 generator. Pure uint64 arithmetic, so the stream
// is identical on every platform and toolchain; the reproducibility contract
// of the whole harness rests on that.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Unbiased draw from [0, n). Lemire multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) noexcept {
        auto wide = static_cast<unsigned __int128>(next()) * n;
        auto low = static_cast<std::uint64_t>(wide);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                wide = static_cast<unsigned __int128>(next()) * n;
                low = static_cast<std::uint64_t>(wide);
            }
        }
        return static_cast<std::uint64_t>(wide >> 64);
    }

    // Fisher-Yates with the unbiased draw above.
    template <typename T>
    void shuffle(std::vector<T>& values) noexcept {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

   private:
    std::uint64_t state_;
};

// Trial substream derivation. Every (task, trial) pair gets an independent
// seed computed purely from the root seed, so stream assignment cannot depend
// on execution order or worker count:
//
//   task_seed(id)            = mix64(root ^ fnv1a64(id))
//   trial_seed(task_seed, t) = mix64(task_seed + 0x9E3779B97F4A7C15 * (t + 1))
//
// Trial indices within a task map to distinct seeds because the multiplier is
// odd and mix64 is a bijection.
struct SeedStream {
    std::uint64_t root = 0;

    std::uint64_t task_seed(std::string_view task_id) const noexcept {
        return mix64(root ^ fnv1a64(task_id));
    }

    static std::uint64_t trial_seed(std::uint64_t task_seed, std::uint64_t trial) noexcept {
        return mix64(task_seed + 0x9E3779B97F4A7C15ULL * (trial + 1));
    }
};

}  // namespace procqm
