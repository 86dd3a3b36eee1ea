#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace led {

/// xoshiro256** seeded through splitmix64. All derived quantities (uniform
/// doubles, bounded integers, categorical draws) are computed here rather than
/// through <random> distributions, so one seed yields the same stream on
/// every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform() < p; }
    /// Index drawn proportionally to non-negative weights (sum must be > 0).
    std::size_t categorical(std::span<const double> weights);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
        }
    }

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Stable per-key seed, e.g. one per document from the global seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace led
