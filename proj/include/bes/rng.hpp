#pragma once

// Deterministic randomness for the whole engine.
//
// Every stochastic component draws from an explicit RngStream so runs replay
// exactly. Streams are derived from a master seed with a splitmix64 hash, so
// independent workers (Monte Carlo chunks, padding rollouts) can own their own
// stream and totals stay order-independent.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace bes {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 plus hand-rolled draw helpers. The standard distributions are
/// implementation-defined; owning the mapping keeps streams identical across
/// toolchains.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    /// Derive the stream `index` of master seed `seed`.
    static RngStream derive(std::uint64_t seed, std::uint64_t index) {
        return RngStream(splitmix64(seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Unbiased integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
        // rejection sampling on the top of the range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    /// Integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Real in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Index drawn proportionally to non-negative weights (at least one positive).
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("categorical: weights must have positive mass");
        double u = uniform01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }

    bool bernoulli(double p) { return uniform01() < p; }

  private:
    std::mt19937_64 gen_;
};

} // namespace bes
