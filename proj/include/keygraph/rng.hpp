#pragma once

#include <cstdint>

namespace keygraph {

/// Identifies one trial's random stream: (master_seed, stream_index)
/// fully determines every draw of that trial.
struct RngSpec {
    std::uint64_t master_seed;
    std::uint64_t stream_index;
};

namespace rng {

/// splitmix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

/// Seed for a tagged substream of one trial.
inline std::uint64_t substream(const RngSpec& spec, std::uint64_t tag) {
    return combine(combine(mix64(spec.master_seed), spec.stream_index), tag);
}

inline double to_unit(std::uint64_t x) {
    // 53 high bits -> [0,1)
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Sequential splitmix64 generator.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double next_unit() { return to_unit(next()); }

    /// Unbiased uniform draw in [0, bound).
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold)
                return x % bound;
        }
    }

  private:
    std::uint64_t state_;
};

/// Stateless Bernoulli(alpha) draw for the unordered pair {i,j}.
/// Pure in (pair_key, i, j), hence symmetric and order-insensitive.
inline bool pair_bernoulli(std::uint64_t pair_key, std::uint64_t i,
                           std::uint64_t j, double alpha) {
    if (i > j) {
        const std::uint64_t t = i;
        i = j;
        j = t;
    }
    const std::uint64_t h = mix64(pair_key ^ mix64((i << 32) | j));
    return to_unit(h) < alpha;
}

}  // namespace rng
}  // namespace keygraph
