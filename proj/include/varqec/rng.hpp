#pragma once

#include <cstdint>
#include <random>

namespace varqec {

/// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the
/// standard, but the std distributions are not, so the bounded draws here are
/// hand-rolled to keep seeded runs bit-identical across toolchains.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, n), rejection-sampled to avoid modulo bias.
    uint64_t next_below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return double(eng_() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace varqec
