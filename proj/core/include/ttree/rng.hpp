#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ttree {

// All randomness in the library flows from one user seed through named
// substreams, so that e.g. dataset splitting and synthetic generation do
// not perturb each other when one of them changes.
//
// Distributions are implemented by hand on top of std::mt19937_64 because
// the standard <random> distributions are implementation-defined; this
// keeps seeded runs bit-identical across compilers.

std::uint64_t mix64(std::uint64_t x);

/// Derive a child seed from (seed, name[, index]).
std::uint64_t substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal();

    /// Deterministic Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace ttree
