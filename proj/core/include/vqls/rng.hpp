#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace vqls {

// Seeded pseudorandom source. All stochastic operations in the library take a
// Rng (or a raw seed) explicitly; there is no global generator. Draw helpers
// avoid std:: distributions so that streams are identical across standard
// library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; one value per call keeps the stream layout simple.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Derive an independent child generator keyed by (seed, tag); the child
    // stream does not depend on how many draws the parent has made.
    Rng split(std::uint64_t tag) const {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (tag + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace vqls
