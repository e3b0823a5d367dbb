#pragma once

// Counter-based random stream: every draw is a pure function of
// (seed, realization, stream, counter), so realizations are order-independent
// and reproducible across runs and platforms.

#include <cstdint>
#include <cmath>

namespace mirrorqed {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t realization, std::uint64_t stream)
        : key_(splitmix64(splitmix64(splitmix64(seed) ^ realization) ^ stream)) {}

    // Uniform in (0, 1), 53-bit resolution.
    double uniform(std::uint64_t counter) const {
        const std::uint64_t bits = splitmix64(key_ ^ (counter * 0xda942042e4dd58b5ULL));
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller on counters (2c, 2c+1).
    double gaussian(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

  private:
    std::uint64_t key_;
};

} // namespace mirrorqed
