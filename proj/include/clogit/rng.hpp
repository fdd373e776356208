#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace clogit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic random source. All value transforms are written out here so
// a (seed, substream) pair produces the same draws on every build of the
// same platform, independent of standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream derived from one master seed; stream `index` does
  // not depend on whether other streams were drawn from.
  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(detail::splitmix64(detail::splitmix64(master_seed) + index + 1));
  }

  // Uniform draw strictly inside (0, 1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller; consumes two uniforms per draw.
  double normal(double mu = 0.0, double sigma = 1.0) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return mu + sigma * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * std::numbers::pi * u2);
  }

  double lognormal(double mu = 0.0, double sigma = 1.0) {
    return std::exp(normal(mu, sigma));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace clogit
