#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace spdc {

// Deterministic random source. std::mt19937_64 raw output is fully specified
// by the standard, but std::*_distribution is not, so every transform we need
// is spelled out here and never changes. All simulation randomness flows
// through this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1); safe as a log() argument.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Exponential waiting time for a Poisson process of the given rate (1/s).
  double exponential(double rate) {
    return -std::log(uniform_open()) / rate;
  }

  // Box-Muller pair of independent standard normals (consumes two draws).
  std::pair<double, double> gauss_pair();

 private:
  std::mt19937_64 engine_;
};

// splitmix64 mix of (seed, index): derives per-chunk seeds so simulation
// chunks are independent and the mapping is documented and reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace spdc
