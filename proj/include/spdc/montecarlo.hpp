#pragma once

#include <cstdint>
#include <vector>

#include "spdc/correlation.hpp"
#include "spdc/rng.hpp"
#include "spdc/timetags.hpp"

namespace spdc {

// Pair generation: homogeneous Poisson process at pair_rate_per_mw * power,
// counted in measurement (gate-open) time.
struct SourceRateModel {
  double pair_rate_per_mw_hz = 0.0;
  double pump_power_mw = 0.0;

  double pair_rate_hz() const { return pair_rate_per_mw_hz * pump_power_mw; }
  void validate() const;
};

// Per-channel detection: a tag survives with probability
// path_transmission * detector_efficiency * extra_transmission, picks up
// Gaussian timing jitter, and rides on dark counts plus pump-proportional
// uncorrelated background (both already at detected rates).
struct DetectionChain {
  double path_transmission = 1.0;
  double detector_efficiency = 1.0;
  double extra_transmission = 1.0;
  double dark_count_rate_hz = 0.0;
  double background_rate_per_mw_hz = 0.0;
  double jitter_fwhm_s = 0.0;

  double efficiency() const {
    return path_transmission * detector_efficiency * extra_transmission;
  }
  void validate() const;
};

// Duty-cycled lock gating: windows of duty * period_s measurement time every
// period_s of wall time; tags falling outside windows are not recorded.
struct GateSpec {
  double period_s = 10e-3;
  double duty = 1.0;  // 1 = no gating

  void validate() const;
};

struct SimulationConfig {
  SourceRateModel source;
  DetectionChain signal;
  DetectionChain idler;
  GateSpec gate;
  std::uint16_t signal_channel = 0;
  std::uint16_t idler_channel = 1;

  void validate() const;
};

// Draws the idler-minus-signal delay from a piecewise-linear unit-area
// density via its exact piecewise-quadratic inverse CDF.
class DelaySampler {
 public:
  explicit DelaySampler(const CorrelationTrace& density);

  double sample(Rng& rng) const;
  // Exact CDF of the piecewise-linear density; clamps outside the grid.
  double cdf(double tau_s) const;
  const TauGrid& grid() const { return grid_; }

 private:
  TauGrid grid_;
  std::vector<double> pdf_;
  std::vector<double> cdf_;
};

struct SimulationResult {
  TimeTagStream signal;
  TimeTagStream idler;
  std::uint64_t generated_pairs = 0;
  std::uint64_t recorded_pairs = 0;  // both tags survived and were recorded
  double measurement_time_s = 0.0;
  double wall_time_s = 0.0;
};

// Simulate duration_s of measurement (gate-open) time. Work proceeds in
// canonical one-second measurement chunks, each with a seed derived from
// (seed, chunk index), so the same seed gives the same streams regardless of
// how the duration divides into calls.
SimulationResult simulate_stream(const SimulationConfig& cfg, const DelaySampler& delays,
                                 double duration_s, std::uint64_t seed);

// Same, but only the chunks [first_chunk, first_chunk + chunk_count); chunk k
// covers measurement seconds [k, k+1). Used to check chunk independence and
// to parallelize long runs externally.
SimulationResult simulate_chunks(const SimulationConfig& cfg, const DelaySampler& delays,
                                 std::uint64_t first_chunk, std::uint64_t chunk_count,
                                 double duration_s, std::uint64_t seed);

}  // namespace spdc
