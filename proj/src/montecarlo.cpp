#include "spdc/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr double kPsPerSecond = 1e12;

// Expected-tag guard so a bad config cannot ask for an unbounded allocation.
constexpr double kMaxExpectedTags = 5e8;

struct GateMap {
  std::int64_t period_ps = 0;
  std::int64_t open_ps = 0;

  std::int64_t to_wall(std::int64_t meas_ps) const {
    const std::int64_t j = meas_ps / open_ps;
    return j * period_ps + (meas_ps - j * open_ps);
  }
};

double sigma_from_fwhm(double fwhm) { return fwhm / kGaussFwhmPerSigma; }

void append_poisson_tags(Rng& rng, double rate_hz, double chunk_len_s,
                         std::int64_t chunk_base_ps, std::int64_t total_ps,
                         const GateMap& gate, std::vector<std::int64_t>& out) {
  if (!(rate_hz > 0.0)) return;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate_hz);
    if (t >= chunk_len_s) break;
    const std::int64_t meas = chunk_base_ps + std::llround(t * kPsPerSecond);
    if (meas < 0 || meas >= total_ps) continue;
    out.push_back(gate.to_wall(meas));
  }
}

}  // namespace

void SourceRateModel::validate() const {
  if (!(pair_rate_per_mw_hz >= 0.0) || !std::isfinite(pair_rate_per_mw_hz))
    fail(ErrorCategory::validation, "pair rate per mW must be finite and non-negative");
  if (!(pump_power_mw >= 0.0) || !std::isfinite(pump_power_mw))
    fail(ErrorCategory::validation, "pump power must be finite and non-negative");
}

void DetectionChain::validate() const {
  auto check_fraction = [](double v, const char* name) {
    if (!(v > 0.0) || v > 1.0)
      fail(ErrorCategory::validation, std::string(name) + " must lie in (0, 1]");
  };
  check_fraction(path_transmission, "path transmission");
  check_fraction(detector_efficiency, "detector efficiency");
  check_fraction(extra_transmission, "extra transmission");
  if (!(dark_count_rate_hz >= 0.0))
    fail(ErrorCategory::validation, "dark count rate must be non-negative");
  if (!(background_rate_per_mw_hz >= 0.0))
    fail(ErrorCategory::validation, "background rate must be non-negative");
  if (!(jitter_fwhm_s >= 0.0))
    fail(ErrorCategory::validation, "jitter width must be non-negative");
}

void GateSpec::validate() const {
  if (!(period_s > 0.0)) fail(ErrorCategory::validation, "gate period must be positive");
  if (!(duty > 0.0) || duty > 1.0)
    fail(ErrorCategory::validation, "gate duty must lie in (0, 1]");
}

void SimulationConfig::validate() const {
  source.validate();
  signal.validate();
  idler.validate();
  gate.validate();
  if (signal_channel == idler_channel)
    fail(ErrorCategory::validation, "signal and idler channels must differ");
}

DelaySampler::DelaySampler(const CorrelationTrace& density) {
  density.validate();
  if (density.normalization != CorrelationTrace::Normalization::unit_area_pdf)
    fail(ErrorCategory::domain, "delay density must be unit-area normalized");
  for (double v : density.values)
    if (v < 0.0) fail(ErrorCategory::domain, "delay density has negative values");

  grid_ = density.grid;
  if (grid_.count == 1) return;  // degenerate: sampling returns the single point

  double area = 0.0;
  for (std::size_t j = 1; j < grid_.count; ++j)
    area += 0.5 * (density.values[j] + density.values[j - 1]) * grid_.step_s;
  if (!(std::fabs(area - 1.0) <= 1e-3))
    fail(ErrorCategory::domain, "delay density area deviates from one");

  pdf_.resize(grid_.count);
  for (std::size_t j = 0; j < grid_.count; ++j) pdf_[j] = density.values[j] / area;
  cdf_.resize(grid_.count);
  cdf_[0] = 0.0;
  for (std::size_t j = 1; j < grid_.count; ++j)
    cdf_[j] = cdf_[j - 1] + 0.5 * (pdf_[j] + pdf_[j - 1]) * grid_.step_s;
  cdf_.back() = 1.0;
}

double DelaySampler::sample(Rng& rng) const {
  if (grid_.count == 1) return grid_.start_s;
  const double u = rng.uniform_open();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t k = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
  k = std::min(k, grid_.count - 2);

  const double du = u - cdf_[k];
  const double p0 = pdf_[k];
  const double slope = (pdf_[k + 1] - p0) / grid_.step_s;
  double x;
  if (std::fabs(slope) * grid_.step_s < 1e-12 * std::max(p0, 1.0)) {
    x = p0 > 0.0 ? du / p0 : 0.0;
  } else {
    const double disc = std::max(p0 * p0 + 2.0 * slope * du, 0.0);
    x = (std::sqrt(disc) - p0) / slope;
  }
  x = std::clamp(x, 0.0, grid_.step_s);
  return grid_.at(k) + x;
}

double DelaySampler::cdf(double tau_s) const {
  if (grid_.count == 1) return tau_s >= grid_.start_s ? 1.0 : 0.0;
  if (tau_s <= grid_.start_s) return 0.0;
  if (tau_s >= grid_.end_s()) return 1.0;
  const auto k = static_cast<std::size_t>((tau_s - grid_.start_s) / grid_.step_s);
  const double x = tau_s - grid_.at(k);
  const double p0 = pdf_[k];
  const double slope = (pdf_[k + 1] - p0) / grid_.step_s;
  return cdf_[k] + p0 * x + 0.5 * slope * x * x;
}

SimulationResult simulate_chunks(const SimulationConfig& cfg, const DelaySampler& delays,
                                 std::uint64_t first_chunk, std::uint64_t chunk_count,
                                 double duration_s, std::uint64_t seed) {
  cfg.validate();
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s))
    fail(ErrorCategory::validation, "duration must be finite and non-negative");

  const double pair_rate = cfg.source.pair_rate_hz();
  const double bg_signal = cfg.signal.background_rate_per_mw_hz * cfg.source.pump_power_mw;
  const double bg_idler = cfg.idler.background_rate_per_mw_hz * cfg.source.pump_power_mw;
  const double total_rate = pair_rate * 2.0 + bg_signal + bg_idler +
                            cfg.signal.dark_count_rate_hz + cfg.idler.dark_count_rate_hz;
  if (total_rate * duration_s > kMaxExpectedTags)
    fail(ErrorCategory::validation, "simulation would produce too many tags");

  GateMap gate;
  gate.period_ps = std::llround(cfg.gate.period_s * kPsPerSecond);
  gate.open_ps = std::llround(cfg.gate.duty * cfg.gate.period_s * kPsPerSecond);
  if (gate.open_ps <= 0 || gate.period_ps < gate.open_ps)
    fail(ErrorCategory::validation, "gate timing does not resolve to whole picoseconds");

  const auto total_ps = static_cast<std::int64_t>(std::llround(duration_s * kPsPerSecond));
  const auto chunks_total =
      static_cast<std::uint64_t>(std::ceil(duration_s - 1e-15));
  const std::uint64_t last = std::min(first_chunk + chunk_count, chunks_total);

  const double sigma_s = sigma_from_fwhm(cfg.signal.jitter_fwhm_s);
  const double sigma_i = sigma_from_fwhm(cfg.idler.jitter_fwhm_s);
  const double eff_s = cfg.signal.efficiency();
  const double eff_i = cfg.idler.efficiency();

  SimulationResult result;
  std::vector<std::int64_t> sig_tags;
  std::vector<std::int64_t> idl_tags;

  for (std::uint64_t k = first_chunk; k < last; ++k) {
    const double chunk_len = std::min(1.0, duration_s - static_cast<double>(k));
    if (!(chunk_len > 0.0)) break;
    const auto chunk_base =
        static_cast<std::int64_t>(k) * static_cast<std::int64_t>(kPsPerSecond);
    Rng rng(derive_seed(seed, k));

    // Pair process first; fixed per-pair draw order keeps streams stable.
    if (pair_rate > 0.0) {
      double t = 0.0;
      for (;;) {
        t += rng.exponential(pair_rate);
        if (t >= chunk_len) break;
        ++result.generated_pairs;
        const double delay = delays.sample(rng);
        const auto [jit_s, jit_i] = rng.gauss_pair();
        const double u_s = rng.uniform();
        const double u_i = rng.uniform();

        bool got_s = false;
        bool got_i = false;
        if (u_s < eff_s) {
          const std::int64_t meas =
              chunk_base + std::llround((t + jit_s * sigma_s) * kPsPerSecond);
          if (meas >= 0 && meas < total_ps) {
            sig_tags.push_back(gate.to_wall(meas));
            got_s = true;
          }
        }
        if (u_i < eff_i) {
          const std::int64_t meas =
              chunk_base + std::llround((t + delay + jit_i * sigma_i) * kPsPerSecond);
          if (meas >= 0 && meas < total_ps) {
            idl_tags.push_back(gate.to_wall(meas));
            got_i = true;
          }
        }
        if (got_s && got_i) ++result.recorded_pairs;
      }
    }

    append_poisson_tags(rng, cfg.signal.dark_count_rate_hz, chunk_len, chunk_base, total_ps,
                        gate, sig_tags);
    append_poisson_tags(rng, bg_signal, chunk_len, chunk_base, total_ps, gate, sig_tags);
    append_poisson_tags(rng, cfg.idler.dark_count_rate_hz, chunk_len, chunk_base, total_ps,
                        gate, idl_tags);
    append_poisson_tags(rng, bg_idler, chunk_len, chunk_base, total_ps, gate, idl_tags);
  }

  auto finish = [&](std::vector<std::int64_t>& tags, std::uint16_t channel) {
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    TimeTagStream s;
    s.channel = channel;
    s.duration_ps = static_cast<std::uint64_t>(gate.to_wall(total_ps));
    s.tags_ps = std::move(tags);
    return s;
  };
  result.signal = finish(sig_tags, cfg.signal_channel);
  result.idler = finish(idl_tags, cfg.idler_channel);
  result.measurement_time_s = duration_s;
  result.wall_time_s = static_cast<double>(gate.to_wall(total_ps)) / kPsPerSecond;
  return result;
}

SimulationResult simulate_stream(const SimulationConfig& cfg, const DelaySampler& delays,
                                 double duration_s, std::uint64_t seed) {
  const auto chunks =
      static_cast<std::uint64_t>(std::ceil(std::max(duration_s, 0.0) - 1e-15));
  return simulate_chunks(cfg, delays, 0, std::max<std::uint64_t>(chunks, 1), duration_s, seed);
}

}  // namespace spdc
