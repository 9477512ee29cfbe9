#include "spdc/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

using cplx = std::complex<double>;

// sin(z)/z with a series fallback near zero.
cplx csinc(cplx z) {
  if (std::abs(z) < 1e-6) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

// Exact recompute interval for the geometric-recurrence exponential walk.
// Keeps the accumulated rounding error a few thousand ulp at most.
constexpr std::size_t kRecomputeStride = 2048;

struct ModeTerm {
  cplx gamma_signal;  // gamma_s/2 + i m_s FSR_s, Hz
  cplx gamma_idler;   // gamma_i/2 + i m_i FSR_i, Hz
  double amplitude = 0.0;
};

}  // namespace

void TauGrid::validate() const {
  if (count == 0) fail(ErrorCategory::domain, "delay grid is empty");
  if (!(step_s > 0.0) || !std::isfinite(step_s))
    fail(ErrorCategory::domain, "delay grid step must be positive");
  if (!std::isfinite(start_s)) fail(ErrorCategory::domain, "delay grid start is not finite");
}

TauGrid make_grid(double min_s, double max_s, double step_s) {
  if (!(step_s > 0.0)) fail(ErrorCategory::domain, "delay grid step must be positive");
  if (!(max_s >= min_s)) fail(ErrorCategory::domain, "delay grid range is inverted");
  const auto count = static_cast<std::size_t>(std::floor((max_s - min_s) / step_s + 0.5)) + 1;
  return TauGrid{min_s, step_s, count};
}

void CorrelationTrace::validate() const {
  grid.validate();
  if (values.size() != grid.count)
    fail(ErrorCategory::domain, "trace value count does not match its grid");
}

void CorrelationConfig::validate() const {
  modes.validate();
  if (modes.modes.empty()) fail(ErrorCategory::domain, "correlation config has no modes");
  if (!(damping_signal_hz > 0.0) || !(damping_idler_hz > 0.0))
    fail(ErrorCategory::domain, "cavity dampings must be positive");
  if (!(fsr_signal_hz > 0.0) || !(fsr_idler_hz > 0.0))
    fail(ErrorCategory::domain, "free spectral ranges must be positive");
  if (!(center_signal_hz > 0.0) || !(center_idler_hz > 0.0))
    fail(ErrorCategory::domain, "center frequencies must be positive");
  if (!(transit_time_diff_s >= 0.0))
    fail(ErrorCategory::domain, "transit time difference must be non-negative");
  if (!(weight_floor >= 0.0) || !(weight_floor < 1.0))
    fail(ErrorCategory::domain, "weight floor must lie in [0, 1)");
}

CorrelationTrace analytic_g2(const CorrelationConfig& cfg, const TauGrid& grid,
                             const AnalyticG2Options& opt) {
  cfg.validate();
  grid.validate();

  const double gamma_min = std::min(cfg.damping_signal_hz, cfg.damping_idler_hz);
  if (opt.enforce_coverage) {
    const double needed = 5.0 / (kTwoPi * gamma_min);
    if (grid.start_s > -needed || grid.end_s() < needed)
      fail(ErrorCategory::domain,
           "delay grid must cover +-5/(2 pi gamma_min) around zero delay");
  }

  const double scale = std::sqrt(cfg.damping_signal_hz * cfg.damping_idler_hz *
                                 cfg.center_signal_hz * cfg.center_idler_hz);
  const double gamma_mean = 0.5 * (cfg.damping_signal_hz + cfg.damping_idler_hz);
  const double tau0 = cfg.transit_time_diff_s;

  double max_weight = 0.0;
  for (const auto& m : cfg.modes.modes) max_weight = std::max(max_weight, m.weight);

  std::vector<ModeTerm> terms;
  terms.reserve(cfg.modes.modes.size());
  for (const auto& m : cfg.modes.modes) {
    if (m.weight < cfg.weight_floor * max_weight) continue;
    ModeTerm t;
    t.gamma_signal = cplx(0.5 * cfg.damping_signal_hz, m.m_signal * cfg.fsr_signal_hz);
    t.gamma_idler = cplx(0.5 * cfg.damping_idler_hz, m.m_idler * cfg.fsr_idler_hz);
    // Spectrum weights are intensities; the coherent sum takes their root.
    t.amplitude = std::sqrt(m.weight);
    terms.push_back(t);
  }
  if (terms.empty()) fail(ErrorCategory::domain, "weight floor removed every mode");

  // Split the grid at the amplitude crest tau0/2.
  std::size_t split = 0;
  while (split < grid.count && grid.at(split) < 0.5 * tau0) ++split;

  std::vector<cplx> acc(grid.count, cplx(0.0, 0.0));
  for (const auto& t : terms) {
    const cplx pref = cfg.equal_amplitudes
                          ? cplx(t.amplitude * scale / gamma_mean, 0.0)
                          : t.amplitude * scale / (t.gamma_signal + t.gamma_idler);
    const cplx base_signal = pref * csinc(cplx(0.0, 1.0) * kPi * tau0 * t.gamma_signal);
    const cplx base_idler = pref * csinc(cplx(0.0, 1.0) * kPi * tau0 * t.gamma_idler);

    // tau >= tau0/2: base_signal * exp(-2 pi Gamma_s (tau - tau0/2)), walked
    // with a per-step ratio and an exact recompute every kRecomputeStride.
    const cplx ratio_r = std::exp(-kTwoPi * t.gamma_signal * grid.step_s);
    cplx cur;
    for (std::size_t j = split; j < grid.count; ++j) {
      const std::size_t rel = j - split;
      if (rel % kRecomputeStride == 0)
        cur = base_signal * std::exp(-kTwoPi * t.gamma_signal * (grid.at(j) - 0.5 * tau0));
      else
        cur *= ratio_r;
      acc[j] += cur;
    }
    // tau < tau0/2: base_idler * exp(+2 pi Gamma_i (tau - tau0/2)), walked
    // downward so the per-step ratio again has magnitude below one.
    const cplx ratio_l = std::exp(-kTwoPi * t.gamma_idler * grid.step_s);
    for (std::size_t j = split; j-- > 0;) {
      const std::size_t rel = split - 1 - j;
      if (rel % kRecomputeStride == 0)
        cur = base_idler * std::exp(kTwoPi * t.gamma_idler * (grid.at(j) - 0.5 * tau0));
      else
        cur *= ratio_l;
      acc[j] += cur;
    }
  }

  CorrelationTrace out;
  out.grid = grid;
  out.normalization = CorrelationTrace::Normalization::raw_arbitrary;
  out.values.resize(grid.count);
  for (std::size_t j = 0; j < grid.count; ++j) out.values[j] = std::norm(acc[j]);
  return out;
}

CorrelationTrace single_mode_g2(double damping_signal_hz, double damping_idler_hz,
                                const TauGrid& grid) {
  if (!(damping_signal_hz > 0.0) || !(damping_idler_hz > 0.0))
    fail(ErrorCategory::domain, "cavity dampings must be positive");
  grid.validate();
  CorrelationTrace out;
  out.grid = grid;
  out.normalization = CorrelationTrace::Normalization::raw_arbitrary;
  out.values.resize(grid.count);
  for (std::size_t j = 0; j < grid.count; ++j) {
    const double tau = grid.at(j);
    out.values[j] = tau >= 0.0 ? std::exp(-kTwoPi * damping_signal_hz * tau)
                               : std::exp(kTwoPi * damping_idler_hz * tau);
  }
  return out;
}

CorrelationTrace g1_signal(const ClusterSpectrum& spectrum, double damping_signal_hz,
                           const TauGrid& grid) {
  spectrum.validate();
  if (spectrum.modes.empty()) fail(ErrorCategory::domain, "spectrum has no modes");
  if (!(damping_signal_hz > 0.0))
    fail(ErrorCategory::domain, "cavity damping must be positive");
  grid.validate();

  // A common frequency shift only changes the overall phase, so offsets are
  // taken from the first mode to keep the phase arguments small.
  const double ref_hz = spectrum.modes.front().signal_hz;
  double total = 0.0;
  for (const auto& m : spectrum.modes) total += m.weight;

  CorrelationTrace out;
  out.grid = grid;
  out.normalization = CorrelationTrace::Normalization::raw_arbitrary;
  out.values.resize(grid.count);
  for (std::size_t j = 0; j < grid.count; ++j) {
    const double dt = grid.at(j);
    cplx sum(0.0, 0.0);
    for (const auto& m : spectrum.modes) {
      const double phase = kTwoPi * (m.signal_hz - ref_hz) * dt;
      sum += m.weight * cplx(std::cos(phase), std::sin(phase));
    }
    out.values[j] = std::exp(-kPi * damping_signal_hz * std::abs(dt)) * std::abs(sum) / total;
  }
  return out;
}

CorrelationTrace convolve_response(const CorrelationTrace& trace, double response_fwhm_s,
                                   ResponseShape shape) {
  trace.validate();
  if (shape != ResponseShape::gaussian)
    fail(ErrorCategory::domain, "unsupported response shape");
  if (!(response_fwhm_s > 0.0))
    fail(ErrorCategory::domain, "response width must be positive");

  const double sigma = response_fwhm_s / kGaussFwhmPerSigma;
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(6.0 * sigma / trace.grid.step_s));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (std::ptrdiff_t h = -half; h <= half; ++h) {
    const double x = static_cast<double>(h) * trace.grid.step_s / sigma;
    const double v = std::exp(-0.5 * x * x);
    kernel[static_cast<std::size_t>(h + half)] = v;
    sum += v;
  }
  for (auto& v : kernel) v /= sum;

  CorrelationTrace out;
  out.grid = trace.grid;
  out.normalization = trace.normalization;
  out.values.assign(trace.values.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(trace.values.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double acc = 0.0;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-half, j - (n - 1));
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(half, j);
    for (std::ptrdiff_t h = lo; h <= hi; ++h)
      acc += kernel[static_cast<std::size_t>(h + half)] *
             trace.values[static_cast<std::size_t>(j - h)];
    out.values[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

double trace_area(const CorrelationTrace& trace) {
  trace.validate();
  if (trace.values.size() < 2) fail(ErrorCategory::domain, "trace too short to integrate");
  double area = 0.0;
  for (std::size_t j = 1; j < trace.values.size(); ++j)
    area += 0.5 * (trace.values[j] + trace.values[j - 1]) * trace.grid.step_s;
  return area;
}

CorrelationTrace normalize_peak(const CorrelationTrace& trace) {
  trace.validate();
  const double peak = *std::max_element(trace.values.begin(), trace.values.end());
  if (!(peak > 0.0)) fail(ErrorCategory::domain, "trace peak is not positive");
  CorrelationTrace out = trace;
  for (auto& v : out.values) v /= peak;
  return out;
}

CorrelationTrace to_pdf(const CorrelationTrace& trace) {
  trace.validate();
  for (double v : trace.values)
    if (v < 0.0) fail(ErrorCategory::domain, "trace with negative values cannot be a density");
  const double area = trace_area(trace);
  if (!(area > 0.0)) fail(ErrorCategory::domain, "trace area is not positive");
  CorrelationTrace out = trace;
  for (auto& v : out.values) v /= area;
  out.normalization = CorrelationTrace::Normalization::unit_area_pdf;
  return out;
}

double trace_fwhm(const CorrelationTrace& trace) {
  trace.validate();
  if (trace.values.size() < 3) fail(ErrorCategory::domain, "trace too short for a width");
  const auto it = std::max_element(trace.values.begin(), trace.values.end());
  const auto peak_idx = static_cast<std::size_t>(it - trace.values.begin());
  const double half = 0.5 * *it;
  if (!(*it > 0.0)) fail(ErrorCategory::domain, "trace peak is not positive");

  // Walk outward to the first samples below half maximum and interpolate.
  std::size_t r = peak_idx;
  while (r + 1 < trace.values.size() && trace.values[r + 1] >= half) ++r;
  if (r + 1 >= trace.values.size())
    fail(ErrorCategory::domain, "peak does not fall to half maximum on the right of the grid");
  const double fr = (trace.values[r] - half) / (trace.values[r] - trace.values[r + 1]);
  const double right = trace.grid.at(r) + fr * trace.grid.step_s;

  std::size_t l = peak_idx;
  while (l > 0 && trace.values[l - 1] >= half) --l;
  if (l == 0)
    fail(ErrorCategory::domain, "peak does not fall to half maximum on the left of the grid");
  const double fl = (trace.values[l] - half) / (trace.values[l] - trace.values[l - 1]);
  const double left = trace.grid.at(l) - fl * trace.grid.step_s;

  return right - left;
}

std::vector<double> oscillation_peaks(const CorrelationTrace& trace,
                                      double min_relative_height) {
  trace.validate();
  if (trace.values.size() < 3) fail(ErrorCategory::domain, "trace too short for peak search");
  if (!(min_relative_height > 0.0) || !(min_relative_height <= 1.0))
    fail(ErrorCategory::domain, "relative height threshold must lie in (0, 1]");
  const double peak = *std::max_element(trace.values.begin(), trace.values.end());
  const double floor = min_relative_height * peak;
  std::vector<double> positions;
  for (std::size_t j = 1; j + 1 < trace.values.size(); ++j) {
    if (trace.values[j] >= floor && trace.values[j] > trace.values[j - 1] &&
        trace.values[j] > trace.values[j + 1])
      positions.push_back(trace.grid.at(j));
  }
  return positions;
}

double oscillation_period(const CorrelationTrace& trace, double min_relative_height) {
  const auto peaks = oscillation_peaks(trace, min_relative_height);
  if (peaks.size() < 2)
    fail(ErrorCategory::estimate, "fewer than two peaks found; period is undefined");
  // Median spacing: a tooth dropping below the height cut doubles one gap,
  // which would drag a mean but leaves the median untouched.
  std::vector<double> gaps(peaks.size() - 1);
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) gaps[k] = peaks[k + 1] - peaks[k];
  std::sort(gaps.begin(), gaps.end());
  const std::size_t mid = gaps.size() / 2;
  if (gaps.size() % 2 == 1) return gaps[mid];
  return 0.5 * (gaps[mid - 1] + gaps[mid]);
}

std::vector<std::pair<int, double>> peak_width_vs_modes(
    const std::vector<int>& n_modes_list, const ModeLadderConfig& cfg) {
  if (n_modes_list.empty()) fail(ErrorCategory::domain, "mode count list is empty");
  if (!(cfg.damping_signal_hz > 0.0) || !(cfg.damping_idler_hz > 0.0))
    fail(ErrorCategory::domain, "cavity dampings must be positive");
  if (!(cfg.fsr_signal_hz > 0.0) || !(cfg.fsr_idler_hz > 0.0))
    fail(ErrorCategory::domain, "free spectral ranges must be positive");
  if (!(cfg.grid_step_s > 0.0)) fail(ErrorCategory::domain, "grid step must be positive");

  std::vector<std::pair<int, double>> out;
  out.reserve(n_modes_list.size());
  for (int n : n_modes_list) {
    if (n < 1 || n > 50) fail(ErrorCategory::domain, "mode count must lie in [1, 50]");

    CorrelationConfig cc;
    cc.modes.pump_hz = 2.0;
    cc.modes.gap_threshold_hz = 0.0;
    for (int m = 0; m < n; ++m) {
      ModePair p;
      p.m_signal = m;
      p.m_idler = -m;
      p.signal_hz = 1.0 + m * cfg.fsr_signal_hz;
      p.idler_hz = cc.modes.pump_hz - p.signal_hz;
      p.weight = 1.0;
      p.cluster_id = 0;
      cc.modes.modes.push_back(p);
    }
    cc.modes.clusters = {{0, cc.modes.modes.size()}};
    cc.damping_signal_hz = cfg.damping_signal_hz;
    cc.damping_idler_hz = cfg.damping_idler_hz;
    cc.fsr_signal_hz = cfg.fsr_signal_hz;
    cc.fsr_idler_hz = cfg.fsr_idler_hz;
    cc.transit_time_diff_s = cfg.transit_time_diff_s;
    cc.center_signal_hz = 1.0;
    cc.center_idler_hz = 1.0;
    cc.equal_amplitudes = true;

    // One mode: the decay itself is the peak, measured on a grid scaled to
    // the single-mode width. Several modes: only the central comb peak
    // matters, so an 8 ns window around zero suffices.
    TauGrid grid;
    if (n == 1) {
      const double fwhm1 = kLn2 / kTwoPi *
                           (1.0 / cfg.damping_signal_hz + 1.0 / cfg.damping_idler_hz);
      grid = make_grid(-3.0 * fwhm1, 3.0 * fwhm1, fwhm1 / 2000.0);
    } else {
      grid = make_grid(-8e-9, 8e-9, cfg.grid_step_s);
    }

    AnalyticG2Options opt;
    opt.enforce_coverage = false;
    CorrelationTrace trace = analytic_g2(cc, grid, opt);
    if (cfg.response_fwhm_s > 0.0)
      trace = convolve_response(trace, cfg.response_fwhm_s);
    out.emplace_back(n, trace_fwhm(trace));
  }
  return out;
}

double fold_modulation_trace(const CorrelationTrace& trace, const CorrelationTrace& reference,
                             double period_s, double half_range_s) {
  trace.validate();
  reference.validate();
  if (trace.grid.count != reference.grid.count ||
      std::fabs(trace.grid.start_s - reference.grid.start_s) > 1e-9 * trace.grid.step_s ||
      std::fabs(trace.grid.step_s - reference.grid.step_s) > 1e-12 * trace.grid.step_s)
    fail(ErrorCategory::domain, "trace and reference must share one grid");
  if (!(period_s > 0.0)) fail(ErrorCategory::domain, "fold period must be positive");
  if (!(half_range_s >= period_s))
    fail(ErrorCategory::domain, "fold range must cover at least one period");

  // Least-squares scale of the reference onto the trace inside the range.
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < trace.grid.count; ++j) {
    if (std::fabs(trace.grid.at(j)) > half_range_s) continue;
    num += trace.values[j] * reference.values[j];
    den += reference.values[j] * reference.values[j];
  }
  if (!(den > 0.0)) fail(ErrorCategory::estimate, "reference vanishes in the fold range");
  const double scale = num / den;

  std::complex<double> acc(0.0, 0.0);
  double base_sum = 0.0;
  for (std::size_t j = 0; j < trace.grid.count; ++j) {
    const double tau = trace.grid.at(j);
    if (std::fabs(tau) > half_range_s) continue;
    const double base = scale * reference.values[j];
    const double phase = kTwoPi * tau / period_s;
    acc += (trace.values[j] - base) * std::complex<double>(std::cos(phase), std::sin(phase));
    base_sum += base;
  }
  if (!(base_sum > 0.0)) fail(ErrorCategory::estimate, "fold baseline is not positive");
  return 2.0 * std::abs(acc) / base_sum;
}

double predict_g2_zero(double pair_rate_detected_hz, double pdf_peak_per_s,
                       double singles_signal_hz, double singles_idler_hz) {
  if (!(pair_rate_detected_hz >= 0.0))
    fail(ErrorCategory::domain, "pair rate must be non-negative");
  if (!(pdf_peak_per_s > 0.0)) fail(ErrorCategory::domain, "density peak must be positive");
  if (!(singles_signal_hz > 0.0) || !(singles_idler_hz > 0.0))
    fail(ErrorCategory::domain, "singles rates must be positive");
  return 1.0 + pair_rate_detected_hz * pdf_peak_per_s / (singles_signal_hz * singles_idler_hz);
}

}  // namespace spdc
