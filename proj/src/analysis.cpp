#include "spdc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/fit.hpp"

namespace spdc {

namespace {

constexpr double kPsPerSecond = 1e12;

std::int64_t to_ps(double seconds, const char* what) {
  const double ps = seconds * kPsPerSecond;
  if (!std::isfinite(ps) || std::fabs(ps) > 9.0e18)
    fail(ErrorCategory::domain, std::string(what) + " is out of the picosecond range");
  return std::llround(ps);
}

// Bin integral of the two-sided exponential density with unit peak, over
// [lo, hi] relative times, with optional gradients. a and c are the angular
// decay rates 2 pi dv of the right and left sides, tp the peak position.
struct BinIntegral {
  double value = 0.0;
  double d_a = 0.0;
  double d_c = 0.0;
  double d_tp = 0.0;
};

BinIntegral exp_bin_integral(double lo, double hi, double a, double c, double tp) {
  BinIntegral out;
  if (lo >= tp) {
    const double el = std::exp(-a * (lo - tp));
    const double er = std::exp(-a * (hi - tp));
    out.value = (el - er) / a;
    out.d_a = (-(lo - tp) * el + (hi - tp) * er) / a - out.value / a;
    out.d_tp = el - er;
  } else if (hi <= tp) {
    const double fr = std::exp(c * (hi - tp));
    const double fl = std::exp(c * (lo - tp));
    out.value = (fr - fl) / c;
    out.d_c = ((hi - tp) * fr - (lo - tp) * fl) / c - out.value / c;
    out.d_tp = fl - fr;
  } else {
    const double fl = std::exp(c * (lo - tp));
    const double er = std::exp(-a * (hi - tp));
    out.value = (1.0 - fl) / c + (1.0 - er) / a;
    out.d_c = (-(lo - tp) * fl) / c - (1.0 - fl) / (c * c);
    out.d_a = ((hi - tp) * er) / a - (1.0 - er) / (a * a);
    out.d_tp = fl - er;
  }
  return out;
}

}  // namespace

double Histogram::bin_center_s(std::size_t k) const {
  return (static_cast<double>(tau_min_ps) +
          (static_cast<double>(k) + 0.5) * static_cast<double>(bin_width_ps)) /
         kPsPerSecond;
}

void Histogram::validate() const {
  if (bin_width_ps <= 0) fail(ErrorCategory::domain, "histogram bin width must be positive");
}

Histogram cross_correlation_histogram(const TimeTagStream& signal,
                                      const TimeTagStream& idler, double bin_width_s,
                                      std::pair<double, double> range_s) {
  signal.validate();
  idler.validate();
  if (!(bin_width_s > 0.0)) fail(ErrorCategory::domain, "bin width must be positive");
  const std::int64_t width_ps = to_ps(bin_width_s, "bin width");
  if (width_ps < 1) fail(ErrorCategory::domain, "bin width is below one picosecond");
  const std::int64_t lo_ps = to_ps(range_s.first, "range start");
  std::int64_t hi_ps = to_ps(range_s.second, "range end");
  if (hi_ps <= lo_ps) fail(ErrorCategory::domain, "histogram range is empty");
  const auto nbins = static_cast<std::size_t>((hi_ps - lo_ps + width_ps - 1) / width_ps);
  hi_ps = lo_ps + static_cast<std::int64_t>(nbins) * width_ps;

  Histogram h;
  h.bin_width_ps = width_ps;
  h.tau_min_ps = lo_ps;
  h.counts.assign(nbins, 0);
  h.total_starts = signal.tags_ps.size();

  std::size_t start = 0;
  for (const std::int64_t ts : signal.tags_ps) {
    while (start < idler.tags_ps.size() && idler.tags_ps[start] - ts < lo_ps) ++start;
    for (std::size_t j = start; j < idler.tags_ps.size(); ++j) {
      const std::int64_t tau = idler.tags_ps[j] - ts;
      if (tau >= hi_ps) break;
      ++h.counts[static_cast<std::size_t>((tau - lo_ps) / width_ps)];
    }
  }
  return h;
}

double singles_rate(const TimeTagStream& stream, double measurement_time_s) {
  if (!(measurement_time_s > 0.0))
    fail(ErrorCategory::domain, "measurement time must be positive");
  return static_cast<double>(stream.tags_ps.size()) / measurement_time_s;
}

FitResult fit_double_exponential(const Histogram& hist) {
  hist.validate();
  const std::size_t n = hist.counts.size();
  if (n < 16) fail(ErrorCategory::domain, "histogram too short to fit");

  std::vector<double> counts(n);
  for (std::size_t k = 0; k < n; ++k) counts[k] = static_cast<double>(hist.counts[k]);

  std::vector<double> sorted = counts;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median = sorted[n / 2];
  const auto peak_it = std::max_element(counts.begin(), counts.end());
  const double peak_counts = *peak_it;
  const auto peak_idx = static_cast<std::size_t>(peak_it - counts.begin());
  if (!(peak_counts > 5.0 * median) || peak_counts <= 0.0)
    fail(ErrorCategory::estimate, "no detectable peak above the background median");

  const double w = static_cast<double>(hist.bin_width_ps) / kPsPerSecond;

  // Background guess: outer tenth of the bins on both ends.
  const std::size_t edge = std::max<std::size_t>(n / 10, 1);
  double b0 = 0.0;
  for (std::size_t k = 0; k < edge; ++k) b0 += counts[k] + counts[n - 1 - k];
  b0 /= static_cast<double>(2 * edge);

  const double tp0 = hist.bin_center_s(peak_idx);
  const double a0 = std::max(peak_counts - b0, 1.0);

  // Decay guesses from the 1/e crossing of each flank.
  auto flank_rate = [&](int dir) {
    const double target = b0 + a0 / std::exp(1.0);
    for (std::size_t step = 1;; ++step) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(peak_idx) + dir * static_cast<std::ptrdiff_t>(step);
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) break;
      if (counts[static_cast<std::size_t>(j)] <= target)
        return 1.0 / (kTwoPi * static_cast<double>(step) * w);
    }
    return 1.0 / (kTwoPi * 4.0 * w);
  };
  const double nup0 = flank_rate(+1);
  const double num0 = flank_rate(-1);

  std::vector<double> weights(n);
  for (std::size_t k = 0; k < n; ++k) weights[k] = 1.0 / std::max(counts[k], 1.0);

  const double lo0 = static_cast<double>(hist.tau_min_ps) / kPsPerSecond;
  LmModelFn model = [&, w, lo0](const std::vector<double>& p, std::size_t i, double& value,
                                double* grad) {
    const double b = p[0], amp = p[1], nup = p[2], num = p[3], tp = p[4];
    const double lo = lo0 + static_cast<double>(i) * w;
    const double a = kTwoPi * nup;
    const double c = kTwoPi * num;
    const BinIntegral bi = exp_bin_integral(lo, lo + w, a, c, tp);
    value = b + amp / w * bi.value;
    if (grad) {
      grad[0] = 1.0;
      grad[1] = bi.value / w;
      grad[2] = amp / w * bi.d_a * kTwoPi;
      grad[3] = amp / w * bi.d_c * kTwoPi;
      grad[4] = amp / w * bi.d_tp;
    }
  };

  const LmResult lm = lm_fit({b0, a0, nup0, num0, tp0}, n, model, counts, weights);

  FitResult out;
  out.background_level = lm.params[0];
  out.peak_amplitude = lm.params[1];
  out.linewidth_signal_hz = lm.params[2];
  out.linewidth_idler_hz = lm.params[3];
  out.peak_time_s = lm.params[4];
  out.parameter_uncertainties = lm.uncertainties;
  out.goodness = lm.chi_square / static_cast<double>(n - 5);
  out.iterations = lm.iterations;

  if (!(out.linewidth_signal_hz > 0.0) || !(out.linewidth_idler_hz > 0.0))
    fail(ErrorCategory::estimate, "fit converged to a non-physical linewidth");
  if (out.background_level < 0.0) {
    // A background-free histogram may fit epsilon-negative; anything beyond
    // its own uncertainty is a failure.
    if (out.background_level < -3.0 * std::max(out.parameter_uncertainties[0], 1e-12))
      fail(ErrorCategory::estimate, "fit converged to a negative background");
    out.background_level = 0.0;
  }
  return out;
}

double double_exp_bin_value(const FitResult& fit, double bin_width_s, double lo_s,
                            double hi_s) {
  if (!(bin_width_s > 0.0) || !(hi_s > lo_s))
    fail(ErrorCategory::domain, "bad bin bounds for the fitted model");
  const BinIntegral bi =
      exp_bin_integral(lo_s, hi_s, kTwoPi * fit.linewidth_signal_hz,
                       kTwoPi * fit.linewidth_idler_hz, fit.peak_time_s);
  return fit.background_level * (hi_s - lo_s) / bin_width_s +
         fit.peak_amplitude / bin_width_s * bi.value;
}

G2ZeroEstimate g2_zero_from_histogram(const Histogram& hist, const FitResult& fit,
                                      std::pair<double, double> accidental_window_s,
                                      const DarkRates* darks) {
  hist.validate();
  const double lo = accidental_window_s.first;
  const double hi = accidental_window_s.second;
  if (!(lo > 0.0) || !(hi > lo))
    fail(ErrorCategory::domain, "accidental window bounds must satisfy 0 < lo < hi");

  // The window must start well clear of the correlation peak.
  const double decay =
      1.0 / (kTwoPi * std::min(fit.linewidth_signal_hz, fit.linewidth_idler_hz));
  if (lo < 6.0 * decay)
    fail(ErrorCategory::domain, "accidental window overlaps the correlation peak region");

  double acc_sum = 0.0;
  std::size_t acc_bins = 0;
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    const double d = std::fabs(hist.bin_center_s(k) - fit.peak_time_s);
    if (d >= lo && d <= hi) {
      acc_sum += static_cast<double>(hist.counts[k]);
      ++acc_bins;
    }
  }
  if (acc_bins == 0)
    fail(ErrorCategory::domain, "accidental window lies outside the histogram");
  if (!(acc_sum > 0.0))
    fail(ErrorCategory::estimate, "no accidental counts; the ratio is degenerate");

  const double acc_mean = acc_sum / static_cast<double>(acc_bins);
  const double peak_value = fit.background_level + fit.peak_amplitude;

  G2ZeroEstimate out;
  out.raw = peak_value / acc_mean;
  out.dark_subtracted = out.raw;

  if (darks) {
    if (darks->dark_signal_hz < 0.0 || darks->dark_idler_hz < 0.0 ||
        darks->singles_signal_hz <= darks->dark_signal_hz ||
        darks->singles_idler_hz <= darks->dark_idler_hz)
      fail(ErrorCategory::estimate, "dark rates reach the singles rates; subtraction infeasible");
    // Dark share of the accidental rate product S_s * S_i. Scaling the
    // measured accidental mean by it keeps the estimator stable even when the
    // darks dominate the accidentals, and reduces to raw when the darks are 0.
    const double dark_fraction = (darks->singles_signal_hz * darks->dark_idler_hz +
                                  darks->dark_signal_hz * darks->singles_idler_hz -
                                  darks->dark_signal_hz * darks->dark_idler_hz) /
                                 (darks->singles_signal_hz * darks->singles_idler_hz);
    const double den = acc_mean * (1.0 - dark_fraction);
    if (!(den > 0.0))
      fail(ErrorCategory::estimate, "dark-subtracted accidental level vanishes");
    const double num = peak_value - acc_mean * dark_fraction;
    if (!(num > 0.0))
      fail(ErrorCategory::estimate, "fitted peak does not exceed the dark floor");
    out.dark_subtracted = num / den;
  }
  return out;
}

double coincidence_rate(const Histogram& hist, double window_s, double measurement_time_s,
                        double pump_power_mw, BackgroundTreatment background) {
  hist.validate();
  if (hist.counts.empty()) fail(ErrorCategory::domain, "histogram is empty");
  if (!(window_s > 0.0)) fail(ErrorCategory::domain, "window must be positive");
  if (!(measurement_time_s > 0.0))
    fail(ErrorCategory::domain, "measurement time must be positive");
  if (!(pump_power_mw > 0.0)) fail(ErrorCategory::domain, "pump power must be positive");

  const auto peak_it = std::max_element(hist.counts.begin(), hist.counts.end());
  const double center = hist.bin_center_s(
      static_cast<std::size_t>(peak_it - hist.counts.begin()));
  const double half = 0.5 * window_s;

  const double lo_edge = static_cast<double>(hist.tau_min_ps) / kPsPerSecond;
  const double hi_edge =
      lo_edge + static_cast<double>(hist.counts.size()) *
                    static_cast<double>(hist.bin_width_ps) / kPsPerSecond;
  if (center - half < lo_edge || center + half > hi_edge)
    fail(ErrorCategory::domain, "coincidence window exceeds the histogram range");

  double in_window = 0.0;
  std::size_t window_bins = 0;
  double outside = 0.0;
  std::size_t outside_bins = 0;
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    const double d = std::fabs(hist.bin_center_s(k) - center);
    if (d <= half) {
      in_window += static_cast<double>(hist.counts[k]);
      ++window_bins;
    } else if (d > 2.0 * half) {
      outside += static_cast<double>(hist.counts[k]);
      ++outside_bins;
    }
  }

  double total = in_window;
  if (background == BackgroundTreatment::subtract) {
    if (outside_bins == 0)
      fail(ErrorCategory::domain, "no bins outside the window to estimate background");
    total -= outside / static_cast<double>(outside_bins) * static_cast<double>(window_bins);
  }
  return total / measurement_time_s / pump_power_mw;
}

double heralding_efficiency(double coincidence_rate_hz, double singles_idler_hz,
                            double detector_eff_signal) {
  if (!(coincidence_rate_hz >= 0.0))
    fail(ErrorCategory::domain, "coincidence rate must be non-negative");
  if (!(singles_idler_hz > 0.0)) fail(ErrorCategory::domain, "idler singles must be positive");
  if (!(detector_eff_signal > 0.0) || detector_eff_signal > 1.0)
    fail(ErrorCategory::domain, "signal detector efficiency must lie in (0, 1]");
  return coincidence_rate_hz / singles_idler_hz / detector_eff_signal;
}

double spectral_brightness(double pair_rate_in_fiber_hz, double pump_power_mw,
                           double linewidth_mhz) {
  if (!(pair_rate_in_fiber_hz >= 0.0))
    fail(ErrorCategory::domain, "pair rate must be non-negative");
  if (!(pump_power_mw > 0.0)) fail(ErrorCategory::domain, "pump power must be positive");
  if (!(linewidth_mhz > 0.0)) fail(ErrorCategory::domain, "linewidth must be positive");
  return pair_rate_in_fiber_hz / pump_power_mw / linewidth_mhz;
}

double enhancement_factor(double cavity_brightness, double single_pass_brightness,
                          const std::vector<double>& corrections) {
  if (!(cavity_brightness > 0.0) || !(single_pass_brightness > 0.0))
    fail(ErrorCategory::domain, "brightness inputs must be positive");
  double ratio = cavity_brightness / single_pass_brightness;
  for (double c : corrections) {
    if (!(c > 0.0)) fail(ErrorCategory::domain, "correction factors must be positive");
    ratio /= c;
  }
  return ratio;
}

double escape_efficiency(double output_coupler_transmission, double internal_loss) {
  if (!(output_coupler_transmission > 0.0) || output_coupler_transmission >= 1.0)
    fail(ErrorCategory::domain, "output coupler transmission must lie in (0, 1)");
  if (!(internal_loss >= 0.0) || internal_loss >= 1.0)
    fail(ErrorCategory::domain, "internal loss must lie in [0, 1)");
  return output_coupler_transmission / (output_coupler_transmission + internal_loss);
}

VisibilityResult visibility_from_fringes(const std::vector<FringePoint>& scan,
                                         double dark_level) {
  if (scan.size() < 4) fail(ErrorCategory::domain, "fringe scan needs at least four points");
  auto [mn, mx] = std::minmax_element(scan.begin(), scan.end(),
                                      [](const FringePoint& a, const FringePoint& b) {
                                        return a.phase_rad < b.phase_rad;
                                      });
  if (!(mx->phase_rad - mn->phase_rad >= kTwoPi - 1e-9))
    fail(ErrorCategory::domain, "fringe scan covers less than one full period");

  const std::size_t n = scan.size();
  std::vector<double> obs(n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    obs[i] = scan[i].counts - dark_level;
    weights[i] = 1.0 / std::max(scan[i].counts, 1.0);
  }

  double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(n);
  LmModelFn model = [&scan](const std::vector<double>& p, std::size_t i, double& value,
                            double* grad) {
    const double cp = std::cos(scan[i].phase_rad);
    const double sp = std::sin(scan[i].phase_rad);
    value = p[0] + p[1] * cp + p[2] * sp;
    if (grad) {
      grad[0] = 1.0;
      grad[1] = cp;
      grad[2] = sp;
    }
  };
  const LmResult lm = lm_fit({mean, 0.0, 0.0}, n, model, obs, weights);

  const double offset = lm.params[0];
  const double amp = std::hypot(lm.params[1], lm.params[2]);
  if (!(offset > 0.0))
    fail(ErrorCategory::estimate, "fringe offset is not positive; visibility undefined");

  VisibilityResult out;
  out.visibility = std::clamp(amp / offset, 0.0, 1.0);
  // Quadrature propagation through V = sqrt(A^2+B^2)/offset.
  const double s_o = lm.uncertainties[0];
  const double s_a = lm.uncertainties[1];
  const double s_b = lm.uncertainties[2];
  double var = out.visibility * out.visibility * (s_o / offset) * (s_o / offset);
  if (amp > 0.0)
    var += (lm.params[1] * lm.params[1] * s_a * s_a +
            lm.params[2] * lm.params[2] * s_b * s_b) /
           (amp * amp * offset * offset);
  else
    var += (s_a * s_a + s_b * s_b) / (offset * offset);
  out.uncertainty = std::sqrt(var);
  return out;
}

int estimate_mode_count(double measured_peak_fwhm_s, double detector_response_fwhm_s,
                        const ModeLadderConfig& cfg, int max_modes) {
  if (!(measured_peak_fwhm_s > 0.0))
    fail(ErrorCategory::domain, "measured width must be positive");
  if (!(detector_response_fwhm_s >= 0.0))
    fail(ErrorCategory::domain, "response width must be non-negative");
  if (measured_peak_fwhm_s < detector_response_fwhm_s)
    fail(ErrorCategory::estimate,
         "measured width is below the detector response; no mode count fits");
  if (max_modes < 1) fail(ErrorCategory::domain, "mode scan needs at least one count");

  std::vector<int> ns(static_cast<std::size_t>(max_modes));
  std::iota(ns.begin(), ns.end(), 1);
  ModeLadderConfig scan_cfg = cfg;
  scan_cfg.response_fwhm_s = detector_response_fwhm_s;
  const auto widths = peak_width_vs_modes(ns, scan_cfg);

  int best_n = widths.front().first;
  double best_err = std::fabs(widths.front().second - measured_peak_fwhm_s);
  for (const auto& [n_modes, width] : widths) {
    const double err = std::fabs(width - measured_peak_fwhm_s);
    if (err < best_err) {
      best_err = err;
      best_n = n_modes;
    }
  }
  return best_n;
}

double fold_modulation(const Histogram& hist, const FitResult& fit, double period_s,
                       double half_range_s) {
  hist.validate();
  if (!(period_s > 0.0)) fail(ErrorCategory::domain, "fold period must be positive");
  if (!(half_range_s >= period_s))
    fail(ErrorCategory::domain, "fold range must cover at least one period");

  const double w = static_cast<double>(hist.bin_width_ps) / kPsPerSecond;

  // The fitted curve supplies the baseline shape; rescale it least-squares
  // onto the counts first. The Poisson weighting of the fit pulls its
  // amplitude toward the valleys of strongly modulated data, and without the
  // rescale that bias leaks straight into the modulation index.
  std::vector<double> model(hist.counts.size(), 0.0);
  double num_scale = 0.0;
  double den_scale = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    const double tau = hist.bin_center_s(k);
    if (std::fabs(tau) > half_range_s) continue;
    const double m = double_exp_bin_value(fit, w, tau - 0.5 * w, tau + 0.5 * w);
    model[k] = m;
    num_scale += static_cast<double>(hist.counts[k]) * m;
    den_scale += m * m;
    ++used;
  }
  if (used == 0 || !(den_scale > 0.0))
    fail(ErrorCategory::estimate, "no usable bins in the fold range");
  const double scale = num_scale / den_scale;

  std::complex<double> acc(0.0, 0.0);
  double den = 0.0;
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    const double tau = hist.bin_center_s(k);
    if (std::fabs(tau) > half_range_s) continue;
    const double m = scale * model[k];
    const double phase = kTwoPi * tau / period_s;
    acc += (static_cast<double>(hist.counts[k]) - m) *
           std::complex<double>(std::cos(phase), std::sin(phase));
    den += m;
  }
  if (!(den > 0.0)) fail(ErrorCategory::estimate, "degenerate baseline in the fold range");
  return 2.0 * std::abs(acc) / den;
}

}  // namespace spdc
