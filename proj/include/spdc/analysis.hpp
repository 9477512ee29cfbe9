#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spdc/correlation.hpp"
#include "spdc/timetags.hpp"

namespace spdc {

// Arrival-time-difference histogram. Bin k covers
// [tau_min_ps + k*bin_width_ps, tau_min_ps + (k+1)*bin_width_ps) in integer
// picoseconds; tau is idler minus signal time.
struct Histogram {
  std::int64_t bin_width_ps = 0;
  std::int64_t tau_min_ps = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_starts = 0;  // signal tags swept

  std::size_t size() const { return counts.size(); }
  double bin_center_s(std::size_t k) const;
  void validate() const;
};

// All-pairs correlation within [range_min_s, range_max_s) via a two-pointer
// sweep over the sorted streams. Widths and edges must resolve to whole
// picoseconds. Empty streams give an all-zero histogram.
Histogram cross_correlation_histogram(const TimeTagStream& signal,
                                      const TimeTagStream& idler, double bin_width_s,
                                      std::pair<double, double> range_s);

double singles_rate(const TimeTagStream& stream, double measurement_time_s);

// Two-sided exponential fit of a correlation peak on a flat background.
struct FitResult {
  double linewidth_signal_hz = 0.0;  // decay side tau > tau_peak
  double linewidth_idler_hz = 0.0;   // rise side tau < tau_peak
  double peak_amplitude = 0.0;       // counts per bin above background at the peak
  double background_level = 0.0;     // counts per bin
  double peak_time_s = 0.0;
  // Order: background, amplitude, linewidth_signal, linewidth_idler, peak_time.
  std::vector<double> parameter_uncertainties;
  double goodness = 0.0;  // reduced chi-square
  int iterations = 0;
};

// Poisson-weighted least squares of the bin-integrated model
//   background + amplitude * exp(-2 pi dv_+ (tau - tau_peak))   tau > tau_peak
//   background + amplitude * exp(+2 pi dv_- (tau - tau_peak))   tau < tau_peak
// Integrating the model over each bin removes the finite-bin peak bias.
FitResult fit_double_exponential(const Histogram& hist);

// Model bin content (counts) for the fitted parameters over [lo_s, hi_s).
double double_exp_bin_value(const FitResult& fit, double bin_width_s, double lo_s,
                            double hi_s);

struct DarkRates {
  double dark_signal_hz = 0.0;
  double dark_idler_hz = 0.0;
  double singles_signal_hz = 0.0;
  double singles_idler_hz = 0.0;
};

struct G2ZeroEstimate {
  double raw = 0.0;
  double dark_subtracted = 0.0;
};

// raw: fitted curve peak over the mean bin count inside the accidental
// window (|tau| between the window bounds on both sides). dark_subtracted:
// the dark-count share of the accidental level, estimated from the provided
// rates as (S_s d_i + d_s S_i - d_s d_i) / (S_s S_i), is removed from both
// the peak and the accidental mean. Without rates the two values coincide.
G2ZeroEstimate g2_zero_from_histogram(const Histogram& hist, const FitResult& fit,
                                      std::pair<double, double> accidental_window_s,
                                      const DarkRates* darks = nullptr);

enum class BackgroundTreatment { none, subtract };

// Windowed coincidence rate in Hz/mW. The window is the full width centered
// on the fitted peak; subtract estimates the accidental level from the bins
// outside twice the window.
double coincidence_rate(const Histogram& hist, double window_s, double measurement_time_s,
                        double pump_power_mw, BackgroundTreatment background);

// C / S_idler / detector_eff_signal.
double heralding_efficiency(double coincidence_rate_hz, double singles_idler_hz,
                            double detector_eff_signal);

// rate / (power * linewidth).
double spectral_brightness(double pair_rate_in_fiber_hz, double pump_power_mw,
                           double linewidth_mhz);

// (cavity / single_pass) with every listed correction factor divided out.
double enhancement_factor(double cavity_brightness, double single_pass_brightness,
                          const std::vector<double>& corrections);

// T / (T + L).
double escape_efficiency(double output_coupler_transmission, double internal_loss);

struct FringePoint {
  double phase_rad = 0.0;
  double counts = 0.0;
};

struct VisibilityResult {
  double visibility = 0.0;
  double uncertainty = 0.0;
};

// Sinusoid fit offset + A cos(phase) + B sin(phase); V = sqrt(A^2+B^2)/offset
// clamped to [0, 1]. Scan must cover at least one full period. A supplied
// dark level is subtracted from every point first.
VisibilityResult visibility_from_fringes(const std::vector<FringePoint>& scan,
                                         double dark_level = 0.0);

// Smallest mode count whose predicted (convolved) comb-peak width best
// matches the measured one; ties go to fewer modes.
int estimate_mode_count(double measured_peak_fwhm_s, double detector_response_fwhm_s,
                        const ModeLadderConfig& cfg, int max_modes = 12);

// First-harmonic modulation depth of the histogram around the fitted smooth
// model: 2|sum (c_k - m_k) e^{2 pi i tau_k / period}| / sum m_k over bins
// with |tau_k| <= half_range.
double fold_modulation(const Histogram& hist, const FitResult& fit, double period_s,
                       double half_range_s);

// Headline numbers of a source characterization run.
struct SourceMetrics {
  double g2_zero_raw = 0.0;
  double g2_zero_dark_subtracted = 0.0;
  double coincidence_rate_per_mw = 0.0;
  double singles_signal_hz = 0.0;
  double singles_idler_hz = 0.0;
  double heralding = 0.0;
  double spectral_brightness_val = 0.0;
  double enhancement = 0.0;
};

}  // namespace spdc
