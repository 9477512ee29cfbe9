#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "spdc/spectral.hpp"

namespace spdc {

struct TauGrid {
  double start_s = 0.0;
  double step_s = 0.0;
  std::size_t count = 0;

  double at(std::size_t k) const { return start_s + static_cast<double>(k) * step_s; }
  double end_s() const { return at(count ? count - 1 : 0); }
  void validate() const;
};

TauGrid make_grid(double min_s, double max_s, double step_s);

struct CorrelationTrace {
  enum class Normalization { raw_arbitrary, unit_area_pdf, tail_normalized_g2 };

  TauGrid grid;
  std::vector<double> values;
  Normalization normalization = Normalization::raw_arbitrary;

  void validate() const;
};

// Inputs of the mode-sum two-photon correlation. The mode list supplies
// comb indices and weights; weights multiply the per-mode amplitude.
struct CorrelationConfig {
  ClusterSpectrum modes;
  double damping_signal_hz = 0.0;  // gamma_s
  double damping_idler_hz = 0.0;   // gamma_i
  double fsr_signal_hz = 0.0;
  double fsr_idler_hz = 0.0;
  double transit_time_diff_s = 0.0;  // tau0
  // Center frequencies enter only through the constant sqrt(w_s w_i) scale.
  double center_signal_hz = 0.0;
  double center_idler_hz = 0.0;
  // Drop modes below this fraction of the max weight before summing.
  double weight_floor = 1e-4;
  // Replace the complex 1/(Gamma_s+Gamma_i) prefactor by the constant
  // 1/mean-damping: every mode contributes with equal magnitude (idealized
  // equal-height mode ladder).
  bool equal_amplitudes = false;

  void validate() const;
};

struct AnalyticG2Options {
  // The default demands the grid cover +-5/(2 pi gamma_min) so normalizations
  // see the full decay. Internal peak-shape studies disable it.
  bool enforce_coverage = true;
};

// Mode-sum G2(tau): piecewise two-branch complex amplitude per mode pair
// (decay at gamma_s/2 + i m_s FSR_s for tau >= tau0/2, growth at the idler
// pole for tau < tau0/2, each with its sinc(i pi tau0 Gamma) factor and
// 1/(Gamma_s+Gamma_i) prefactor), coherently summed and squared. Output is
// raw_arbitrary scale.
CorrelationTrace analytic_g2(const CorrelationConfig& cfg, const TauGrid& grid,
                             const AnalyticG2Options& opt = {});

// Two-sided exponential exp(-2 pi gamma_s tau) / exp(+2 pi gamma_i tau),
// peak 1 at tau = 0.
CorrelationTrace single_mode_g2(double damping_signal_hz, double damping_idler_hz,
                                const TauGrid& grid);

// |g1(dt)| of the signal field: intensity-weighted sum of per-mode Lorentzian
// coherences, normalized so |g1(0)| = 1.
CorrelationTrace g1_signal(const ClusterSpectrum& spectrum, double damping_signal_hz,
                           const TauGrid& grid);

enum class ResponseShape { gaussian };

// Discrete convolution with a unit-sum Gaussian kernel (FWHM given), zero
// padding at the edges, length preserved.
CorrelationTrace convolve_response(const CorrelationTrace& trace,
                                   double response_fwhm_s,
                                   ResponseShape shape = ResponseShape::gaussian);

// Trapezoid integral of the trace.
double trace_area(const CorrelationTrace& trace);

// Rescale so the maximum value is 1 (normalization tag unchanged).
CorrelationTrace normalize_peak(const CorrelationTrace& trace);

// Rescale to unit trapezoid area and tag as unit_area_pdf.
CorrelationTrace to_pdf(const CorrelationTrace& trace);

// FWHM of the highest peak via linear interpolation of the half crossings.
double trace_fwhm(const CorrelationTrace& trace);

// Positions of local maxima at least min_relative_height of the global max.
std::vector<double> oscillation_peaks(const CorrelationTrace& trace,
                                      double min_relative_height);

// Mean spacing of those maxima; needs at least two.
double oscillation_period(const CorrelationTrace& trace, double min_relative_height);

struct ModeLadderConfig {
  double damping_signal_hz = 0.0;
  double damping_idler_hz = 0.0;
  double fsr_signal_hz = 0.0;
  double fsr_idler_hz = 0.0;
  double transit_time_diff_s = 0.0;
  double response_fwhm_s = 0.0;  // > 0: convolve before measuring the width
  double grid_step_s = 2e-12;
};

// Central-peak FWHM of an equal-amplitude n-mode ladder for each requested n;
// non-increasing in n.
std::vector<std::pair<int, double>> peak_width_vs_modes(
    const std::vector<int>& n_modes_list, const ModeLadderConfig& cfg);

// First-harmonic modulation depth of a trace around a least-squares-scaled
// smooth reference (e.g. the single-mode envelope):
// 2 |sum (v - s*ref) e^{2 pi i tau / period}| / sum (s*ref) over |tau| <= range.
double fold_modulation_trace(const CorrelationTrace& trace, const CorrelationTrace& reference,
                             double period_s, double half_range_s);

// 1 + pair_rate * pdf_peak / (singles_s * singles_i): accidental-floor model
// of the zero-delay correlation.
double predict_g2_zero(double pair_rate_detected_hz, double pdf_peak_per_s,
                       double singles_signal_hz, double singles_idler_hz);

}  // namespace spdc
