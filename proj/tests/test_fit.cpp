#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "spdc/analysis.hpp"
#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/rng.hpp"

using namespace spdc;

namespace {

struct Shape {
  double background = 0.0;   // counts per bin
  double amplitude = 0.0;    // counts per bin at the peak
  double decay_hz = 0.0;     // linewidth on the tau > peak side
  double rise_hz = 0.0;      // linewidth on the tau < peak side
  double peak_time_s = 0.0;
};

double shape_value(const Shape& s, double tau) {
  const double d = tau - s.peak_time_s;
  return s.background +
         s.amplitude * (d >= 0.0 ? std::exp(-kTwoPi * s.decay_hz * d)
                                 : std::exp(kTwoPi * s.rise_hz * d));
}

// Simpson integration per bin: independent of the library's closed-form
// bin integral, so a bug there cannot cancel out of the test.
double bin_mean(const Shape& s, double lo, double hi) {
  const int steps = 64;
  const double h = (hi - lo) / steps;
  double acc = shape_value(s, lo) + shape_value(s, hi);
  for (int k = 1; k < steps; ++k)
    acc += shape_value(s, lo + k * h) * ((k % 2) ? 4.0 : 2.0);
  return acc * h / 3.0 / (hi - lo);
}

Histogram synthetic_histogram(const Shape& s, double bin_s, double half_range_s,
                              Rng* noise = nullptr) {
  Histogram h;
  h.bin_width_ps = std::llround(bin_s * 1e12);
  h.tau_min_ps = -std::llround(half_range_s * 1e12);
  const auto n = static_cast<std::size_t>(2 * std::llround(half_range_s / bin_s));
  h.counts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = (static_cast<double>(h.tau_min_ps) +
                       static_cast<double>(k) * static_cast<double>(h.bin_width_ps)) *
                      1e-12;
    double v = bin_mean(s, lo, lo + bin_s);
    if (noise) v = std::max(0.0, v + std::sqrt(v) * noise->gauss_pair().first);
    h.counts.push_back(static_cast<std::uint64_t>(std::llround(v)));
  }
  h.total_starts = 1000;
  return h;
}

ErrorCategory category_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an Error");
  return ErrorCategory::internal;
}

}  // namespace

TEST_CASE("noise-free histogram is recovered to high precision") {
  Shape s;
  s.background = 40.0;
  s.amplitude = 3000.0;
  s.decay_hz = 2.9e6;
  s.rise_hz = 1.7e6;
  s.peak_time_s = 0.0;
  const auto hist = synthetic_histogram(s, 10e-9, 2e-6);
  const auto fit = fit_double_exponential(hist);
  CHECK(fit.background_level == doctest::Approx(s.background).epsilon(2e-3));
  CHECK(fit.peak_amplitude == doctest::Approx(s.amplitude).epsilon(2e-3));
  CHECK(fit.linewidth_signal_hz == doctest::Approx(s.decay_hz).epsilon(2e-3));
  CHECK(fit.linewidth_idler_hz == doctest::Approx(s.rise_hz).epsilon(2e-3));
  CHECK(std::fabs(fit.peak_time_s - s.peak_time_s) < 1e-9);
  CHECK(fit.goodness < 0.5);  // only integer rounding remains
  CHECK(fit.iterations > 0);
  REQUIRE(fit.parameter_uncertainties.size() == 5);
  for (double u : fit.parameter_uncertainties) CHECK(u >= 0.0);
}

TEST_CASE("the two linewidths keep their sides") {
  // strongly asymmetric shape: fast decay, slow rise
  Shape s;
  s.background = 20.0;
  s.amplitude = 2000.0;
  s.decay_hz = 5.0e6;
  s.rise_hz = 1.0e6;
  const auto fit = fit_double_exponential(synthetic_histogram(s, 10e-9, 2e-6));
  CHECK(fit.linewidth_signal_hz == doctest::Approx(5.0e6).epsilon(5e-3));
  CHECK(fit.linewidth_idler_hz == doctest::Approx(1.0e6).epsilon(5e-3));
}

TEST_CASE("poisson-level noise leaves parameters within a few percent") {
  // Counts are kept high enough that the data-derived fit weights carry no
  // visible small-count bias (roughly -1/mean per bin, so <1% here).
  Shape s;
  s.background = 100.0;
  s.amplitude = 3000.0;
  s.decay_hz = 2.9e6;
  s.rise_hz = 1.7e6;
  Rng noise(20240817);
  const auto hist = synthetic_histogram(s, 10e-9, 2e-6, &noise);
  const auto fit = fit_double_exponential(hist);
  CHECK(fit.background_level == doctest::Approx(s.background).epsilon(0.05));
  CHECK(fit.peak_amplitude == doctest::Approx(s.amplitude).epsilon(0.05));
  CHECK(fit.linewidth_signal_hz == doctest::Approx(s.decay_hz).epsilon(0.05));
  CHECK(fit.linewidth_idler_hz == doctest::Approx(s.rise_hz).epsilon(0.05));
  CHECK(fit.goodness > 0.6);
  CHECK(fit.goodness < 1.5);
  // quoted uncertainties should cover the true values at ~3 sigma
  CHECK(std::fabs(fit.linewidth_signal_hz - s.decay_hz) <
        4.0 * fit.parameter_uncertainties[2]);
  CHECK(std::fabs(fit.linewidth_idler_hz - s.rise_hz) <
        4.0 * fit.parameter_uncertainties[3]);
}

TEST_CASE("an off-center peak is located") {
  Shape s;
  s.background = 30.0;
  s.amplitude = 2500.0;
  s.decay_hz = 2.9e6;
  s.rise_hz = 1.7e6;
  s.peak_time_s = 37e-9;
  const auto fit = fit_double_exponential(synthetic_histogram(s, 10e-9, 2e-6));
  CHECK(std::fabs(fit.peak_time_s - s.peak_time_s) < 10e-9);
  CHECK(fit.linewidth_signal_hz == doctest::Approx(s.decay_hz).epsilon(5e-3));
}

TEST_CASE("degenerate inputs are rejected with estimator errors") {
  Histogram flat;
  flat.bin_width_ps = 10000;
  flat.tau_min_ps = -1000000;
  flat.counts.assign(200, 50);
  flat.total_starts = 10;
  CHECK(category_of([&] { fit_double_exponential(flat); }) == ErrorCategory::estimate);

  Histogram zeros = flat;
  zeros.counts.assign(200, 0);
  CHECK(category_of([&] { fit_double_exponential(zeros); }) == ErrorCategory::estimate);

  Histogram tiny = flat;
  tiny.counts.assign(8, 100);
  CHECK(category_of([&] { fit_double_exponential(tiny); }) == ErrorCategory::domain);
}

TEST_CASE("fitted-model bin values integrate consistently") {
  Shape s;
  s.background = 40.0;
  s.amplitude = 3000.0;
  s.decay_hz = 2.9e6;
  s.rise_hz = 1.7e6;
  const auto fit = fit_double_exponential(synthetic_histogram(s, 10e-9, 2e-6));

  // additivity across a split bin, both away from and across the peak
  for (double lo : {-40e-9, -5e-9, 120e-9}) {
    const double whole = double_exp_bin_value(fit, 10e-9, lo, lo + 10e-9);
    const double halves = double_exp_bin_value(fit, 10e-9, lo, lo + 5e-9) +
                          double_exp_bin_value(fit, 10e-9, lo + 5e-9, lo + 10e-9);
    CHECK(whole == doctest::Approx(halves).epsilon(1e-12));
  }
  // agrees with an independent quadrature of the same parameters
  Shape f;
  f.background = fit.background_level;
  f.amplitude = fit.peak_amplitude;
  f.decay_hz = fit.linewidth_signal_hz;
  f.rise_hz = fit.linewidth_idler_hz;
  f.peak_time_s = fit.peak_time_s;
  for (double lo : {-200e-9, 0.0, 55e-9}) {
    CHECK(double_exp_bin_value(fit, 10e-9, lo, lo + 10e-9) ==
          doctest::Approx(bin_mean(f, lo, lo + 10e-9)).epsilon(1e-8));
  }
  CHECK(category_of([&] { double_exp_bin_value(fit, 10e-9, 1e-9, 1e-9); }) ==
        ErrorCategory::domain);
}
