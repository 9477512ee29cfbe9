#include "spdc/cavity.hpp"

#include <cmath>
#include <string>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

CavityModel CavityModel::from_linewidths(double fsr_s, double gamma_s,
                                         double fsr_i, double gamma_i) {
  CavityModel m;
  m.fsr_signal_hz = fsr_s;
  m.fsr_idler_hz = fsr_i;
  m.damping_signal_hz = gamma_s;
  m.damping_idler_hz = gamma_i;
  m.finesse_signal = fsr_s / gamma_s;
  m.finesse_idler = fsr_i / gamma_i;
  m.validate();
  return m;
}

namespace {

void check_branch(const char* branch, double fsr, double finesse, double damping) {
  if (!(fsr > 0.0) || !(finesse > 0.0) || !(damping > 0.0))
    fail(ErrorCategory::validation,
         std::string("CavityModel: ") + branch + " fsr/finesse/damping must be > 0");
  const double expected = fsr / finesse;
  if (std::fabs(damping - expected) > 1e-9 * expected)
    fail(ErrorCategory::validation,
         std::string("CavityModel: ") + branch +
             " damping != fsr/finesse (consistency invariant; expected " +
             std::to_string(expected) + " Hz, got " + std::to_string(damping) + " Hz)");
}

}  // namespace

void CavityModel::validate() const {
  check_branch("signal", fsr_signal_hz, finesse_signal, damping_signal_hz);
  check_branch("idler", fsr_idler_hz, finesse_idler, damping_idler_hz);
  for (double r : mirror_reflectivities)
    if (!(r > 0.0 && r <= 1.0))
      fail(ErrorCategory::validation, "CavityModel: mirror reflectivities must be in (0,1]");
  if (!(internal_loss > 0.0 && internal_loss < 1.0))
    fail(ErrorCategory::validation, "CavityModel: internal_loss must be in (0,1)");
  if (!(output_coupler_transmission > 0.0 && output_coupler_transmission < 1.0))
    fail(ErrorCategory::validation,
         "CavityModel: output_coupler_transmission must be in (0,1)");
}

void PhaseMatchingEnvelope::validate() const {
  if (!(fwhm_hz > 0.0))
    fail(ErrorCategory::validation, "PhaseMatchingEnvelope: fwhm must be > 0");
  if (!(center_signal_hz > 0.0))
    fail(ErrorCategory::validation, "PhaseMatchingEnvelope: center frequency must be > 0");
}

double PhaseMatchingEnvelope::operator()(double nu_hz) const {
  const double d = nu_hz - center_signal_hz;
  if (shape == Shape::gaussian)
    return std::exp(-4.0 * kLn2 * (d / fwhm_hz) * (d / fwhm_hz));
  const double x = 2.0 * kSincSqHalfArg * d / fwhm_hz;
  if (std::fabs(x) < 1e-8) return 1.0 - x * x / 3.0;
  const double s = std::sin(x) / x;
  return s * s;
}

void FilterCavity::validate() const {
  if (!(linewidth_hz > 0.0) || !(fsr_hz > 0.0) || !(linewidth_hz < fsr_hz))
    fail(ErrorCategory::validation, "FilterCavity: requires 0 < linewidth < fsr");
  if (!(peak_transmission > 0.0 && peak_transmission <= 1.0))
    fail(ErrorCategory::validation, "FilterCavity: peak_transmission must be in (0,1]");
  if (passes < 1)
    fail(ErrorCategory::validation, "FilterCavity: passes must be >= 1");
}

double filter_transfer_relative(const FilterCavity& fc, double nu_hz) {
  // remainder() keeps the phase argument small, making the FSR periodicity
  // exact in floating point instead of merely approximate.
  const double u = std::remainder(nu_hz - fc.center_hz, fc.fsr_hz) / fc.fsr_hz;
  const double f2 = 2.0 * fc.finesse() / kPi;
  const double s = std::sin(kPi * u);
  const double single = 1.0 / (1.0 + f2 * f2 * s * s);
  double out = single;
  for (int p = 1; p < fc.passes; ++p) out *= single;
  return out;
}

double filter_transfer(const FilterCavity& fc, double nu_hz) {
  return fc.peak_transmission * filter_transfer_relative(fc, nu_hz);
}

double filter_mean_relative(const FilterCavity& fc) {
  // Trapezoid average over one period; the integrand is smooth and periodic,
  // so a fixed fine grid is plenty.
  const int n = 200000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double nu = fc.center_hz + fc.fsr_hz * (static_cast<double>(k) / n);
    acc += filter_transfer_relative(fc, nu);
  }
  return acc / n;
}

}  // namespace spdc
