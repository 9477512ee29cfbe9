#include "spdc/dispersion.hpp"

#include <cmath>
#include <string>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

SellmeierCoeffs mgln_extraordinary() {
  SellmeierCoeffs c;
  c.a = {5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2};
  c.b = {2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4};
  return c;
}

SellmeierCoeffs constant_index(double n0) {
  if (n0 <= 1.0) fail(ErrorCategory::domain, "constant index must exceed 1");
  SellmeierCoeffs c;
  c.a = {n0 * n0, 0.0, 0.0, 0.0, 12.52, 0.0};
  c.b = {0.0, 0.0, 0.0, 0.0};
  return c;
}

void DispersionModel::validate() const {
  if (!(crystal_length_m > 0.0))
    fail(ErrorCategory::validation, "DispersionModel: crystal_length must be > 0");
  if (air_path_m < 0.0)
    fail(ErrorCategory::validation, "DispersionModel: air_path must be >= 0");
}

namespace {

constexpr double kLamMinUm = 0.4;
constexpr double kLamMaxUm = 1.6;

double index_at_um(const SellmeierCoeffs& s, double lam_um, double temp_c) {
  const double f = (temp_c - 24.5) * (temp_c + 570.82);
  const double l2 = lam_um * lam_um;
  const double res1 = s.a[2] + s.b[2] * f;
  const double n2 = s.a[0] + s.b[0] * f
                    + (s.a[1] + s.b[1] * f) / (l2 - res1 * res1)
                    + (s.a[3] + s.b[3] * f) / (l2 - s.a[4] * s.a[4])
                    - s.a[5] * l2;
  if (!(n2 > 1.0) || !std::isfinite(n2))
    fail(ErrorCategory::domain, "Sellmeier evaluation left the physical regime at "
                                    + std::to_string(lam_um) + " um");
  return std::sqrt(n2);
}

double checked_um(double wavelength_m) {
  const double um = wavelength_m * 1e6;
  if (!(um >= kLamMinUm && um <= kLamMaxUm))
    fail(ErrorCategory::domain,
         "wavelength " + std::to_string(um) + " um outside supported range [0.4, 1.6] um");
  return um;
}

}  // namespace

double refractive_index(const DispersionModel& model, double wavelength_m) {
  model.validate();
  return index_at_um(model.sellmeier, checked_um(wavelength_m), model.temperature_c);
}

double group_index(const DispersionModel& model, double wavelength_m) {
  model.validate();
  const double um = checked_um(wavelength_m);
  // Central difference; 1e-4 um step balances truncation and cancellation.
  const double h = 1e-4;
  const double np = index_at_um(model.sellmeier, um + h, model.temperature_c);
  const double nm = index_at_um(model.sellmeier, um - h, model.temperature_c);
  const double n = index_at_um(model.sellmeier, um, model.temperature_c);
  return n - um * (np - nm) / (2.0 * h);
}

double free_spectral_range(const DispersionModel& model, double wavelength_m) {
  const double ng = group_index(model, wavelength_m);
  const double optical_path = model.air_path_m + ng * model.crystal_length_m;
  return kSpeedOfLight / optical_path;
}

double vernier_spacing(double fsr_a, double fsr_b) {
  if (!(fsr_a > 0.0) || !(fsr_b > 0.0))
    fail(ErrorCategory::domain, "vernier_spacing: free spectral ranges must be > 0");
  const double diff = std::fabs(fsr_a - fsr_b);
  if (diff == 0.0)
    fail(ErrorCategory::domain, "vernier_spacing: equal free spectral ranges (degenerate)");
  return fsr_a * fsr_b / diff;
}

double transit_time_difference(const DispersionModel& model,
                               double wavelength_a_m, double wavelength_b_m) {
  const double nga = group_index(model, wavelength_a_m);
  const double ngb = group_index(model, wavelength_b_m);
  return std::fabs(nga - ngb) * model.crystal_length_m / kSpeedOfLight;
}

}  // namespace spdc
