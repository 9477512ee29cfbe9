#pragma once

#include <array>

namespace spdc {

// Temperature-dependent Sellmeier model
//   n^2 = a1 + b1 f + (a2 + b2 f)/(lam^2 - (a3 + b3 f)^2)
//       + (a4 + b4 f)/(lam^2 - a5^2) - a6 lam^2,
// with lam in micrometres and f = (T - 24.5)(T + 570.82), T in Celsius.
struct SellmeierCoeffs {
  std::array<double, 6> a{};  // a1..a6
  std::array<double, 4> b{};  // b1..b4
};

// Extraordinary ray of 5% MgO-doped congruent lithium niobate (Gayer et al.,
// Appl. Phys. B 91, 343 (2008) coefficient set).
SellmeierCoeffs mgln_extraordinary();

// Dispersionless stand-in with index n0 at every wavelength.
SellmeierCoeffs constant_index(double n0);

struct DispersionModel {
  SellmeierCoeffs sellmeier;
  double crystal_length_m = 0.02;
  double air_path_m = 0.0;  // rest of the cavity round trip
  double temperature_c = 24.5;

  void validate() const;
};

// n(lambda). Wavelength in metres; supported range [0.4, 1.6] um.
double refractive_index(const DispersionModel& model, double wavelength_m);

// Group index n_g = n - lambda dn/dlambda at the given wavelength.
double group_index(const DispersionModel& model, double wavelength_m);

// Free spectral range of the crystal+air round trip at this wavelength, using
// the group index for the crystal segment.
double free_spectral_range(const DispersionModel& model, double wavelength_m);

// Vernier cluster spacing fsr_a * fsr_b / |fsr_a - fsr_b|.
double vernier_spacing(double fsr_a, double fsr_b);

// Transit-time difference |n_g(a) - n_g(b)| * L / c through the crystal.
double transit_time_difference(const DispersionModel& model,
                               double wavelength_a_m, double wavelength_b_m);

}  // namespace spdc
