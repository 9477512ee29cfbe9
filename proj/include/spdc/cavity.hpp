#pragma once

#include <array>

namespace spdc {

// Doubly-resonant source cavity, one parameter set per wavelength branch.
// Linewidths (damping, FWHM) are tied to fsr/finesse; the constructor-style
// validate() enforces the consistency so configs cannot drift apart.
struct CavityModel {
  double fsr_signal_hz = 0.0;
  double fsr_idler_hz = 0.0;
  double finesse_signal = 0.0;
  double finesse_idler = 0.0;
  double damping_signal_hz = 0.0;  // gamma_s, full linewidth
  double damping_idler_hz = 0.0;   // gamma_i
  std::array<double, 4> mirror_reflectivities{1.0, 1.0, 1.0, 1.0};
  double internal_loss = 0.01;               // per round trip
  double output_coupler_transmission = 0.015;

  // Builds a consistent model from FSR + linewidth per branch.
  static CavityModel from_linewidths(double fsr_s, double gamma_s,
                                     double fsr_i, double gamma_i);

  void validate() const;
};

struct PhaseMatchingEnvelope {
  enum class Shape { sinc2, gaussian };
  Shape shape = Shape::sinc2;
  double center_signal_hz = 0.0;
  double fwhm_hz = 0.0;

  void validate() const;
  // 1 at center, 1/2 at center +- fwhm/2.
  double operator()(double nu_hz) const;
};

// Fabry-Perot filter in the signal arm. `passes` sharpens the line shape
// (the beam traverses the etalon that many times); peak_transmission is the
// overall on-resonance power budget and is applied once.
struct FilterCavity {
  double center_hz = 0.0;
  double fsr_hz = 0.0;
  double linewidth_hz = 0.0;  // single-pass FWHM
  double peak_transmission = 1.0;
  int passes = 1;

  void validate() const;
  double finesse() const { return fsr_hz / linewidth_hz; }
};

// Airy transmission: peak_transmission / (1 + (2F/pi)^2 sin^2(pi (nu-c)/fsr))
// per pass, FSR-periodic, bounded in (0, peak_transmission].
double filter_transfer(const FilterCavity& fc, double nu_hz);

// Same but with peak value 1; useful for relative suppression bookkeeping.
double filter_transfer_relative(const FilterCavity& fc, double nu_hz);

// Spectral average of filter_transfer_relative over one FSR (broadband input).
double filter_mean_relative(const FilterCavity& fc);

}  // namespace spdc
