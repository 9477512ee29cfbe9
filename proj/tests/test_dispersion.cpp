#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "spdc/constants.hpp"
#include "spdc/dispersion.hpp"
#include "spdc/errors.hpp"

using namespace spdc;

namespace {

DispersionModel crystal_model() {
  DispersionModel m;
  m.sellmeier = mgln_extraordinary();
  m.crystal_length_m = 0.02;
  m.temperature_c = 24.5;
  return m;
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

TEST_CASE("extraordinary index sits in the physical range and disperses normally") {
  const auto m = crystal_model();
  const double n_signal = refractive_index(m, 606e-9);
  const double n_idler = refractive_index(m, 1436e-9);
  CHECK(n_signal > 2.1);
  CHECK(n_signal < 2.35);
  CHECK(n_idler > 2.0);
  CHECK(n_idler < n_signal);

  double prev = refractive_index(m, 0.45e-6);
  for (double um = 0.50; um < 1.56; um += 0.05) {
    const double n = refractive_index(m, um * 1e-6);
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("group index exceeds the phase index at both pair wavelengths") {
  const auto m = crystal_model();
  const double ng_s = group_index(m, 606e-9);
  const double ng_i = group_index(m, 1436e-9);
  // frozen values for this coefficient set at 24.5 C
  CHECK(ng_s == doctest::Approx(2.3578).epsilon(5e-4));
  CHECK(ng_i == doctest::Approx(2.1776).epsilon(5e-4));
  CHECK(ng_s > refractive_index(m, 606e-9));
  CHECK(ng_i > refractive_index(m, 1436e-9));
}

TEST_CASE("index rises with temperature") {
  auto m = crystal_model();
  const double n_room = refractive_index(m, 606e-9);
  m.temperature_c = 80.0;
  CHECK(refractive_index(m, 606e-9) > n_room);
}

TEST_CASE("wavelengths outside the supported band are rejected") {
  const auto m = crystal_model();
  CHECK(category_of([&] { refractive_index(m, 0.35e-6); }) == ErrorCategory::domain);
  CHECK(category_of([&] { refractive_index(m, 1.7e-6); }) == ErrorCategory::domain);
  CHECK(category_of([&] { group_index(m, 0.0); }) == ErrorCategory::domain);
}

TEST_CASE("model invariants are validated") {
  auto m = crystal_model();
  m.crystal_length_m = 0.0;
  CHECK(category_of([&] { refractive_index(m, 606e-9); }) == ErrorCategory::validation);
  m = crystal_model();
  m.air_path_m = -0.1;
  CHECK(category_of([&] { free_spectral_range(m, 606e-9); }) == ErrorCategory::validation);
}

TEST_CASE("constant-index stand-in has no dispersion") {
  DispersionModel m;
  m.sellmeier = constant_index(1.5);
  m.crystal_length_m = 0.1;
  m.air_path_m = 0.2;
  CHECK(refractive_index(m, 0.8e-6) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(refractive_index(m, 1.4e-6) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(group_index(m, 0.8e-6) == doctest::Approx(1.5).epsilon(1e-9));
  // optical path 0.2 m of air plus 1.5 x 0.1 m of glass
  CHECK(free_spectral_range(m, 0.8e-6) ==
        doctest::Approx(kSpeedOfLight / 0.35).epsilon(1e-9));
  CHECK(transit_time_difference(m, 0.6e-6, 1.4e-6) == doctest::Approx(0.0));
}

TEST_CASE("vernier spacing reproduces the generating mismatch exactly") {
  // construct fsr_i so that fsr_s * fsr_i / (fsr_s - fsr_i) = 44.5 GHz by algebra
  const double fsr_s = 414e6;
  const double delta = fsr_s * fsr_s / (44.5e9 + fsr_s);
  const double fsr_i = fsr_s - delta;
  CHECK(vernier_spacing(fsr_s, fsr_i) == doctest::Approx(44.5e9).epsilon(1e-9));
  CHECK(vernier_spacing(fsr_i, fsr_s) ==
        doctest::Approx(vernier_spacing(fsr_s, fsr_i)).epsilon(1e-15));
  CHECK(category_of([&] { vernier_spacing(fsr_s, fsr_s); }) == ErrorCategory::domain);
  CHECK(category_of([&] { vernier_spacing(-1.0, fsr_s); }) == ErrorCategory::domain);
}

TEST_CASE("geometric FSR mismatch puts the cluster spacing in the tens of GHz") {
  auto m = crystal_model();
  // choose the air path so the signal branch lands exactly on a 414 MHz FSR
  const double ng_s = group_index(m, 606e-9);
  m.air_path_m = kSpeedOfLight / 414e6 - ng_s * m.crystal_length_m;
  REQUIRE(m.air_path_m > 0.0);
  const double fsr_s = free_spectral_range(m, 606e-9);
  CHECK(fsr_s == doctest::Approx(414e6).epsilon(1e-12));
  const double fsr_i = free_spectral_range(m, 1436e-9);
  // smaller group index at the idler wavelength, so a shorter optical path
  // and a larger FSR in the same geometric cavity
  CHECK(fsr_i > fsr_s);
  const double spacing = vernier_spacing(fsr_s, fsr_i);
  CHECK(spacing > 10e9);
  CHECK(spacing < 100e9);
}

TEST_CASE("signal/idler transit-time difference through the 2 cm crystal") {
  const auto m = crystal_model();
  const double tau0 =
      transit_time_difference(m, kSpeedOfLight / 494.6e12, 1436e-9);
  CHECK(tau0 == doctest::Approx(1.20197556738e-11).epsilon(1e-6));
  CHECK(transit_time_difference(m, 606e-9, 606e-9) == doctest::Approx(0.0));
  // symmetric in its wavelength arguments
  CHECK(transit_time_difference(m, 1436e-9, kSpeedOfLight / 494.6e12) ==
        doctest::Approx(tau0).epsilon(1e-15));
}
