#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "spdc/config.hpp"
#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/scenario.hpp"
#include "spdc/spectral.hpp"

using namespace spdc;

namespace {

ErrorCategory category_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an Error");
  return ErrorCategory::internal;
}

FilterCavity preset_filter() {
  const auto cfg = built_in_preset("filtered_source");
  return make_filter(cfg.filter, cfg.source.signal_lock_hz);
}

}  // namespace

TEST_CASE("mode comb is uniform, indexed, and anchored at the lock point") {
  const auto cavity = CavityModel::from_linewidths(414e6, 2.9e6, 410.18e6, 1.7e6);
  const auto comb = mode_comb(cavity, Branch::signal, 494.6e12, 10e9);
  REQUIRE(!comb.empty());
  const auto center = std::find_if(comb.begin(), comb.end(),
                                   [](const CombMode& m) { return m.index == 0; });
  REQUIRE(center != comb.end());
  CHECK(center->frequency_hz == 494.6e12);
  for (std::size_t k = 1; k < comb.size(); ++k) {
    CHECK(comb[k].index == comb[k - 1].index + 1);
    CHECK(comb[k].frequency_hz - comb[k - 1].frequency_hz ==
          doctest::Approx(414e6).epsilon(1e-9));
  }
  CHECK(comb.front().frequency_hz >= 494.6e12 - 5e9 - 414e6);
  CHECK(comb.back().frequency_hz <= 494.6e12 + 5e9 + 414e6);
  // the idler comb uses its own spacing
  const auto idler = mode_comb(cavity, Branch::idler, 208.8e12, 10e9);
  CHECK(idler[1].frequency_hz - idler[0].frequency_hz ==
        doctest::Approx(410.18e6).epsilon(1e-9));
}

TEST_CASE("default source spectrum: three clusters at the Vernier spacing") {
  const auto cfg = built_in_preset("power_sweep");
  const auto spec = make_joint_spectrum(cfg);
  spec.validate();
  const auto stats = cluster_stats(spec);
  CHECK(stats.clusters_count == 3);
  CHECK(stats.cluster_spacing_hz == doctest::Approx(44495590036.4).epsilon(1e-6));
  // grouping agrees with the two-comb Vernier algebra within 2%
  const double vernier =
      vernier_spacing(cfg.source.fsr_signal_hz, cfg.source.fsr_idler_hz);
  CHECK(std::fabs(stats.cluster_spacing_hz - vernier) / vernier < 0.02);
  REQUIRE(stats.modes_per_cluster.size() == 3);
  CHECK(stats.modes_per_cluster[0] == 4);
  CHECK(stats.modes_per_cluster[1] == 5);
  CHECK(stats.modes_per_cluster[2] == 4);
  CHECK(stats.dominant_cluster == 1);
  CHECK(stats.modes_above_half_max == 3);
  CHECK(stats.effective_mode_number == doctest::Approx(4.56146718428).epsilon(1e-6));
}

TEST_CASE("energy conservation holds as an identity for every pair") {
  const auto cfg = built_in_preset("power_sweep");
  const auto spec = make_joint_spectrum(cfg);
  const double pump = pump_frequency_hz(cfg.source);
  CHECK(spec.pump_hz == pump);
  double wmax = 0.0;
  for (const auto& m : spec.modes) {
    CHECK(m.signal_hz + m.idler_hz == pump);
    CHECK(m.weight > 0.0);
    CHECK(m.weight <= 1.0);
    wmax = std::max(wmax, m.weight);
  }
  CHECK(wmax == 1.0);
}

TEST_CASE("generic half-step lock detuning spreads four modes above half maximum") {
  auto cfg = built_in_preset("cluster_survey");
  const double delta = cfg.source.fsr_signal_hz - cfg.source.fsr_idler_hz;
  cfg.source.detuning_signal_hz = delta / 2.0;
  cfg.source.resonance_halfwidth_gammas = 4.0;
  const auto stats = cluster_stats(make_joint_spectrum(cfg));
  CHECK(stats.clusters_count == 3);
  CHECK(stats.modes_above_half_max == 4);
  CHECK(stats.effective_mode_number == doctest::Approx(6.32684831032).epsilon(1e-6));
}

TEST_CASE("tight coincidence tolerance with a detuned lock finds no resonances") {
  auto cfg = built_in_preset("power_sweep");
  const double delta = cfg.source.fsr_signal_hz - cfg.source.fsr_idler_hz;
  // half-step detuning pushes every central-cluster mismatch to >= delta/2;
  // the span stops short of the side clusters where the combs re-align
  cfg.source.detuning_signal_hz = delta / 2.0;
  cfg.source.coincidence_tolerance_gammas = 1.0;  // 1.7 MHz < delta/2 = 1.9 MHz
  cfg.source.span_hz = 40e9;
  const auto spec = make_joint_spectrum(cfg);
  CHECK(spec.empty());  // a valid result, not an error...
  CHECK(category_of([&] { cluster_stats(spec); }) == ErrorCategory::domain);  // ...until summarized
}

TEST_CASE("equal-weights option flattens the mode ladder") {
  const auto cfg = built_in_preset("power_sweep");
  JointSpectrumOptions opt;
  opt.resonance_halfwidth_gammas = cfg.source.resonance_halfwidth_gammas;
  opt.coincidence_tolerance_gammas = cfg.source.coincidence_tolerance_gammas;
  opt.equal_weights = true;
  const auto spec =
      joint_spectrum(make_cavity(cfg.source), make_envelope(cfg.source),
                     pump_frequency_hz(cfg.source), 0.0, cfg.source.span_hz, opt);
  REQUIRE(!spec.empty());
  for (const auto& m : spec.modes) CHECK(m.weight == 1.0);
  CHECK(cluster_stats(spec).effective_mode_number ==
        doctest::Approx(static_cast<double>(spec.modes.size())).epsilon(1e-12));
}

TEST_CASE("span beyond the envelope guard is rejected") {
  const auto cfg = built_in_preset("power_sweep");
  CHECK(category_of([&] {
          joint_spectrum(make_cavity(cfg.source), make_envelope(cfg.source),
                         pump_frequency_hz(cfg.source), 0.0,
                         6.0 * cfg.source.envelope_fwhm_hz);
        }) == ErrorCategory::domain);
}

TEST_CASE("hand-built spectrum groups clusters by the gap rule") {
  const auto spec = make_spectrum(
      703e12, 494.6e12, {{-44.5e9, 0.2}, {0.0, 1.0}, {44.5e9, 0.2}}, 4.14e9);
  spec.validate();
  const auto stats = cluster_stats(spec);
  CHECK(stats.clusters_count == 3);
  CHECK(stats.cluster_spacing_hz == doctest::Approx(44.5e9).epsilon(1e-11));
  CHECK(stats.dominant_cluster == 1);
  CHECK(stats.modes_above_half_max == 1);
  CHECK(stats.effective_mode_number == doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("Airy transfer: periodic, normalized, half-width at half maximum") {
  FilterCavity fc;
  fc.center_hz = 494.6e12;
  fc.fsr_hz = 16.8e9;
  fc.linewidth_hz = 80e6;
  fc.peak_transmission = 0.22;
  fc.passes = 1;
  fc.validate();
  CHECK(fc.finesse() == doctest::Approx(210.0).epsilon(1e-12));
  CHECK(filter_transfer(fc, fc.center_hz) == doctest::Approx(0.22).epsilon(1e-12));
  CHECK(filter_transfer_relative(fc, fc.center_hz) == doctest::Approx(1.0).epsilon(1e-12));
  // FSR periodicity
  CHECK(filter_transfer_relative(fc, fc.center_hz + 3.2e9) ==
        doctest::Approx(filter_transfer_relative(fc, fc.center_hz + 3.2e9 + fc.fsr_hz))
            .epsilon(1e-9));
  // half maximum half a linewidth off resonance (high-finesse limit)
  CHECK(filter_transfer_relative(fc, fc.center_hz + 40e6) ==
        doctest::Approx(0.5).epsilon(2e-3));
  // broadband average of the Airy profile: 1/sqrt(1 + (2F/pi)^2)
  const double a = std::pow(2.0 * fc.finesse() / kPi, 2.0);
  CHECK(filter_mean_relative(fc) ==
        doctest::Approx(1.0 / std::sqrt(1.0 + a)).epsilon(1e-3));
}

TEST_CASE("double passing squares the relative line shape, budget applied once") {
  FilterCavity one;
  one.center_hz = 494.6e12;
  one.fsr_hz = 16.8e9;
  one.linewidth_hz = 80e6;
  one.peak_transmission = 0.22;
  one.passes = 1;
  FilterCavity two = one;
  two.passes = 2;
  for (double off : {0.0, 20e6, 40e6, 100e6, 414e6, 1e9}) {
    const double r1 = filter_transfer_relative(one, one.center_hz + off);
    CHECK(filter_transfer_relative(two, two.center_hz + off) ==
          doctest::Approx(r1 * r1).epsilon(1e-12));
  }
  CHECK(filter_transfer(two, two.center_hz) == doctest::Approx(0.22).epsilon(1e-12));
  // frozen broadband mean of the double-pass preset line
  CHECK(filter_mean_relative(two) == doctest::Approx(3.740096e-3).epsilon(1e-4));
}

TEST_CASE("signal-arm filter isolates the central mode of the spectrum") {
  const auto cfg = built_in_preset("filtered_source");
  const auto spec = make_joint_spectrum(cfg);
  const auto fc = preset_filter();

  const double kept = kept_weight_fraction(spec, fc);
  CHECK(kept == doctest::Approx(0.219249127928).epsilon(1e-6));

  const auto filt = filtered_spectrum(spec, fc);
  filt.validate();
  REQUIRE(!filt.empty());
  double lock_weight = 0.0;
  double max_side = 0.0;
  for (const auto& m : filt.modes) {
    if (m.m_signal == 0)
      lock_weight = m.weight;
    else
      max_side = std::max(max_side, m.weight);
  }
  CHECK(lock_weight == 1.0);  // renormalized to the surviving maximum
  CHECK(max_side < 0.01);     // neighbours sit 414 MHz off an 80 MHz double-pass line
}

TEST_CASE("spectrum invariants are enforced") {
  auto spec = make_spectrum(703e12, 494.6e12, {{0.0, 1.0}, {414e6, 0.5}}, 4.14e9);
  spec.modes[1].weight = 1.5;
  CHECK(category_of([&] { spec.validate(); }) == ErrorCategory::validation);
  spec.modes[1].weight = 0.25;
  std::swap(spec.modes[0], spec.modes[1]);
  CHECK(category_of([&] { spec.validate(); }) == ErrorCategory::validation);
}
