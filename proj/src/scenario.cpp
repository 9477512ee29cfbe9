#include "spdc/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spdc/analysis.hpp"
#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/timetags.hpp"
#include "spdc/tracefiles.hpp"

namespace fs = std::filesystem;

namespace spdc {

namespace {

// Round-trip loss seen by the idler branch; the crystal absorbs noticeably
// more at the long wavelength, which halves its escape efficiency.
constexpr double kIdlerRoundTripLoss = 0.0225;

// Reference bench for the enhancement metric: a single-pass crystal of the
// same cut detected with the 0.60 / 0.10 detector pair over the full
// phase-matching bandwidth.
constexpr double kSinglePassDetectedHzPerMw = 3000.0;
constexpr double kSinglePassDetSignal = 0.60;
constexpr double kSinglePassDetIdler = 0.10;

// Streams are dumped only for runs small enough that the tag files stay a
// sensible artifact size; long soak runs keep histograms and traces only.
constexpr double kMaxStreamDumpSeconds = 1800.0;

std::string power_tag(double p_mw) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p_mw);
  return buf;
}

CorrelationTrace hist_trace(const Histogram& h) {
  CorrelationTrace t;
  t.grid.start_s = h.bin_center_s(0);
  t.grid.step_s = static_cast<double>(h.bin_width_ps) * 1e-12;
  t.grid.count = h.counts.size();
  t.values.assign(h.counts.begin(), h.counts.end());
  return t;
}

struct Bundle {
  const ScenarioConfig* cfg = nullptr;
  std::vector<std::string> files;
  std::vector<ReportEntry> report;

  std::string path(const std::string& name) const {
    return (fs::path(cfg->output_dir) / name).string();
  }
  void add_trace(const CorrelationTrace& t, const std::string& name) {
    const std::string p = path(name);
    write_trace_csv(t, p);
    files.push_back(p);
  }
  void add_spectrum(const ClusterSpectrum& s, const std::string& name) {
    const std::string p = path(name);
    write_spectrum_csv(s, p);
    files.push_back(p);
  }
  void add_stream(const TimeTagStream& s, const std::string& name) {
    const std::string p = path(name);
    write_ttag(s, p);
    files.push_back(p);
  }
  void entry(const std::string& name, double value, const std::string& unit) {
    report.push_back({name, value, unit});
  }
  void finish() {
    const std::string p = path("report.txt");
    write_report(report, p);
    files.push_back(p);
  }
};

void spectral_entries(Bundle& b, const ClusterSpectrum& sp, const std::string& suffix) {
  const ClusterStats st = cluster_stats(sp);
  b.entry("clusters_count" + suffix, static_cast<double>(st.clusters_count), "1");
  b.entry("cluster_spacing_hz" + suffix, st.cluster_spacing_hz, "Hz");
  b.entry("modes_above_half_max" + suffix, static_cast<double>(st.modes_above_half_max), "1");
  b.entry("effective_mode_number" + suffix, st.effective_mode_number, "1");
}

// Equal-weight comb ladder m_s = 0..n-1, m_i = -m_s, for illustrative traces.
ClusterSpectrum ladder_spectrum(const SourceSetup& src, int n) {
  ClusterSpectrum sp;
  sp.pump_hz = pump_frequency_hz(src);
  for (int m = 0; m < n; ++m) {
    ModePair mp;
    mp.m_signal = m;
    mp.m_idler = -m;
    mp.signal_hz = src.signal_lock_hz + m * src.fsr_signal_hz;
    mp.idler_hz = sp.pump_hz - mp.signal_hz;
    mp.weight = 1.0;
    sp.modes.push_back(mp);
  }
  sp.clusters = {{0, sp.modes.size()}};
  sp.gap_threshold_hz = 10.0 * src.fsr_signal_hz;
  return sp;
}

struct McPoint {
  double power_mw = 0.0;
  SimulationResult sim;
  Histogram hist;
  FitResult fit;
  G2ZeroEstimate g2;
  double singles_signal_hz = 0.0;
  double singles_idler_hz = 0.0;
  double rate_per_mw = 0.0;
};

McPoint run_point(const ScenarioConfig& cfg, const ClusterSpectrum& unfiltered,
                  const DelaySampler& delays, double power_mw, std::uint64_t seed) {
  McPoint pt;
  pt.power_mw = power_mw;
  const SimulationConfig sim_cfg = make_simulation_config(cfg, unfiltered, power_mw);
  pt.sim = simulate_stream(sim_cfg, delays, cfg.run.duration_s, seed);

  const double half = cfg.run.hist_half_range_s;
  pt.hist = cross_correlation_histogram(pt.sim.signal, pt.sim.idler, cfg.run.bin_width_s,
                                        {-half, half});
  pt.fit = fit_double_exponential(pt.hist);

  pt.singles_signal_hz = singles_rate(pt.sim.signal, pt.sim.measurement_time_s);
  pt.singles_idler_hz = singles_rate(pt.sim.idler, pt.sim.measurement_time_s);

  DarkRates darks;
  darks.dark_signal_hz = cfg.signal.dark_count_rate_hz;
  darks.dark_idler_hz = cfg.idler.dark_count_rate_hz;
  darks.singles_signal_hz = pt.singles_signal_hz;
  darks.singles_idler_hz = pt.singles_idler_hz;
  pt.g2 = g2_zero_from_histogram(
      pt.hist, pt.fit, {cfg.run.accidental_window_lo_s, cfg.run.accidental_window_hi_s},
      &darks);

  pt.rate_per_mw = coincidence_rate(pt.hist, cfg.run.coincidence_window_s,
                                    pt.sim.measurement_time_s, power_mw,
                                    BackgroundTreatment::subtract);
  return pt;
}

void point_entries(Bundle& b, const ScenarioConfig& cfg, const McPoint& pt, std::size_t idx) {
  const std::string k = "_" + std::to_string(idx);
  b.entry("power_mw" + k, pt.power_mw, "mW");
  b.entry("singles_signal" + k, pt.singles_signal_hz, "Hz");
  b.entry("singles_idler" + k, pt.singles_idler_hz, "Hz");
  b.entry("coincidence_rate_per_mw" + k, pt.rate_per_mw, "Hz/mW");
  b.entry("g2_zero_raw" + k, pt.g2.raw, "1");
  b.entry("g2_zero_dark_subtracted" + k, pt.g2.dark_subtracted, "1");
  b.entry("fit_linewidth_signal" + k, pt.fit.linewidth_signal_hz, "Hz");
  b.entry("fit_linewidth_idler" + k, pt.fit.linewidth_idler_hz, "Hz");
  b.entry("fit_reduced_chi2" + k, pt.fit.goodness, "1");
  b.entry("heralding" + k,
          heralding_efficiency(pt.rate_per_mw * pt.power_mw, pt.singles_idler_hz,
                               cfg.signal.detector_efficiency),
          "1");
  b.entry("generated_pairs" + k, static_cast<double>(pt.sim.generated_pairs), "1");
  b.entry("recorded_pairs" + k, static_cast<double>(pt.sim.recorded_pairs), "1");
}

void filtered_metrics(Bundle& b, const ScenarioConfig& cfg, const McPoint& pt,
                      const ClusterSpectrum& unfiltered) {
  const CavityModel cavity = make_cavity(cfg.source);
  const FilterCavity fc = make_filter(cfg.filter, cfg.source.signal_lock_hz);
  const double budget = cfg.filter.peak_transmission * cfg.filter.long_term_factor;
  const double kept = kept_weight_fraction(unfiltered, fc);

  // One symmetric linewidth figure for the pair: the geometric mean of the
  // two mode linewidths.
  const double linewidth_hz =
      std::sqrt(cfg.source.linewidth_signal_hz * cfg.source.linewidth_idler_hz);
  const double linewidth_mhz = linewidth_hz / 1e6;

  const double rate_in_fiber = pt.rate_per_mw / cfg.idler.detector_efficiency;
  const double br_detected = spectral_brightness(rate_in_fiber, 1.0, linewidth_mhz);

  const double escape_s =
      escape_efficiency(cavity.output_coupler_transmission, cavity.internal_loss);
  const double escape_i =
      escape_efficiency(cavity.output_coupler_transmission, kIdlerRoundTripLoss);

  // Generated brightness: divide out every bench throughput factor, counting
  // the lock duty cycle as lost source time.
  double generated = pt.rate_per_mw;
  const double ladder[] = {cfg.signal.path_transmission, cfg.idler.path_transmission,
                           budget,   cfg.signal.detector_efficiency,
                           cfg.idler.detector_efficiency, cfg.run.gate_duty,
                           escape_s, escape_i};
  for (double f : ladder) generated /= f;
  const double br_generated = spectral_brightness(generated, 1.0, linewidth_mhz);

  const double single_pass = (kSinglePassDetectedHzPerMw /
                              (kSinglePassDetSignal * kSinglePassDetIdler)) /
                             (cfg.source.envelope_fwhm_hz / 1e6);
  const double enhancement = enhancement_factor(
      br_detected, single_pass, {budget, cfg.run.gate_duty, escape_s, escape_i});

  b.entry("filter_budget", budget, "1");
  b.entry("kept_pair_fraction", kept, "1");
  b.entry("effective_linewidth", linewidth_hz, "Hz");
  b.entry("brightness_detected", br_detected, "1/(s*mW*MHz)");
  b.entry("brightness_generated", br_generated, "1/(s*mW*MHz)");
  b.entry("enhancement_factor", enhancement, "1");
  b.entry("escape_signal", escape_s, "1");
  b.entry("escape_idler", escape_i, "1");
}

void run_measurement_presets(Bundle& b, const ScenarioConfig& cfg) {
  const ClusterSpectrum spectrum = make_joint_spectrum(cfg);
  if (spectrum.empty())
    fail(ErrorCategory::domain,
         "scenario " + cfg.preset + ": no doubly resonant modes in the configured span");
  b.add_spectrum(spectrum, "spectrum.csv");
  spectral_entries(b, spectrum, "");

  ClusterSpectrum sim_modes = spectrum;
  if (cfg.filter.enabled) {
    const FilterCavity fc = make_filter(cfg.filter, cfg.source.signal_lock_hz);
    sim_modes = filtered_spectrum(spectrum, fc);
    if (sim_modes.empty())
      fail(ErrorCategory::domain,
           "scenario " + cfg.preset + ": the filter removes every resonant mode");
    b.add_spectrum(sim_modes, "spectrum_filtered.csv");
  }

  const CorrelationConfig corr = make_correlation_config(cfg, sim_modes);

  // Delay density for the sampler: fine enough to resolve the comb teeth,
  // wide enough that the truncated tail mass is negligible.
  const TauGrid pdf_grid = make_grid(-2e-6, 2e-6, 20e-12);
  const CorrelationTrace pdf = to_pdf(analytic_g2(corr, pdf_grid));
  const DelaySampler delays(pdf);

  // Plot-ready correlation window with the detector response applied.
  AnalyticG2Options no_coverage;
  no_coverage.enforce_coverage = false;
  const TauGrid comb_grid = make_grid(-150e-9, 150e-9, 20e-12);
  const CorrelationTrace comb = normalize_peak(
      convolve_response(analytic_g2(corr, comb_grid, no_coverage), cfg.run.response_fwhm_s));
  b.add_trace(comb, "g2_comb.csv");

  const TauGrid g1_grid = make_grid(-120e-12, 120e-12, 0.05e-12);
  const CorrelationTrace g1 = g1_signal(sim_modes, cfg.source.linewidth_signal_hz, g1_grid);
  b.add_trace(g1, "g1.csv");

  b.entry("transit_time_diff", corr.transit_time_diff_s, "s");
  b.entry("duration", cfg.run.duration_s, "s");

  std::vector<double> powers = cfg.run.powers_mw;
  if (powers.empty()) powers.push_back(cfg.run.pump_power_mw);

  for (std::size_t i = 0; i < powers.size(); ++i) {
    const McPoint pt = run_point(cfg, spectrum, delays, powers[i], derive_seed(cfg.seed, i));
    b.add_trace(hist_trace(pt.hist), "hist_" + power_tag(powers[i]) + "mW.csv");
    point_entries(b, cfg, pt, i);

    const bool dump_streams = cfg.run.duration_s <= kMaxStreamDumpSeconds &&
                              (powers.size() == 1 || powers[i] == 1.0);
    if (dump_streams) {
      b.add_stream(pt.sim.signal, "signal.ttag");
      b.add_stream(pt.sim.idler, "idler.ttag");
    }

    if (cfg.preset == "comb_oscillations" || cfg.preset == "filtered_source") {
      const double period = 1.0 / cfg.source.fsr_signal_hz;
      b.entry("fold_modulation_m1_" + std::to_string(i),
              fold_modulation(pt.hist, pt.fit, period, cfg.run.fold_half_range_s), "1");
    }
    if (cfg.preset == "filtered_source") {
      double floor = g1.values.empty() ? 0.0 : g1.values.front();
      for (double v : g1.values) floor = std::min(floor, v);
      b.entry("g1_floor_120ps", floor, "1");
      filtered_metrics(b, cfg, pt, spectrum);
    }
  }

  if (cfg.preset == "comb_oscillations")
    b.entry("oscillation_period", oscillation_period(comb, 0.05), "s");
}

void run_mode_ladder(Bundle& b, const ScenarioConfig& cfg) {
  const DispersionModel disp = make_dispersion(cfg.source);
  ModeLadderConfig ml;
  ml.damping_signal_hz = cfg.source.linewidth_signal_hz;
  ml.damping_idler_hz = cfg.source.linewidth_idler_hz;
  ml.fsr_signal_hz = cfg.source.fsr_signal_hz;
  ml.fsr_idler_hz = cfg.source.fsr_idler_hz;
  ml.transit_time_diff_s =
      transit_time_difference(disp, kSpeedOfLight / cfg.source.signal_lock_hz,
                              kSpeedOfLight / cfg.source.idler_center_hz);

  const std::vector<int> counts = {1, 2, 3, 4, 5, 6, 7, 8, 10};
  ml.response_fwhm_s = 0.0;
  const auto intrinsic = peak_width_vs_modes(counts, ml);
  ml.response_fwhm_s = cfg.run.response_fwhm_s;
  const auto convolved = peak_width_vs_modes(counts, ml);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::string n = std::to_string(counts[i]);
    b.entry("peak_fwhm_intrinsic_n" + n, intrinsic[i].second, "s");
    b.entry("peak_fwhm_convolved_n" + n, convolved[i].second, "s");
  }

  // Round trip of the estimator through the 4-mode convolved width.
  const double w4 = convolved[3].second;
  b.entry("estimated_modes_for_4mode_width",
          static_cast<double>(estimate_mode_count(w4, cfg.run.response_fwhm_s, ml)), "1");

  // Illustrative convolved traces for a few ladder depths.
  AnalyticG2Options no_coverage;
  no_coverage.enforce_coverage = false;
  const TauGrid grid = make_grid(-8e-9, 8e-9, 2e-12);
  for (int n : {1, 2, 4, 10}) {
    CorrelationConfig corr = make_correlation_config(cfg, ladder_spectrum(cfg.source, n));
    corr.equal_amplitudes = true;
    const CorrelationTrace t = normalize_peak(
        convolve_response(analytic_g2(corr, grid, no_coverage), cfg.run.response_fwhm_s));
    b.add_trace(t, "g2_ladder_n" + std::to_string(n) + ".csv");
  }
}

void run_cluster_survey(Bundle& b, const ScenarioConfig& cfg) {
  const ClusterSpectrum spectrum = make_joint_spectrum(cfg);
  if (spectrum.empty())
    fail(ErrorCategory::domain,
         "scenario " + cfg.preset + ": no doubly resonant modes in the configured span");
  b.add_spectrum(spectrum, "spectrum.csv");
  spectral_entries(b, spectrum, "");

  // Lock sitting half a comb-mismatch step away: the generic lock position,
  // which spreads the dominant cluster across four near-equal modes.
  ScenarioConfig detuned = cfg;
  const double delta = cfg.source.fsr_signal_hz - cfg.source.fsr_idler_hz;
  detuned.source.detuning_signal_hz = delta / 2.0;
  detuned.source.resonance_halfwidth_gammas = 4.0;
  const ClusterSpectrum shifted = make_joint_spectrum(detuned);
  b.add_spectrum(shifted, "spectrum_detuned.csv");
  spectral_entries(b, shifted, "_detuned");

  const TauGrid g1_grid = make_grid(-120e-12, 120e-12, 0.05e-12);
  b.add_trace(g1_signal(spectrum, cfg.source.linewidth_signal_hz, g1_grid), "g1.csv");

  b.entry("fsr_difference_hz", delta, "Hz");
  b.entry("vernier_spacing_hz",
          vernier_spacing(cfg.source.fsr_signal_hz, cfg.source.fsr_idler_hz), "Hz");
  const DispersionModel disp = make_dispersion(cfg.source);
  b.entry("transit_time_diff",
          transit_time_difference(disp, kSpeedOfLight / cfg.source.signal_lock_hz,
                                  kSpeedOfLight / cfg.source.idler_center_hz),
          "s");
}

}  // namespace

CavityModel make_cavity(const SourceSetup& src) {
  return CavityModel::from_linewidths(src.fsr_signal_hz, src.linewidth_signal_hz,
                                      src.fsr_idler_hz, src.linewidth_idler_hz);
}

PhaseMatchingEnvelope make_envelope(const SourceSetup& src) {
  PhaseMatchingEnvelope env;
  env.shape = src.envelope_shape == "gaussian" ? PhaseMatchingEnvelope::Shape::gaussian
                                               : PhaseMatchingEnvelope::Shape::sinc2;
  env.center_signal_hz = src.signal_lock_hz;
  env.fwhm_hz = src.envelope_fwhm_hz;
  env.validate();
  return env;
}

DispersionModel make_dispersion(const SourceSetup& src) {
  DispersionModel d;
  d.sellmeier = mgln_extraordinary();
  d.crystal_length_m = src.crystal_length_m;
  d.temperature_c = src.temperature_c;
  d.validate();
  return d;
}

double pump_frequency_hz(const SourceSetup& src) {
  return src.signal_lock_hz + src.idler_center_hz;
}

FilterCavity make_filter(const FilterSetup& filter, double center_hz) {
  FilterCavity fc;
  fc.center_hz = center_hz;
  fc.fsr_hz = filter.fsr_hz;
  fc.linewidth_hz = filter.linewidth_hz;
  fc.peak_transmission = filter.peak_transmission;
  fc.passes = filter.passes;
  fc.validate();
  return fc;
}

ClusterSpectrum make_joint_spectrum(const ScenarioConfig& cfg) {
  const CavityModel cavity = make_cavity(cfg.source);
  const PhaseMatchingEnvelope envelope = make_envelope(cfg.source);
  JointSpectrumOptions opt;
  opt.coincidence_tolerance_gammas = cfg.source.coincidence_tolerance_gammas;
  opt.resonance_halfwidth_gammas = cfg.source.resonance_halfwidth_gammas;
  return joint_spectrum(cavity, envelope, pump_frequency_hz(cfg.source),
                        cfg.source.detuning_signal_hz, cfg.source.span_hz, opt);
}

CorrelationConfig make_correlation_config(const ScenarioConfig& cfg,
                                          ClusterSpectrum spectrum) {
  const DispersionModel disp = make_dispersion(cfg.source);
  CorrelationConfig corr;
  corr.damping_signal_hz = cfg.source.linewidth_signal_hz;
  corr.damping_idler_hz = cfg.source.linewidth_idler_hz;
  corr.fsr_signal_hz = cfg.source.fsr_signal_hz;
  corr.fsr_idler_hz = cfg.source.fsr_idler_hz;
  corr.center_signal_hz = cfg.source.signal_lock_hz;
  corr.center_idler_hz = cfg.source.idler_center_hz;
  corr.transit_time_diff_s =
      transit_time_difference(disp, kSpeedOfLight / cfg.source.signal_lock_hz,
                              kSpeedOfLight / cfg.source.idler_center_hz);
  corr.weight_floor = 0.0;
  corr.modes = std::move(spectrum);
  corr.validate();
  return corr;
}

SimulationConfig make_simulation_config(const ScenarioConfig& cfg,
                                        const ClusterSpectrum& unfiltered,
                                        double pump_power_mw) {
  SimulationConfig sim;
  sim.source.pair_rate_per_mw_hz = cfg.source.pair_rate_per_mw_hz;
  sim.source.pump_power_mw = pump_power_mw;
  sim.gate.period_s = cfg.run.gate_period_s;
  sim.gate.duty = cfg.run.gate_duty;

  const double jitter = cfg.run.response_fwhm_s / std::sqrt(2.0);
  auto fill = [&](DetectionChain& dst, const DetectionSetup& src) {
    dst.path_transmission = src.path_transmission;
    dst.detector_efficiency = src.detector_efficiency;
    dst.extra_transmission = 1.0;
    dst.dark_count_rate_hz = src.dark_count_rate_hz;
    dst.background_rate_per_mw_hz = src.background_rate_per_mw_hz;
    dst.jitter_fwhm_s = jitter;
  };
  fill(sim.signal, cfg.signal);
  fill(sim.idler, cfg.idler);

  if (cfg.filter.enabled) {
    const FilterCavity fc = make_filter(cfg.filter, cfg.source.signal_lock_hz);
    const double budget = cfg.filter.peak_transmission * cfg.filter.long_term_factor;
    sim.signal.extra_transmission = budget * kept_weight_fraction(unfiltered, fc);
    sim.signal.background_rate_per_mw_hz =
        cfg.signal.background_rate_per_mw_hz * budget * filter_mean_relative(fc);
  }
  sim.validate();
  return sim;
}

ScenarioArtifacts run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec)
    fail(ErrorCategory::io, "cannot create output directory " + cfg.output_dir + ": " +
                                ec.message());

  Bundle b;
  b.cfg = &cfg;
  if (cfg.preset == "mode_ladder") {
    run_mode_ladder(b, cfg);
  } else if (cfg.preset == "cluster_survey") {
    run_cluster_survey(b, cfg);
  } else {
    run_measurement_presets(b, cfg);
  }
  b.finish();

  ScenarioArtifacts out;
  out.files = std::move(b.files);
  return out;
}

}  // namespace spdc
