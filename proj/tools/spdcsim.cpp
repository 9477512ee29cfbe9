// spdcsim: cavity-enhanced pair-source simulator and analysis tool.
//
// Verbs mirror the pipeline stages: spectrum -> g2/g1 -> simulate -> analyze,
// plus `scenario` which runs a full preset and writes its report bundle.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdc/analysis.hpp"
#include "spdc/config.hpp"
#include "spdc/constants.hpp"
#include "spdc/correlation.hpp"
#include "spdc/errors.hpp"
#include "spdc/montecarlo.hpp"
#include "spdc/scenario.hpp"
#include "spdc/spectral.hpp"
#include "spdc/timetags.hpp"
#include "spdc/tracefiles.hpp"

namespace fs = std::filesystem;

namespace {

int exit_code(spdc::ErrorCategory c) {
  switch (c) {
    case spdc::ErrorCategory::parse: return 2;
    case spdc::ErrorCategory::validation: return 3;
    case spdc::ErrorCategory::not_found: return 4;
    case spdc::ErrorCategory::domain: return 5;
    case spdc::ErrorCategory::estimate: return 6;
    case spdc::ErrorCategory::io: return 7;
    case spdc::ErrorCategory::internal: return 10;
  }
  return 10;
}

struct Opts {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string signal_path;  // analyze only
  std::string idler_path;   // analyze only
};

void add_common(CLI::App* sub, Opts& o, bool preset_positional) {
  CLI::Option* preset_opt =
      preset_positional ? sub->add_option("preset", o.preset, "built-in preset name")
                        : sub->add_option("--preset", o.preset, "built-in preset name");
  sub->add_option("--config", o.config_path, "configuration file")->excludes(preset_opt);
  sub->add_option("--out", o.out_dir, "output directory (overrides config and environment)");
  sub->add_option("--seed", o.seed, "random seed override")
      ->each([&o](const std::string&) { o.seed_set = true; });
}

spdc::ScenarioConfig resolve(const Opts& o) {
  spdc::ScenarioConfig cfg =
      o.config_path.empty()
          ? spdc::built_in_preset(o.preset.empty() ? "power_sweep" : o.preset)
          : spdc::load_config(o.config_path);
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.out_dir.empty()) {
    cfg.output_dir = o.out_dir;
  } else if (const char* env = std::getenv("SPDCSIM_OUT_DIR")) {
    if (env[0] != '\0') cfg.output_dir = env;
  }
  return cfg;
}

std::string out_path(const spdc::ScenarioConfig& cfg, const std::string& name) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec)
    spdc::fail(spdc::ErrorCategory::io,
               "cannot create output directory " + cfg.output_dir + ": " + ec.message());
  return (fs::path(cfg.output_dir) / name).string();
}

void run_spectrum(const Opts& o) {
  const spdc::ScenarioConfig cfg = resolve(o);
  const spdc::ClusterSpectrum sp = spdc::make_joint_spectrum(cfg);
  if (sp.empty())
    spdc::fail(spdc::ErrorCategory::domain, "no doubly resonant modes in the configured span");
  const std::string p = out_path(cfg, "spectrum.csv");
  spdc::write_spectrum_csv(sp, p);
  std::printf("wrote %s\n", p.c_str());
  const spdc::ClusterStats st = spdc::cluster_stats(sp);
  std::printf("clusters=%zu spacing=%.6g GHz modes_above_half_max=%zu effective_modes=%.4f\n",
              st.clusters_count, st.cluster_spacing_hz / 1e9, st.modes_above_half_max,
              st.effective_mode_number);
  if (cfg.filter.enabled) {
    const spdc::FilterCavity fc = spdc::make_filter(cfg.filter, cfg.source.signal_lock_hz);
    const std::string pf = out_path(cfg, "spectrum_filtered.csv");
    spdc::write_spectrum_csv(spdc::filtered_spectrum(sp, fc), pf);
    std::printf("wrote %s\n", pf.c_str());
    std::printf("kept_pair_fraction=%.6f\n", spdc::kept_weight_fraction(sp, fc));
  }
}

spdc::CorrelationConfig correlation_from(const spdc::ScenarioConfig& cfg) {
  spdc::ClusterSpectrum sp = spdc::make_joint_spectrum(cfg);
  if (sp.empty())
    spdc::fail(spdc::ErrorCategory::domain, "no doubly resonant modes in the configured span");
  if (cfg.filter.enabled) {
    const spdc::FilterCavity fc = spdc::make_filter(cfg.filter, cfg.source.signal_lock_hz);
    sp = spdc::filtered_spectrum(sp, fc);
    if (sp.empty())
      spdc::fail(spdc::ErrorCategory::domain, "the filter removes every resonant mode");
  }
  return spdc::make_correlation_config(cfg, std::move(sp));
}

void run_g2(const Opts& o) {
  const spdc::ScenarioConfig cfg = resolve(o);
  const spdc::CorrelationConfig corr = correlation_from(cfg);
  spdc::AnalyticG2Options opt;
  opt.enforce_coverage = false;
  const spdc::TauGrid grid = spdc::make_grid(-150e-9, 150e-9, 20e-12);
  const spdc::CorrelationTrace raw =
      spdc::normalize_peak(spdc::analytic_g2(corr, grid, opt));
  const spdc::CorrelationTrace conv = spdc::normalize_peak(
      spdc::convolve_response(raw, cfg.run.response_fwhm_s));
  const std::string p1 = out_path(cfg, "g2_analytic.csv");
  const std::string p2 = out_path(cfg, "g2_convolved.csv");
  spdc::write_trace_csv(raw, p1);
  spdc::write_trace_csv(conv, p2);
  std::printf("wrote %s\nwrote %s\n", p1.c_str(), p2.c_str());
}

void run_g1(const Opts& o) {
  const spdc::ScenarioConfig cfg = resolve(o);
  const spdc::CorrelationConfig corr = correlation_from(cfg);
  const spdc::TauGrid grid = spdc::make_grid(-120e-12, 120e-12, 0.05e-12);
  const spdc::CorrelationTrace g1 =
      spdc::g1_signal(corr.modes, cfg.source.linewidth_signal_hz, grid);
  const std::string p = out_path(cfg, "g1.csv");
  spdc::write_trace_csv(g1, p);
  std::printf("wrote %s\n", p.c_str());
}

void run_simulate(const Opts& o) {
  const spdc::ScenarioConfig cfg = resolve(o);
  const spdc::ClusterSpectrum sp = spdc::make_joint_spectrum(cfg);
  if (sp.empty())
    spdc::fail(spdc::ErrorCategory::domain, "no doubly resonant modes in the configured span");
  spdc::ClusterSpectrum sim_modes = sp;
  if (cfg.filter.enabled) {
    const spdc::FilterCavity fc = spdc::make_filter(cfg.filter, cfg.source.signal_lock_hz);
    sim_modes = spdc::filtered_spectrum(sp, fc);
    if (sim_modes.empty())
      spdc::fail(spdc::ErrorCategory::domain, "the filter removes every resonant mode");
  }
  const spdc::CorrelationConfig corr = spdc::make_correlation_config(cfg, sim_modes);
  const spdc::TauGrid grid = spdc::make_grid(-2e-6, 2e-6, 20e-12);
  const spdc::DelaySampler delays(spdc::to_pdf(spdc::analytic_g2(corr, grid)));
  const spdc::SimulationConfig sim_cfg =
      spdc::make_simulation_config(cfg, sp, cfg.run.pump_power_mw);
  const spdc::SimulationResult res =
      spdc::simulate_stream(sim_cfg, delays, cfg.run.duration_s, cfg.seed);
  const std::string ps = out_path(cfg, "signal.ttag");
  const std::string pi = out_path(cfg, "idler.ttag");
  spdc::write_ttag(res.signal, ps);
  spdc::write_ttag(res.idler, pi);
  std::printf("wrote %s (%zu tags)\nwrote %s (%zu tags)\n", ps.c_str(),
              res.signal.tags_ps.size(), pi.c_str(), res.idler.tags_ps.size());
  std::printf("generated_pairs=%llu recorded_pairs=%llu measurement_time=%.6g s\n",
              static_cast<unsigned long long>(res.generated_pairs),
              static_cast<unsigned long long>(res.recorded_pairs), res.measurement_time_s);
}

void run_analyze(const Opts& o) {
  const spdc::ScenarioConfig cfg = resolve(o);
  const spdc::TimeTagStream signal = spdc::read_ttag(o.signal_path);
  const spdc::TimeTagStream idler = spdc::read_ttag(o.idler_path);
  const double wall_s = static_cast<double>(signal.duration_ps) * spdc::kPicosecond;
  const double meas_s = wall_s * cfg.run.gate_duty;
  if (!(meas_s > 0.0))
    spdc::fail(spdc::ErrorCategory::domain, "stream carries no measurement time");

  const double half = cfg.run.hist_half_range_s;
  const spdc::Histogram hist = spdc::cross_correlation_histogram(
      signal, idler, cfg.run.bin_width_s, {-half, half});
  const spdc::FitResult fit = spdc::fit_double_exponential(hist);

  spdc::DarkRates darks;
  darks.dark_signal_hz = cfg.signal.dark_count_rate_hz;
  darks.dark_idler_hz = cfg.idler.dark_count_rate_hz;
  darks.singles_signal_hz = spdc::singles_rate(signal, meas_s);
  darks.singles_idler_hz = spdc::singles_rate(idler, meas_s);
  const spdc::G2ZeroEstimate g2 = spdc::g2_zero_from_histogram(
      hist, fit, {cfg.run.accidental_window_lo_s, cfg.run.accidental_window_hi_s}, &darks);
  const double rate = spdc::coincidence_rate(hist, cfg.run.coincidence_window_s, meas_s,
                                             cfg.run.pump_power_mw,
                                             spdc::BackgroundTreatment::subtract);

  spdc::CorrelationTrace ht;
  ht.grid.start_s = hist.bin_center_s(0);
  ht.grid.step_s = static_cast<double>(hist.bin_width_ps) * 1e-12;
  ht.grid.count = hist.counts.size();
  ht.values.assign(hist.counts.begin(), hist.counts.end());
  const std::string ph = out_path(cfg, "hist.csv");
  spdc::write_trace_csv(ht, ph);

  std::vector<spdc::ReportEntry> rep;
  rep.push_back({"singles_signal", darks.singles_signal_hz, "Hz"});
  rep.push_back({"singles_idler", darks.singles_idler_hz, "Hz"});
  rep.push_back({"coincidence_rate_per_mw", rate, "Hz/mW"});
  rep.push_back({"g2_zero_raw", g2.raw, "1"});
  rep.push_back({"g2_zero_dark_subtracted", g2.dark_subtracted, "1"});
  rep.push_back({"fit_linewidth_signal", fit.linewidth_signal_hz, "Hz"});
  rep.push_back({"fit_linewidth_idler", fit.linewidth_idler_hz, "Hz"});
  rep.push_back({"fit_reduced_chi2", fit.goodness, "1"});
  const std::string pr = out_path(cfg, "analysis.txt");
  spdc::write_report(rep, pr);

  std::printf("wrote %s\nwrote %s\n", ph.c_str(), pr.c_str());
  std::printf("singles: %.6g / %.6g Hz  C=%.6g Hz/mW  g2(0) raw=%.6g dark-subtracted=%.6g\n",
              darks.singles_signal_hz, darks.singles_idler_hz, rate, g2.raw,
              g2.dark_subtracted);
  std::printf("linewidths: %.6g / %.6g MHz (reduced chi2 %.3f)\n",
              fit.linewidth_signal_hz / 1e6, fit.linewidth_idler_hz / 1e6, fit.goodness);
}

void run_scenario_verb(const Opts& o) {
  const spdc::ScenarioConfig cfg = resolve(o);
  const spdc::ScenarioArtifacts art = spdc::run_scenario(cfg);
  for (const std::string& f : art.files) std::printf("wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavity-enhanced photon pair source simulator"};
  app.require_subcommand(1);

  Opts o_spectrum, o_g2, o_g1, o_sim, o_analyze, o_scenario;

  CLI::App* c_spectrum = app.add_subcommand("spectrum", "doubly resonant mode table");
  add_common(c_spectrum, o_spectrum, false);
  CLI::App* c_g2 = app.add_subcommand("g2", "analytic cross-correlation traces");
  add_common(c_g2, o_g2, false);
  CLI::App* c_g1 = app.add_subcommand("g1", "analytic field autocorrelation trace");
  add_common(c_g1, o_g1, false);
  CLI::App* c_sim = app.add_subcommand("simulate", "generate detector time-tag streams");
  add_common(c_sim, o_sim, false);
  CLI::App* c_analyze = app.add_subcommand("analyze", "histogram, fit and rates from streams");
  add_common(c_analyze, o_analyze, false);
  c_analyze->add_option("--signal", o_analyze.signal_path, "signal .ttag stream")->required();
  c_analyze->add_option("--idler", o_analyze.idler_path, "idler .ttag stream")->required();
  CLI::App* c_scenario = app.add_subcommand("scenario", "run a full preset bundle");
  add_common(c_scenario, o_scenario, true);

  try {
    app.parse(argc, argv);
    if (c_spectrum->parsed()) run_spectrum(o_spectrum);
    if (c_g2->parsed()) run_g2(o_g2);
    if (c_g1->parsed()) run_g1(o_g1);
    if (c_sim->parsed()) run_simulate(o_sim);
    if (c_analyze->parsed()) run_analyze(o_analyze);
    if (c_scenario->parsed()) run_scenario_verb(o_scenario);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const spdc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 10;
  }
  return 0;
}
