#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spdc/config.hpp"
#include "spdc/errors.hpp"
#include "spdc/timetags.hpp"
#include "spdc/tracefiles.hpp"

using namespace spdc;
namespace fs = std::filesystem;

namespace {

std::string bin() { return SPDCSIM_BINARY; }

std::string work(const std::string& name) {
  static const fs::path base = [] {
    fs::path p = fs::temp_directory_path() / "spdc_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return (base / name).string();
}

int run(const std::string& args) {
  const std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  if (st == -1 || !WIFEXITED(st)) return -1;
  return WEXITSTATUS(st);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_entry(const std::vector<ReportEntry>& rep, const std::string& name) {
  for (const auto& e : rep)
    if (e.name == name) return true;
  return false;
}

}  // namespace

TEST_CASE("help works and parse failures exit with 2") {
  CHECK(run("--help") == 0);
  CHECK(run("spectrum --help") == 0);
  CHECK(run("") == 2);            // a subcommand is required
  CHECK(run("frobnicate") == 2);  // unknown verb
  CHECK(run("analyze") == 2);     // missing required stream options
}

TEST_CASE("error categories map to distinct exit codes") {
  const auto bad = work("bad.json");
  write_text(bad, "{oops");
  CHECK(run("spectrum --config " + bad + " --out " + work("e1")) == 2);

  CHECK(run("spectrum --config " + work("no_such.json") + " --out " + work("e2")) == 4);

  const auto unknown = work("unknown.json");
  write_text(unknown, R"({"preset": "power_sweep", "colour": "red"})");
  CHECK(run("spectrum --config " + unknown + " --out " + work("e3")) == 3);

  CHECK(run("scenario nope_such --out " + work("e4")) == 4);

  CHECK(run("analyze --signal " + work("no.ttag") + " --idler " + work("no2.ttag") +
            " --out " + work("e5")) == 4);
}

TEST_CASE("spectrum output is reproducible and parseable") {
  REQUIRE(run("spectrum --out " + work("s1")) == 0);
  REQUIRE(run("spectrum --out " + work("s2")) == 0);
  const auto b1 = read_bytes(work("s1") + "/spectrum.csv");
  CHECK(!b1.empty());
  CHECK(b1 == read_bytes(work("s2") + "/spectrum.csv"));

  const auto sp = read_spectrum_csv(work("s1") + "/spectrum.csv");
  sp.validate();
  CHECK(sp.modes.size() == 13);
  CHECK(sp.clusters.size() == 3);
}

TEST_CASE("simulate and analyze round trip through files") {
  const auto cfg_path = work("short.json");
  write_text(cfg_path,
             R"({"preset": "power_sweep", "overrides": {"duration_s": 2.0}})");

  REQUIRE(run("simulate --config " + cfg_path + " --out " + work("m1")) == 0);
  REQUIRE(run("simulate --config " + cfg_path + " --out " + work("m2")) == 0);
  CHECK(read_bytes(work("m1") + "/signal.ttag") == read_bytes(work("m2") + "/signal.ttag"));
  CHECK(read_bytes(work("m1") + "/idler.ttag") == read_bytes(work("m2") + "/idler.ttag"));

  REQUIRE(run("simulate --config " + cfg_path + " --seed 9 --out " + work("m3")) == 0);
  CHECK(read_bytes(work("m1") + "/signal.ttag") != read_bytes(work("m3") + "/signal.ttag"));

  const auto signal = read_ttag(work("m1") + "/signal.ttag");
  const auto idler = read_ttag(work("m1") + "/idler.ttag");
  CHECK(signal.tags_ps.size() > 100000);   // ~63 kHz for 2 s
  CHECK(idler.tags_ps.size() > 2000);
  CHECK(signal.channel != idler.channel);

  REQUIRE(run("analyze --config " + cfg_path + " --signal " + work("m1") +
              "/signal.ttag --idler " + work("m1") + "/idler.ttag --out " +
              work("a1")) == 0);
  const auto rep = read_report(work("a1") + "/analysis.txt");
  CHECK(has_entry(rep, "singles_signal"));
  CHECK(has_entry(rep, "coincidence_rate_per_mw"));
  CHECK(has_entry(rep, "g2_zero_dark_subtracted"));
  const auto hist = read_trace_csv(work("a1") + "/hist.csv");
  CHECK(hist.grid.count == 400);  // 4 us span at 10 ns bins
}

TEST_CASE("analytic trace verbs write normalized curves") {
  REQUIRE(run("g2 --out " + work("g2")) == 0);
  for (const char* name : {"/g2_analytic.csv", "/g2_convolved.csv"}) {
    const auto t = read_trace_csv(work("g2") + name);
    REQUIRE(!t.values.empty());
    double mx = 0.0;
    for (double v : t.values) mx = std::max(mx, v);
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-9));
  }

  REQUIRE(run("g1 --out " + work("g1")) == 0);
  const auto g1 = read_trace_csv(work("g1") + "/g1.csv");
  REQUIRE(!g1.values.empty());
  CHECK(*std::max_element(g1.values.begin(), g1.values.end()) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scenario verb writes a report bundle") {
  const auto cfg_path = work("bundle.json");
  write_text(cfg_path,
             R"({"preset": "power_sweep",
                 "overrides": {"duration_s": 10.0, "powers_mw": [1.0]}})");
  REQUIRE(run("scenario --config " + cfg_path + " --out " + work("b1")) == 0);

  const auto rep = read_report(work("b1") + "/report.txt");
  CHECK(rep.size() > 10);
  CHECK(has_entry(rep, "clusters_count"));
  CHECK(has_entry(rep, "coincidence_rate_per_mw_0"));
  CHECK(has_entry(rep, "g2_zero_raw_0"));
  read_spectrum_csv(work("b1") + "/spectrum.csv").validate();
  read_trace_csv(work("b1") + "/hist_1mW.csv");
}

TEST_CASE("output directory resolution prefers the flag over the environment") {
  setenv("SPDCSIM_OUT_DIR", work("env_dir").c_str(), 1);
  REQUIRE(run("g1") == 0);
  CHECK(fs::exists(work("env_dir") + "/g1.csv"));

  REQUIRE(run("g1 --out " + work("flag_dir")) == 0);
  CHECK(fs::exists(work("flag_dir") + "/g1.csv"));
  unsetenv("SPDCSIM_OUT_DIR");
}

TEST_CASE("shipped preset files match the built-in presets") {
  for (const auto& name : preset_names()) {
    const auto cfg = load_config(std::string(SPDCSIM_CONFIG_DIR) + "/" + name + ".json");
    const auto ref = built_in_preset(name);
    CHECK(cfg.preset == ref.preset);
    CHECK(cfg.seed == ref.seed);
    CHECK(cfg.output_dir == ref.output_dir);

    CHECK(cfg.source.signal_lock_hz == ref.source.signal_lock_hz);
    CHECK(cfg.source.idler_center_hz == ref.source.idler_center_hz);
    CHECK(cfg.source.fsr_signal_hz == ref.source.fsr_signal_hz);
    CHECK(cfg.source.fsr_idler_hz == ref.source.fsr_idler_hz);
    CHECK(cfg.source.linewidth_signal_hz == ref.source.linewidth_signal_hz);
    CHECK(cfg.source.linewidth_idler_hz == ref.source.linewidth_idler_hz);
    CHECK(cfg.source.envelope_fwhm_hz == ref.source.envelope_fwhm_hz);
    CHECK(cfg.source.envelope_shape == ref.source.envelope_shape);
    CHECK(cfg.source.span_hz == ref.source.span_hz);
    CHECK(cfg.source.detuning_signal_hz == ref.source.detuning_signal_hz);
    CHECK(cfg.source.resonance_halfwidth_gammas == ref.source.resonance_halfwidth_gammas);
    CHECK(cfg.source.coincidence_tolerance_gammas ==
          ref.source.coincidence_tolerance_gammas);
    CHECK(cfg.source.crystal_length_m == ref.source.crystal_length_m);
    CHECK(cfg.source.temperature_c == ref.source.temperature_c);
    CHECK(cfg.source.pair_rate_per_mw_hz == ref.source.pair_rate_per_mw_hz);

    for (auto [got, want] : {std::pair{&cfg.signal, &ref.signal},
                             std::pair{&cfg.idler, &ref.idler}}) {
      CHECK(got->path_transmission == want->path_transmission);
      CHECK(got->detector_efficiency == want->detector_efficiency);
      CHECK(got->dark_count_rate_hz == want->dark_count_rate_hz);
      CHECK(got->background_rate_per_mw_hz == want->background_rate_per_mw_hz);
    }

    CHECK(cfg.filter.enabled == ref.filter.enabled);
    CHECK(cfg.filter.fsr_hz == ref.filter.fsr_hz);
    CHECK(cfg.filter.linewidth_hz == ref.filter.linewidth_hz);
    CHECK(cfg.filter.peak_transmission == ref.filter.peak_transmission);
    CHECK(cfg.filter.long_term_factor == ref.filter.long_term_factor);
    CHECK(cfg.filter.passes == ref.filter.passes);

    CHECK(cfg.run.powers_mw == ref.run.powers_mw);
    CHECK(cfg.run.pump_power_mw == ref.run.pump_power_mw);
    CHECK(cfg.run.duration_s == ref.run.duration_s);
    CHECK(cfg.run.response_fwhm_s == ref.run.response_fwhm_s);
    CHECK(cfg.run.gate_period_s == ref.run.gate_period_s);
    CHECK(cfg.run.gate_duty == ref.run.gate_duty);
    CHECK(cfg.run.bin_width_s == ref.run.bin_width_s);
    CHECK(cfg.run.hist_half_range_s == ref.run.hist_half_range_s);
    CHECK(cfg.run.coincidence_window_s == ref.run.coincidence_window_s);
    CHECK(cfg.run.accidental_window_lo_s == ref.run.accidental_window_lo_s);
    CHECK(cfg.run.accidental_window_hi_s == ref.run.accidental_window_hi_s);
    CHECK(cfg.run.fold_half_range_s == ref.run.fold_half_range_s);
  }
}
