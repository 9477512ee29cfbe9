#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spdc {

// Physical description of the doubly resonant pair source.
struct SourceSetup {
  double signal_lock_hz = 0.0;    // signal cavity lock point
  double idler_center_hz = 0.0;   // idler comb anchor
  double fsr_signal_hz = 0.0;
  double fsr_idler_hz = 0.0;
  double linewidth_signal_hz = 0.0;
  double linewidth_idler_hz = 0.0;
  double envelope_fwhm_hz = 0.0;
  std::string envelope_shape = "sinc2";  // sinc2 | gaussian
  double span_hz = 0.0;
  double detuning_signal_hz = 0.0;
  double resonance_halfwidth_gammas = 2.5;
  double coincidence_tolerance_gammas = 5.0;
  double crystal_length_m = 0.0;
  double temperature_c = 24.5;
  double pair_rate_per_mw_hz = 0.0;  // generated pairs
};

// One detection arm (rates are detected rates for this arm at its defaults).
struct DetectionSetup {
  double path_transmission = 1.0;
  double detector_efficiency = 1.0;
  double dark_count_rate_hz = 0.0;
  double background_rate_per_mw_hz = 0.0;
};

// Optional narrowband filter cavity on the signal arm.
struct FilterSetup {
  bool enabled = false;
  double fsr_hz = 0.0;
  double linewidth_hz = 0.0;
  double peak_transmission = 1.0;
  double long_term_factor = 1.0;  // slow drift derating of the peak
  int passes = 1;
};

// Measurement-run shape shared by the scenario pipelines.
struct RunSetup {
  std::vector<double> powers_mw;  // sweep presets; empty = single power
  double pump_power_mw = 1.0;
  double duration_s = 60.0;  // measurement (gate-open) seconds per power
  double response_fwhm_s = 0.0;  // combined two-channel timing response
  double gate_period_s = 10e-3;
  double gate_duty = 1.0;
  double bin_width_s = 10e-9;
  double hist_half_range_s = 2e-6;
  double coincidence_window_s = 500e-9;  // full width
  double accidental_window_lo_s = 1e-6;
  double accidental_window_hi_s = 2e-6;
  double fold_half_range_s = 100e-9;
};

struct ScenarioConfig {
  std::string preset;
  std::uint64_t seed = 1;
  std::string output_dir;
  SourceSetup source;
  DetectionSetup signal;
  DetectionSetup idler;
  FilterSetup filter;
  RunSetup run;

  void validate() const;
};

// Names accepted by built_in_preset / the "preset" config key, in order.
std::vector<std::string> preset_names();

ScenarioConfig built_in_preset(const std::string& name);

// Strict JSON load: either a preset reference with whitelisted overrides or a
// fully spelled-out "custom" setup. Unknown keys anywhere are rejected.
ScenarioConfig load_config(const std::string& path);

}  // namespace spdc
