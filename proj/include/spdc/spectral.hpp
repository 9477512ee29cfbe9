#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "spdc/cavity.hpp"

namespace spdc {

enum class Branch { signal, idler };

struct CombMode {
  int index = 0;
  double frequency_hz = 0.0;
};

// Uniform longitudinal-mode comb around a lock reference; mode 0 sits exactly
// at `center`, modes span [center - span/2, center + span/2].
std::vector<CombMode> mode_comb(const CavityModel& cavity, Branch branch,
                                double center_hz, double span_hz);

// One doubly-resonant signal/idler mode pair. idler_hz is stored as
// pump - signal_hz so energy conservation holds as an identity.
struct ModePair {
  int m_signal = 0;
  int m_idler = 0;
  double signal_hz = 0.0;
  double idler_hz = 0.0;
  double mismatch_hz = 0.0;  // residual offset of the idler from its comb
  double weight = 0.0;       // in [0,1], max-normalized
  int cluster_id = 0;
};

struct ClusterSpectrum {
  double pump_hz = 0.0;
  std::vector<ModePair> modes;  // sorted by signal_hz
  std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [begin,end)
  double gap_threshold_hz = 0.0;  // grouping rule used to build `clusters`

  bool empty() const { return modes.empty(); }
  void validate() const;
};

struct JointSpectrumOptions {
  // A pair is doubly resonant when |mismatch| <= tolerance_gammas * gamma_i.
  double coincidence_tolerance_gammas = 5.0;
  // Lorentzian half-width of the resonance weight factor, in units of gamma_i.
  double resonance_halfwidth_gammas = 2.5;
  // New cluster when the gap between adjacent modes exceeds this many FSR_s.
  double gap_threshold_fsr = 10.0;
  // Cap on span as a multiple of the envelope FWHM (precondition guard).
  double span_cap_fwhm = 5.0;
  // Give every doubly-resonant pair weight 1 (reproduces idealized
  // equal-height mode pictures).
  bool equal_weights = false;
};

// Scans the signal comb across `span` around the envelope center (offset by
// detuning_signal), pairs each mode with its energy-conjugate idler comb
// neighbor, and keeps pairs within the coincidence tolerance. Weight =
// envelope(nu_s) x Lorentzian(mismatch). No double resonance in span is a
// valid empty result, not an error.
ClusterSpectrum joint_spectrum(const CavityModel& cavity,
                               const PhaseMatchingEnvelope& envelope,
                               double pump_hz, double detuning_signal_hz,
                               double span_hz,
                               const JointSpectrumOptions& opt = {});

struct ClusterStats {
  std::size_t clusters_count = 0;
  double cluster_spacing_hz = 0.0;  // mean centroid spacing, 0 if single
  std::vector<std::size_t> modes_per_cluster;
  std::size_t dominant_cluster = 0;       // highest total weight
  std::size_t modes_above_half_max = 0;   // within the dominant cluster
  double effective_mode_number = 0.0;     // sum(w) / max(w), all clusters
};

ClusterStats cluster_stats(const ClusterSpectrum& spectrum);

// Weights multiplied by the filter transmission at each signal frequency,
// then re-normalized to max 1; cluster grouping recomputed.
ClusterSpectrum filtered_spectrum(const ClusterSpectrum& spectrum,
                                  const FilterCavity& fc);

// sum(w * relative transfer) / sum(w): fraction of the pair flux the filter
// keeps, relative to its on-resonance transmission.
double kept_weight_fraction(const ClusterSpectrum& spectrum,
                            const FilterCavity& fc);

// Hand-construction helper: builds a spectrum from (signal offset from center,
// weight) pairs, e.g. synthetic cluster layouts for coherence studies.
ClusterSpectrum make_spectrum(double pump_hz, double center_signal_hz,
                              const std::vector<std::pair<double, double>>& offset_weight,
                              double gap_threshold_hz);

}  // namespace spdc
