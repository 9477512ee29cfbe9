#include "spdc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdc/errors.hpp"

namespace spdc {

std::vector<CombMode> mode_comb(const CavityModel& cavity, Branch branch,
                                double center_hz, double span_hz) {
  cavity.validate();
  if (!(span_hz > 0.0)) fail(ErrorCategory::domain, "mode_comb: span must be > 0");
  const double fsr = branch == Branch::signal ? cavity.fsr_signal_hz
                                              : cavity.fsr_idler_hz;
  const int half = static_cast<int>(std::floor(0.5 * span_hz / fsr));
  std::vector<CombMode> comb;
  comb.reserve(2 * half + 1);
  for (int m = -half; m <= half; ++m)
    comb.push_back({m, center_hz + m * fsr});
  return comb;
}

void ClusterSpectrum::validate() const {
  double wmax = 0.0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const ModePair& mp = modes[k];
    if (!(mp.weight >= 0.0 && mp.weight <= 1.0))
      fail(ErrorCategory::validation, "ClusterSpectrum: weight outside [0,1]");
    if (k > 0 && !(modes[k - 1].signal_hz < mp.signal_hz))
      fail(ErrorCategory::validation, "ClusterSpectrum: modes not sorted by signal frequency");
    wmax = std::max(wmax, mp.weight);
  }
  if (!modes.empty() && wmax != 1.0)
    fail(ErrorCategory::validation, "ClusterSpectrum: maximum weight must be normalized to 1");
  std::size_t covered = 0;
  for (const auto& [b, e] : clusters) {
    if (b != covered || e <= b || e > modes.size())
      fail(ErrorCategory::validation, "ClusterSpectrum: cluster ranges must tile the mode list");
    covered = e;
  }
  if (covered != modes.size())
    fail(ErrorCategory::validation, "ClusterSpectrum: cluster ranges must cover all modes");
}

namespace {

// Group sorted modes into clusters and stamp cluster ids.
void regroup(ClusterSpectrum& sp, double gap_hz) {
  sp.clusters.clear();
  if (sp.modes.empty()) return;
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= sp.modes.size(); ++k) {
    const bool gap = k == sp.modes.size() ||
                     sp.modes[k].signal_hz - sp.modes[k - 1].signal_hz > gap_hz;
    if (gap) {
      sp.clusters.emplace_back(begin, k);
      begin = k;
    }
  }
  for (std::size_t c = 0; c < sp.clusters.size(); ++c)
    for (std::size_t k = sp.clusters[c].first; k < sp.clusters[c].second; ++k)
      sp.modes[k].cluster_id = static_cast<int>(c);
}

void normalize_weights(ClusterSpectrum& sp) {
  double wmax = 0.0;
  for (const ModePair& m : sp.modes) wmax = std::max(wmax, m.weight);
  if (wmax > 0.0)
    for (ModePair& m : sp.modes) m.weight /= wmax;
}

}  // namespace

ClusterSpectrum joint_spectrum(const CavityModel& cavity,
                               const PhaseMatchingEnvelope& envelope,
                               double pump_hz, double detuning_signal_hz,
                               double span_hz, const JointSpectrumOptions& opt) {
  cavity.validate();
  envelope.validate();
  if (!(pump_hz > 0.0)) fail(ErrorCategory::domain, "joint_spectrum: pump frequency must be > 0");
  if (!(span_hz > 0.0)) fail(ErrorCategory::domain, "joint_spectrum: span must be > 0");
  if (span_hz > opt.span_cap_fwhm * envelope.fwhm_hz)
    fail(ErrorCategory::domain,
         "joint_spectrum: span exceeds " + std::to_string(opt.span_cap_fwhm) +
             " envelope widths (raise span_cap_fwhm if intended)");

  const double fsr_s = cavity.fsr_signal_hz;
  const double fsr_i = cavity.fsr_idler_hz;
  const double gamma_i = cavity.damping_idler_hz;
  const double tolerance = opt.coincidence_tolerance_gammas * gamma_i;
  const double halfwidth = opt.resonance_halfwidth_gammas * gamma_i;

  // Signal comb is locked at the envelope center plus a detuning; the idler
  // comb is anchored at the energy conjugate of the lock point.
  const double lock = envelope.center_signal_hz;
  const double idler_anchor = pump_hz - lock;

  ClusterSpectrum sp;
  sp.pump_hz = pump_hz;
  const int half = static_cast<int>(std::floor(0.5 * span_hz / fsr_s));
  for (int m = -half; m <= half; ++m) {
    const double nu_s = lock + detuning_signal_hz + m * fsr_s;
    const double idler_required = pump_hz - nu_s;
    const double n_real = (idler_required - idler_anchor) / fsr_i;
    const int n = static_cast<int>(std::lround(n_real));
    const double mismatch = idler_required - (idler_anchor + n * fsr_i);
    if (std::fabs(mismatch) > tolerance) continue;

    ModePair mp;
    mp.m_signal = m;
    mp.m_idler = n;
    mp.signal_hz = nu_s;
    mp.idler_hz = pump_hz - nu_s;  // identity with signal_hz + idler_hz = pump
    mp.mismatch_hz = mismatch;
    const double x = mismatch / halfwidth;
    mp.weight = opt.equal_weights ? 1.0 : envelope(nu_s) / (1.0 + x * x);
    sp.modes.push_back(mp);
  }
  std::sort(sp.modes.begin(), sp.modes.end(),
            [](const ModePair& a, const ModePair& b) { return a.signal_hz < b.signal_hz; });
  normalize_weights(sp);
  sp.gap_threshold_hz = opt.gap_threshold_fsr * fsr_s;
  regroup(sp, sp.gap_threshold_hz);
  return sp;
}

ClusterStats cluster_stats(const ClusterSpectrum& spectrum) {
  if (spectrum.empty())
    fail(ErrorCategory::domain, "cluster_stats: empty spectrum");
  spectrum.validate();

  ClusterStats st;
  st.clusters_count = spectrum.clusters.size();

  std::vector<double> centroids;
  std::vector<double> totals;
  double wmax_all = 0.0, wsum_all = 0.0;
  for (const auto& [b, e] : spectrum.clusters) {
    double wsum = 0.0, csum = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      wsum += spectrum.modes[k].weight;
      csum += spectrum.modes[k].weight * spectrum.modes[k].signal_hz;
    }
    st.modes_per_cluster.push_back(e - b);
    centroids.push_back(wsum > 0.0 ? csum / wsum : spectrum.modes[b].signal_hz);
    totals.push_back(wsum);
    wsum_all += wsum;
  }
  for (const ModePair& m : spectrum.modes) wmax_all = std::max(wmax_all, m.weight);

  st.dominant_cluster = static_cast<std::size_t>(
      std::max_element(totals.begin(), totals.end()) - totals.begin());
  if (centroids.size() > 1) {
    double acc = 0.0;
    for (std::size_t c = 1; c < centroids.size(); ++c)
      acc += centroids[c] - centroids[c - 1];
    st.cluster_spacing_hz = acc / static_cast<double>(centroids.size() - 1);
  }

  const auto [db, de] = spectrum.clusters[st.dominant_cluster];
  double wmax_dom = 0.0;
  for (std::size_t k = db; k < de; ++k)
    wmax_dom = std::max(wmax_dom, spectrum.modes[k].weight);
  for (std::size_t k = db; k < de; ++k)
    if (spectrum.modes[k].weight >= 0.5 * wmax_dom) ++st.modes_above_half_max;

  st.effective_mode_number = wmax_all > 0.0 ? wsum_all / wmax_all : 0.0;
  return st;
}

ClusterSpectrum filtered_spectrum(const ClusterSpectrum& spectrum,
                                  const FilterCavity& fc) {
  fc.validate();
  ClusterSpectrum out = spectrum;
  for (ModePair& m : out.modes) m.weight *= filter_transfer(fc, m.signal_hz);
  normalize_weights(out);
  if (out.gap_threshold_hz > 0.0) regroup(out, out.gap_threshold_hz);
  return out;
}

double kept_weight_fraction(const ClusterSpectrum& spectrum, const FilterCavity& fc) {
  fc.validate();
  if (spectrum.empty())
    fail(ErrorCategory::domain, "kept_weight_fraction: empty spectrum");
  double num = 0.0, den = 0.0;
  for (const ModePair& m : spectrum.modes) {
    num += m.weight * filter_transfer_relative(fc, m.signal_hz);
    den += m.weight;
  }
  return num / den;
}

ClusterSpectrum make_spectrum(double pump_hz, double center_signal_hz,
                              const std::vector<std::pair<double, double>>& offset_weight,
                              double gap_threshold_hz) {
  ClusterSpectrum sp;
  sp.pump_hz = pump_hz;
  for (const auto& [offset, weight] : offset_weight) {
    ModePair m;
    m.signal_hz = center_signal_hz + offset;
    m.idler_hz = pump_hz - m.signal_hz;
    m.weight = weight;
    sp.modes.push_back(m);
  }
  std::sort(sp.modes.begin(), sp.modes.end(),
            [](const ModePair& a, const ModePair& b) { return a.signal_hz < b.signal_hz; });
  normalize_weights(sp);
  sp.gap_threshold_hz = gap_threshold_hz;
  regroup(sp, gap_threshold_hz);
  return sp;
}

}  // namespace spdc
