#pragma once

#include <string>
#include <vector>

#include "spdc/correlation.hpp"
#include "spdc/spectral.hpp"

namespace spdc {

// Spectrum table: '#' key=value header lines carrying pump frequency and the
// cluster gap threshold, then "m_s,m_i,nu_s_hz,nu_i_hz,weight,cluster_id"
// rows at full double precision.
void write_spectrum_csv(const ClusterSpectrum& spectrum, const std::string& path);
ClusterSpectrum read_spectrum_csv(const std::string& path);

// Trace table: "# normalization=<tag>" then "tau_s,value" rows on a uniform
// grid; non-uniform grids are rejected on read.
void write_trace_csv(const CorrelationTrace& trace, const std::string& path);
CorrelationTrace read_trace_csv(const std::string& path);

// Plain "name=value unit" report lines ("1" marks dimensionless). Output is
// byte-stable: no timestamps, fixed formatting.
struct ReportEntry {
  std::string name;
  double value = 0.0;
  std::string unit;
};

void write_report(const std::vector<ReportEntry>& entries, const std::string& path);
std::vector<ReportEntry> read_report(const std::string& path);

}  // namespace spdc
