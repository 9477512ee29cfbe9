#include "spdc/tracefiles.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

std::string fmt_double(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
  fail(ErrorCategory::parse, path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& path, std::size_t line_no, const std::string& tok) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) parse_fail(path, line_no, "trailing junk in number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail(path, line_no, "bad number '" + tok + "'");
  }
}

long long parse_int(const std::string& path, std::size_t line_no, const std::string& tok) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) parse_fail(path, line_no, "trailing junk in integer '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail(path, line_no, "bad integer '" + tok + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream ss(line);
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCategory::io, "cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::not_found, "cannot open " + path);
  return in;
}

}  // namespace

void write_spectrum_csv(const ClusterSpectrum& spectrum, const std::string& path) {
  spectrum.validate();
  auto out = open_out(path);
  out << "# pump_hz=" << fmt_double(spectrum.pump_hz) << '\n';
  out << "# gap_threshold_hz=" << fmt_double(spectrum.gap_threshold_hz) << '\n';
  out << "m_s,m_i,nu_s_hz,nu_i_hz,weight,cluster_id\n";
  for (std::size_t c = 0; c < spectrum.clusters.size(); ++c) {
    for (std::size_t k = spectrum.clusters[c].first; k < spectrum.clusters[c].second; ++k) {
      const ModePair& m = spectrum.modes[k];
      out << m.m_signal << ',' << m.m_idler << ',' << fmt_double(m.signal_hz) << ','
          << fmt_double(m.idler_hz) << ',' << fmt_double(m.weight) << ',' << c << '\n';
    }
  }
  if (!out) fail(ErrorCategory::io, "write failed for " + path);
}

ClusterSpectrum read_spectrum_csv(const std::string& path) {
  auto in = open_in(path);
  ClusterSpectrum sp;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  long long prev_cluster = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      const std::string val = line.substr(eq + 1);
      if (key == "pump_hz") sp.pump_hz = parse_double(path, line_no, val);
      else if (key == "gap_threshold_hz") sp.gap_threshold_hz = parse_double(path, line_no, val);
      continue;
    }
    if (!saw_header) {
      if (line != "m_s,m_i,nu_s_hz,nu_i_hz,weight,cluster_id")
        parse_fail(path, line_no, "unexpected column header '" + line + "'");
      saw_header = true;
      continue;
    }
    const auto toks = split_csv(line);
    if (toks.size() != 6) parse_fail(path, line_no, "expected 6 columns");
    ModePair m;
    m.m_signal = parse_int(path, line_no, toks[0]);
    m.m_idler = parse_int(path, line_no, toks[1]);
    m.signal_hz = parse_double(path, line_no, toks[2]);
    m.idler_hz = parse_double(path, line_no, toks[3]);
    m.weight = parse_double(path, line_no, toks[4]);
    const long long cluster = parse_int(path, line_no, toks[5]);
    if (cluster < 0 || cluster < prev_cluster || cluster > prev_cluster + 1)
      parse_fail(path, line_no, "cluster ids must be contiguous and non-decreasing");
    if (cluster == prev_cluster + 1) {
      sp.clusters.emplace_back(sp.modes.size(), sp.modes.size());
      prev_cluster = cluster;
    }
    m.cluster_id = static_cast<int>(cluster);
    sp.modes.push_back(m);
    sp.clusters.back().second = sp.modes.size();
  }
  if (!saw_header) fail(ErrorCategory::parse, path + ": missing column header");
  try {
    sp.validate();
  } catch (const Error& e) {
    fail(ErrorCategory::parse, path + ": " + e.what());
  }
  return sp;
}

void write_trace_csv(const CorrelationTrace& trace, const std::string& path) {
  trace.validate();
  const char* tag = "raw_arbitrary";
  if (trace.normalization == CorrelationTrace::Normalization::unit_area_pdf)
    tag = "unit_area_pdf";
  else if (trace.normalization == CorrelationTrace::Normalization::tail_normalized_g2)
    tag = "tail_normalized_g2";

  auto out = open_out(path);
  out << "# normalization=" << tag << '\n';
  out << "tau_s,value\n";
  for (std::size_t k = 0; k < trace.values.size(); ++k)
    out << fmt_double(trace.grid.at(k)) << ',' << fmt_double(trace.values[k]) << '\n';
  if (!out) fail(ErrorCategory::io, "write failed for " + path);
}

CorrelationTrace read_trace_csv(const std::string& path) {
  auto in = open_in(path);
  CorrelationTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool saw_norm = false;
  bool saw_header = false;
  std::vector<double> taus;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string prefix = "# normalization=";
      if (line.rfind(prefix, 0) == 0) {
        const std::string tag = line.substr(prefix.size());
        if (tag == "raw_arbitrary")
          trace.normalization = CorrelationTrace::Normalization::raw_arbitrary;
        else if (tag == "unit_area_pdf")
          trace.normalization = CorrelationTrace::Normalization::unit_area_pdf;
        else if (tag == "tail_normalized_g2")
          trace.normalization = CorrelationTrace::Normalization::tail_normalized_g2;
        else
          parse_fail(path, line_no, "unknown normalization tag '" + tag + "'");
        saw_norm = true;
      }
      continue;
    }
    if (!saw_header) {
      if (line != "tau_s,value") parse_fail(path, line_no, "unexpected column header '" + line + "'");
      saw_header = true;
      continue;
    }
    const auto toks = split_csv(line);
    if (toks.size() != 2) parse_fail(path, line_no, "expected 2 columns");
    taus.push_back(parse_double(path, line_no, toks[0]));
    trace.values.push_back(parse_double(path, line_no, toks[1]));
  }
  if (!saw_norm) fail(ErrorCategory::parse, path + ": missing normalization header");
  if (!saw_header || taus.empty()) fail(ErrorCategory::parse, path + ": no trace rows");

  trace.grid.start_s = taus.front();
  trace.grid.count = taus.size();
  if (taus.size() == 1) {
    trace.grid.step_s = 1.0;
  } else {
    trace.grid.step_s = (taus.back() - taus.front()) / static_cast<double>(taus.size() - 1);
    if (!(trace.grid.step_s > 0.0))
      fail(ErrorCategory::parse, path + ": delay column must increase");
    for (std::size_t k = 0; k < taus.size(); ++k) {
      if (std::fabs(taus[k] - trace.grid.at(k)) > 1e-6 * trace.grid.step_s)
        fail(ErrorCategory::parse, path + ": delay grid is not uniform near row " +
                                       std::to_string(k + 1));
    }
  }
  return trace;
}

void write_report(const std::vector<ReportEntry>& entries, const std::string& path) {
  auto out = open_out(path);
  for (const auto& e : entries) {
    if (e.name.empty() || e.name.find('=') != std::string::npos ||
        e.name.find(' ') != std::string::npos)
      fail(ErrorCategory::validation, "report names must be non-empty without '=' or spaces");
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.12g", e.value);
    out << e.name << '=' << buf.data() << ' ' << (e.unit.empty() ? "1" : e.unit.c_str())
        << '\n';
  }
  if (!out) fail(ErrorCategory::io, "write failed for " + path);
}

std::vector<ReportEntry> read_report(const std::string& path) {
  auto in = open_in(path);
  std::vector<ReportEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto sp = line.rfind(' ');
    if (eq == std::string::npos || sp == std::string::npos || sp < eq)
      parse_fail(path, line_no, "expected 'name=value unit'");
    ReportEntry e;
    e.name = line.substr(0, eq);
    e.value = parse_double(path, line_no, line.substr(eq + 1, sp - eq - 1));
    e.unit = line.substr(sp + 1);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace spdc
