#include "spdc/timetags.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'T', 'A', 'G'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void TimeTagStream::validate() const {
  for (std::size_t i = 0; i < tags_ps.size(); ++i) {
    if (tags_ps[i] < 0)
      fail(ErrorCategory::validation, "time tags must be non-negative");
    if (i > 0 && tags_ps[i] <= tags_ps[i - 1])
      fail(ErrorCategory::validation, "time tags must be strictly increasing");
  }
}

void write_ttag(const TimeTagStream& stream, const std::string& path) {
  stream.validate();
  std::string buf;
  buf.reserve(16 + 8 * stream.tags_ps.size());
  buf.append(kMagic.data(), kMagic.size());
  put_u16(buf, kVersion);
  put_u16(buf, stream.channel);
  put_u64(buf, stream.duration_ps);
  for (std::int64_t t : stream.tags_ps) put_u64(buf, static_cast<std::uint64_t>(t));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::io, "cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorCategory::io, "write failed for " + path);
}

TimeTagStream read_ttag(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::not_found, "cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCategory::io, "read failed for " + path);

  if (buf.size() < 16) fail(ErrorCategory::parse, path + ": truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (std::memcmp(p, kMagic.data(), kMagic.size()) != 0)
    fail(ErrorCategory::parse, path + ": bad magic, not a time-tag file");
  const std::uint16_t version = get_u16(p + 4);
  if (version != kVersion)
    fail(ErrorCategory::parse,
         path + ": unsupported version " + std::to_string(version));

  TimeTagStream stream;
  stream.channel = get_u16(p + 6);
  stream.duration_ps = get_u64(p + 8);

  const std::size_t payload = buf.size() - 16;
  if (payload % 8 != 0) fail(ErrorCategory::parse, path + ": truncated tag record");
  const std::size_t count = payload / 8;
  stream.tags_ps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t raw = get_u64(p + 16 + 8 * i);
    if (raw > static_cast<std::uint64_t>(INT64_MAX))
      fail(ErrorCategory::parse, path + ": tag overflows the signed range");
    stream.tags_ps.push_back(static_cast<std::int64_t>(raw));
  }
  try {
    stream.validate();
  } catch (const Error& e) {
    fail(ErrorCategory::parse, path + ": " + e.what());
  }
  return stream;
}

void write_csv_tags(const std::vector<TimeTagStream>& streams, const std::string& path) {
  for (const auto& s : streams) s.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCategory::io, "cannot open " + path + " for writing");
  out << "channel,timestamp_ps\n";
  for (const auto& s : streams)
    for (std::int64_t t : s.tags_ps) out << s.channel << ',' << t << '\n';
  if (!out) fail(ErrorCategory::io, "write failed for " + path);
}

std::vector<TimeTagStream> read_csv_tags(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::not_found, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCategory::parse, path + ": empty file");
  if (line != "channel,timestamp_ps")
    fail(ErrorCategory::parse, path + ": unexpected header '" + line + "'");

  std::map<std::uint16_t, TimeTagStream> by_channel;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      fail(ErrorCategory::parse,
           path + ":" + std::to_string(line_no) + ": expected 'channel,timestamp_ps'");
    unsigned channel = 0;
    std::int64_t tag = 0;
    const char* b = line.data();
    auto r1 = std::from_chars(b, b + comma, channel);
    auto r2 = std::from_chars(b + comma + 1, b + line.size(), tag);
    if (r1.ec != std::errc() || r2.ec != std::errc() || channel > 0xffff)
      fail(ErrorCategory::parse, path + ":" + std::to_string(line_no) + ": bad row '" + line + "'");
    auto& s = by_channel[static_cast<std::uint16_t>(channel)];
    s.channel = static_cast<std::uint16_t>(channel);
    s.tags_ps.push_back(tag);
  }

  std::vector<TimeTagStream> out;
  out.reserve(by_channel.size());
  for (auto& [ch, s] : by_channel) {
    try {
      s.validate();
    } catch (const Error& e) {
      fail(ErrorCategory::parse, path + ": channel " + std::to_string(ch) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace spdc
