#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spdc {

// One detector channel's time tags in integer picoseconds, sorted and unique.
struct TimeTagStream {
  std::uint16_t channel = 0;
  std::uint64_t duration_ps = 0;  // wall-clock span of the recording
  std::vector<std::int64_t> tags_ps;

  void validate() const;
};

// Binary layout, little endian: magic "TTAG", u16 version (1), u16 channel,
// u64 duration_ps, then one u64 per tag.
void write_ttag(const TimeTagStream& stream, const std::string& path);
TimeTagStream read_ttag(const std::string& path);

// Text form: header "channel,timestamp_ps", one row per tag; several streams
// share the file and are split by channel on read.
void write_csv_tags(const std::vector<TimeTagStream>& streams, const std::string& path);
std::vector<TimeTagStream> read_csv_tags(const std::string& path);

}  // namespace spdc
