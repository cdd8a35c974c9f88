#pragma once

// clickstream v1 text format:
//
//   # clickstream v1 duration_s=<float>
//   <timestamp_ns>\t<detector_id>[\t<outcome_label>]
//
// Timestamps are unsigned nanoseconds, strictly increasing per detector. The
// optional third column is carried through verbatim and not interpreted.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "einsel/photon/models.hpp"

namespace einsel::photon {

inline constexpr std::string_view kClickHeaderPrefix = "# clickstream v1 duration_s=";

namespace detail {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

}  // namespace detail

inline void write_clickstream(std::ostream& os, const ClickStream& stream) {
  os << kClickHeaderPrefix << detail::format_double(stream.duration) << '\n';
  for (const auto& e : stream.events) os << e.time_ns << '\t' << e.detector << '\n';
}

inline std::string to_clickstream_text(const ClickStream& stream) {
  std::ostringstream os;
  write_clickstream(os, stream);
  return os.str();
}

/// Parses clickstream v1; FormatError carries the offending 1-based line.
inline ClickStream read_clickstream(std::istream& is) {
  ClickStream stream;
  std::string line;
  if (!std::getline(is, line)) throw FormatError("missing clickstream header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind(kClickHeaderPrefix, 0) != 0) throw FormatError("header must start with '# clickstream v1 duration_s='", 1);
  const std::string_view dur = std::string_view(line).substr(kClickHeaderPrefix.size());
  if (!detail::parse_number(dur, stream.duration) || !(stream.duration >= 0.0))
    throw FormatError("invalid duration '" + std::string(dur) + "'", 1);

  const std::uint64_t end_ns = stream.duration_ns();
  std::map<std::uint32_t, std::uint64_t> last;
  std::uint64_t previous = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string_view sv(line);
    const auto tab = sv.find('\t');
    if (tab == std::string_view::npos) throw FormatError("expected '<timestamp_ns>\\t<detector_id>'", lineno);
    const auto tab2 = sv.find('\t', tab + 1);
    ClickEvent ev{};
    if (!detail::parse_number(sv.substr(0, tab), ev.time_ns)) throw FormatError("invalid timestamp", lineno);
    const auto id_field = sv.substr(tab + 1, tab2 == std::string_view::npos ? std::string_view::npos : tab2 - tab - 1);
    if (!detail::parse_number(id_field, ev.detector)) throw FormatError("invalid detector id", lineno);
    if (ev.time_ns > end_ns) throw FormatError("timestamp beyond declared duration", lineno);
    if (ev.time_ns < previous) throw FormatError("timestamps must be non-decreasing across the file", lineno);
    auto it = last.find(ev.detector);
    if (it != last.end() && ev.time_ns <= it->second)
      throw FormatError("non-increasing timestamp on detector " + std::to_string(ev.detector), lineno);
    last[ev.detector] = ev.time_ns;
    previous = ev.time_ns;
    stream.events.push_back(ev);
  }
  return stream;
}

inline ClickStream read_clickstream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open click file '" + path + "'", 0);
  return read_clickstream(in);
}

}  // namespace einsel::photon
