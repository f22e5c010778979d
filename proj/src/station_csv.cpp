#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "frost/error.hpp"
#include "frost/ingest.hpp"

namespace frost {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string normalize_header(std::string_view line) {
  std::string out;
  for (auto field : split(line, ',')) {
    if (!out.empty()) out += ',';
    for (char c : field) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::optional<double> parse_real(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  if (tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_integer(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::optional<std::int64_t> parse_iso_timestamp(std::string_view text) {
  text = trim(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  std::string buf(text);
  int consumed = 0;
  const int fields = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
  if (fields < 6 || (sep != 'T' && sep != ' ')) return std::nullopt;
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == ':') {
    int used = 0;
    if (std::sscanf(std::string(rest).c_str(), ":%2d%n", &s, &used) != 1) return std::nullopt;
    rest.remove_prefix(static_cast<std::size_t>(used));
    // fractional seconds are truncated along with the seconds
    if (!rest.empty() && rest.front() == '.') {
      rest.remove_prefix(1);
      while (!rest.empty() && std::isdigit(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
    }
  }
  if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) return std::nullopt;
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 1440 + h * 60 + mi;
}

std::string format_iso_timestamp(std::int64_t minutes) {
  const std::int64_t days = floor_div(minutes, 1440);
  const std::int64_t rem = minutes - days * 1440;
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 60),
                static_cast<int>(rem % 60));
  return buf;
}

StationCsvResult parse_station_csv(std::istream& in, const StationId& id, const StationAttributes& attrs) {
  std::string line;
  if (!read_line(in, line)) throw FormatError("station CSV for " + id.str() + " is empty");
  std::string_view header = line;
  if (header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (normalize_header(header) != kStationCsvHeader) {
    throw FormatError("station CSV for " + id.str() + " has header '" + std::string(trim(header)) + "', expected '" +
                      std::string(kStationCsvHeader) + "'");
  }

  StationCsvResult result{StationSeries{id, attrs, {}}, 0, TimestampFormat::minutes};
  std::optional<TimestampFormat> format;
  auto& obs = result.series.observations;
  while (read_line(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 6) {
      ++result.dropped;
      continue;
    }
    if (!format) {
      if (parse_integer(fields[0])) {
        format = TimestampFormat::minutes;
      } else if (parse_iso_timestamp(fields[0])) {
        format = TimestampFormat::iso8601;
      }
    }
    std::optional<std::int64_t> ts;
    if (format == TimestampFormat::minutes) {
      ts = parse_integer(fields[0]);
    } else if (format == TimestampFormat::iso8601) {
      ts = parse_iso_timestamp(fields[0]);
    }
    const auto temperature = parse_real(fields[1]);
    const auto dew_point = parse_real(fields[2]);
    const auto rh = parse_real(fields[3]);
    const auto wind_speed = parse_real(fields[4]);
    auto wind_dir = parse_real(fields[5]);
    if (wind_dir && *wind_dir == 360.0) wind_dir = 0.0;  // 360 reported for due north

    const bool ok = ts && temperature && dew_point && rh && wind_speed && wind_dir && *rh >= 0.0 && *rh <= 100.0 &&
                    *wind_speed >= 0.0 && *wind_dir >= 0.0 && *wind_dir < 360.0 &&
                    *dew_point <= *temperature + kDewPointTolerance && (obs.empty() || *ts > obs.back().timestamp);
    if (!ok) {
      ++result.dropped;
      continue;
    }
    obs.push_back({*ts, *temperature, *dew_point, *rh, *wind_speed, *wind_dir});
  }
  if (obs.empty()) throw DataError("station CSV for " + id.str() + " has no valid rows");
  result.format = format.value_or(TimestampFormat::minutes);
  return result;
}

void write_station_csv(const StationSeries& series, std::ostream& out, TimestampFormat format) {
  out << kStationCsvHeader << '\n';
  char buf[256];
  for (const auto& o : series.observations) {
    const std::string ts = format == TimestampFormat::iso8601 ? format_iso_timestamp(o.timestamp)
                                                              : std::to_string(o.timestamp);
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", ts.c_str(), o.temperature, o.dew_point,
                  o.rh, o.wind_speed, o.wind_dir_met);
    out << buf;
  }
}

std::vector<StationSite> parse_station_sites(std::istream& in) {
  std::string line;
  if (!read_line(in, line) || normalize_header(line) != "id,lon,lat") {
    throw FormatError("station index must start with header 'id,lon,lat'");
  }
  std::vector<StationSite> sites;
  std::size_t lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    const auto lon = fields.size() == 3 ? parse_real(fields[1]) : std::nullopt;
    const auto lat = fields.size() == 3 ? parse_real(fields[2]) : std::nullopt;
    if (!lon || !lat || fields[0].empty()) throw FormatError("station index line " + std::to_string(lineno) + " is malformed");
    GeoPoint p{*lon, *lat};
    if (!p.valid()) throw FormatError("station index line " + std::to_string(lineno) + " has coordinates out of range");
    sites.push_back({StationId(std::string(fields[0])), p});
  }
  return sites;
}

void write_station_sites(const std::vector<StationSite>& sites, std::ostream& out) {
  out << "id,lon,lat\n";
  char buf[128];
  for (const auto& s : sites) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", s.location.lon, s.location.lat);
    out << s.id.str() << buf;
  }
}

}  // namespace frost
