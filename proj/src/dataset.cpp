#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "frost/error.hpp"
#include "frost/ingest.hpp"

namespace frost {

namespace {

static_assert(std::endian::native == std::endian::little, "dataset bundle I/O assumes a little-endian host");

constexpr char kMagic[8] = {'F', 'R', 'S', 'T', 'D', 'S', '0', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  template <typename T>
  void put_array(const std::vector<T>& v) {
    put<std::uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    T v{};
    read(&v, sizeof(T));
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  template <typename T>
  std::vector<T> get_array(std::uint64_t limit) {
    const auto n = get<std::uint64_t>();
    if (n > limit) throw FormatError("dataset bundle array length " + std::to_string(n) + " is implausible");
    std::vector<T> v(n);
    read(v.data(), n * sizeof(T));
    return v;
  }

 private:
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("dataset bundle is truncated");
  }
  std::istream& in_;
};

void put_grid(Writer& w, const AttributeGrid& g) {
  w.put(g.xll_corner);
  w.put(g.yll_corner);
  w.put(g.cell_size);
  w.put(g.nodata);
  w.put<std::uint64_t>(g.ncols);
  w.put<std::uint64_t>(g.nrows);
  w.put_array(g.values);
  w.put_array(g.mask);
}

AttributeGrid get_grid(Reader& r) {
  AttributeGrid g;
  g.xll_corner = r.get<double>();
  g.yll_corner = r.get<double>();
  g.cell_size = r.get<double>();
  g.nodata = r.get<double>();
  g.ncols = r.get<std::uint64_t>();
  g.nrows = r.get<std::uint64_t>();
  constexpr std::uint64_t kLimit = 1ULL << 32;
  g.values = r.get_array<double>(kLimit);
  g.mask = r.get_array<std::uint8_t>(kLimit);
  g.check();
  return g;
}

}  // namespace

const StationSeries* Dataset::find(const StationId& id) const {
  auto it = std::lower_bound(stations.begin(), stations.end(), id,
                             [](const StationSeries& s, const StationId& key) { return s.id < key; });
  if (it == stations.end() || it->id != id) return nullptr;
  return &*it;
}

const StationSeries& Dataset::station(const StationId& id) const {
  const auto* s = find(id);
  if (!s) throw DataError("station " + id.str() + " is not in the dataset");
  return *s;
}

std::vector<StationId> Dataset::station_ids() const {
  std::vector<StationId> ids;
  ids.reserve(stations.size());
  for (const auto& s : stations) ids.push_back(s.id);
  return ids;
}

Dataset ingest_station_directory(const std::filesystem::path& station_dir, AttributeGrid dem, AttributeGrid ndvi,
                                 const IngestOptions& options, IngestSummary* summary) {
  Dataset data;
  data.dem = resample_grid(dem, std::max(options.target_cell, dem.cell_size));
  data.ndvi = resample_grid(ndvi, std::max(options.target_cell, ndvi.cell_size));
  if (options.boundary) {
    data.dem = apply_boundary_mask(std::move(data.dem), *options.boundary);
    data.ndvi = apply_boundary_mask(std::move(data.ndvi), *options.boundary);
  }

  std::ifstream index(station_dir / "stations.csv");
  if (!index) throw DataError("station directory " + station_dir.string() + " has no stations.csv");
  const auto sites = parse_station_sites(index);
  if (sites.empty()) throw DataError("stations.csv lists no stations");

  IngestSummary local;
  for (const auto& site : sites) {
    StationAttributes attrs{site.location, lookup_attribute(data.dem, site.location),
                            lookup_attribute(data.ndvi, site.location)};
    const auto path = station_dir / (site.id.str() + ".csv");
    std::ifstream in(path);
    if (!in) throw DataError("missing station file " + path.string());
    auto parsed = parse_station_csv(in, site.id, attrs);
    local.observations += parsed.series.observations.size();
    local.dropped_rows += parsed.dropped;
    data.stations.push_back(std::move(parsed.series));
  }
  std::sort(data.stations.begin(), data.stations.end(),
            [](const StationSeries& a, const StationSeries& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < data.stations.size(); ++i) {
    if (data.stations[i].id == data.stations[i - 1].id)
      throw DataError("duplicate station id " + data.stations[i].id.str());
  }
  local.stations = data.stations.size();
  if (summary) *summary = local;
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset bundle " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.stations.size()));
  for (const auto& s : data.stations) {
    w.put_string(s.id.str());
    w.put(s.attrs.location.lon);
    w.put(s.attrs.location.lat);
    w.put(s.attrs.dem);
    w.put(s.attrs.ndvi);
    w.put<std::uint64_t>(s.observations.size());
    for (const auto& o : s.observations) {
      w.put(o.timestamp);
      w.put(o.temperature);
      w.put(o.dew_point);
      w.put(o.rh);
      w.put(o.wind_speed);
      w.put(o.wind_dir_met);
    }
  }
  put_grid(w, data.dem);
  put_grid(w, data.ndvi);
  if (!out) throw DataError("failed writing dataset bundle " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset bundle " + path.string());
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError(path.string() + " is not a dataset bundle");
  Reader r(in);
  Dataset data;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    StationSeries s{StationId(r.get_string()), {}, {}};
    s.attrs.location.lon = r.get<double>();
    s.attrs.location.lat = r.get<double>();
    s.attrs.dem = r.get<double>();
    s.attrs.ndvi = r.get<double>();
    const auto n = r.get<std::uint64_t>();
    if (n > (1ULL << 32)) throw FormatError("dataset bundle observation count is implausible");
    s.observations.resize(n);
    for (auto& o : s.observations) {
      o.timestamp = r.get<std::int64_t>();
      o.temperature = r.get<double>();
      o.dew_point = r.get<double>();
      o.rh = r.get<double>();
      o.wind_speed = r.get<double>();
      o.wind_dir_met = r.get<double>();
    }
    if (!validate_series(s).empty()) throw FormatError("dataset bundle station " + s.id.str() + " fails validation");
    data.stations.push_back(std::move(s));
  }
  data.dem = get_grid(r);
  data.ndvi = get_grid(r);
  return data;
}

}  // namespace frost
