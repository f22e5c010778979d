#include "frost/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "frost/error.hpp"
#include "frost/random.hpp"

namespace frost {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinutesPerDay = 1440.0;

// Seed streams of the generator.
enum Stream : std::uint64_t { terrain = 1, climate = 2, layout = 3, station_noise = 1000 };

}  // namespace

void WorldSpec::check() const {
  if (n_stations < 5) throw DomainError("a world needs at least 5 stations");
  if (days < 1) throw DomainError("a world needs at least 1 day");
  if (!(noise_sd >= 0.0)) throw DomainError("noise sd must be non-negative");
  if (sample_interval < 1 || sample_interval > 1440) throw DomainError("sample interval must be 1..1440 minutes");
  if (!(cell_size > 0.0)) throw DomainError("cell size must be positive");
  if (!(extent.lon_max > extent.lon_min) || !(extent.lat_max > extent.lat_min) || extent.lon_min < -180.0 ||
      extent.lon_max > 180.0 || extent.lat_min < -90.0 || extent.lat_max > 90.0) {
    throw DomainError("world extent is empty or outside lon/lat range");
  }
  const double cols = (extent.lon_max - extent.lon_min) / cell_size;
  const double rows = (extent.lat_max - extent.lat_min) / cell_size;
  if (cols < 2.0 || rows < 2.0 || cols * rows > 5e7) throw DomainError("world grid needs at least 2 cells per axis and at most 5e7 cells");
  if (!(dem_max >= 0.0) || !std::isfinite(lapse_rate) || !std::isfinite(ndvi_coefficient)) {
    throw DomainError("terrain parameters must be finite with dem_max >= 0");
  }
}

std::string world_spec_to_json(const WorldSpec& s) {
  const nlohmann::json j{{"seed", s.seed},
                         {"n_stations", s.n_stations},
                         {"extent",
                          {{"lon_min", s.extent.lon_min},
                           {"lon_max", s.extent.lon_max},
                           {"lat_min", s.extent.lat_min},
                           {"lat_max", s.extent.lat_max}}},
                         {"cell_size", s.cell_size},
                         {"days", s.days},
                         {"sample_interval", s.sample_interval},
                         {"start_timestamp", s.start_timestamp},
                         {"mean_temperature", s.mean_temperature},
                         {"diurnal_amplitude", s.diurnal_amplitude},
                         {"synoptic_amplitude", s.synoptic_amplitude},
                         {"lapse_rate", s.lapse_rate},
                         {"dem_max", s.dem_max},
                         {"ndvi_coefficient", s.ndvi_coefficient},
                         {"harmonic_amplitudes", s.harmonic_amplitudes},
                         {"wave_amplitudes", s.wave_amplitudes},
                         {"noise_sd", s.noise_sd}};
  return j.dump(2);
}

WorldSpec world_spec_from_json(const std::string& text) {
  WorldSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.seed = j.value("seed", s.seed);
    s.n_stations = j.value("n_stations", s.n_stations);
    if (j.contains("extent")) {
      const auto& e = j["extent"];
      s.extent.lon_min = e.value("lon_min", s.extent.lon_min);
      s.extent.lon_max = e.value("lon_max", s.extent.lon_max);
      s.extent.lat_min = e.value("lat_min", s.extent.lat_min);
      s.extent.lat_max = e.value("lat_max", s.extent.lat_max);
    }
    s.cell_size = j.value("cell_size", s.cell_size);
    s.days = j.value("days", s.days);
    s.sample_interval = j.value("sample_interval", s.sample_interval);
    s.start_timestamp = j.value("start_timestamp", s.start_timestamp);
    s.mean_temperature = j.value("mean_temperature", s.mean_temperature);
    s.diurnal_amplitude = j.value("diurnal_amplitude", s.diurnal_amplitude);
    s.synoptic_amplitude = j.value("synoptic_amplitude", s.synoptic_amplitude);
    s.lapse_rate = j.value("lapse_rate", s.lapse_rate);
    s.dem_max = j.value("dem_max", s.dem_max);
    s.ndvi_coefficient = j.value("ndvi_coefficient", s.ndvi_coefficient);
    s.harmonic_amplitudes = j.value("harmonic_amplitudes", s.harmonic_amplitudes);
    s.wave_amplitudes = j.value("wave_amplitudes", s.wave_amplitudes);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("world spec: ") + e.what());
  }
  s.check();
  return s;
}

WorldSpec read_world_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return world_spec_from_json(ss.str());
}

double TruthField::Wave::value(GeoPoint p, std::int64_t t) const {
  return amplitude * std::sin(kx * p.lon + ky * p.lat - omega * static_cast<double>(t) + phase);
}

namespace {

/// Plane sinusoid with a random direction and a wavelength (degrees) drawn
/// from [min_len, max_len].
void random_direction(Rng& rng, double min_len, double max_len, double& kx, double& ky) {
  const double k = kTwoPi / rng.uniform(min_len, max_len);
  const double angle = rng.uniform(0.0, kTwoPi);
  kx = k * std::cos(angle);
  ky = k * std::sin(angle);
}

}  // namespace

TruthField::TruthField(const WorldSpec& spec) : spec_(spec) {
  spec.check();
  Rng terrain_rng(derive_seed(spec.seed, Stream::terrain));
  // DEM: weights summing to 1 of (1 + sin) / 2 terms, so values span [0, dem_max]
  const std::array<double, 3> dem_weights{0.5, 0.3, 0.2};
  for (double w : dem_weights) {
    Wave term{spec.dem_max * w / 2.0, 0.0, 0.0, 0.0, terrain_rng.uniform(0.0, kTwoPi)};
    random_direction(terrain_rng, 0.6, 2.0, term.kx, term.ky);
    dem_terms_.push_back(term);
  }
  for (double a : {1.0, 0.6}) {
    Wave term{a, 0.0, 0.0, 0.0, terrain_rng.uniform(0.0, kTwoPi)};
    random_direction(terrain_rng, 0.5, 1.5, term.kx, term.ky);
    ndvi_terms_.push_back(term);
  }

  Rng climate_rng(derive_seed(spec.seed, Stream::climate));
  for (double a : spec.harmonic_amplitudes) {
    Wave term{a, 0.0, 0.0, 0.0, climate_rng.uniform(0.0, kTwoPi)};
    random_direction(climate_rng, 0.8, 2.5, term.kx, term.ky);
    harmonics_.push_back(term);
  }
  for (double a : spec.wave_amplitudes) {
    Wave term{a, 0.0, 0.0, 0.0, climate_rng.uniform(0.0, kTwoPi)};
    random_direction(climate_rng, 1.0, 2.5, term.kx, term.ky);
    term.omega = kTwoPi / (climate_rng.uniform(6.0, 18.0) * 60.0);
    waves_.push_back(term);
  }
  synoptic_phase_ = climate_rng.uniform(0.0, kTwoPi);
  wind_phase_ = climate_rng.uniform(0.0, kTwoPi);
  wind_base_dir_ = climate_rng.uniform(0.0, 360.0);
}

double TruthField::dem(GeoPoint p) const {
  double v = spec_.dem_max / 2.0;
  for (const auto& w : dem_terms_) v += w.value(p, 0);
  return std::clamp(v, 0.0, spec_.dem_max);
}

double TruthField::ndvi(GeoPoint p) const {
  double s = 0.0;
  for (const auto& w : ndvi_terms_) s += w.value(p, 0);
  return 0.9 * std::tanh(s);
}

double TruthField::temperature(GeoPoint p, std::int64_t t) const {
  const std::int64_t tau = t - spec_.start_timestamp;
  const double hour = static_cast<double>(((t % 1440) + 1440) % 1440) / 60.0;
  double v = spec_.mean_temperature + spec_.diurnal_amplitude * std::cos(kTwoPi * (hour - 15.0) / 24.0) +
             spec_.synoptic_amplitude *
                 std::sin(kTwoPi * static_cast<double>(tau) / (4.3 * kMinutesPerDay) + synoptic_phase_) -
             spec_.lapse_rate * dem(p) + spec_.ndvi_coefficient * ndvi(p);
  for (const auto& h : harmonics_) v += h.value(p, 0);
  for (const auto& w : waves_) v += w.value(p, tau);
  return v;
}

double TruthField::dew_point_depression(GeoPoint p, std::int64_t t) const {
  const double hour = static_cast<double>(((t % 1440) + 1440) % 1440) / 60.0;
  // peaks two hours before the temperature, so the humidity cycle is not a
  // mirror image of the temperature cycle
  return 1.5 + 3.0 * (1.0 + std::cos(kTwoPi * (hour - 13.0) / 24.0)) / 2.0 +
         (1.0 + std::sin(2.0 * p.lon + 3.0 * p.lat)) / 2.0;
}

double TruthField::wind_speed(GeoPoint p, std::int64_t t) const {
  const double tau = static_cast<double>(t - spec_.start_timestamp);
  const double hour = static_cast<double>(((t % 1440) + 1440) % 1440) / 60.0;
  return 3.0 + 1.2 * std::cos(kTwoPi * (hour - 13.0) / 24.0) +
         1.5 * std::sin(kTwoPi * tau / (1.7 * kMinutesPerDay) + wind_phase_ + 1.5 * p.lon);
}

double TruthField::wind_direction(GeoPoint p, std::int64_t t) const {
  const double tau = static_cast<double>(t - spec_.start_timestamp);
  double d = wind_base_dir_ + 70.0 * std::sin(kTwoPi * tau / (2.3 * kMinutesPerDay) + wind_phase_) +
             20.0 * std::sin(3.0 * p.lat);
  d = std::fmod(d, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d = 0.0;
  return d;
}

double TruthField::lipschitz_bound() const {
  auto norm = [](const Wave& w) { return std::abs(w.amplitude) * std::hypot(w.kx, w.ky); };
  double dem_l = 0.0, ndvi_l = 0.0, l = 0.0;
  for (const auto& w : dem_terms_) dem_l += norm(w);
  for (const auto& w : ndvi_terms_) ndvi_l += norm(w);
  for (const auto& w : harmonics_) l += norm(w);
  for (const auto& w : waves_) l += norm(w);
  return std::abs(spec_.lapse_rate) * dem_l + std::abs(spec_.ndvi_coefficient) * 0.9 * ndvi_l + l;
}

double relative_humidity(double temperature, double dew_point) {
  constexpr double a = 17.625, b = 243.04;
  const double rh = 100.0 * std::exp(a * dew_point / (b + dew_point) - a * temperature / (b + temperature));
  return std::clamp(rh, 0.0, 100.0);
}

namespace {

BoundaryPolygon make_boundary(const Extent& e, Rng& rng) {
  const double cx = (e.lon_min + e.lon_max) / 2.0, cy = (e.lat_min + e.lat_max) / 2.0;
  const double rx = (e.lon_max - e.lon_min) / 2.0, ry = (e.lat_max - e.lat_min) / 2.0;
  constexpr int kVertices = 10;
  std::vector<GeoPoint> ring;
  for (int i = 0; i < kVertices; ++i) {
    const double angle = kTwoPi * i / kVertices;
    const double r = rng.uniform(0.75, 0.95);
    ring.push_back({cx + r * rx * std::cos(angle), cy + r * ry * std::sin(angle)});
  }
  BoundaryPolygon poly;
  poly.rings.push_back(std::move(ring));
  return poly;
}

std::string station_name(std::size_t index, std::size_t count) {
  const int width = std::max(3, static_cast<int>(std::to_string(count).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%0*zu", width, index + 1);
  return buf;
}

}  // namespace

World generate_world(const WorldSpec& spec) {
  spec.check();
  World w{spec, {}, {}, {}, {}, TruthField(spec)};
  const auto& e = spec.extent;
  const auto ncols = static_cast<std::size_t>(std::llround((e.lon_max - e.lon_min) / spec.cell_size));
  const auto nrows = static_cast<std::size_t>(std::llround((e.lat_max - e.lat_min) / spec.cell_size));
  w.dem = AttributeGrid::filled(e.lon_min, e.lat_min, spec.cell_size, ncols, nrows, 0.0);
  w.ndvi = w.dem;
  for (std::size_t row = 0; row < nrows; ++row) {
    for (std::size_t col = 0; col < ncols; ++col) {
      const auto p = w.dem.cell_center(col, row);
      w.dem.values[w.dem.index(col, row)] = w.truth.dem(p);
      w.ndvi.values[w.ndvi.index(col, row)] = w.truth.ndvi(p);
    }
  }
  Rng layout_rng(derive_seed(spec.seed, Stream::layout));
  w.boundary = make_boundary(e, layout_rng);
  w.dem = apply_boundary_mask(std::move(w.dem), w.boundary);
  w.ndvi = apply_boundary_mask(std::move(w.ndvi), w.boundary);
  if (w.dem.unmasked_count() == 0) throw DomainError("world boundary leaves no grid cells");

  const auto n_obs = static_cast<std::size_t>(static_cast<std::int64_t>(spec.days) * 1440 / spec.sample_interval);
  for (std::size_t i = 0; i < spec.n_stations; ++i) {
    GeoPoint p;
    for (;;) {
      p = {layout_rng.uniform(e.lon_min, e.lon_max), layout_rng.uniform(e.lat_min, e.lat_max)};
      if (!w.boundary.contains(p)) continue;
      const auto col = static_cast<std::size_t>((p.lon - w.dem.xll_corner) / spec.cell_size);
      const auto row = static_cast<std::size_t>((p.lat - w.dem.yll_corner) / spec.cell_size);
      if (col < ncols && row < nrows && w.dem.inside(col, row)) break;
    }
    StationSeries s{StationId(station_name(i, spec.n_stations)),
                    {p, lookup_attribute(w.dem, p), lookup_attribute(w.ndvi, p)},
                    {}};
    Rng noise(derive_seed(spec.seed, Stream::station_noise + i));
    s.observations.reserve(n_obs);
    for (std::size_t k = 0; k < n_obs; ++k) {
      const std::int64_t t = spec.start_timestamp + static_cast<std::int64_t>(k) * spec.sample_interval;
      ClimateObservation o;
      o.timestamp = t;
      o.temperature = w.truth.temperature(p, t);
      if (spec.noise_sd > 0.0) o.temperature += noise.normal(0.0, spec.noise_sd);
      o.dew_point = o.temperature - w.truth.dew_point_depression(p, t);
      o.rh = relative_humidity(o.temperature, o.dew_point);
      o.wind_speed = w.truth.wind_speed(p, t);
      o.wind_dir_met = w.truth.wind_direction(p, t);
      s.observations.push_back(o);
    }
    w.stations.push_back(std::move(s));
  }
  std::sort(w.stations.begin(), w.stations.end(),
            [](const StationSeries& a, const StationSeries& b) { return a.id < b.id; });
  return w;
}

Dataset to_dataset(const World& world) {
  Dataset d;
  d.stations = world.stations;
  d.dem = world.dem;
  d.ndvi = world.ndvi;
  return d;
}

void write_world(const World& world, const std::filesystem::path& dir) {
  const auto station_dir = dir / "stations";
  std::filesystem::create_directories(station_dir);
  std::vector<StationSite> sites;
  for (const auto& s : world.stations) {
    sites.push_back({s.id, s.attrs.location});
    std::ofstream out(station_dir / (s.id.str() + ".csv"));
    if (!out) throw DataError("cannot write station file for " + s.id.str());
    write_station_csv(s, out, TimestampFormat::minutes);
  }
  {
    std::ofstream out(station_dir / "stations.csv");
    if (!out) throw DataError("cannot write stations.csv");
    write_station_sites(sites, out);
  }
  write_ascii_grid(world.dem, dir / "dem.asc");
  write_ascii_grid(world.ndvi, dir / "ndvi.asc");
  {
    std::ofstream out(dir / "boundary.json");
    if (!out) throw DataError("cannot write boundary.json");
    write_boundary_json(world.boundary, out);
  }
  std::ofstream out(dir / "world.json");
  if (!out) throw DataError("cannot write world.json");
  out << world_spec_to_json(world.spec) << '\n';
}

}  // namespace frost
