#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "frost/core.hpp"
#include "frost/features.hpp"
#include "frost/ingest.hpp"

namespace frost {

struct Extent {
  double lon_min = 148.0;
  double lon_max = 150.5;
  double lat_min = -35.5;
  double lat_max = -33.5;
};

/// Parameters of a synthetic world. Amplitudes are degC unless noted.
struct WorldSpec {
  std::uint64_t seed = 1;
  std::size_t n_stations = 75;
  Extent extent;
  double cell_size = 0.01;  // degrees
  std::size_t days = 7;
  std::int64_t sample_interval = 1;                 // minutes
  std::int64_t start_timestamp = 17318LL * 1440;  // 2017-06-01T00:00
  double mean_temperature = 6.0;
  double diurnal_amplitude = 6.0;
  double synoptic_amplitude = 2.5;
  double lapse_rate = 0.0065;  // degC per metre
  double dem_max = 900.0;      // metres
  double ndvi_coefficient = -1.5;
  /// Static spatial sinusoids.
  std::vector<double> harmonic_amplitudes{0.8, 0.5};
  /// Sinusoids travelling across the region; they make off-site errors grow
  /// with distance.
  std::vector<double> wave_amplitudes{1.2, 0.8};
  double noise_sd = 0.5;

  void check() const;
};

std::string world_spec_to_json(const WorldSpec& spec);
WorldSpec world_spec_from_json(const std::string& text);
WorldSpec read_world_spec(const std::filesystem::path& path);

/// Closed-form noiseless field behind a world.
class TruthField {
 public:
  explicit TruthField(const WorldSpec& spec);

  double temperature(GeoPoint p, std::int64_t t) const;
  double dem(GeoPoint p) const;
  double ndvi(GeoPoint p) const;
  /// Dew-point depression, always >= 0.
  double dew_point_depression(GeoPoint p, std::int64_t t) const;
  double wind_speed(GeoPoint p, std::int64_t t) const;
  double wind_direction(GeoPoint p, std::int64_t t) const;

  /// Bound on |temperature(p, t) - temperature(q, t)| / |p - q| (degrees).
  double lipschitz_bound() const;

 private:
  struct Wave {
    double amplitude, kx, ky, omega, phase;  // omega in radians per minute
    double value(GeoPoint p, std::int64_t t) const;
  };
  WorldSpec spec_;
  std::vector<Wave> dem_terms_;
  std::vector<Wave> ndvi_terms_;
  std::vector<Wave> harmonics_;
  std::vector<Wave> waves_;
  double synoptic_phase_ = 0.0;
  double wind_phase_ = 0.0;
  double wind_base_dir_ = 0.0;
};

struct World {
  WorldSpec spec;
  std::vector<StationSeries> stations;  // sorted by id
  AttributeGrid dem;
  AttributeGrid ndvi;
  BoundaryPolygon boundary;
  TruthField truth;
};

/// Deterministic in the spec. Station attributes are the grid values of the
/// containing cell, as ingest would look them up.
World generate_world(const WorldSpec& spec);

Dataset to_dataset(const World& world);

/// Writes stations/ (stations.csv plus one CSV per station), dem.asc,
/// ndvi.asc, boundary.json and world.json into `dir`.
void write_world(const World& world, const std::filesystem::path& dir);

/// RH in percent from temperature and dew point (Magnus approximation).
double relative_humidity(double temperature, double dew_point);

}  // namespace frost
