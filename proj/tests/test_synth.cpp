#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "frost/error.hpp"
#include "frost/features.hpp"
#include "frost/random.hpp"
#include "frost/synth.hpp"

using namespace frost;

namespace {

WorldSpec small_spec(std::uint64_t seed = 5) {
  WorldSpec s;
  s.seed = seed;
  s.n_stations = 8;
  s.days = 1;
  s.extent = {148.0, 148.6, -34.5, -34.0};
  s.cell_size = 0.02;
  return s;
}

}  // namespace

TEST_CASE("world generation is deterministic and valid") {
  const auto a = generate_world(small_spec());
  const auto b = generate_world(small_spec());
  REQUIRE(a.stations.size() == 8);
  for (std::size_t i = 0; i < a.stations.size(); ++i) {
    CHECK(a.stations[i].id == b.stations[i].id);
    CHECK(a.stations[i].attrs == b.stations[i].attrs);
    CHECK(a.stations[i].observations == b.stations[i].observations);
    CHECK(validate_series(a.stations[i]).empty());
    CHECK(a.stations[i].observations.size() == 1440);
    CHECK(a.boundary.contains(a.stations[i].attrs.location));
  }
  CHECK(a.dem.values == b.dem.values);
  CHECK(a.stations[0].id.str() == "S001");
  const auto c = generate_world(small_spec(6));
  CHECK_FALSE(c.stations[0].observations == a.stations[0].observations);
  for (std::size_t i = 0; i < a.dem.size(); ++i) {
    CHECK(a.dem.values[i] >= 0.0);
    CHECK((a.ndvi.values[i] >= -1.0 && a.ndvi.values[i] <= 1.0));
  }
}

TEST_CASE("noiseless stations follow the truth field") {
  auto spec = small_spec();
  spec.noise_sd = 0.0;
  const auto w = generate_world(spec);
  for (const auto& s : w.stations) {
    for (std::size_t i = 0; i < s.observations.size(); i += 97) {
      const auto& o = s.observations[i];
      CHECK(o.temperature == w.truth.temperature(s.attrs.location, o.timestamp));
      CHECK(o.dew_point <= o.temperature);
    }
  }
}

TEST_CASE("a flat world gives every station the same temperatures") {
  auto spec = small_spec();
  spec.noise_sd = 0.0;
  spec.lapse_rate = 0.0;
  spec.ndvi_coefficient = 0.0;
  spec.harmonic_amplitudes.clear();
  spec.wave_amplitudes.clear();
  const auto w = generate_world(spec);
  for (const auto& s : w.stations) {
    REQUIRE(s.observations.size() == w.stations[0].observations.size());
    for (std::size_t i = 0; i < s.observations.size(); ++i) {
      CHECK(s.observations[i].temperature == w.stations[0].observations[i].temperature);
    }
  }
}

TEST_CASE("truth field respects its Lipschitz bound") {
  const auto w = generate_world(small_spec());
  const double bound = w.truth.lipschitz_bound();
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const GeoPoint p{rng.uniform(148.0, 148.6), rng.uniform(-34.5, -34.0)};
    const double delta = std::pow(10.0, -rng.uniform(1, 6));
    const double angle = rng.uniform(0, 6.283185307179586);
    const GeoPoint q{p.lon + delta * std::cos(angle), p.lat + delta * std::sin(angle)};
    const auto t = w.spec.start_timestamp + static_cast<std::int64_t>(rng.below(1440));
    CHECK(std::abs(w.truth.temperature(p, t) - w.truth.temperature(q, t)) <= bound * delta * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("noiseless labels match the window minimum of the field") {
  auto spec = small_spec();
  spec.noise_sd = 0.0;
  const auto w = generate_world(spec);
  const auto& s = w.stations[3];
  const auto labels = label_next_hour_min(s, 60);
  for (std::size_t i = 0; i < labels.size(); i += 37) {
    double m = 1e300;
    for (std::int64_t k = 1; k <= 60; ++k) m = std::min(m, w.truth.temperature(s.attrs.location, labels[i].timestamp + k));
    CHECK(labels[i].value == m);
  }
}

TEST_CASE("written worlds ingest back to the same dataset") {
  const auto w = generate_world(small_spec());
  const auto dir = std::filesystem::temp_directory_path() / "frost_synth_roundtrip";
  std::filesystem::remove_all(dir);
  write_world(w, dir);
  CHECK(std::filesystem::exists(dir / "world.json"));
  const auto data = ingest_station_directory(dir / "stations", read_ascii_grid(dir / "dem.asc"),
                                             read_ascii_grid(dir / "ndvi.asc"),
                                             {w.spec.cell_size, read_boundary_json(dir / "boundary.json")});
  const auto direct = to_dataset(w);
  REQUIRE(data.stations.size() == direct.stations.size());
  for (std::size_t i = 0; i < data.stations.size(); ++i) {
    CHECK(data.stations[i].id == direct.stations[i].id);
    CHECK(data.stations[i].observations == direct.stations[i].observations);
    CHECK(data.stations[i].attrs.dem == doctest::Approx(direct.stations[i].attrs.dem));
    CHECK(data.stations[i].attrs.ndvi == doctest::Approx(direct.stations[i].attrs.ndvi));
  }
  CHECK(read_world_spec(dir / "world.json").seed == w.spec.seed);
  std::filesystem::remove_all(dir);
}

TEST_CASE("world spec json") {
  auto spec = small_spec(42);
  spec.wave_amplitudes = {0.1};
  const auto back = world_spec_from_json(world_spec_to_json(spec));
  CHECK(back.seed == 42);
  CHECK(back.wave_amplitudes == spec.wave_amplitudes);
  CHECK(world_spec_to_json(back) == world_spec_to_json(spec));
  CHECK_THROWS_AS(world_spec_from_json("{\"n_stations\": 2}"), DomainError);
  CHECK_THROWS_AS(world_spec_from_json("{\"days\": \"x\"}"), FormatError);
}

TEST_CASE("relative humidity") {
  CHECK(relative_humidity(10.0, 10.0) == doctest::Approx(100.0));
  CHECK(relative_humidity(20.0, 10.0) < 60.0);
  CHECK(relative_humidity(20.0, 10.0) > 50.0);
}
