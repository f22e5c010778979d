#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "frost/error.hpp"
#include "frost/raster.hpp"
#include "frost/random.hpp"

using namespace frost;

namespace {

SubmodelBank make_bank(std::size_t n) {
  SubmodelBank bank;
  for (std::size_t i = 0; i < n; ++i) {
    Model m{init_network(NetworkSpec::submodel(), 500 + i), {}};
    m.scaler.mean = {149, -34, 300, 0.3, 149, -34, 300, 0.3, 2, 0, 80, 0, 0};
    m.scaler.sd = {0.5, 0.5, 200, 0.3, 0.5, 0.5, 200, 0.3, 3, 3, 10, 2, 2};
    m.scaler.label_mean = 1.5;
    m.scaler.label_sd = 2.5;
    const double x = static_cast<double>(i);
    bank.submodels.emplace(StationId("S" + std::to_string(i)),
                           Submodel{m, {{149.0 + 0.05 * x, -34.0 + 0.03 * x}, 100.0 + 40.0 * x, 0.1 * x}});
  }
  bank.coefficients = {0.5, 0.2, 0.3};
  bank.freeze_normalizer();
  return bank;
}

ClimateSnapshot make_climate(const SubmodelBank& bank, std::uint64_t seed) {
  Rng rng(seed);
  ClimateSnapshot c;
  for (const auto& id : bank.station_ids()) c[id] = {rng.normal(2, 3), rng.normal(0, 2), rng.uniform(60, 100), rng.normal(), rng.normal()};
  return c;
}

std::pair<AttributeGrid, AttributeGrid> make_grids(std::size_t cols, std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  auto dem = AttributeGrid::filled(148.9, -34.1, 0.02, cols, rows, 0.0);
  auto ndvi = dem;
  for (std::size_t i = 0; i < dem.size(); ++i) {
    dem.values[i] = rng.uniform(0, 800);
    ndvi.values[i] = rng.uniform(-0.2, 0.9);
    if (rng.uniform() < 0.15) dem.mask[i] = 0;
  }
  return {dem, ndvi};
}

}  // namespace

TEST_CASE("raster method parsing") {
  CHECK(parse_raster_method("avg").method == RasterMethod::average);
  CHECK(parse_raster_method("wavg").method == RasterMethod::weighted);
  const auto s = parse_raster_method("single:S3");
  CHECK(s.method == RasterMethod::single);
  CHECK(s.station->str() == "S3");
  CHECK_THROWS_AS(parse_raster_method("single:"), UsageError);
  CHECK_THROWS_AS(parse_raster_method("ok"), UsageError);
}

TEST_CASE("single-cell raster is one forward pass") {
  const auto bank = make_bank(3);
  const auto climate = make_climate(bank, 1);
  auto dem = AttributeGrid::filled(149.0, -34.0, 0.01, 1, 1, 250.0);
  auto ndvi = AttributeGrid::filled(149.0, -34.0, 0.01, 1, 1, 0.4);
  RasterRequest req{RasterMethod::single, StationId("S1"), std::nullopt};
  const auto r = generate_raster(bank, climate, dem, ndvi, req);
  const StationAttributes target{dem.cell_center(0, 0), 250.0, 0.4};
  const auto& c = climate.at(StationId("S1"));
  CHECK(r.values[0] == predict_single(bank, StationId("S1"), c, target));
  CHECK(r.same_geometry(dem));
}

TEST_CASE("masked cells are NODATA; geometry mismatch is an error") {
  const auto bank = make_bank(2);
  const auto climate = make_climate(bank, 2);
  auto [dem, ndvi] = make_grids(5, 4, 3);
  std::fill(dem.mask.begin(), dem.mask.end(), 0);
  const auto r = generate_raster(bank, climate, dem, ndvi, {});
  CHECK(r.unmasked_count() == 0);
  for (double v : r.values) CHECK(v == r.nodata);

  auto other = AttributeGrid::filled(0, 0, 1, 2, 2, 0.0);
  CHECK_THROWS_AS(generate_raster(bank, climate, dem, other, {}), DataError);
}

TEST_CASE("raster identities") {
  const auto bank = make_bank(5);
  const auto climate = make_climate(bank, 4);
  const auto [dem, ndvi] = make_grids(12, 9, 5);

  const auto avg = generate_raster(bank, climate, dem, ndvi, {RasterMethod::average, std::nullopt, std::nullopt});
  CHECK(avg.same_geometry(dem));
  CHECK(avg.mask == dem.mask);

  StationWeights uniform;
  for (const auto& id : bank.station_ids()) uniform[id] = 0.2;
  const auto wavg = generate_raster(bank, climate, dem, ndvi, {RasterMethod::weighted, std::nullopt, uniform});
  for (std::size_t i = 0; i < avg.size(); ++i) CHECK(std::abs(avg.values[i] - wavg.values[i]) < 1e-12);

  std::vector<AttributeGrid> singles;
  for (const auto& id : bank.station_ids()) {
    singles.push_back(generate_raster(bank, climate, dem, ndvi, {RasterMethod::single, id, std::nullopt}));
  }
  for (std::size_t i = 0; i < avg.size(); ++i) {
    if (!avg.mask[i]) continue;
    double mean = 0.0;
    for (const auto& s : singles) mean += s.values[i];
    mean /= static_cast<double>(singles.size());
    CHECK(std::abs(avg.values[i] - mean) < 1e-9);
  }

  const auto weighted = generate_raster(bank, climate, dem, ndvi, {RasterMethod::weighted, std::nullopt, std::nullopt});
  for (std::size_t i = 0; i < avg.size(); ++i) {
    if (!avg.mask[i]) continue;
    double lo = 1e300, hi = -1e300;
    for (const auto& s : singles) {
      lo = std::min(lo, s.values[i]);
      hi = std::max(hi, s.values[i]);
    }
    CHECK(weighted.values[i] >= lo - 1e-9);
    CHECK(weighted.values[i] <= hi + 1e-9);
  }
}

TEST_CASE("raster comparisons") {
  auto a = AttributeGrid::filled(0, 0, 1, 4, 3, 0.0);
  Rng rng(6);
  for (auto& v : a.values) v = rng.normal();
  auto b = a;
  for (auto& v : b.values) v += 1.0;

  CHECK(compare_rasters(a, a).p == 1.0);
  CHECK(compare_rasters(a, b).p == 0.0);

  auto c = a;
  for (auto& v : c.values) v += rng.normal(0.2, 0.5);
  c.mask[3] = 0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!c.mask[i]) continue;
    x.push_back(a.values[i]);
    y.push_back(c.values[i]);
  }
  const auto direct = paired_t_test(x, y);
  const auto via = compare_rasters(a, c);
  CHECK(via.t == direct.t);
  CHECK(via.p == direct.p);
  CHECK(via.n == a.size() - 1);

  CHECK_THROWS_AS(compare_rasters(a, AttributeGrid::filled(0, 0, 1, 3, 4, 0.0)), DataError);
}

TEST_CASE("raster p-value matrix") {
  Rng rng(7);
  std::vector<AttributeGrid> rasters;
  for (int k = 0; k < 4; ++k) {
    auto g = AttributeGrid::filled(0, 0, 1, 5, 5, 0.0);
    for (auto& v : g.values) v = rng.normal(0.1 * k, 1.0);
    rasters.push_back(g);
  }
  const auto m = raster_matrix({"f0", "f1", "f2", "f3"}, rasters);
  std::size_t entries = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK_FALSE(m.p[i][i].has_value());
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      ++entries;
      CHECK(*m.p[i][j] == *m.p[j][i]);
    }
  }
  CHECK(entries == 12);

  const auto same = raster_matrix({"x", "y"}, {rasters[0], rasters[0]});
  CHECK(*same.p[0][1] == 1.0);
  CHECK_THROWS_AS(raster_matrix({"x"}, {rasters[0]}), DataError);
}

TEST_CASE("png heatmap") {
  auto g = AttributeGrid::filled(0, 0, 1, 6, 4, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = static_cast<double>(i);
  g.mask[0] = 0;
  const auto path = std::filesystem::temp_directory_path() / "frost_heatmap_test.png";
  write_png_heatmap(g, path);
  std::ifstream in(path, std::ios::binary);
  char sig[8];
  in.read(sig, 8);
  CHECK(std::string(sig, 8) == std::string("\x89PNG\r\n\x1a\n", 8));
  CHECK(std::filesystem::exists(path.string() + ".json"));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");

  const auto bytes = encode_png_rgba(2, 1, {255, 0, 0, 255, 0, 0, 255, 0});
  CHECK(bytes.size() > 8);
  CHECK_THROWS(encode_png_rgba(2, 2, {1, 2, 3}));
}
