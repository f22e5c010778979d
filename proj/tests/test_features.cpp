#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frost/error.hpp"
#include "frost/features.hpp"
#include "frost/random.hpp"

using namespace frost;

namespace {

StationSeries make_series(const std::string& id, std::vector<double> temps, std::int64_t t0 = 0) {
  StationSeries s{StationId(id), {{149.0, -34.0}, 100.0, 0.5}, {}};
  for (std::size_t i = 0; i < temps.size(); ++i) {
    s.observations.push_back({t0 + static_cast<std::int64_t>(i), temps[i], temps[i] - 2.0, 80.0, 2.0, 45.0});
  }
  return s;
}

}  // namespace

TEST_CASE("wind reversal and components") {
  CHECK(reverse_wind_direction(0.0) == 180.0);
  CHECK(reverse_wind_direction(270.0) == 90.0);
  CHECK(reverse_wind_direction(180.0) == 0.0);
  CHECK_THROWS_AS(reverse_wind_direction(360.0), DomainError);
  CHECK_THROWS_AS(reverse_wind_direction(-1.0), DomainError);

  // a northerly blows towards the south
  auto w = wind_to_components(0.0, 10.0);
  CHECK(w.v_n == doctest::Approx(-10.0));
  CHECK(std::abs(w.v_e) < 1e-12);
  // a westerly blows towards the east
  w = wind_to_components(270.0, 4.0);
  CHECK(w.v_e == doctest::Approx(4.0));
  CHECK(std::abs(w.v_n) < 1e-12);
  CHECK_THROWS_AS(wind_to_components(90.0, -1.0), DomainError);
}

TEST_CASE("wind components preserve speed and reversal is an involution") {
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const double dir = rng.uniform(0.0, 360.0);
    const double speed = rng.uniform(0.0, 30.0);
    const auto w = wind_to_components(dir, speed);
    CHECK(std::hypot(w.v_e, w.v_n) == doctest::Approx(speed).epsilon(1e-12));
    CHECK(reverse_wind_direction(reverse_wind_direction(dir)) == doctest::Approx(dir).epsilon(1e-12));
  }
}

TEST_CASE("climate vector order") {
  const ClimateObservation obs{0, 5.0, 1.0, 75.0, 3.0, 180.0};
  const auto v = climate_features(obs);
  CHECK(v[0] == 5.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == 75.0);
  CHECK(v[3] == doctest::Approx(3.0));  // southerly blows north
  CHECK(std::abs(v[4]) < 1e-12);
}

TEST_CASE("next-hour minimum labels") {
  const auto s = make_series("1", {5, 4, 3, 6, 2, 7});
  const auto labels = label_next_hour_min(s, 2);
  REQUIRE(labels.size() == 4);
  CHECK(labels[0].value == 3.0);
  CHECK(labels[1].value == 3.0);
  CHECK(labels[2].value == 2.0);
  CHECK(labels[3].value == 2.0);
  CHECK(labels[3].timestamp == 3);
  CHECK(label_next_hour_min(make_series("1", {1, 2}), 2).empty());
  CHECK_THROWS_AS(label_next_hour_min(s, 0), DomainError);
}

TEST_CASE("labels match a brute-force minimum") {
  Rng rng(4);
  std::vector<double> temps(400);
  for (auto& t : temps) t = rng.normal(3.0, 3.0);
  const auto s = make_series("1", temps);
  for (std::size_t h : {1u, 7u, 60u}) {
    const auto labels = label_next_hour_min(s, h);
    REQUIRE(labels.size() == temps.size() - h);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const double expect = *std::min_element(temps.begin() + static_cast<std::ptrdiff_t>(t + 1),
                                              temps.begin() + static_cast<std::ptrdiff_t>(t + h + 1));
      CHECK(labels[t].value == expect);
    }
  }
}

TEST_CASE("pair entries join on timestamps") {
  auto source = make_series("1", std::vector<double>(10, 1.0));
  auto target = make_series("2", {9, 8, 7, 6, 5, 4, 3, 2, 1, 0});
  target.attrs.dem = 300.0;

  auto entries = build_pair_entries(source, target, 2);
  REQUIRE(entries.size() == 8);
  CHECK(entries[0].source.str() == "1");
  CHECK(entries[0].target.str() == "2");
  CHECK(entries[0].label == 7.0);
  CHECK(entries[0].features()[6] == 300.0);

  TimeFilter filter;
  filter.begin = 2;
  filter.end = 7;
  filter.stride = 2;
  entries = build_pair_entries(source, target, 2, filter);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].timestamp == 2);
  CHECK(entries[2].timestamp == 6);

  const auto disjoint = make_series("3", std::vector<double>(10, 1.0), 1000);
  CHECK(build_pair_entries(disjoint, target, 2).empty());
}

TEST_CASE("self pairs carry the same climate as the on-site samples") {
  const auto s = make_series("1", {5, 4, 3, 6, 2, 7});
  const auto entries = build_pair_entries(s, s, 2);
  const auto baseline = build_baseline_samples(s, 2);
  REQUIRE(entries.size() == baseline.rows());
  CHECK(baseline.cols == kClimateFeatureCount);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto f = entries[i].features();
    for (std::size_t j = 0; j < kClimateFeatureCount; ++j) CHECK(baseline.row(i)[j] == f[8 + j]);
    CHECK(baseline.y[i] == entries[i].label);
  }
}

TEST_CASE("z-score scaler") {
  FeatureMatrix m(2);
  m.push_back(std::vector<double>{1.0, 5.0}, 10.0);
  m.push_back(std::vector<double>{3.0, 5.0}, 20.0);
  const auto stats = fit_scaler(m);
  CHECK(stats.mean[0] == 2.0);
  CHECK(stats.sd[0] == 1.0);
  CHECK(stats.sd[1] == 1.0);  // constant column
  CHECK(stats.label_mean == 15.0);
  CHECK(stats.label_sd == 5.0);
  const auto scaled = apply_scaler(stats, m);
  CHECK(scaled.row(0)[0] == -1.0);
  CHECK(scaled.row(1)[1] == 0.0);
  CHECK(invert_label(stats, scale_label(stats, 12.5)) == doctest::Approx(12.5));
}

TEST_CASE("entries csv has one line per entry plus a header") {
  const auto s = make_series("1", {5, 4, 3, 6});
  const auto entries = build_pair_entries(s, s, 1);
  std::ostringstream out;
  write_entries_csv(entries, out);
  const auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<std::ptrdiff_t>(entries.size() + 1));
}
