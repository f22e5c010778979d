#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "frost/ensemble.hpp"
#include "frost/error.hpp"
#include "frost/random.hpp"

using namespace frost;

namespace {

StationAttributes at(double lon, double lat, double dem = 0.0, double ndvi = 0.0) { return {{lon, lat}, dem, ndvi}; }

std::vector<DistanceTriple> random_triples(Rng& rng, std::size_t n) {
  std::vector<DistanceTriple> t(n);
  for (auto& d : t) d = {rng.uniform(), rng.uniform(), rng.uniform()};
  return t;
}

WeightCoefficients random_coefficients(Rng& rng) {
  WeightCoefficients c{rng.uniform(), rng.uniform(), rng.uniform()};
  if (rng.uniform() < 0.2) c.b = 0.0;
  c.a += 1e-3;
  return c;
}

SubmodelBank tiny_bank() {
  SubmodelBank bank;
  bank.fold = 2;
  for (int i = 0; i < 3; ++i) {
    Model m{init_network(NetworkSpec::submodel(), 40 + static_cast<std::uint64_t>(i)), {}};
    m.scaler.mean.assign(13, 0.1 * i);
    m.scaler.sd.assign(13, 1.0 + i);
    m.scaler.label_mean = 2.0;
    m.scaler.label_sd = 3.0;
    bank.submodels.emplace(StationId("S" + std::to_string(i)), Submodel{m, at(149.0 + 0.1 * i, -34.0, 100.0 * i, 0.2)});
  }
  Model b{init_network(NetworkSpec::baseline(), 7), {}};
  b.scaler.mean.assign(5, 0.0);
  b.scaler.sd.assign(5, 1.0);
  bank.baselines.emplace(StationId("T0"), b);
  bank.test_stations = {StationId("T0")};
  bank.coefficients = paper_preset(2);
  bank.freeze_normalizer();
  return bank;
}

}  // namespace

TEST_CASE("raw station distances") {
  const auto d = station_distances(at(0, 0, 100, 0.1), at(3, 4, 250, 0.6));
  CHECK(d.geo == doctest::Approx(5.0));
  CHECK(d.dem == 150.0);
  CHECK(d.ndvi == doctest::Approx(0.5));
  CHECK(station_distances(at(1, 2, 3, 0.4), at(1, 2, 3, 0.4)) == DistanceTriple{});
}

TEST_CASE("min-max normalization") {
  const auto n = normalize_distances(std::vector<DistanceTriple>{{10, 5, 0.1}, {20, 5, 0.3}, {30, 5, 0.2}});
  CHECK(n[0].geo == 0.0);
  CHECK(n[1].geo == 0.5);
  CHECK(n[2].geo == 1.0);
  for (const auto& d : n) CHECK(d.dem == 0.0);
  CHECK(normalize_distances(std::vector<DistanceTriple>{{7, 8, 9}})[0] == DistanceTriple{});

  const auto norm = fit_normalizer(std::vector<DistanceTriple>{{1, 0, 0}, {3, 10, 1}});
  CHECK(norm.normalize({5, 20, 0.5}) == DistanceTriple{1.0, 1.0, 0.5});
  CHECK(norm.normalize({0, -1, 0}) == DistanceTriple{0.0, 0.0, 0.0});
}

TEST_CASE("intermediate and final weights") {
  CHECK(intermediate_weight({1, 1, 1}, paper_preset(0)) == doctest::Approx(4.8757).epsilon(1e-3 / 4.8757));
  CHECK(intermediate_weight({1, 1, 1}, {0.1629, 0.0132, 0.0290}) == doctest::Approx(4.875670404680644).epsilon(1e-12));
  CHECK(intermediate_weight({0, 0, 0}, {1, 0, 0}) == 1.0 / kWeightDenominatorFloor);

  // intermediate weights 3 and 1
  const auto w = station_weights(std::vector<DistanceTriple>{{1.0 / 3.0, 0, 0}, {1.0, 0, 0}}, {1, 0, 0});
  CHECK(w[0] == doctest::Approx(0.75));
  CHECK(w[1] == doctest::Approx(0.25));

  const auto colocated = station_weights(std::vector<DistanceTriple>{{0, 0, 0}, {0.01, 0, 0}, {1, 1, 1}}, {1, 0, 0});
  CHECK(colocated[0] > 0.99);

  std::map<StationId, DistanceTriple> keyed{{StationId("A"), {0.5, 0, 0}}, {StationId("B"), {0.5, 0, 0}}};
  const auto kw = station_weights(keyed, {1, 0, 0});
  CHECK(kw.at(StationId("A")) == doctest::Approx(0.5));
  CHECK_THROWS_AS(station_weights(keyed, {0, 0, 0}), DomainError);
}

TEST_CASE("weights are non-negative, sum to one and are monotone") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.below(60);
    const auto triples = random_triples(rng, n);
    const auto coeff = random_coefficients(rng);
    const auto w = station_weights(triples, coeff);
    double sum = 0.0;
    for (double v : w) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);

    auto closer = triples[0];
    closer.geo *= rng.uniform();
    CHECK(intermediate_weight(closer, coeff) >= intermediate_weight(triples[0], coeff));
  }
}

TEST_CASE("weights on a subset equal renormalized full weights") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto triples = random_triples(rng, 20);
    const auto coeff = random_coefficients(rng);
    const auto full = station_weights(triples, coeff);
    std::vector<DistanceTriple> sub;
    std::vector<double> kept;
    for (std::size_t i = 0; i < triples.size(); i += 3) {
      sub.push_back(triples[i]);
      kept.push_back(full[i]);
    }
    const double total = std::accumulate(kept.begin(), kept.end(), 0.0);
    const auto direct = station_weights(sub, coeff);
    for (std::size_t i = 0; i < sub.size(); ++i) CHECK(direct[i] == doctest::Approx(kept[i] / total).epsilon(1e-12));
  }
}

TEST_CASE("coefficient calibration") {
  std::vector<DistanceTriple> d;
  std::vector<double> err;
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    d.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    err.push_back(3.0 * d.back().geo);
  }
  auto c = coefficients_from_errors(d, err);
  CHECK(c.a == doctest::Approx(1.0));
  CHECK(std::abs(c.c) < 0.1);

  std::vector<double> constant(d.size(), 0.7);
  c = coefficients_from_errors(d, constant);
  CHECK(c == WeightCoefficients{1.0, 0.0, 0.0});

  CHECK(pearson_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson_correlation(std::vector<double>{1, 1, 1}, std::vector<double>{3, 2, 1}) == 0.0);
}

TEST_CASE("average and weighted aggregation") {
  CHECK(aggregate_average(std::vector<double>{2.0}) == 2.0);
  CHECK(aggregate_average(std::vector<double>{1.0, 3.0}) == 2.0);
  CHECK(aggregate_average(std::vector<double>{-1.0, 0.0, 4.0}) == 1.0);
  CHECK_THROWS_AS(aggregate_average(std::vector<double>{}), DataError);

  CHECK(aggregate_weighted(std::vector<double>{0.0, 4.0}, std::vector<double>{0.75, 0.25}) == doctest::Approx(1.0));
  CHECK(aggregate_weighted(std::vector<double>{-3.7}, std::vector<double>{1.0}) == -3.7);
  CHECK_THROWS_AS(aggregate_weighted(std::vector<double>{}, std::vector<double>{}), DataError);
  CHECK_THROWS_AS(aggregate_weighted(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), DomainError);

  std::map<StationId, double> preds{{StationId("A"), 1.0}, {StationId("B"), 5.0}};
  const StationWeights w{{StationId("A"), 0.3}, {StationId("B"), 0.1}, {StationId("C"), 0.6}};
  CHECK(aggregate_weighted(preds, w) == doctest::Approx(2.0));
}

TEST_CASE("uniform weights reproduce the plain average") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.below(60);
    std::vector<double> p(n), w(n, 1.0 / static_cast<double>(n));
    for (auto& v : p) v = rng.normal(2.0, 5.0);
    CHECK(std::abs(aggregate_weighted(p, w) - aggregate_average(p)) < 1e-12);
  }
}

TEST_CASE("weighted vote") {
  auto v = aggregate_vote(std::vector<double>{-1.2, 0.5}, std::vector<double>{0.6, 0.4});
  CHECK(v.frost);
  CHECK(v.score == doctest::Approx(0.2));
  v = aggregate_vote(std::vector<double>{0.0, 3.0}, std::vector<double>{0.5, 0.5});
  CHECK_FALSE(v.frost);
  CHECK(v.score == doctest::Approx(-1.0));
  v = aggregate_vote(std::vector<double>{-1.0, 1.0}, std::vector<double>{0.5, 0.5});
  CHECK(v.frost);
  CHECK(v.score == 0.0);
  CHECK(aggregate_vote(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 1.0}, 1.5).frost);

  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.below(20);
    std::vector<double> p(n), w(n), scaled(n);
    const double factor = rng.uniform(1e-3, 1e3);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.normal();
      w[i] = rng.uniform();
      scaled[i] = w[i] * factor;
    }
    CHECK(aggregate_vote(p, w).frost == aggregate_vote(p, scaled).frost);
  }
}

TEST_CASE("bank prediction and persistence") {
  const auto bank = tiny_bank();
  CHECK(bank.station_ids().size() == 3);
  CHECK(bank.normalizer.max.dem == 200.0);
  const ClimateVector climate{2.0, 0.0, 85.0, 1.0, -1.0};
  const auto target = at(149.05, -34.02, 50.0, 0.3);
  const double p = predict_single(bank, StationId("S1"), climate, target);
  CHECK(std::isfinite(p));
  CHECK_THROWS_AS(predict_single(bank, StationId("S1"), std::vector<double>{1, 2, 3, 4}, target), DomainError);
  CHECK_THROWS(predict_single(bank, StationId("nope"), climate, target));

  const auto dir = std::filesystem::temp_directory_path() / "frost_bank_test";
  std::filesystem::remove_all(dir);
  save_bank(bank, dir);
  const auto back = load_bank(dir);
  CHECK(back.fold == 2);
  CHECK(back.coefficients == bank.coefficients);
  CHECK(back.normalizer.max == bank.normalizer.max);
  CHECK(back.test_stations == bank.test_stations);
  CHECK(back.baselines.size() == 1);
  CHECK(predict_single(back, StationId("S1"), climate, target) == p);
  std::filesystem::remove_all(dir);
}

TEST_CASE("presets") {
  CHECK(paper_preset(0) == WeightCoefficients{0.1629, 0.0132, 0.0290});
  for (std::size_t f = 0; f < 5; ++f) CHECK(paper_preset(f).valid());
  CHECK_THROWS_AS(paper_preset(5), DomainError);
}
