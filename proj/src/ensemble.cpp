#include "frost/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frost/error.hpp"

namespace frost {

bool WeightCoefficients::valid() const noexcept {
  return a >= 0.0 && b >= 0.0 && c >= 0.0 && std::isfinite(a + b + c) && a + b + c > 0.0;
}

WeightCoefficients paper_preset(std::size_t fold) {
  static constexpr std::array<WeightCoefficients, kFoldCount> kTable{{
      {0.1629, 0.0132, 0.0290},
      {0.1768, 0.0205, 0.0238},
      {0.1612, 0.0222, 0.0177},
      {0.1804, 0.0114, 0.0269},
      {0.1601, 0.0110, 0.0260},
  }};
  if (fold >= kTable.size()) throw DomainError("no coefficient preset for fold " + std::to_string(fold));
  return kTable[fold];
}

DistanceTriple station_distances(const StationAttributes& source, const StationAttributes& target) {
  return {std::hypot(source.location.lon - target.location.lon, source.location.lat - target.location.lat),
          std::abs(source.dem - target.dem), std::abs(source.ndvi - target.ndvi)};
}

namespace {

double min_max(double v, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace

DistanceTriple DistanceNormalizer::normalize(const DistanceTriple& raw) const {
  return {min_max(raw.geo, min.geo, max.geo), min_max(raw.dem, min.dem, max.dem),
          min_max(raw.ndvi, min.ndvi, max.ndvi)};
}

DistanceNormalizer fit_normalizer(std::span<const DistanceTriple> raw) {
  if (raw.empty()) throw DataError("cannot fit distance normalization on zero stations");
  DistanceNormalizer n{raw.front(), raw.front()};
  for (const auto& t : raw) {
    n.min.geo = std::min(n.min.geo, t.geo);
    n.min.dem = std::min(n.min.dem, t.dem);
    n.min.ndvi = std::min(n.min.ndvi, t.ndvi);
    n.max.geo = std::max(n.max.geo, t.geo);
    n.max.dem = std::max(n.max.dem, t.dem);
    n.max.ndvi = std::max(n.max.ndvi, t.ndvi);
  }
  return n;
}

std::vector<DistanceTriple> normalize_distances(std::span<const DistanceTriple> raw) {
  const auto n = fit_normalizer(raw);
  std::vector<DistanceTriple> out;
  out.reserve(raw.size());
  for (const auto& t : raw) out.push_back(n.normalize(t));
  return out;
}

double intermediate_weight(const DistanceTriple& d, const WeightCoefficients& coeff) {
  const double denom = coeff.a * d.geo + coeff.b * d.dem + coeff.c * d.ndvi;
  return 1.0 / std::max(denom, kWeightDenominatorFloor);
}

std::vector<double> station_weights(std::span<const DistanceTriple> normalized, const WeightCoefficients& coeff) {
  if (!coeff.valid()) throw DomainError("weight coefficients must be non-negative with a positive sum");
  std::vector<double> w;
  w.reserve(normalized.size());
  double total = 0.0;
  for (const auto& d : normalized) {
    w.push_back(intermediate_weight(d, coeff));
    total += w.back();
  }
  for (auto& v : w) v /= total;
  return w;
}

StationWeights station_weights(const std::map<StationId, DistanceTriple>& normalized, const WeightCoefficients& coeff) {
  std::vector<DistanceTriple> triples;
  triples.reserve(normalized.size());
  for (const auto& [id, t] : normalized) triples.push_back(t);
  const auto w = station_weights(triples, coeff);
  StationWeights out;
  std::size_t i = 0;
  for (const auto& [id, t] : normalized) out.emplace(id, w[i++]);
  return out;
}

std::vector<StationId> SubmodelBank::station_ids() const {
  std::vector<StationId> ids;
  for (const auto& [id, m] : submodels) ids.push_back(id);
  return ids;
}

const Submodel& SubmodelBank::at(const StationId& id) const {
  auto it = submodels.find(id);
  if (it == submodels.end()) throw DataError("station " + id.str() + " has no submodel in fold " + std::to_string(fold));
  return it->second;
}

void SubmodelBank::freeze_normalizer() {
  std::vector<DistanceTriple> raw;
  for (const auto& [a, ma] : submodels) {
    for (const auto& [b, mb] : submodels) {
      if (a != b) raw.push_back(station_distances(ma.attrs, mb.attrs));
    }
  }
  if (raw.empty()) raw.push_back({});
  normalizer = fit_normalizer(raw);
}

double predict_single(const SubmodelBank& bank, const StationId& source, std::span<const double> climate,
                      const StationAttributes& target) {
  const auto& sub = bank.at(source);
  if (climate.size() != kClimateFeatureCount) {
    throw DomainError("climate vector must have " + std::to_string(kClimateFeatureCount) + " entries, got " +
                      std::to_string(climate.size()));
  }
  ClimateVector c{};
  std::copy(climate.begin(), climate.end(), c.begin());
  const auto features = spatial_features(sub.attrs, target, c);
  return sub.model.predict(features);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("correlation inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  auto distinct = [](std::span<const double> v) {
    return std::any_of(v.begin(), v.end(), [&](double e) { return e != v.front(); });
  };
  if (!distinct(x) || !distinct(y)) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0 && syy > 0.0)) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

WeightCoefficients coefficients_from_errors(std::span<const DistanceTriple> normalized,
                                            std::span<const double> abs_errors) {
  if (normalized.size() != abs_errors.size()) throw DomainError("calibration inputs differ in length");
  std::vector<double> g, d, n;
  for (const auto& t : normalized) {
    g.push_back(t.geo);
    d.push_back(t.dem);
    n.push_back(t.ndvi);
  }
  WeightCoefficients c{std::abs(pearson_correlation(g, abs_errors)), std::abs(pearson_correlation(d, abs_errors)),
                       std::abs(pearson_correlation(n, abs_errors))};
  if (!c.valid()) return {1.0, 0.0, 0.0};
  return c;
}

WeightCoefficients calibrate_coefficients(const SubmodelBank& bank, std::span<const CalibrationSample> samples) {
  std::vector<DistanceTriple> normalized;
  std::vector<double> errors;
  normalized.reserve(samples.size());
  errors.reserve(samples.size());
  for (const auto& s : samples) {
    const auto& sub = bank.at(s.source);
    const double pred = predict_single(bank, s.source, s.climate, s.target);
    normalized.push_back(bank.normalizer.normalize(station_distances(sub.attrs, s.target)));
    errors.push_back(std::abs(pred - s.label));
  }
  return coefficients_from_errors(normalized, errors);
}

double aggregate_average(std::span<const double> predictions) {
  if (predictions.empty()) throw DataError("cannot aggregate zero predictions");
  return std::accumulate(predictions.begin(), predictions.end(), 0.0) / static_cast<double>(predictions.size());
}

double aggregate_average(const std::map<StationId, double>& predictions) {
  std::vector<double> v;
  for (const auto& [id, p] : predictions) v.push_back(p);
  return aggregate_average(v);
}

double aggregate_weighted(std::span<const double> predictions, std::span<const double> weights) {
  if (predictions.empty()) throw DataError("cannot aggregate zero predictions");
  if (predictions.size() != weights.size()) throw DomainError("predictions and weights differ in length");
  double den = 0.0;
  for (double w : weights) den += w;
  if (!(den > 0.0)) throw DomainError("weights of available predictions sum to zero");
  // normalizing first keeps a single prediction (and uniform weights) exact
  double out = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) out += (weights[i] / den) * predictions[i];
  return out;
}

namespace {

void gather(const std::map<StationId, double>& predictions, const StationWeights& weights, std::vector<double>& p,
            std::vector<double>& w) {
  for (const auto& [id, pred] : predictions) {
    auto it = weights.find(id);
    if (it == weights.end()) throw DataError("no weight for station " + id.str());
    p.push_back(pred);
    w.push_back(it->second);
  }
}

}  // namespace

double aggregate_weighted(const std::map<StationId, double>& predictions, const StationWeights& weights) {
  std::vector<double> p, w;
  gather(predictions, weights, p, w);
  return aggregate_weighted(p, w);
}

VoteResult aggregate_vote(std::span<const double> predictions, std::span<const double> weights, double trigger) {
  if (predictions.empty()) throw DataError("cannot aggregate zero predictions");
  if (predictions.size() != weights.size()) throw DomainError("predictions and weights differ in length");
  double score = 0.0, den = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    score += weights[i] * (predictions[i] < trigger ? 1.0 : -1.0);
    den += weights[i];
  }
  if (!(den > 0.0)) throw DomainError("weights of available predictions sum to zero");
  score /= den;
  return {score >= 0.0, score};
}

VoteResult aggregate_vote(const std::map<StationId, double>& predictions, const StationWeights& weights,
                          double trigger) {
  std::vector<double> p, w;
  gather(predictions, weights, p, w);
  return aggregate_vote(p, w, trigger);
}

}  // namespace frost
