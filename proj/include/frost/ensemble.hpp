#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "frost/core.hpp"
#include "frost/neuralnet.hpp"

namespace frost {

/// Importance of geographic distance (a), DEM difference (b) and NDVI
/// difference (c) in the inverse-distance station weight.
struct WeightCoefficients {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  bool valid() const noexcept;
  friend bool operator==(const WeightCoefficients&, const WeightCoefficients&) = default;
};

/// Published per-fold coefficients, usable as a preset in place of calibration.
WeightCoefficients paper_preset(std::size_t fold);

/// Geographic, DEM and NDVI distance between two stations (raw or normalized).
struct DistanceTriple {
  double geo = 0.0;
  double dem = 0.0;
  double ndvi = 0.0;

  friend bool operator==(const DistanceTriple&, const DistanceTriple&) = default;
};

/// Euclidean (lon, lat) degree distance, |dDEM|, |dNDVI|.
DistanceTriple station_distances(const StationAttributes& source, const StationAttributes& target);

/// Per-dimension min-max statistics. A constant dimension maps to 0 and
/// normalized values are clamped into [0, 1].
struct DistanceNormalizer {
  DistanceTriple min;
  DistanceTriple max;

  DistanceTriple normalize(const DistanceTriple& raw) const;
};

DistanceNormalizer fit_normalizer(std::span<const DistanceTriple> raw);

/// Min-max over the given set.
std::vector<DistanceTriple> normalize_distances(std::span<const DistanceTriple> raw);

inline constexpr double kWeightDenominatorFloor = 1e-6;

/// Intermediate weight 1 / (a g + b d + c n), denominator floored at 1e-6.
double intermediate_weight(const DistanceTriple& normalized, const WeightCoefficients& coeff);

using StationWeights = std::map<StationId, double>;

/// Normalized inverse-distance weights, summing to 1.
StationWeights station_weights(const std::map<StationId, DistanceTriple>& normalized, const WeightCoefficients& coeff);

/// Span form: weights[i] for normalized[i].
std::vector<double> station_weights(std::span<const DistanceTriple> normalized, const WeightCoefficients& coeff);

struct Submodel {
  Model model;
  StationAttributes attrs;
};

/// Trained submodels of one fold keyed by source station.
struct SubmodelBank {
  std::size_t fold = 0;
  std::map<StationId, Submodel> submodels;
  DistanceNormalizer normalizer;
  WeightCoefficients coefficients;
  std::vector<StationId> test_stations;
  /// On-site baseline models of the test stations.
  std::map<StationId, Model> baselines;

  std::vector<StationId> station_ids() const;
  const Submodel& at(const StationId& id) const;

  /// Min-max statistics over all ordered pairs of distinct bank stations.
  void freeze_normalizer();
};

/// One submodel's next-hour minimum temperature for the target.
double predict_single(const SubmodelBank& bank, const StationId& source, std::span<const double> climate,
                      const StationAttributes& target);

/// A labelled off-site example used for coefficient calibration.
struct CalibrationSample {
  StationId source;
  ClimateVector climate{};
  StationAttributes target;
  double label = 0.0;
};

/// Pearson correlation; 0 when either series has fewer than 2 distinct values.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// |r| between each normalized distance and the absolute prediction error,
/// falling back to (1, 0, 0) when all three vanish.
WeightCoefficients calibrate_coefficients(const SubmodelBank& bank, std::span<const CalibrationSample> samples);

/// Same calibration from precomputed normalized distances and absolute errors.
WeightCoefficients coefficients_from_errors(std::span<const DistanceTriple> normalized,
                                            std::span<const double> abs_errors);

// --- aggregation -----------------------------------------------------------

double aggregate_average(std::span<const double> predictions);
double aggregate_average(const std::map<StationId, double>& predictions);

/// Sum w_i p_i / sum w_i.
double aggregate_weighted(std::span<const double> predictions, std::span<const double> weights);
double aggregate_weighted(const std::map<StationId, double>& predictions, const StationWeights& weights);

struct VoteResult {
  bool frost = false;
  double score = 0.0;
};

inline constexpr double kDefaultTrigger = 0.0;

/// Each prediction votes +1 below the trigger and -1 otherwise; frost when the
/// weighted score (weights renormalized) is >= 0.
VoteResult aggregate_vote(std::span<const double> predictions, std::span<const double> weights,
                          double trigger = kDefaultTrigger);
VoteResult aggregate_vote(const std::map<StationId, double>& predictions, const StationWeights& weights,
                          double trigger = kDefaultTrigger);

// --- persistence -----------------------------------------------------------

/// Writes manifest.json plus one model file per submodel and baseline.
void save_bank(const SubmodelBank& bank, const std::filesystem::path& dir);
SubmodelBank load_bank(const std::filesystem::path& dir);

}  // namespace frost
