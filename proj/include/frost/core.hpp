#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace frost {

/// Station identifier token such as "63291". Never empty.
class StationId {
 public:
  explicit StationId(std::string token);

  const std::string& str() const noexcept { return token_; }

  friend auto operator<=>(const StationId&, const StationId&) = default;
  friend bool operator==(const StationId&, const StationId&) = default;

 private:
  std::string token_;
};

struct GeoPoint {
  double lon = 0.0;  // degrees east
  double lat = 0.0;  // degrees north

  bool valid() const noexcept;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct StationAttributes {
  GeoPoint location;
  double dem = 0.0;   // metres
  double ndvi = 0.0;  // [-1, 1]

  bool valid() const noexcept;
  friend bool operator==(const StationAttributes&, const StationAttributes&) = default;
};

/// One station sample. Timestamps are integer minutes since the Unix epoch.
struct ClimateObservation {
  std::int64_t timestamp = 0;
  double temperature = 0.0;   // degC
  double dew_point = 0.0;     // degC
  double rh = 0.0;            // percent
  double wind_speed = 0.0;    // m/s
  double wind_dir_met = 0.0;  // degrees the wind blows from, [0, 360)

  friend bool operator==(const ClimateObservation&, const ClimateObservation&) = default;
};

/// Dew point may exceed temperature by this much before it counts as a violation.
inline constexpr double kDewPointTolerance = 0.5;

struct StationSeries {
  StationId id;
  StationAttributes attrs;
  std::vector<ClimateObservation> observations;

  /// Indices i where observations[i].timestamp - observations[i-1].timestamp
  /// exceeds the expected sampling interval.
  std::vector<std::size_t> gaps(std::int64_t interval_minutes = 1) const;
};

struct Violation {
  std::string field;
  std::size_t index = 0;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every type invariant of the series. Never throws; an empty result
/// means the series is valid.
std::vector<Violation> validate_series(const StationSeries& series);

inline constexpr std::size_t kFoldCount = 5;

/// Five disjoint station sets. Fold k's stations are the test targets of
/// model fold k; the remaining stations train it.
struct FoldAssignment {
  std::array<std::vector<StationId>, kFoldCount> folds;

  /// Fold index of a station, or nullopt when unassigned.
  std::optional<std::size_t> fold_of(const StationId& id) const;
  std::vector<StationId> test_stations(std::size_t fold) const;
  std::vector<StationId> train_stations(std::size_t fold) const;
  std::vector<StationId> all_stations() const;

  /// True when folds are pairwise disjoint and cover exactly `stations`.
  bool partitions(const std::vector<StationId>& stations) const;
};

inline constexpr std::size_t kClimateFeatureCount = 5;
inline constexpr std::size_t kAttributeFeatureCount = 4;
inline constexpr std::size_t kSpatialFeatureCount = 2 * kAttributeFeatureCount + kClimateFeatureCount;

/// Temperature, dew point, RH, northward wind, eastward wind.
using ClimateVector = std::array<double, kClimateFeatureCount>;
using SpatialFeatures = std::array<double, kSpatialFeatureCount>;

/// Longitude, latitude, DEM, NDVI.
std::array<double, kAttributeFeatureCount> attribute_vector(const StationAttributes& attrs);

/// Assembles the 13-entry feature row: source attributes, target attributes,
/// source climate.
SpatialFeatures spatial_features(const StationAttributes& source, const StationAttributes& target,
                                 const ClimateVector& climate);

/// One source -> target training row, tagged with its provenance.
struct TrainingEntry {
  StationAttributes source_attrs;
  StationAttributes target_attrs;
  ClimateVector climate{};
  double label = 0.0;  // target next-hour minimum, degC

  StationId source;
  StationId target;
  std::int64_t timestamp = 0;

  SpatialFeatures features() const { return spatial_features(source_attrs, target_attrs, climate); }
  bool finite() const noexcept;
};

}  // namespace frost

template <>
struct std::hash<frost::StationId> {
  std::size_t operator()(const frost::StationId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
