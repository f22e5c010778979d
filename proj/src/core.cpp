#include "frost/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "frost/error.hpp"

namespace frost {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::format: return "format";
    case ErrorKind::data: return "data";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

StationId::StationId(std::string token) : token_(std::move(token)) {
  if (token_.empty()) throw DomainError("station id must not be empty");
}

bool GeoPoint::valid() const noexcept {
  return std::isfinite(lon) && std::isfinite(lat) && lon >= -180.0 && lon <= 180.0 && lat >= -90.0 &&
         lat <= 90.0;
}

bool StationAttributes::valid() const noexcept {
  return location.valid() && std::isfinite(dem) && std::isfinite(ndvi) && ndvi >= -1.0 && ndvi <= 1.0;
}

std::vector<std::size_t> StationSeries::gaps(std::int64_t interval_minutes) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < observations.size(); ++i) {
    if (observations[i].timestamp - observations[i - 1].timestamp > interval_minutes) out.push_back(i);
  }
  return out;
}

std::vector<Violation> validate_series(const StationSeries& series) {
  std::vector<Violation> out;
  const auto& attrs = series.attrs;
  if (!attrs.location.valid()) out.push_back({"location", 0, "range"});
  if (!std::isfinite(attrs.dem)) out.push_back({"dem", 0, "finite"});
  if (!(attrs.ndvi >= -1.0 && attrs.ndvi <= 1.0)) out.push_back({"ndvi", 0, "range"});

  const auto& obs = series.observations;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& o = obs[i];
    if (i > 0 && o.timestamp <= obs[i - 1].timestamp) out.push_back({"timestamp", i, "strictly increasing"});
    if (!std::isfinite(o.temperature)) out.push_back({"temperature", i, "finite"});
    if (!std::isfinite(o.dew_point)) {
      out.push_back({"dew_point", i, "finite"});
    } else if (std::isfinite(o.temperature) && o.dew_point > o.temperature + kDewPointTolerance) {
      out.push_back({"dew_point", i, "not above temperature"});
    }
    if (!(o.rh >= 0.0 && o.rh <= 100.0)) out.push_back({"rh", i, "range"});
    if (!(o.wind_speed >= 0.0) || !std::isfinite(o.wind_speed)) out.push_back({"wind_speed", i, "non-negative"});
    if (!(o.wind_dir_met >= 0.0 && o.wind_dir_met < 360.0)) out.push_back({"wind_dir", i, "range"});
  }
  return out;
}

std::optional<std::size_t> FoldAssignment::fold_of(const StationId& id) const {
  for (std::size_t k = 0; k < kFoldCount; ++k) {
    if (std::find(folds[k].begin(), folds[k].end(), id) != folds[k].end()) return k;
  }
  return std::nullopt;
}

std::vector<StationId> FoldAssignment::test_stations(std::size_t fold) const {
  if (fold >= kFoldCount) throw DomainError("fold index out of range: " + std::to_string(fold));
  return folds[fold];
}

std::vector<StationId> FoldAssignment::train_stations(std::size_t fold) const {
  if (fold >= kFoldCount) throw DomainError("fold index out of range: " + std::to_string(fold));
  std::vector<StationId> out;
  for (std::size_t k = 0; k < kFoldCount; ++k) {
    if (k != fold) out.insert(out.end(), folds[k].begin(), folds[k].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StationId> FoldAssignment::all_stations() const {
  std::vector<StationId> out;
  for (const auto& f : folds) out.insert(out.end(), f.begin(), f.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool FoldAssignment::partitions(const std::vector<StationId>& stations) const {
  std::set<StationId> seen;
  std::size_t total = 0;
  for (const auto& f : folds) {
    for (const auto& id : f) {
      if (!seen.insert(id).second) return false;
      ++total;
    }
  }
  const std::set<StationId> expected(stations.begin(), stations.end());
  return total == stations.size() && seen == expected;
}

std::array<double, kAttributeFeatureCount> attribute_vector(const StationAttributes& attrs) {
  return {attrs.location.lon, attrs.location.lat, attrs.dem, attrs.ndvi};
}

SpatialFeatures spatial_features(const StationAttributes& source, const StationAttributes& target,
                                 const ClimateVector& climate) {
  SpatialFeatures f{};
  const auto s = attribute_vector(source);
  const auto t = attribute_vector(target);
  std::copy(s.begin(), s.end(), f.begin());
  std::copy(t.begin(), t.end(), f.begin() + kAttributeFeatureCount);
  std::copy(climate.begin(), climate.end(), f.begin() + 2 * kAttributeFeatureCount);
  return f;
}

bool TrainingEntry::finite() const noexcept {
  const auto f = features();
  return std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); }) && std::isfinite(label);
}

}  // namespace frost
