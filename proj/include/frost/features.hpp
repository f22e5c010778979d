#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "frost/core.hpp"

namespace frost {

struct WindComponents {
  double v_e = 0.0;  // eastward, m/s
  double v_n = 0.0;  // northward, m/s
};

/// Meteorological "blowing from" direction to the direction the wind blows
/// towards, in [0, 360).
double reverse_wind_direction(double met_deg);

/// Eastward and northward wind components. Throws DomainError for a direction
/// outside [0, 360) or a negative speed.
WindComponents wind_to_components(double met_deg, double speed);

/// Temperature, dew point, RH, N-wind, E-wind of one observation.
ClimateVector climate_features(const ClimateObservation& obs);

inline constexpr std::size_t kDefaultHorizon = 60;

struct Label {
  std::size_t index = 0;
  std::int64_t timestamp = 0;
  double value = 0.0;
};

/// Minimum temperature over observations t+1..t+horizon for every index t
/// that has `horizon` later observations.
std::vector<Label> label_next_hour_min(const StationSeries& series, std::size_t horizon = kDefaultHorizon);

/// Timestamp selection for entry assembly: [begin, end) and every `stride`
/// minutes counted from `anchor`.
struct TimeFilter {
  std::int64_t begin = std::numeric_limits<std::int64_t>::min();
  std::int64_t end = std::numeric_limits<std::int64_t>::max();
  std::int64_t stride = 1;
  std::int64_t anchor = 0;

  bool accepts(std::int64_t t) const noexcept;
};

/// Joins source observations to target labels on identical timestamps.
std::vector<TrainingEntry> build_pair_entries(const StationSeries& source, const StationSeries& target,
                                              std::size_t horizon = kDefaultHorizon, const TimeFilter& filter = {});

/// Dense row-major design matrix with one label per row.
struct FeatureMatrix {
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<double> y;

  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t columns) : cols(columns) {}

  std::size_t rows() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {x.data() + i * cols, cols}; }
  void push_back(std::span<const double> features, double label);
  void reserve(std::size_t n) {
    x.reserve(n * cols);
    y.reserve(n);
  }
};

FeatureMatrix to_matrix(std::span<const TrainingEntry> entries);

/// On-site rows: the station's own 5 climate features and its own
/// next-hour minimum.
FeatureMatrix build_baseline_samples(const StationSeries& series, std::size_t horizon = kDefaultHorizon,
                                     const TimeFilter& filter = {});

/// Per-feature z-score statistics. Degenerate features get sd = 1.
struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> sd;
  double label_mean = 0.0;
  double label_sd = 1.0;

  std::size_t dims() const noexcept { return mean.size(); }
};

ScalerStats fit_scaler(const FeatureMatrix& data);
ScalerStats fit_scaler(std::span<const TrainingEntry> entries);

void apply_scaler(const ScalerStats& stats, std::span<double> features);
FeatureMatrix apply_scaler(const ScalerStats& stats, FeatureMatrix data);
double scale_label(const ScalerStats& stats, double label);
double invert_label(const ScalerStats& stats, double scaled);

/// Debug dump in feature-table order with provenance columns.
void write_entries_csv(std::span<const TrainingEntry> entries, std::ostream& out);

}  // namespace frost
