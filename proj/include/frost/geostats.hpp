#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frost/core.hpp"

namespace frost {

struct SamplePoint {
  GeoPoint location;
  double value = 0.0;
};

/// Degree-space Euclidean distance, the metric used by every interpolator here.
double planar_distance(GeoPoint a, GeoPoint b);

inline constexpr double kIdwExactDistance = 1e-9;

/// Inverse distance weighting. A query closer than 1e-9 to a sample returns
/// that sample's value exactly.
double idw(std::span<const SamplePoint> samples, GeoPoint query, double power = 2.0);

enum class VariogramKind { spherical, exponential };

const char* to_string(VariogramKind kind);
VariogramKind parse_variogram_kind(const std::string& token);

/// Nugget + partial sill * shape(h / range); gamma(0) = 0.
struct VariogramModel {
  VariogramKind kind = VariogramKind::spherical;
  double nugget = 0.0;
  double sill = 0.0;  // total sill, >= nugget
  double range = 1.0;
  bool degenerate = false;  // fitted to a constant field

  double operator()(double h) const;
  void check() const;
};

struct VariogramBin {
  double lag = 0.0;  // mean pair distance in the bin
  double semivariance = 0.0;
  std::size_t pairs = 0;
};

/// Equal-width lag bins from 0 to the largest pair distance; empty bins omitted.
std::vector<VariogramBin> empirical_semivariogram(std::span<const SamplePoint> samples, std::size_t n_bins);

/// Pair-count weighted least squares over (nugget, sill, range): a coarse
/// range grid with a closed-form (nugget, partial sill) solve per range,
/// then golden-section refinement of the range. Needs at least 3 bins.
VariogramModel fit_variogram(std::span<const VariogramBin> bins, VariogramKind kind = VariogramKind::spherical);

/// Solves A x = b (row-major n x n) by Gaussian elimination with partial
/// pivoting. Throws NumericalError when A is singular.
std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b);

inline constexpr double kKrigingRegularization = 1e-10;

struct KrigingResult {
  double estimate = 0.0;
  double variance = 0.0;
  std::vector<double> weights;  // one per distinct sample location
  double lagrange = 0.0;
};

/// Ordinary kriging. Samples sharing a location are averaged first.
KrigingResult ordinary_kriging(std::span<const SamplePoint> samples, GeoPoint query, const VariogramModel& model);

enum class InterpolationMethod { idw, ok };

struct InterpolationOptions {
  double idw_power = 2.0;
  std::size_t variogram_bins = 15;
  VariogramKind variogram_kind = VariogramKind::spherical;
  /// When set, kriging uses this model instead of refitting per call.
  std::optional<VariogramModel> frozen_variogram;
};

/// Variogram used for a sample set: fitted when at least 3 lag bins exist,
/// otherwise a nugget-free model with the sample variance as sill and the
/// largest pair distance as range.
VariogramModel variogram_for(std::span<const SamplePoint> samples, const InterpolationOptions& options);

/// Interpolates per-station submodel predictions to the target location.
double aggregate_by_interpolation(std::span<const SamplePoint> predictions, GeoPoint target,
                                  InterpolationMethod method, const InterpolationOptions& options = {});

}  // namespace frost
