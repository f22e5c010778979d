#include "frost/geostats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "frost/error.hpp"

namespace frost {

double planar_distance(GeoPoint a, GeoPoint b) { return std::hypot(a.lon - b.lon, a.lat - b.lat); }

double idw(std::span<const SamplePoint> samples, GeoPoint query, double power) {
  if (samples.empty()) throw DataError("IDW needs at least one sample");
  if (!(power > 0.0)) throw DomainError("IDW power must be positive");
  double num = 0.0, den = 0.0;
  for (const auto& s : samples) {
    const double d = planar_distance(s.location, query);
    if (d < kIdwExactDistance) return s.value;
    const double w = 1.0 / std::pow(d, power);
    num += w * s.value;
    den += w;
  }
  return num / den;
}

const char* to_string(VariogramKind kind) {
  return kind == VariogramKind::spherical ? "spherical" : "exponential";
}

VariogramKind parse_variogram_kind(const std::string& token) {
  if (token == "spherical") return VariogramKind::spherical;
  if (token == "exponential") return VariogramKind::exponential;
  throw UsageError("unknown variogram kind '" + token + "'");
}

namespace {

/// Unit-sill structure function, 0 at h = 0 and 1 at (practical) range.
double shape(VariogramKind kind, double h, double range) {
  if (h <= 0.0) return 0.0;
  const double r = h / range;
  if (kind == VariogramKind::spherical) return r >= 1.0 ? 1.0 : 1.5 * r - 0.5 * r * r * r;
  return 1.0 - std::exp(-3.0 * r);
}

}  // namespace

double VariogramModel::operator()(double h) const {
  if (h <= 0.0) return 0.0;
  return nugget + (sill - nugget) * shape(kind, h, range);
}

void VariogramModel::check() const {
  if (!(nugget >= 0.0) || !(sill >= nugget) || !(range > 0.0) || !std::isfinite(sill) || !std::isfinite(range)) {
    throw DomainError("variogram needs nugget >= 0, sill >= nugget, range > 0");
  }
}

std::vector<VariogramBin> empirical_semivariogram(std::span<const SamplePoint> samples, std::size_t n_bins) {
  if (samples.size() < 2) throw DataError("semivariogram needs at least 2 samples");
  if (n_bins == 0) throw DomainError("semivariogram needs at least one bin");
  double max_d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      max_d = std::max(max_d, planar_distance(samples[i].location, samples[j].location));
    }
  }
  std::vector<double> lag_sum(n_bins, 0.0), gamma_sum(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  const double width = max_d > 0.0 ? max_d / static_cast<double>(n_bins) : 1.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double d = planar_distance(samples[i].location, samples[j].location);
      const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(d / width));
      const double diff = samples[i].value - samples[j].value;
      lag_sum[bin] += d;
      gamma_sum[bin] += 0.5 * diff * diff;
      ++count[bin];
    }
  }
  std::vector<VariogramBin> bins;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const auto n = static_cast<double>(count[b]);
    bins.push_back({lag_sum[b] / n, gamma_sum[b] / n, count[b]});
  }
  return bins;
}

namespace {

struct RangeFit {
  double nugget = 0.0;
  double partial_sill = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

/// Closed-form non-negative (nugget, partial sill) for a fixed range.
RangeFit fit_for_range(std::span<const VariogramBin> bins, VariogramKind kind, double range) {
  double sw = 0.0, sf = 0.0, sff = 0.0, sy = 0.0, sfy = 0.0;
  for (const auto& b : bins) {
    const double w = static_cast<double>(b.pairs);
    const double f = shape(kind, b.lag, range);
    sw += w;
    sf += w * f;
    sff += w * f * f;
    sy += w * b.semivariance;
    sfy += w * f * b.semivariance;
  }
  auto sse = [&](double n, double p) {
    double s = 0.0;
    for (const auto& b : bins) {
      const double e = b.semivariance - n - p * shape(kind, b.lag, range);
      s += static_cast<double>(b.pairs) * e * e;
    }
    return s;
  };
  RangeFit best;
  auto consider = [&](double n, double p) {
    if (!(n >= 0.0) || !(p >= 0.0) || !std::isfinite(n) || !std::isfinite(p)) return;
    const double s = sse(n, p);
    if (s < best.sse) best = {n, p, s};
  };
  const double det = sw * sff - sf * sf;
  if (std::abs(det) > 1e-14 * std::max(1.0, sw * sff)) {
    consider((sy * sff - sf * sfy) / det, (sw * sfy - sf * sy) / det);
  }
  consider(0.0, sff > 0.0 ? sfy / sff : 0.0);
  consider(sw > 0.0 ? sy / sw : 0.0, 0.0);
  return best;
}

}  // namespace

VariogramModel fit_variogram(std::span<const VariogramBin> bins, VariogramKind kind) {
  std::vector<VariogramBin> used;
  for (const auto& b : bins) {
    if (b.pairs > 0) used.push_back(b);
  }
  if (used.size() < 3) {
    throw DataError("variogram fit needs at least 3 non-empty bins, got " + std::to_string(used.size()));
  }
  double max_lag = 0.0, max_gamma = 0.0;
  for (const auto& b : used) {
    max_lag = std::max(max_lag, b.lag);
    max_gamma = std::max(max_gamma, b.semivariance);
  }
  if (!(max_lag > 0.0)) throw DataError("variogram bins have zero lag");
  if (max_gamma <= 0.0) return {kind, 0.0, 0.0, max_lag, true};

  constexpr int kGrid = 40;
  double best_range = max_lag;
  RangeFit best;
  int best_k = 1;
  for (int k = 1; k <= kGrid; ++k) {
    const double r = max_lag * 2.0 * k / kGrid;
    const auto fit = fit_for_range(used, kind, r);
    if (fit.sse < best.sse) {
      best = fit;
      best_range = r;
      best_k = k;
    }
  }

  // golden-section refinement between the neighbouring grid ranges
  double lo = max_lag * 2.0 * std::max(best_k - 1, 0) / kGrid;
  double hi = max_lag * 2.0 * (best_k + 1) / kGrid;
  lo = std::max(lo, 1e-6 * max_lag);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  auto f1 = fit_for_range(used, kind, x1), f2 = fit_for_range(used, kind, x2);
  for (int it = 0; it < 60; ++it) {
    if (f1.sse <= f2.sse) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = fit_for_range(used, kind, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = fit_for_range(used, kind, x2);
    }
  }
  if (f1.sse < best.sse) {
    best = f1;
    best_range = x1;
  }
  if (f2.sse < best.sse) {
    best = f2;
    best_range = x2;
  }
  return {kind, best.nugget, best.nugget + best.partial_sill, best_range, false};
}

std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw DomainError("linear system matrix has wrong size");
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  const double tiny = std::max(scale, 1.0) * 1e-300;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i * n + k]) > std::abs(a[pivot * n + k])) pivot = i;
    }
    if (!(std::abs(a[pivot * n + k]) > tiny)) throw NumericalError("singular linear system");
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pivot * n + j]);
      std::swap(b[k], b[pivot]);
    }
    const double diag = a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a[i * n + k] / diag;
      if (factor == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= factor * a[k * n + j];
      b[i] -= factor * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k * n + j] * x[j];
    x[k] = s / a[k * n + k];
    if (!std::isfinite(x[k])) throw NumericalError("linear system solution is not finite");
  }
  return x;
}

namespace {

std::vector<SamplePoint> deduplicate(std::span<const SamplePoint> samples) {
  std::map<std::pair<double, double>, std::pair<double, std::size_t>> groups;
  std::vector<std::pair<double, double>> order;
  for (const auto& s : samples) {
    const auto key = std::pair{s.location.lon, s.location.lat};
    auto [it, inserted] = groups.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += s.value;
    ++it->second.second;
  }
  std::vector<SamplePoint> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& [sum, n] = groups[key];
    out.push_back({{key.first, key.second}, sum / static_cast<double>(n)});
  }
  return out;
}

}  // namespace

KrigingResult ordinary_kriging(std::span<const SamplePoint> samples, GeoPoint query, const VariogramModel& model) {
  model.check();
  if (samples.size() < 2) throw DataError("ordinary kriging needs at least 2 samples");
  const auto pts = deduplicate(samples);
  const std::size_t n = pts.size();
  if (n == 1) {
    return {pts[0].value, model(planar_distance(pts[0].location, query)), {1.0}, 0.0};
  }
  const std::size_t m = n + 1;
  std::vector<double> a(m * m, 0.0), b(m, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i * m + j] = i == j ? kKrigingRegularization : model(planar_distance(pts[i].location, pts[j].location));
    }
    a[i * m + n] = 1.0;
    a[n * m + i] = 1.0;
    b[i] = model(planar_distance(pts[i].location, query));
  }
  const auto x = solve_linear_system(std::move(a), b);
  KrigingResult r;
  r.weights.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  r.lagrange = x[n];
  double variance = r.lagrange;
  for (std::size_t i = 0; i < n; ++i) {
    r.estimate += r.weights[i] * pts[i].value;
    variance += r.weights[i] * b[i];
  }
  r.variance = std::max(variance, 0.0);
  return r;
}

VariogramModel variogram_for(std::span<const SamplePoint> samples, const InterpolationOptions& options) {
  if (options.frozen_variogram) return *options.frozen_variogram;
  const auto bins = empirical_semivariogram(samples, options.variogram_bins);
  if (bins.size() >= 3) return fit_variogram(bins, options.variogram_kind);

  double mean = 0.0;
  for (const auto& s : samples) mean += s.value;
  mean /= static_cast<double>(samples.size());
  double var = 0.0, max_d = 0.0;
  for (const auto& s : samples) var += (s.value - mean) * (s.value - mean);
  var /= static_cast<double>(samples.size());
  for (const auto& b : bins) max_d = std::max(max_d, b.lag);
  return {options.variogram_kind, 0.0, var, max_d > 0.0 ? max_d : 1.0, var <= 0.0};
}

double aggregate_by_interpolation(std::span<const SamplePoint> predictions, GeoPoint target,
                                  InterpolationMethod method, const InterpolationOptions& options) {
  if (method == InterpolationMethod::idw) return idw(predictions, target, options.idw_power);
  if (predictions.size() < 2) throw DataError("kriging aggregation needs at least 2 predictions");
  return ordinary_kriging(predictions, target, variogram_for(predictions, options)).estimate;
}

}  // namespace frost
