#pragma once

#include <cmath>
#include <vector>

#include "frost/geostats.hpp"
#include "frost/random.hpp"

namespace frost::testing {

/// One realization of a zero-mean Gaussian field with the given variogram
/// at n uniform points in [0, side]^2, via a Cholesky factor of the
/// covariance sill - gamma(h).
inline std::vector<SamplePoint> gaussian_field(const VariogramModel& model, std::size_t n, double side,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SamplePoint> pts(n);
  for (auto& p : pts) p.location = {rng.uniform(0.0, side), rng.uniform(0.0, side)};
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double h = planar_distance(pts[i].location, pts[j].location);
      double s = (i == j ? model.sill : model.sill - model(h));
      if (i == j) s += 1e-10;
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = i == j ? std::sqrt(std::max(s, 0.0)) : s / l[j * n + j];
    }
  }
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k <= i; ++k) v += l[i * n + k] * z[k];
    pts[i].value = v;
  }
  return pts;
}

}  // namespace frost::testing
