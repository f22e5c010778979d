#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "frost/error.hpp"
#include "frost/evaluate.hpp"

namespace frost {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs positive shape parameters");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace {

// P(|T| > |t|) for Student t with the given degrees of freedom.
double two_sided_tail(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return regularized_incomplete_beta(0.5 * dof, 0.5, x);
}

}  // namespace

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw DomainError("Student t needs positive degrees of freedom");
  if (std::isnan(t)) throw DomainError("Student t CDF of NaN");
  const double tail = 0.5 * two_sided_tail(t, dof);
  return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("paired t-test inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw DataError("paired t-test needs at least 2 pairs");
  double scale = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale = std::max({scale, std::abs(x[i]), std::abs(y[i])});
    mean += x[i] - y[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = (x[i] - y[i]) - mean;
    ss += e * e;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  // Differences that only carry rounding noise count as exactly constant.
  const double tol = 1e-13 * scale;
  TTestResult r;
  r.n = n;
  if (sd <= tol) {
    if (std::abs(mean) <= tol) return {0.0, 1.0, n};
    r.t = mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = two_sided_tail(r.t, static_cast<double>(n - 1));
  if (r.p < 1e-300) r.p = 0.0;
  r.p = std::min(r.p, 1.0);
  return r;
}

PValueMatrix pairwise_t_tests(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& series) {
  if (labels.size() != series.size()) throw DomainError("p-value matrix labels and series differ in count");
  PValueMatrix m;
  m.labels = labels;
  const std::size_t n = labels.size();
  m.p.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = paired_t_test(series[i], series[j]).p;
      m.p[i][j] = p;
      m.p[j][i] = p;
    }
  }
  return m;
}

std::string format_p_value(double p) {
  char buf[32];
  if (p == 0.0) return "0.00";
  if (p >= 0.01) {
    std::snprintf(buf, sizeof buf, "%.2f", p);
  } else {
    std::snprintf(buf, sizeof buf, "%.2e", p);
  }
  return buf;
}

void write_p_value_csv(const PValueMatrix& m, std::ostream& out) {
  for (const auto& label : m.labels) out << ',' << label;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.labels[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      out << ',' << (m.p[i][j] ? format_p_value(*m.p[i][j]) : std::string("N/A"));
    }
    out << '\n';
  }
}

}  // namespace frost
