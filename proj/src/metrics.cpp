#include <cmath>

#include "frost/error.hpp"
#include "frost/evaluate.hpp"

namespace frost {

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw DomainError("RMSE inputs differ in length");
  if (predicted.empty()) throw DataError("RMSE of an empty series");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - actual[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(predicted.size()));
}

std::optional<double> ConfusionCounts::tpr() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> ConfusionCounts::fdr() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(fp) / static_cast<double>(tp + fp);
}

void ConfusionCounts::add(bool predicted_event, bool actual_event) {
  if (predicted_event) {
    ++(actual_event ? tp : fp);
  } else {
    ++(actual_event ? fn : tn);
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts event_confusion(std::span<const double> predicted, std::span<const double> actual, double trigger) {
  if (predicted.size() != actual.size()) throw DomainError("confusion inputs differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) c.add(predicted[i] < trigger, actual[i] < trigger);
  return c;
}

ConfusionCounts event_confusion(const std::vector<bool>& predicted_frost, std::span<const double> actual,
                                double trigger) {
  if (predicted_frost.size() != actual.size()) throw DomainError("confusion inputs differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < actual.size(); ++i) c.add(predicted_frost[i], actual[i] < trigger);
  return c;
}

}  // namespace frost
