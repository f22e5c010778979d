#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "frost/core.hpp"
#include "frost/ensemble.hpp"
#include "frost/features.hpp"
#include "frost/geostats.hpp"
#include "frost/ingest.hpp"
#include "frost/neuralnet.hpp"

namespace frost {

// --- folds -------------------------------------------------------------------

/// Seeded shuffle followed by a round-robin deal into five folds. Each fold
/// is stored sorted.
FoldAssignment make_folds(std::vector<StationId> stations, std::uint64_t seed);

void save_folds(const FoldAssignment& folds, std::uint64_t seed, std::ostream& out);
void save_folds(const FoldAssignment& folds, std::uint64_t seed, const std::filesystem::path& path);
FoldAssignment load_folds(const std::filesystem::path& path);

// --- metrics -----------------------------------------------------------------

double rmse(std::span<const double> predicted, std::span<const double> actual);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  /// tp / (tp + fn); absent without actual events.
  std::optional<double> tpr() const;
  /// fp / (fp + tp); absent without predicted events.
  std::optional<double> fdr() const;
  void add(bool predicted_event, bool actual_event);

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// An event is a temperature strictly below the trigger.
ConfusionCounts event_confusion(std::span<const double> predicted, std::span<const double> actual,
                                double trigger = kDefaultTrigger);
/// Predicted events given directly as frost flags, e.g. from a vote.
ConfusionCounts event_confusion(const std::vector<bool>& predicted_frost, std::span<const double> actual,
                                double trigger = kDefaultTrigger);

// --- paired t-test -----------------------------------------------------------

/// I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;
};

/// Two-sided paired t-test on x - y. Underflowing p (< 1e-300) is 0.
TTestResult paired_t_test(std::span<const double> x, std::span<const double> y);

/// Symmetric p-value table with an empty diagonal.
struct PValueMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::optional<double>>> p;

  std::size_t size() const noexcept { return labels.size(); }
};

/// Tests every unordered pair of the series once and mirrors the result.
PValueMatrix pairwise_t_tests(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& series);

/// "0.00" for zero, two decimals from 0.01 up, scientific below.
std::string format_p_value(double p);
/// Table layout: header row of labels, N/A on the diagonal.
void write_p_value_csv(const PValueMatrix& m, std::ostream& out);

// --- methods and counts ------------------------------------------------------

enum class Method { average, weighted_average, weighted_vote, idw, ok, baseline };

inline constexpr std::array kAllMethods{Method::average, Method::weighted_average, Method::weighted_vote,
                                        Method::idw,     Method::ok,               Method::baseline};

/// Command-line token: avg, wavg, vote, idw, ok, baseline.
const char* method_token(Method m);
/// Report name: average, weighted_average, weighted_vote, idw, ok, baseline.
const char* method_name(Method m);
Method parse_method(const std::string& token);
/// Comma-separated tokens, returned in canonical order without duplicates.
std::vector<Method> parse_methods(const std::string& list);

/// Comma-separated items of `n` or `a..b[:step]`; sorted, duplicates removed.
std::vector<std::size_t> parse_counts(const std::string& list);

// --- experiment protocol -----------------------------------------------------

/// Time windows are fractions of each dataset's common time span: submodels
/// train on [0, train_fraction), weight coefficients are calibrated on the
/// next calibration_fraction, everything after is evaluation. Baselines
/// train on everything before evaluation.
struct ProtocolConfig {
  std::uint64_t seed = 0;
  std::size_t horizon = kDefaultHorizon;
  double train_fraction = 0.7;
  double calibration_fraction = 0.1;
  std::int64_t pair_stride = 15;  // minutes between training rows per pair
  std::int64_t calibration_stride = 60;
  std::int64_t baseline_stride = 1;
  std::int64_t eval_stride = 1;
  TrainConfig submodel_train;
  TrainConfig baseline_train;
  /// When set, skips calibration and uses these coefficients.
  std::optional<WeightCoefficients> coefficients;
  InterpolationOptions interpolation;
  double trigger = kDefaultTrigger;

  void check() const;
};

std::string protocol_to_json(const ProtocolConfig& cfg);
ProtocolConfig protocol_from_json(const std::string& text);
void save_protocol(const ProtocolConfig& cfg, const std::filesystem::path& path);
ProtocolConfig load_protocol(const std::filesystem::path& path);

struct TimeWindows {
  std::int64_t begin = 0;
  std::int64_t train_end = 0;
  std::int64_t calibration_end = 0;
  std::int64_t end = 0;  // one past the last observation

  /// Entry timestamps whose label window stays inside each range.
  TimeFilter train(const ProtocolConfig& cfg) const;
  TimeFilter calibration(const ProtocolConfig& cfg) const;
  TimeFilter baseline(const ProtocolConfig& cfg) const;
  TimeFilter evaluation(const ProtocolConfig& cfg) const;
};

TimeWindows time_windows(const Dataset& data, const ProtocolConfig& cfg);

struct ModelTrainingSummary {
  StationId station;
  bool baseline = false;
  std::size_t rows = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double train_loss = 0.0;  // scaled MSE at the best epoch
  double validation_loss = 0.0;
};

struct FoldTrainingResult {
  SubmodelBank bank;
  std::vector<ModelTrainingSummary> models;
  /// Provenance of every training entry that reached a submodel.
  std::set<StationId> entry_sources;
  std::set<StationId> entry_targets;
  std::size_t entry_count = 0;
};

using ProgressFn = std::function<void(const ModelTrainingSummary&)>;

/// Trains one submodel per training station on its pairs with every other
/// training station, baselines for the test stations, freezes the distance
/// normalizer and sets the weight coefficients (preset or calibrated).
/// Throws DataError if an entry touches a test station.
FoldTrainingResult train_fold_bank(const Dataset& data, const FoldAssignment& folds, std::size_t fold,
                                   const ProtocolConfig& cfg, const ProgressFn& progress = {});

/// Off-site samples between distinct bank stations inside the calibration window.
std::vector<CalibrationSample> calibration_samples(const Dataset& data, const SubmodelBank& bank,
                                                   const ProtocolConfig& cfg);

/// Every submodel's prediction for every evaluated test-station timestamp.
struct PredictionTable {
  std::vector<StationId> sources;
  std::vector<StationAttributes> source_attrs;

  struct Row {
    StationId target;
    StationAttributes target_attrs;
    std::int64_t timestamp = 0;
    double actual = 0.0;
    std::vector<double> predictions;  // per source, NaN when unavailable
    double baseline = 0.0;            // NaN without a baseline model
    std::vector<double> raw_weights;  // per source, un-normalized weight
  };
  std::vector<Row> rows;
};

PredictionTable predict_fold(const Dataset& data, const SubmodelBank& bank, const ProtocolConfig& cfg);

struct AblationResult {
  std::size_t fold = 0;
  Method method = Method::average;
  std::size_t station_count = 0;  // 0 for the on-site baseline
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  std::optional<double> rmse;  // absent for the vote
  ConfusionCounts counts;

  std::optional<double> tpr() const { return counts.tpr(); }
  std::optional<double> fdr() const { return counts.fdr(); }
};

/// Per-row predictions of one method using a fixed source subset.
struct MethodPredictions {
  std::vector<std::size_t> row;  // table row of each entry
  std::vector<double> value;     // NaN for the vote
  std::vector<bool> frost;
  std::vector<double> actual;
};

MethodPredictions evaluate_method(const PredictionTable& table, Method method, std::span<const std::size_t> subset,
                                  const ProtocolConfig& cfg);

/// Seeded draw of k source indices without replacement; all sources when k
/// equals the table width.
std::vector<std::size_t> draw_subset(std::size_t n_sources, std::size_t k, std::uint64_t seed);

/// For each count, one shared subset evaluated by every method. The baseline
/// is reported once with station count 0.
std::vector<AblationResult> run_station_ablation(const PredictionTable& table, std::size_t fold,
                                                 const std::vector<Method>& methods,
                                                 const std::vector<std::size_t>& counts, std::uint64_t seed,
                                                 const ProtocolConfig& cfg);

/// All methods with the full bank.
std::vector<AblationResult> run_fold_experiment(const PredictionTable& table, std::size_t fold,
                                                const std::vector<Method>& methods, const ProtocolConfig& cfg);

/// Paired t-tests between regression methods on per-row absolute errors.
struct MethodComparison {
  std::size_t fold = 0;
  PValueMatrix matrix;
};

/// Empty when fewer than two regression methods share at least two rows.
std::optional<MethodComparison> compare_methods(const PredictionTable& table, std::size_t fold, const std::vector<Method>& methods,
                                 const ProtocolConfig& cfg);

struct EvaluationReport {
  std::uint64_t seed = 0;
  std::vector<AblationResult> results;  // sorted by (fold, method, station count)
  std::vector<MethodComparison> comparisons;
  std::optional<std::string> generated_at;

  void sort();
};

std::string report_to_json(const EvaluationReport& report);
void save_report(const EvaluationReport& report, const std::filesystem::path& path);

}  // namespace frost
