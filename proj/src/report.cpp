#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "frost/error.hpp"
#include "frost/evaluate.hpp"

namespace frost {

namespace {

using nlohmann::json;

json train_json(const TrainConfig& tc) {
  return {{"seed", tc.seed},
          {"epochs", tc.epochs},
          {"batch_size", tc.batch_size},
          {"learning_rate", tc.learning_rate},
          {"optimizer", tc.optimizer == Optimizer::adaptive_moment ? "adam" : "sgd"},
          {"validation_fraction", tc.validation_fraction},
          {"patience", tc.patience},
          {"beta1", tc.beta1},
          {"beta2", tc.beta2},
          {"epsilon", tc.epsilon}};
}

TrainConfig train_from(const json& j) {
  TrainConfig tc;
  tc.seed = j.value("seed", tc.seed);
  tc.epochs = j.value("epochs", tc.epochs);
  tc.batch_size = j.value("batch_size", tc.batch_size);
  tc.learning_rate = j.value("learning_rate", tc.learning_rate);
  const auto opt = j.value("optimizer", std::string("adam"));
  if (opt != "adam" && opt != "sgd") throw FormatError("unknown optimizer '" + opt + "'");
  tc.optimizer = opt == "adam" ? Optimizer::adaptive_moment : Optimizer::plain_sgd;
  tc.validation_fraction = j.value("validation_fraction", tc.validation_fraction);
  tc.patience = j.value("patience", tc.patience);
  tc.beta1 = j.value("beta1", tc.beta1);
  tc.beta2 = j.value("beta2", tc.beta2);
  tc.epsilon = j.value("epsilon", tc.epsilon);
  return tc;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string protocol_to_json(const ProtocolConfig& cfg) {
  json j{{"version", 1},
         {"seed", cfg.seed},
         {"horizon", cfg.horizon},
         {"train_fraction", cfg.train_fraction},
         {"calibration_fraction", cfg.calibration_fraction},
         {"pair_stride", cfg.pair_stride},
         {"calibration_stride", cfg.calibration_stride},
         {"baseline_stride", cfg.baseline_stride},
         {"eval_stride", cfg.eval_stride},
         {"submodel_train", train_json(cfg.submodel_train)},
         {"baseline_train", train_json(cfg.baseline_train)},
         {"trigger", cfg.trigger},
         {"interpolation",
          {{"idw_power", cfg.interpolation.idw_power},
           {"variogram_bins", cfg.interpolation.variogram_bins},
           {"variogram_kind", to_string(cfg.interpolation.variogram_kind)}}}};
  if (cfg.coefficients) {
    j["coefficients"] = {{"a", cfg.coefficients->a}, {"b", cfg.coefficients->b}, {"c", cfg.coefficients->c}};
  }
  return j.dump(2);
}

ProtocolConfig protocol_from_json(const std::string& text) {
  ProtocolConfig cfg;
  try {
    const auto j = json::parse(text);
    if (j.value("version", 1) != 1) throw UnsupportedVersionError("unsupported protocol version");
    cfg.seed = j.value("seed", cfg.seed);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.calibration_fraction = j.value("calibration_fraction", cfg.calibration_fraction);
    cfg.pair_stride = j.value("pair_stride", cfg.pair_stride);
    cfg.calibration_stride = j.value("calibration_stride", cfg.calibration_stride);
    cfg.baseline_stride = j.value("baseline_stride", cfg.baseline_stride);
    cfg.eval_stride = j.value("eval_stride", cfg.eval_stride);
    if (j.contains("submodel_train")) cfg.submodel_train = train_from(j["submodel_train"]);
    if (j.contains("baseline_train")) cfg.baseline_train = train_from(j["baseline_train"]);
    cfg.trigger = j.value("trigger", cfg.trigger);
    if (j.contains("interpolation")) {
      const auto& ij = j["interpolation"];
      cfg.interpolation.idw_power = ij.value("idw_power", cfg.interpolation.idw_power);
      cfg.interpolation.variogram_bins = ij.value("variogram_bins", cfg.interpolation.variogram_bins);
      cfg.interpolation.variogram_kind = parse_variogram_kind(ij.value("variogram_kind", std::string("spherical")));
    }
    if (j.contains("coefficients")) {
      const auto& c = j["coefficients"];
      cfg.coefficients = WeightCoefficients{c.at("a").get<double>(), c.at("b").get<double>(), c.at("c").get<double>()};
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("protocol: ") + e.what());
  } catch (const UsageError& e) {
    throw FormatError(std::string("protocol: ") + e.what());
  }
  cfg.check();
  return cfg;
}

void save_protocol(const ProtocolConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << protocol_to_json(cfg) << '\n';
}

ProtocolConfig load_protocol(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return protocol_from_json(ss.str());
}

void EvaluationReport::sort() {
  std::stable_sort(results.begin(), results.end(), [](const AblationResult& a, const AblationResult& b) {
    return std::tuple(a.fold, a.method, a.station_count) < std::tuple(b.fold, b.method, b.station_count);
  });
  std::stable_sort(comparisons.begin(), comparisons.end(),
                   [](const MethodComparison& a, const MethodComparison& b) { return a.fold < b.fold; });
}

std::string report_to_json(const EvaluationReport& report) {
  json results = json::array();
  for (const auto& r : report.results) {
    results.push_back({{"fold", r.fold},
                       {"method", method_name(r.method)},
                       {"station_count", r.station_count},
                       {"seed", r.seed},
                       {"rows", r.rows},
                       {"rmse", optional_number(r.rmse)},
                       {"tp", r.counts.tp},
                       {"fp", r.counts.fp},
                       {"fn", r.counts.fn},
                       {"tn", r.counts.tn},
                       {"tpr", optional_number(r.tpr())},
                       {"fdr", optional_number(r.fdr())}});
  }
  json comparisons = json::array();
  for (const auto& c : report.comparisons) {
    json rows = json::array();
    for (const auto& row : c.matrix.p) {
      json line = json::array();
      for (const auto& v : row) line.push_back(optional_number(v));
      rows.push_back(line);
    }
    comparisons.push_back({{"fold", c.fold}, {"methods", c.matrix.labels}, {"p_values", rows}});
  }
  json j{{"version", 1}, {"seed", report.seed}, {"results", results}, {"comparisons", comparisons}};
  if (report.generated_at) j["generated_at"] = *report.generated_at;
  return j.dump(2);
}

void save_report(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << report_to_json(report) << '\n';
}

}  // namespace frost
