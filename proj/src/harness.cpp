#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "frost/error.hpp"
#include "frost/evaluate.hpp"
#include "frost/random.hpp"

namespace frost {

// --- methods and counts ------------------------------------------------------

const char* method_token(Method m) {
  switch (m) {
    case Method::average: return "avg";
    case Method::weighted_average: return "wavg";
    case Method::weighted_vote: return "vote";
    case Method::idw: return "idw";
    case Method::ok: return "ok";
    case Method::baseline: return "baseline";
  }
  return "?";
}

const char* method_name(Method m) {
  switch (m) {
    case Method::average: return "average";
    case Method::weighted_average: return "weighted_average";
    case Method::weighted_vote: return "weighted_vote";
    case Method::idw: return "idw";
    case Method::ok: return "ok";
    case Method::baseline: return "baseline";
  }
  return "?";
}

Method parse_method(const std::string& token) {
  for (auto m : kAllMethods) {
    if (token == method_token(m) || token == method_name(m)) return m;
  }
  throw UsageError("unknown method '" + token + "'");
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

std::size_t parse_count(const std::string& text, const std::string& item) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (text.empty() || pos != text.size() || text.front() == '-') {
    throw UsageError("bad station count '" + item + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  for (const auto& token : split(list, ',')) {
    const auto m = parse_method(token);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw UsageError("no methods given");
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& list) {
  std::vector<std::size_t> out;
  for (const auto& item : split(list, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_count(item, item));
      continue;
    }
    std::string rest = item.substr(dots + 2);
    std::size_t step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = parse_count(rest.substr(colon + 1), item);
      rest = rest.substr(0, colon);
    }
    const auto a = parse_count(item.substr(0, dots), item);
    const auto b = parse_count(rest, item);
    if (step == 0 || a > b) throw UsageError("bad count range '" + item + "'");
    for (std::size_t k = a; k <= b; k += step) out.push_back(k);
  }
  if (out.empty()) throw UsageError("no station counts given");
  if (std::find(out.begin(), out.end(), 0) != out.end()) throw UsageError("station counts must be positive");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// --- protocol ----------------------------------------------------------------

void ProtocolConfig::check() const {
  if (horizon == 0) throw DomainError("label horizon must be positive");
  if (!(train_fraction > 0.0) || !(calibration_fraction >= 0.0) || !(train_fraction + calibration_fraction < 1.0)) {
    throw DomainError("time fractions must satisfy 0 < train, 0 <= calibration, train + calibration < 1");
  }
  if (pair_stride < 1 || calibration_stride < 1 || baseline_stride < 1 || eval_stride < 1) {
    throw DomainError("strides must be at least 1 minute");
  }
  submodel_train.check();
  baseline_train.check();
  if (coefficients && !coefficients->valid()) throw DomainError("preset weight coefficients are invalid");
}

TimeWindows time_windows(const Dataset& data, const ProtocolConfig& cfg) {
  cfg.check();
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& s : data.stations) {
    if (s.observations.empty()) continue;
    lo = std::min(lo, s.observations.front().timestamp);
    hi = std::max(hi, s.observations.back().timestamp);
  }
  if (lo > hi) throw DataError("dataset has no observations");
  TimeWindows w;
  w.begin = lo;
  w.end = hi + 1;
  const auto span = static_cast<double>(w.end - w.begin);
  w.train_end = w.begin + static_cast<std::int64_t>(std::floor(span * cfg.train_fraction));
  w.calibration_end =
      w.begin + static_cast<std::int64_t>(std::floor(span * (cfg.train_fraction + cfg.calibration_fraction)));
  return w;
}

namespace {

TimeFilter window(std::int64_t begin, std::int64_t end, std::int64_t stride) {
  TimeFilter f;
  f.begin = begin;
  f.end = end;
  f.stride = stride;
  f.anchor = begin;
  return f;
}

std::int64_t horizon_of(const ProtocolConfig& cfg) { return static_cast<std::int64_t>(cfg.horizon); }

}  // namespace

TimeFilter TimeWindows::train(const ProtocolConfig& cfg) const {
  return window(begin, train_end - horizon_of(cfg), cfg.pair_stride);
}

TimeFilter TimeWindows::calibration(const ProtocolConfig& cfg) const {
  return window(train_end, calibration_end - horizon_of(cfg), cfg.calibration_stride);
}

TimeFilter TimeWindows::baseline(const ProtocolConfig& cfg) const {
  return window(begin, calibration_end - horizon_of(cfg), cfg.baseline_stride);
}

TimeFilter TimeWindows::evaluation(const ProtocolConfig& cfg) const {
  return window(calibration_end, end, cfg.eval_stride);
}

// --- training ----------------------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t model_seed(const ProtocolConfig& cfg, std::size_t fold, const StationId& id, bool baseline) {
  return derive_seed(derive_seed(cfg.seed, fold), fnv1a((baseline ? "baseline:" : "submodel:") + id.str()));
}

Model fit_model(const FeatureMatrix& raw, const NetworkSpec& spec, TrainConfig tc, std::uint64_t seed,
                ModelTrainingSummary& summary) {
  const auto scaler = fit_scaler(raw);
  const auto scaled = apply_scaler(scaler, raw);
  tc.seed = seed;
  auto result = train(init_network(spec, derive_seed(seed, 7)), scaled, tc);
  summary.rows = raw.rows();
  summary.epochs = result.history.size();
  summary.best_epoch = result.best_epoch;
  if (result.best_epoch > 0) {
    summary.train_loss = result.history[result.best_epoch - 1].train;
    summary.validation_loss = result.history[result.best_epoch - 1].validation;
  }
  return {std::move(result.network), scaler};
}

const StationSeries& require_station(const Dataset& data, const StationId& id) {
  const auto* s = data.find(id);
  if (!s) throw DataError("station " + id.str() + " is not in the dataset");
  return *s;
}

}  // namespace

FoldTrainingResult train_fold_bank(const Dataset& data, const FoldAssignment& folds, std::size_t fold,
                                   const ProtocolConfig& cfg, const ProgressFn& progress) {
  const auto windows = time_windows(data, cfg);
  const auto train_ids = folds.train_stations(fold);
  const auto test_ids = folds.test_stations(fold);
  const std::set<StationId> test_set(test_ids.begin(), test_ids.end());
  if (train_ids.size() < 2) throw DataError("a fold needs at least 2 training stations");

  FoldTrainingResult out;
  out.bank.fold = fold;
  out.bank.test_stations = test_ids;
  const auto filter = windows.train(cfg);

  for (const auto& source_id : train_ids) {
    const auto& source = require_station(data, source_id);
    FeatureMatrix raw(kSpatialFeatureCount);
    for (const auto& target_id : train_ids) {
      if (target_id == source_id) continue;
      const auto entries = build_pair_entries(source, require_station(data, target_id), cfg.horizon, filter);
      for (const auto& e : entries) {
        if (test_set.contains(e.source) || test_set.contains(e.target)) {
          throw DataError("training entry " + e.source.str() + " -> " + e.target.str() + " involves a test station");
        }
        out.entry_sources.insert(e.source);
        out.entry_targets.insert(e.target);
        const auto f = e.features();
        raw.push_back(f, e.label);
      }
      out.entry_count += entries.size();
    }
    if (raw.rows() == 0) throw DataError("no training entries for source station " + source_id.str());
    ModelTrainingSummary summary{source_id};
    auto model = fit_model(raw, NetworkSpec::submodel(), cfg.submodel_train, model_seed(cfg, fold, source_id, false),
                           summary);
    out.bank.submodels.emplace(source_id, Submodel{std::move(model), source.attrs});
    if (progress) progress(summary);
    out.models.push_back(std::move(summary));
  }

  const auto base_filter = windows.baseline(cfg);
  for (const auto& test_id : test_ids) {
    const auto samples = build_baseline_samples(require_station(data, test_id), cfg.horizon, base_filter);
    if (samples.rows() == 0) throw DataError("no baseline rows for test station " + test_id.str());
    ModelTrainingSummary summary{test_id, true};
    auto model =
        fit_model(samples, NetworkSpec::baseline(), cfg.baseline_train, model_seed(cfg, fold, test_id, true), summary);
    out.bank.baselines.emplace(test_id, std::move(model));
    if (progress) progress(summary);
    out.models.push_back(std::move(summary));
  }

  out.bank.freeze_normalizer();
  if (cfg.coefficients) {
    out.bank.coefficients = *cfg.coefficients;
  } else {
    const auto samples = calibration_samples(data, out.bank, cfg);
    out.bank.coefficients = calibrate_coefficients(out.bank, samples);
  }
  return out;
}

std::vector<CalibrationSample> calibration_samples(const Dataset& data, const SubmodelBank& bank,
                                                   const ProtocolConfig& cfg) {
  const auto filter = time_windows(data, cfg).calibration(cfg);
  std::vector<CalibrationSample> out;
  for (const auto& [source_id, sub] : bank.submodels) {
    const auto& source = require_station(data, source_id);
    for (const auto& [target_id, other] : bank.submodels) {
      if (target_id == source_id) continue;
      for (const auto& e : build_pair_entries(source, require_station(data, target_id), cfg.horizon, filter)) {
        out.push_back({source_id, e.climate, e.target_attrs, e.label});
      }
    }
  }
  return out;
}

// --- prediction table --------------------------------------------------------

namespace {

const ClimateObservation* observation_at(const StationSeries& s, std::int64_t t) {
  auto it = std::lower_bound(s.observations.begin(), s.observations.end(), t,
                             [](const ClimateObservation& o, std::int64_t v) { return o.timestamp < v; });
  if (it == s.observations.end() || it->timestamp != t) return nullptr;
  return &*it;
}

}  // namespace

PredictionTable predict_fold(const Dataset& data, const SubmodelBank& bank, const ProtocolConfig& cfg) {
  if (bank.submodels.empty()) throw DataError("bank for fold " + std::to_string(bank.fold) + " has no submodels");
  const auto filter = time_windows(data, cfg).evaluation(cfg);
  PredictionTable table;
  std::vector<const StationSeries*> source_series;
  std::vector<const Model*> source_models;
  for (const auto& [id, sub] : bank.submodels) {
    table.sources.push_back(id);
    table.source_attrs.push_back(sub.attrs);
    source_series.push_back(&require_station(data, id));
    source_models.push_back(&sub.model);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& target_id : bank.test_stations) {
    const auto& target = require_station(data, target_id);
    auto base_it = bank.baselines.find(target_id);
    const Model* baseline = base_it == bank.baselines.end() ? nullptr : &base_it->second;
    std::vector<double> raw_weights;
    for (const auto& attrs : table.source_attrs) {
      raw_weights.push_back(
          intermediate_weight(bank.normalizer.normalize(station_distances(attrs, target.attrs)), bank.coefficients));
    }
    for (const auto& label : label_next_hour_min(target, cfg.horizon)) {
      if (!filter.accepts(label.timestamp)) continue;
      PredictionTable::Row row{target_id, target.attrs, label.timestamp, label.value, {}, nan, raw_weights};
      row.predictions.reserve(table.sources.size());
      for (std::size_t s = 0; s < table.sources.size(); ++s) {
        const auto* obs = observation_at(*source_series[s], label.timestamp);
        if (!obs) {
          row.predictions.push_back(nan);
          continue;
        }
        const auto f = spatial_features(table.source_attrs[s], target.attrs, climate_features(*obs));
        row.predictions.push_back(source_models[s]->predict(f));
      }
      if (baseline) {
        const auto c = climate_features(target.observations[label.index]);
        row.baseline = baseline->predict(c);
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

// --- methods -----------------------------------------------------------------

MethodPredictions evaluate_method(const PredictionTable& table, Method method, std::span<const std::size_t> subset,
                                  const ProtocolConfig& cfg) {
  MethodPredictions out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> preds, weights;
  std::vector<SamplePoint> samples;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (method == Method::baseline) {
      if (!std::isfinite(row.baseline)) continue;
      out.row.push_back(r);
      out.value.push_back(row.baseline);
      out.frost.push_back(row.baseline < cfg.trigger);
      out.actual.push_back(row.actual);
      continue;
    }
    preds.clear();
    weights.clear();
    samples.clear();
    for (auto s : subset) {
      const double p = row.predictions.at(s);
      if (!std::isfinite(p)) continue;
      preds.push_back(p);
      weights.push_back(row.raw_weights[s]);
      samples.push_back({table.source_attrs[s].location, p});
    }
    if (preds.empty()) continue;
    double value = nan;
    bool frost = false;
    switch (method) {
      case Method::average: value = aggregate_average(preds); break;
      case Method::weighted_average: value = aggregate_weighted(preds, weights); break;
      case Method::weighted_vote: frost = aggregate_vote(preds, weights, cfg.trigger).frost; break;
      case Method::idw:
        value = aggregate_by_interpolation(samples, row.target_attrs.location, InterpolationMethod::idw,
                                           cfg.interpolation);
        break;
      case Method::ok:
        value = samples.size() < 2 ? samples.front().value
                                   : aggregate_by_interpolation(samples, row.target_attrs.location,
                                                                InterpolationMethod::ok, cfg.interpolation);
        break;
      case Method::baseline: break;
    }
    if (method != Method::weighted_vote) frost = value < cfg.trigger;
    out.row.push_back(r);
    out.value.push_back(value);
    out.frost.push_back(frost);
    out.actual.push_back(row.actual);
  }
  return out;
}

std::vector<std::size_t> draw_subset(std::size_t n_sources, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > n_sources) {
    throw DomainError("station count " + std::to_string(k) + " outside [1, " + std::to_string(n_sources) + "]");
  }
  std::vector<std::size_t> idx(n_sources);
  std::iota(idx.begin(), idx.end(), 0);
  if (k == n_sources) return idx;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

AblationResult summarize(const MethodPredictions& mp, std::size_t fold, Method method, std::size_t k,
                         std::uint64_t seed, double trigger) {
  AblationResult r;
  r.fold = fold;
  r.method = method;
  r.station_count = k;
  r.seed = seed;
  r.rows = mp.actual.size();
  r.counts = event_confusion(mp.frost, mp.actual, trigger);
  if (method != Method::weighted_vote && !mp.value.empty()) r.rmse = rmse(mp.value, mp.actual);
  return r;
}

}  // namespace

std::vector<AblationResult> run_station_ablation(const PredictionTable& table, std::size_t fold,
                                                 const std::vector<Method>& methods,
                                                 const std::vector<std::size_t>& counts, std::uint64_t seed,
                                                 const ProtocolConfig& cfg) {
  const std::size_t n = table.sources.size();
  for (auto k : counts) {
    if (k == 0 || k > n) {
      throw DomainError("station count " + std::to_string(k) + " exceeds the bank size " + std::to_string(n));
    }
  }
  std::vector<AblationResult> out;
  for (auto k : counts) {
    const auto subset = draw_subset(n, k, derive_seed(seed, k));
    for (auto m : methods) {
      if (m == Method::baseline) continue;
      out.push_back(summarize(evaluate_method(table, m, subset, cfg), fold, m, k, seed, cfg.trigger));
    }
  }
  if (std::find(methods.begin(), methods.end(), Method::baseline) != methods.end()) {
    out.push_back(summarize(evaluate_method(table, Method::baseline, {}, cfg), fold, Method::baseline, 0, seed,
                            cfg.trigger));
  }
  return out;
}

std::vector<AblationResult> run_fold_experiment(const PredictionTable& table, std::size_t fold,
                                                const std::vector<Method>& methods, const ProtocolConfig& cfg) {
  return run_station_ablation(table, fold, methods, {table.sources.size()}, cfg.seed, cfg);
}

std::optional<MethodComparison> compare_methods(const PredictionTable& table, std::size_t fold,
                                                const std::vector<Method>& methods, const ProtocolConfig& cfg) {
  std::vector<std::size_t> all(table.sources.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<Method> used;
  std::vector<MethodPredictions> preds;
  for (auto m : methods) {
    if (m == Method::weighted_vote) continue;
    used.push_back(m);
    preds.push_back(evaluate_method(table, m, all, cfg));
  }
  if (used.size() < 2) return std::nullopt;
  std::vector<std::size_t> common = preds.front().row;
  for (const auto& p : preds) {
    std::vector<std::size_t> next;
    std::set_intersection(common.begin(), common.end(), p.row.begin(), p.row.end(), std::back_inserter(next));
    common = std::move(next);
  }
  if (common.size() < 2) return std::nullopt;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> errors;
  for (std::size_t i = 0; i < used.size(); ++i) {
    labels.emplace_back(method_name(used[i]));
    std::vector<double> e;
    std::size_t j = 0;
    for (auto r : common) {
      while (preds[i].row[j] != r) ++j;
      e.push_back(std::abs(preds[i].value[j] - preds[i].actual[j]));
    }
    errors.push_back(std::move(e));
  }
  return MethodComparison{fold, pairwise_t_tests(labels, errors)};
}

}  // namespace frost
