// frost: command-line pipeline for off-site minimum temperature prediction.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frost/ensemble.hpp"
#include "frost/error.hpp"
#include "frost/evaluate.hpp"
#include "frost/ingest.hpp"
#include "frost/raster.hpp"
#include "frost/synth.hpp"

namespace {

using namespace frost;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return 2;
    case ErrorKind::numerical: return 4;
    default: return 3;
  }
}

void report_error(const char* kind, const std::string& message) {
  std::string clean;
  for (char c : message) {
    if (c == '"' || c == '\\') clean += '\\';
    clean += (c == '\n' || c == '\r') ? ' ' : c;
  }
  std::fprintf(stderr, "error: kind=%s message=\"%s\"\n", kind, clean.c_str());
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

WeightCoefficients parse_preset(const std::string& token) {
  const std::string prefix = "paper-fold-";
  if (token.rfind(prefix, 0) != 0 || token.size() != prefix.size() + 1 || token.back() < '0' || token.back() > '4') {
    throw UsageError("unknown preset '" + token + "' (expected paper-fold-0 .. paper-fold-4)");
  }
  return paper_preset(static_cast<std::size_t>(token.back() - '0'));
}

std::filesystem::path protocol_path(const std::filesystem::path& bank) { return bank / "protocol.json"; }

ProtocolConfig bank_protocol(const std::filesystem::path& bank) {
  if (!std::filesystem::exists(protocol_path(bank))) return {};
  return load_protocol(protocol_path(bank));
}

struct SynthArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void run_synth(const SynthArgs& a) {
  WorldSpec spec = a.spec.empty() ? WorldSpec{} : read_world_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  const auto world = generate_world(spec);
  write_world(world, a.out);
  std::printf("wrote %zu stations to %s\n", world.stations.size(), a.out.c_str());
}

struct IngestArgs {
  std::string stations, dem, ndvi, boundary, out;
  double cell = 0.01;
};

void run_ingest(const IngestArgs& a) {
  IngestOptions opts;
  opts.target_cell = a.cell;
  if (!a.boundary.empty()) opts.boundary = read_boundary_json(a.boundary);
  IngestSummary summary;
  const auto data =
      ingest_station_directory(a.stations, read_ascii_grid(a.dem), read_ascii_grid(a.ndvi), opts, &summary);
  save_dataset(data, a.out);
  std::printf("ingested %zu stations, %zu observations, %zu dropped rows\n", summary.stations, summary.observations,
              summary.dropped_rows);
}

struct FoldsArgs {
  std::string data, stations, out;
  std::uint64_t seed = 0;
};

void run_folds(const FoldsArgs& a) {
  std::vector<StationId> ids;
  if (!a.data.empty()) {
    ids = load_dataset(a.data).station_ids();
  } else if (!a.stations.empty()) {
    std::ifstream in(std::filesystem::path(a.stations) / "stations.csv");
    if (!in) throw DataError("cannot read stations.csv in " + a.stations);
    for (const auto& s : parse_station_sites(in)) ids.push_back(s.id);
  } else {
    throw UsageError("folds needs --data or --stations");
  }
  const auto folds = make_folds(ids, a.seed);
  save_folds(folds, a.seed, a.out);
  for (std::size_t k = 0; k < kFoldCount; ++k) std::printf("fold %zu: %zu stations\n", k, folds.folds[k].size());
}

struct TrainArgs {
  std::string data, folds, out, preset;
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  std::size_t epochs = 200, batch = 256, patience = 10;
  double learning_rate = 1e-3;
  std::int64_t pair_stride = 15, eval_stride = 1, calibration_stride = 60, baseline_stride = 1;
  double train_fraction = 0.7, calibration_fraction = 0.1;
  bool deterministic = false;
};

void run_train(const TrainArgs& a) {
  ProtocolConfig cfg;
  cfg.seed = a.seed;
  cfg.pair_stride = a.pair_stride;
  cfg.eval_stride = a.eval_stride;
  cfg.calibration_stride = a.calibration_stride;
  cfg.baseline_stride = a.baseline_stride;
  cfg.train_fraction = a.train_fraction;
  cfg.calibration_fraction = a.calibration_fraction;
  for (auto* tc : {&cfg.submodel_train, &cfg.baseline_train}) {
    tc->epochs = a.epochs;
    tc->batch_size = a.batch;
    tc->patience = a.patience;
    tc->learning_rate = a.learning_rate;
  }
  if (!a.preset.empty()) cfg.coefficients = parse_preset(a.preset);
  cfg.check();
  if (a.fold >= kFoldCount) throw UsageError("--fold must be 0..4");

  const auto data = load_dataset(a.data);
  const auto folds = load_folds(a.folds);
  auto started = std::chrono::steady_clock::now();
  const auto result = train_fold_bank(data, folds, a.fold, cfg, [&](const ModelTrainingSummary& m) {
    std::printf("%s %s rows=%zu epochs=%zu best=%zu train_loss=%.6g val_loss=%.6g", m.baseline ? "baseline" : "submodel",
                m.station.str().c_str(), m.rows, m.epochs, m.best_epoch, m.train_loss, m.validation_loss);
    if (!a.deterministic) {
      const auto now = std::chrono::steady_clock::now();
      std::printf(" seconds=%.2f", std::chrono::duration<double>(now - started).count());
      started = now;
    }
    std::printf("\n");
    std::fflush(stdout);
  });
  save_bank(result.bank, a.out);
  save_protocol(cfg, protocol_path(a.out));
  const auto& c = result.bank.coefficients;
  std::printf("bank fold %zu: %zu submodels, %zu baselines, coefficients a=%.4f b=%.4f c=%.4f\n", a.fold,
              result.bank.submodels.size(), result.bank.baselines.size(), c.a, c.b, c.c);
}

struct CalibrateArgs {
  std::string bank, data, preset;
};

void run_calibrate(const CalibrateArgs& a) {
  auto bank = load_bank(a.bank);
  if (!a.preset.empty()) {
    bank.coefficients = parse_preset(a.preset);
  } else {
    if (a.data.empty()) throw UsageError("calibrate needs --data or --preset");
    const auto data = load_dataset(a.data);
    const auto samples = calibration_samples(data, bank, bank_protocol(a.bank));
    bank.coefficients = calibrate_coefficients(bank, samples);
  }
  save_bank(bank, a.bank);
  const auto& c = bank.coefficients;
  std::printf("coefficients a=%.4f b=%.4f c=%.4f\n", c.a, c.b, c.c);
}

struct EvalArgs {
  std::string bank, data, methods = "avg,wavg,vote,idw,ok,baseline", counts, out, comparison_csv;
  std::uint64_t seed = 0;
  bool deterministic = false;
};

void run_eval(const EvalArgs& a) {
  const auto methods = parse_methods(a.methods);
  std::optional<std::vector<std::size_t>> counts;
  if (!a.counts.empty()) counts = parse_counts(a.counts);
  const auto bank = load_bank(a.bank);
  const auto cfg = bank_protocol(a.bank);
  const auto data = load_dataset(a.data);
  const auto table = predict_fold(data, bank, cfg);

  EvaluationReport report;
  report.seed = a.seed;
  report.results = counts ? run_station_ablation(table, bank.fold, methods, *counts, a.seed, cfg)
                          : run_fold_experiment(table, bank.fold, methods, cfg);
  if (auto cmp = compare_methods(table, bank.fold, methods, cfg)) report.comparisons.push_back(std::move(*cmp));
  if (!a.deterministic) report.generated_at = utc_now();
  report.sort();
  save_report(report, a.out);
  if (!a.comparison_csv.empty() && !report.comparisons.empty()) {
    std::ofstream out(a.comparison_csv);
    if (!out) throw DataError("cannot write " + a.comparison_csv);
    write_p_value_csv(report.comparisons.front().matrix, out);
  }
  for (const auto& r : report.results) {
    std::printf("fold=%zu method=%s k=%zu rows=%zu rmse=%s tpr=%s fdr=%s\n", r.fold, method_name(r.method),
                r.station_count, r.rows, r.rmse ? std::to_string(*r.rmse).c_str() : "NA",
                r.tpr() ? std::to_string(*r.tpr()).c_str() : "NA", r.fdr() ? std::to_string(*r.fdr()).c_str() : "NA");
  }
}

struct RasterArgs {
  std::string bank, data, method = "wavg", out, png;
  std::int64_t timestamp = 0;
};

void run_raster(const RasterArgs& a) {
  const auto request = parse_raster_method(a.method);
  const auto bank = load_bank(a.bank);
  const auto data = load_dataset(a.data);
  const auto climate = climate_snapshot(data, bank, a.timestamp);
  const auto grid = generate_raster(bank, climate, data.dem, data.ndvi, request);
  write_ascii_grid(grid, a.out);
  if (!a.png.empty()) write_png_heatmap(grid, a.png);
  std::printf("raster %s from %zu stations, %zu cells\n", a.out.c_str(),
              request.method == RasterMethod::single ? std::size_t{1} : climate.size(), grid.unmasked_count());
}

struct CompareArgs {
  std::vector<std::string> rasters, labels;
  std::string out;
};

void run_compare(const CompareArgs& a) {
  if (!a.labels.empty() && a.labels.size() != a.rasters.size()) {
    throw UsageError("--labels must name every raster");
  }
  std::vector<AttributeGrid> grids;
  std::vector<std::string> labels = a.labels;
  for (const auto& path : a.rasters) {
    grids.push_back(read_ascii_grid(path));
    if (a.labels.empty()) labels.push_back(std::filesystem::path(path).stem().string());
  }
  const auto m = raster_matrix(labels, grids);
  std::ofstream out(a.out);
  if (!out) throw DataError("cannot write " + a.out);
  write_p_value_csv(m, out);
  std::printf("compared %zu rasters\n", grids.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-site minimum temperature prediction from weather-station submodels"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic world");
  c_synth->add_option("--spec", synth.spec, "World spec JSON (defaults if omitted)");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", synth.seed, "Override the spec seed");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate station CSVs and grids into a dataset bundle");
  c_ingest->add_option("--stations", ingest.stations, "Directory with stations.csv and <id>.csv")->required();
  c_ingest->add_option("--dem", ingest.dem, "DEM ESRI ASCII grid")->required();
  c_ingest->add_option("--ndvi", ingest.ndvi, "NDVI ESRI ASCII grid")->required();
  c_ingest->add_option("--boundary", ingest.boundary, "Boundary polygon JSON");
  c_ingest->add_option("--cell", ingest.cell, "Target cell size in degrees");
  c_ingest->add_option("--out", ingest.out, "Dataset bundle path")->required();

  FoldsArgs folds;
  auto* c_folds = app.add_subcommand("folds", "Split stations into five folds");
  c_folds->add_option("--data", folds.data, "Dataset bundle");
  c_folds->add_option("--stations", folds.stations, "Station directory with stations.csv");
  c_folds->add_option("--seed", folds.seed, "Shuffle seed");
  c_folds->add_option("--out", folds.out, "Folds JSON")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the submodel bank and baselines of one fold");
  c_train->add_option("--data", train.data, "Dataset bundle")->required();
  c_train->add_option("--folds", train.folds, "Folds JSON")->required();
  c_train->add_option("--fold", train.fold, "Fold index 0..4")->required();
  c_train->add_option("--out", train.out, "Bank directory")->required();
  c_train->add_option("--seed", train.seed, "Training seed");
  c_train->add_option("--epochs", train.epochs, "Maximum epochs");
  c_train->add_option("--batch-size", train.batch, "Minibatch size");
  c_train->add_option("--learning-rate", train.learning_rate, "Adam step size");
  c_train->add_option("--patience", train.patience, "Early-stopping patience (0 disables)");
  c_train->add_option("--pair-stride", train.pair_stride, "Minutes between training rows of a station pair");
  c_train->add_option("--calibration-stride", train.calibration_stride, "Minutes between calibration rows");
  c_train->add_option("--baseline-stride", train.baseline_stride, "Minutes between baseline rows");
  c_train->add_option("--eval-stride", train.eval_stride, "Minutes between evaluated timestamps");
  c_train->add_option("--train-fraction", train.train_fraction, "Leading share of the time span for training");
  c_train->add_option("--calibration-fraction", train.calibration_fraction, "Share used for weight calibration");
  c_train->add_option("--preset", train.preset, "Use published coefficients paper-fold-K instead of calibrating");
  c_train->add_flag("--deterministic", train.deterministic, "Omit wall-clock timings");

  CalibrateArgs calib;
  auto* c_calib = app.add_subcommand("calibrate", "Set the bank's distance-weight coefficients");
  c_calib->add_option("--bank", calib.bank, "Bank directory")->required();
  c_calib->add_option("--data", calib.data, "Dataset bundle");
  c_calib->add_option("--preset", calib.preset, "paper-fold-K");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate aggregation methods on the fold's test stations");
  c_eval->add_option("--bank", eval.bank, "Bank directory")->required();
  c_eval->add_option("--data", eval.data, "Dataset bundle")->required();
  c_eval->add_option("--methods", eval.methods, "Comma list of avg,wavg,vote,idw,ok,baseline");
  c_eval->add_option("--counts", eval.counts, "Station counts, e.g. 1..10,10..60:10 (default: whole bank)");
  c_eval->add_option("--seed", eval.seed, "Station subset seed");
  c_eval->add_option("--out", eval.out, "Report JSON")->required();
  c_eval->add_option("--comparison-csv", eval.comparison_csv, "Method p-value matrix CSV");
  c_eval->add_flag("--deterministic", eval.deterministic, "Omit wall-clock fields");

  RasterArgs raster;
  auto* c_raster = app.add_subcommand("raster", "Predict a minimum temperature map");
  c_raster->add_option("--bank", raster.bank, "Bank directory")->required();
  c_raster->add_option("--data", raster.data, "Dataset bundle")->required();
  c_raster->add_option("--method", raster.method, "avg, wavg or single:<id>");
  c_raster->add_option("--timestamp", raster.timestamp, "Climate snapshot, minutes since epoch")->required();
  c_raster->add_option("--out", raster.out, "Output ESRI ASCII grid")->required();
  c_raster->add_option("--png", raster.png, "Optional PNG heatmap");

  CompareArgs compare;
  auto* c_compare = app.add_subcommand("compare", "Paired t-test p-value matrix between rasters");
  c_compare->add_option("--rasters", compare.rasters, "Two or more ESRI ASCII grids")->required();
  c_compare->add_option("--labels", compare.labels, "Row/column labels")->delimiter(',');
  c_compare->add_option("--out", compare.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (c_synth->parsed()) run_synth(synth);
    else if (c_ingest->parsed()) run_ingest(ingest);
    else if (c_folds->parsed()) run_folds(folds);
    else if (c_train->parsed()) run_train(train);
    else if (c_calib->parsed()) run_calibrate(calib);
    else if (c_eval->parsed()) run_eval(eval);
    else if (c_raster->parsed()) run_raster(raster);
    else if (c_compare->parsed()) run_compare(compare);
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error("data", e.what());
    return 3;
  }
  return 0;
}
