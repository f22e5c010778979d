#include "frost/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "frost/error.hpp"
#include "frost/random.hpp"

namespace frost {

void NetworkSpec::check() const {
  if (input_dim == 0) throw DomainError("network input dimension must be positive");
  if (layer_sizes.empty()) throw DomainError("network needs at least one layer");
  for (auto s : layer_sizes) {
    if (s == 0) throw DomainError("network layer sizes must be positive");
  }
  if (layer_sizes.back() != 1) throw DomainError("network output layer must have size 1");
}

NetworkSpec NetworkSpec::baseline() { return {kClimateFeatureCount, {5, 7, 1}}; }

NetworkSpec NetworkSpec::submodel() { return {kSpatialFeatureCount, {10, 14, 9, 8, 1}}; }

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.check();
  std::size_t in = spec_.input_dim;
  std::size_t offset = 0;
  for (auto out : spec_.layer_sizes) {
    shapes_.push_back({in, out, offset});
    offset += in * out + out;
    in = out;
  }
  params_.assign(offset, 0.0);
}

std::span<double> Network::weights(std::size_t layer) {
  const auto& s = shapes_.at(layer);
  return {params_.data() + s.offset, s.inputs * s.outputs};
}

std::span<const double> Network::weights(std::size_t layer) const {
  const auto& s = shapes_.at(layer);
  return {params_.data() + s.offset, s.inputs * s.outputs};
}

std::span<double> Network::biases(std::size_t layer) {
  const auto& s = shapes_.at(layer);
  return {params_.data() + s.offset + s.inputs * s.outputs, s.outputs};
}

std::span<const double> Network::biases(std::size_t layer) const {
  const auto& s = shapes_.at(layer);
  return {params_.data() + s.offset + s.inputs * s.outputs, s.outputs};
}

namespace {

/// y = x W + b, then the rectifier unless `linear`.
void dense(const Network::LayerShape& shape, const double* params, const double* x, double* y, bool linear) {
  const double* w = params + shape.offset;
  const double* b = w + shape.inputs * shape.outputs;
  for (std::size_t j = 0; j < shape.outputs; ++j) y[j] = b[j];
  for (std::size_t i = 0; i < shape.inputs; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = w + i * shape.outputs;
    for (std::size_t j = 0; j < shape.outputs; ++j) y[j] += xi * row[j];
  }
  if (!linear) {
    for (std::size_t j = 0; j < shape.outputs; ++j) y[j] = y[j] > 0.0 ? y[j] : 0.0;
  }
}

std::size_t widest(const Network& net) {
  std::size_t w = net.spec().input_dim;
  for (auto s : net.spec().layer_sizes) w = std::max(w, s);
  return w;
}

}  // namespace

double Network::forward(std::span<const double> x) const {
  if (x.size() != spec_.input_dim) {
    throw DomainError("network expects " + std::to_string(spec_.input_dim) + " inputs, got " +
                      std::to_string(x.size()));
  }
  thread_local std::vector<double> a, b;
  const std::size_t w = widest(*this);
  a.assign(x.begin(), x.end());
  a.resize(w);
  b.resize(w);
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    dense(shapes_[l], params_.data(), a.data(), b.data(), l + 1 == shapes_.size());
    std::swap(a, b);
  }
  return a[0];
}

Network init_network(const NetworkSpec& spec, std::uint64_t seed) {
  Network net(spec);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& s = net.shapes()[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(s.inputs + s.outputs));
    for (auto& w : net.weights(l)) w = rng.uniform(-limit, limit);
  }
  return net;
}

double accumulate_gradients(const Network& net, const FeatureMatrix& data, std::span<const std::size_t> rows,
                            std::span<double> grad) {
  if (data.cols != net.spec().input_dim) throw DomainError("batch width does not match network input");
  if (grad.size() != net.parameters().size()) throw DomainError("gradient buffer has wrong size");
  std::fill(grad.begin(), grad.end(), 0.0);
  if (rows.empty()) throw DataError("gradient batch is empty");

  const auto& shapes = net.shapes();
  const std::size_t layers = shapes.size();
  const double* params = net.parameters().data();
  // activations[l] is the input of layer l; activations[layers] the output
  thread_local std::vector<std::vector<double>> activations;
  thread_local std::vector<double> delta, delta_prev;
  activations.resize(layers + 1);
  activations[0].resize(net.spec().input_dim);
  for (std::size_t l = 0; l < layers; ++l) activations[l + 1].resize(shapes[l].outputs);
  const std::size_t w = widest(net);
  delta.resize(w);
  delta_prev.resize(w);

  const double scale = 2.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (auto r : rows) {
    const auto x = data.row(r);
    std::copy(x.begin(), x.end(), activations[0].begin());
    for (std::size_t l = 0; l < layers; ++l) {
      dense(shapes[l], params, activations[l].data(), activations[l + 1].data(), l + 1 == layers);
    }
    const double err = activations[layers][0] - data.y[r];
    loss += err * err;

    delta[0] = scale * err;
    for (std::size_t l = layers; l-- > 0;) {
      const auto& s = shapes[l];
      const double* a_in = activations[l].data();
      double* gw = grad.data() + s.offset;
      double* gb = gw + s.inputs * s.outputs;
      for (std::size_t j = 0; j < s.outputs; ++j) gb[j] += delta[j];
      for (std::size_t i = 0; i < s.inputs; ++i) {
        const double ai = a_in[i];
        if (ai == 0.0) continue;
        double* row = gw + i * s.outputs;
        for (std::size_t j = 0; j < s.outputs; ++j) row[j] += ai * delta[j];
      }
      if (l == 0) break;
      const double* wl = params + s.offset;
      for (std::size_t i = 0; i < s.inputs; ++i) {
        // rectifier subgradient is 0 at the kink
        if (a_in[i] <= 0.0) {
          delta_prev[i] = 0.0;
          continue;
        }
        const double* row = wl + i * s.outputs;
        double acc = 0.0;
        for (std::size_t j = 0; j < s.outputs; ++j) acc += row[j] * delta[j];
        delta_prev[i] = acc;
      }
      std::swap(delta, delta_prev);
    }
  }
  return loss / static_cast<double>(rows.size());
}

Gradients gradients(const Network& net, const FeatureMatrix& batch) {
  std::vector<std::size_t> rows(batch.rows());
  std::iota(rows.begin(), rows.end(), 0);
  Gradients g;
  g.values.resize(net.parameters().size());
  g.loss = accumulate_gradients(net, batch, rows, g.values);
  return g;
}

double mean_squared_error(const Network& net, const FeatureMatrix& data) {
  if (data.rows() == 0) throw DataError("cannot evaluate loss on zero rows");
  double sum = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double e = net.forward(data.row(i)) - data.y[i];
    sum += e * e;
  }
  return sum / static_cast<double>(data.rows());
}

void TrainConfig::check() const {
  if (batch_size == 0) throw DomainError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw DomainError("learning rate must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw DomainError("validation fraction must lie in [0, 1)");
}

namespace {

double subset_loss(const Network& net, const FeatureMatrix& data, std::span<const std::size_t> rows) {
  double sum = 0.0;
  for (auto r : rows) {
    const double e = net.forward(data.row(r)) - data.y[r];
    sum += e * e;
  }
  return sum / static_cast<double>(rows.size());
}

}  // namespace

TrainResult train(Network net, const FeatureMatrix& data, const TrainConfig& cfg) {
  cfg.check();
  if (data.cols != net.spec().input_dim) throw DomainError("training data width does not match network input");
  TrainResult result{net, {}, 0, false};
  if (cfg.epochs == 0) return result;
  if (data.rows() == 0) throw DataError("cannot train on zero rows");

  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(cfg.seed, 0));
  split_rng.shuffle(std::span<std::size_t>(order));
  std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(order.size())));
  if (n_val >= order.size()) n_val = 0;
  std::vector<std::size_t> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  const auto& monitor_rows = val_rows.empty() ? train_rows : val_rows;

  auto& params = net.parameters();
  std::vector<double> grad(params.size()), m(params.size(), 0.0), v(params.size(), 0.0);
  Rng batch_rng(derive_seed(cfg.seed, 1));
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    batch_rng.shuffle(std::span<std::size_t>(train_rows));
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train_rows.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, train_rows.size() - start);
      const double loss = accumulate_gradients(net, data, {train_rows.data() + start, len}, grad);
      if (!std::isfinite(loss)) throw NumericalError("training diverged at epoch " + std::to_string(epoch));
      epoch_loss += loss;
      ++batches;
      ++step;
      if (cfg.optimizer == Optimizer::plain_sgd) {
        for (std::size_t k = 0; k < params.size(); ++k) params[k] -= cfg.learning_rate * grad[k];
      } else {
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
        for (std::size_t k = 0; k < params.size(); ++k) {
          m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
          v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
          params[k] -= cfg.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.epsilon);
        }
      }
    }
    const double monitor = subset_loss(net, data, monitor_rows);
    if (!std::isfinite(monitor)) throw NumericalError("training diverged at epoch " + std::to_string(epoch));
    result.history.push_back({epoch, epoch_loss / static_cast<double>(batches), monitor});
    if (monitor < best) {
      best = monitor;
      since_best = 0;
      result.best_epoch = epoch;
      result.network = net;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

double Model::predict(std::span<const double> raw_features) const {
  thread_local std::vector<double> scaled;
  scaled.assign(raw_features.begin(), raw_features.end());
  apply_scaler(scaler, scaled);
  return invert_label(scaler, network.forward(scaled));
}

namespace {

nlohmann::json to_json(const Model& model) {
  const auto& net = model.network;
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto w = net.weights(l);
    const auto b = net.biases(l);
    weights.push_back(std::vector<double>(w.begin(), w.end()));
    biases.push_back(std::vector<double>(b.begin(), b.end()));
  }
  return {
      {"version", kModelFormatVersion},
      {"spec", {{"input_dim", net.spec().input_dim}, {"layer_sizes", net.spec().layer_sizes}}},
      {"weights", weights},
      {"biases", biases},
      {"scaler",
       {{"mean", model.scaler.mean},
        {"sd", model.scaler.sd},
        {"label_mean", model.scaler.label_mean},
        {"label_sd", model.scaler.label_sd}}},
  };
}

Model from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("version")) throw FormatError("model file has no version field");
  const auto version = doc.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw UnsupportedVersionError("unsupported model format version " + std::to_string(version));
  }
  NetworkSpec spec{doc.at("spec").at("input_dim").get<std::size_t>(),
                   doc.at("spec").at("layer_sizes").get<std::vector<std::size_t>>()};
  try {
    spec.check();
  } catch (const DomainError& e) {
    throw FormatError(std::string("model spec invalid: ") + e.what());
  }
  Model model{Network(spec), {}};
  const auto& weights = doc.at("weights");
  const auto& biases = doc.at("biases");
  if (weights.size() != spec.layer_sizes.size() || biases.size() != spec.layer_sizes.size())
    throw FormatError("model layer count does not match spec");
  for (std::size_t l = 0; l < spec.layer_sizes.size(); ++l) {
    const auto w = weights[l].get<std::vector<double>>();
    const auto b = biases[l].get<std::vector<double>>();
    auto dw = model.network.weights(l);
    auto db = model.network.biases(l);
    if (w.size() != dw.size() || b.size() != db.size()) throw FormatError("model layer shape does not match spec");
    std::copy(w.begin(), w.end(), dw.begin());
    std::copy(b.begin(), b.end(), db.begin());
  }
  const auto& s = doc.at("scaler");
  model.scaler.mean = s.at("mean").get<std::vector<double>>();
  model.scaler.sd = s.at("sd").get<std::vector<double>>();
  model.scaler.label_mean = s.at("label_mean").get<double>();
  model.scaler.label_sd = s.at("label_sd").get<double>();
  if (model.scaler.mean.size() != spec.input_dim || model.scaler.sd.size() != spec.input_dim)
    throw FormatError("model scaler width does not match spec");
  return model;
}

}  // namespace

void save_model(const Model& model, std::ostream& out) { out << to_json(model).dump() << '\n'; }

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path.string());
  save_model(model, out);
}

Model load_model(std::istream& in) {
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace frost
