#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "frost/features.hpp"

namespace frost {

/// Dense layer widths after the input; the last width must be 1.
struct NetworkSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> layer_sizes;

  void check() const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;

  /// On-site model: 5 climate inputs, layers 5-7-1.
  static NetworkSpec baseline();
  /// Per-source-station submodel: 13 inputs, layers 10-14-9-8-1.
  static NetworkSpec submodel();
};

/// Fully connected network with rectifier hidden layers and a linear output.
///
/// All parameters live in one flat vector. Layer l occupies
/// [offset, offset + in*out) for its (in x out) row-major weight matrix,
/// followed by `out` biases.
class Network {
 public:
  struct LayerShape {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::size_t offset = 0;
    friend bool operator==(const LayerShape&, const LayerShape&) = default;
  };

  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<LayerShape>& shapes() const noexcept { return shapes_; }
  std::size_t layer_count() const noexcept { return shapes_.size(); }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  std::vector<double>& parameters() noexcept { return params_; }
  const std::vector<double>& parameters() const noexcept { return params_; }

  double forward(std::span<const double> x) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  NetworkSpec spec_;
  std::vector<LayerShape> shapes_;
  std::vector<double> params_;
};

/// Glorot-uniform weights, zero biases.
Network init_network(const NetworkSpec& spec, std::uint64_t seed);

/// Mean-squared-error loss and its gradient in the flat parameter layout.
struct Gradients {
  double loss = 0.0;
  std::vector<double> values;
};

Gradients gradients(const Network& net, const FeatureMatrix& batch);

/// Loss and gradient over selected rows; `grad` is overwritten.
double accumulate_gradients(const Network& net, const FeatureMatrix& data, std::span<const std::size_t> rows,
                            std::span<double> grad);

double mean_squared_error(const Network& net, const FeatureMatrix& data);

enum class Optimizer { plain_sgd, adaptive_moment };

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adaptive_moment;
  double validation_fraction = 0.1;
  std::size_t patience = 10;  // 0 disables early stopping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void check() const;
};

struct EpochLoss {
  std::size_t epoch = 0;  // 1-based
  double train = 0.0;
  double validation = 0.0;
};

struct TrainResult {
  Network network;
  std::vector<EpochLoss> history;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  bool early_stopped = false;
};

/// Minibatch training on already-scaled rows. Deterministic given the seed and
/// row order; returns the parameters with the best validation loss.
TrainResult train(Network net, const FeatureMatrix& data, const TrainConfig& cfg);

/// A network together with the scaler that maps raw features to its inputs.
struct Model {
  Network network;
  ScalerStats scaler;

  /// Raw (unscaled) features in, degrees Celsius out.
  double predict(std::span<const double> raw_features) const;
};

inline constexpr int kModelFormatVersion = 1;

void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(std::istream& in);
Model load_model(const std::filesystem::path& path);

}  // namespace frost
