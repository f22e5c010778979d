#include <doctest.h>

#include <cmath>
#include <sstream>

#include "frost/error.hpp"
#include "frost/neuralnet.hpp"
#include "frost/random.hpp"

using namespace frost;

namespace {

FeatureMatrix random_batch(std::size_t dims, std::size_t rows, Rng& rng) {
  FeatureMatrix m(dims);
  std::vector<double> x(dims);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& v : x) v = rng.normal();
    m.push_back(x, rng.normal());
  }
  return m;
}

double max_relative_fd_error(const Network& net, const FeatureMatrix& batch) {
  const auto g = gradients(net, batch);
  Network probe = net;
  double worst = 0.0;
  const double eps = 1e-5;
  for (std::size_t i = 0; i < probe.parameters().size(); ++i) {
    const double saved = probe.parameters()[i];
    probe.parameters()[i] = saved + eps;
    const double up = mean_squared_error(probe, batch);
    probe.parameters()[i] = saved - eps;
    const double down = mean_squared_error(probe, batch);
    probe.parameters()[i] = saved;
    const double fd = (up - down) / (2 * eps);
    const double scale = std::max({std::abs(fd), std::abs(g.values[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - g.values[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("network shapes and parameter counts") {
  const Network base(NetworkSpec::baseline());
  CHECK(base.layer_count() == 3);
  CHECK(base.parameters().size() == (5 * 5 + 5) + (5 * 7 + 7) + (7 + 1));
  const Network sub(NetworkSpec::submodel());
  CHECK(sub.layer_count() == 5);
  CHECK(sub.shapes()[0].inputs == 13);
  CHECK(sub.parameters().size() == (13 * 10 + 10) + (10 * 14 + 14) + (14 * 9 + 9) + (9 * 8 + 8) + (8 + 1));
  CHECK_THROWS_AS(Network(NetworkSpec{3, {4, 2}}), DomainError);
  CHECK_THROWS_AS(Network(NetworkSpec{0, {1}}), DomainError);
}

TEST_CASE("initialization is seeded, bounded and has zero biases") {
  const auto a = init_network(NetworkSpec::submodel(), 5);
  CHECK(a == init_network(NetworkSpec::submodel(), 5));
  CHECK_FALSE(a == init_network(NetworkSpec::submodel(), 6));
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    const auto& s = a.shapes()[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(s.inputs + s.outputs));
    for (double w : a.weights(l)) CHECK(std::abs(w) <= limit);
    for (double b : a.biases(l)) CHECK(b == 0.0);
  }
}

TEST_CASE("forward pass on hand-set weights") {
  Network net(NetworkSpec{2, {2, 1}});
  auto w0 = net.weights(0);
  // row-major (in x out)
  w0[0] = 1.0;
  w0[1] = -1.0;
  w0[2] = 2.0;
  w0[3] = 1.0;
  net.biases(0)[0] = 0.5;
  net.biases(0)[1] = 0.0;
  net.weights(1)[0] = 3.0;
  net.weights(1)[1] = 2.0;
  net.biases(1)[0] = -1.0;
  // hidden = relu([1 + 2*2 + 0.5, -1 + 2]) = [5.5, 1]
  CHECK(net.forward(std::vector<double>{1.0, 2.0}) == doctest::Approx(3 * 5.5 + 2 * 1 - 1));
  // hidden = relu([-1 - 2 + 0.5, 1 - 1]) = [0, 0]
  CHECK(net.forward(std::vector<double>{-1.0, -1.0}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("gradient of a single linear unit") {
  Network net(NetworkSpec{1, {1}});
  net.weights(0)[0] = 1.0;
  FeatureMatrix batch(1);
  batch.push_back(std::vector<double>{1.0}, 0.0);
  const auto g = gradients(net, batch);
  CHECK(g.loss == doctest::Approx(1.0));
  CHECK(g.values[0] == doctest::Approx(2.0));
  CHECK(g.values[1] == doctest::Approx(2.0));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    const auto spec = trial % 2 == 0 ? NetworkSpec::baseline() : NetworkSpec::submodel();
    auto net = init_network(spec, 100 + static_cast<std::uint64_t>(trial));
    for (auto& p : net.parameters()) p += rng.normal(0.0, 0.05);  // nonzero biases
    const auto batch = random_batch(spec.input_dim, 16, rng);
    CHECK(max_relative_fd_error(net, batch) < 1e-4);
  }
}

TEST_CASE("output is piecewise linear along a line") {
  const auto net = init_network(NetworkSpec::submodel(), 3);
  Rng rng(8);
  std::vector<double> x0(13), dir(13), x(13);
  for (auto& v : x0) v = rng.normal();
  for (auto& v : dir) v = rng.normal();
  const double h = 1e-3;
  std::size_t linear = 0;
  for (int i = 0; i < 200; ++i) {
    const double s = -2.0 + 0.02 * i;
    auto at = [&](double a) {
      for (std::size_t j = 0; j < 13; ++j) x[j] = x0[j] + a * dir[j];
      return net.forward(x);
    };
    const double second = at(s + h) - 2 * at(s) + at(s - h);
    if (std::abs(second) < 1e-9) ++linear;
  }
  CHECK(linear > 150);
}

TEST_CASE("training fits a linear map") {
  Rng rng(12);
  FeatureMatrix data(1);
  for (int i = 0; i < 512; ++i) {
    const double x = rng.uniform(-1, 1);
    data.push_back(std::vector<double>{x}, 2 * x);
  }
  TrainConfig cfg;
  cfg.seed = 1;
  cfg.epochs = 300;
  cfg.batch_size = 32;
  cfg.learning_rate = 1e-2;
  cfg.patience = 0;
  const auto r = train(init_network(NetworkSpec{1, {8, 1}}, 2), data, cfg);
  CHECK(mean_squared_error(r.network, data) < 1e-3);
  CHECK(r.history.size() == 300);
  CHECK(r.best_epoch >= 1);
}

TEST_CASE("training edge cases") {
  FeatureMatrix data(1);
  for (int i = 0; i < 20; ++i) data.push_back(std::vector<double>{0.0}, 0.0);
  const auto net = init_network(NetworkSpec{1, {1}}, 1);

  TrainConfig cfg;
  cfg.epochs = 0;
  auto r = train(net, data, cfg);
  CHECK(r.network == net);
  CHECK(r.history.empty());
  CHECK(r.best_epoch == 0);

  // all inputs and labels are zero and biases start at zero: the loss never moves
  cfg.epochs = 50;
  cfg.patience = 1;
  r = train(net, data, cfg);
  CHECK(r.early_stopped);
  CHECK(r.history.size() == 2);

  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(net, data, cfg), DomainError);
}

TEST_CASE("training is deterministic in the seed") {
  Rng rng(31);
  const auto data = random_batch(5, 200, rng);
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  const auto net = init_network(NetworkSpec::baseline(), 9);
  CHECK(train(net, data, cfg).network == train(net, data, cfg).network);
  cfg.optimizer = Optimizer::plain_sgd;
  CHECK(train(net, data, cfg).network == train(net, data, cfg).network);
}

TEST_CASE("model save and load") {
  Model m{init_network(NetworkSpec::baseline(), 3), {}};
  m.scaler.mean = {1, 2, 3, 4, 5};
  m.scaler.sd = {1, 1, 2, 2, 0.1};
  m.scaler.label_mean = 3.3;
  m.scaler.label_sd = 1.7;
  std::stringstream io;
  save_model(m, io);
  const auto text = io.str();
  const auto back = load_model(io);
  CHECK(back.network == m.network);
  CHECK(back.scaler.sd == m.scaler.sd);
  const std::vector<double> x{1, 0, 2, 0.5, 3};
  CHECK(back.predict(x) == m.predict(x));

  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(truncated), FormatError);

  auto future = text;
  const auto pos = future.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  future.replace(pos, 11, "\"version\":99");
  std::istringstream bad(future);
  CHECK_THROWS_AS(load_model(bad), UnsupportedVersionError);
}
