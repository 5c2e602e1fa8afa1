// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "ldlpose/checkpoint.hpp"
#include "ldlpose/dataset.hpp"
#include "ldlpose/error.hpp"
#include "ldlpose/losses.hpp"
#include "ldlpose/network.hpp"
#include "ldlpose/rng.hpp"
#include "ldlpose/trainer.hpp"
#include "oracles.hpp"

using namespace ldlpose;

namespace {

NetworkConfig tiny_net() {
  NetworkConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_dims = {2};
  cfg.num_bins = 2;
  return cfg;
}

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

Dataset small_synth(std::size_t n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_samples = n;
  cfg.sample_seed = seed;
  return synth_generate(cfg, BinningConfig{});
}

TrainResult run_train(const Dataset& ds, const LossConfig& loss,
                      const TrainHyper& hyper) {
  NetworkConfig net;
  const EncodingConfig enc{4.0, BinningConfig{}};
  return train(ds, nullptr, net, loss, enc, enc, enc, hyper);
}

} // namespace

TEST_SUITE("network") {

TEST_CASE("parameter count follows (in+1)*out per layer") {
  NetworkConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden_dims = {7};
  cfg.num_bins = 11;
  CHECK(parameter_count(cfg) == (5 + 1) * 7 + 3 * (7 + 1) * 11);
  CHECK(init_parameters(cfg).size() == parameter_count(cfg));

  NetworkConfig deep;
  deep.input_dim = 4;
  deep.hidden_dims = {8, 6};
  deep.num_bins = 10;
  CHECK(parameter_count(deep) ==
        (4 + 1) * 8 + (8 + 1) * 6 + 3 * (6 + 1) * 10);
}

TEST_CASE("initialization is deterministic and fan-bounded") {
  NetworkConfig cfg;
  const auto a = init_parameters(cfg);
  const auto b = init_parameters(cfg);
  CHECK(a == b);

  NetworkConfig other = cfg;
  other.init_seed = 2;
  CHECK(init_parameters(other) != a);

  // First hidden layer weights are bounded by sqrt(6/(in+out)).
  const double lim = std::sqrt(6.0 / (cfg.input_dim + cfg.hidden_dims[0]));
  for (std::size_t i = 0; i < cfg.input_dim * cfg.hidden_dims[0]; ++i) {
    CHECK(std::abs(a[i]) <= lim);
  }
}

TEST_CASE("zero parameters give zero logits and uniform softmax") {
  NetworkConfig cfg;
  const std::vector<double> params(parameter_count(cfg), 0.0);
  const std::vector<double> x(cfg.input_dim, 0.7);
  const auto heads = forward(cfg, params, x);
  for (const auto& logits : heads) {
    for (double z : logits) CHECK(z == 0.0);
    const auto f = softmax(logits);
    for (double p : f.probs) CHECK(p == doctest::Approx(1.0 / 66.0));
  }
}

TEST_CASE("forward matches a pencil-and-paper pass") {
  const NetworkConfig cfg = tiny_net();
  // Layout: hidden W row-major then bias, then yaw/pitch/roll heads.
  const std::vector<double> params{
      1.0,  2.0,  -1.0, 0.5,  0.5, -1.0, // hidden: W=[[1,2],[-1,.5]], b=[.5,-1]
      1.0,  0.0,  0.0,  1.0,  0.1, 0.2,  // yaw head
      -1.0, 1.0,  2.0,  -2.0, 0.0, 0.0,  // pitch head
      0.5,  0.5,  0.25, -0.25, 1.0, 1.0, // roll head
  };
  REQUIRE(params.size() == parameter_count(cfg));
  const std::vector<double> x{1.0, 1.0};
  // pre = [3.5, -1.5] -> relu [3.5, 0]
  const auto heads = forward(cfg, params, x);
  CHECK(heads[0][0] == doctest::Approx(3.6));
  CHECK(heads[0][1] == doctest::Approx(0.2));
  CHECK(heads[1][0] == doctest::Approx(-3.5));
  CHECK(heads[1][1] == doctest::Approx(7.0));
  CHECK(heads[2][0] == doctest::Approx(2.75));
  CHECK(heads[2][1] == doctest::Approx(1.875));

  const std::vector<double> short_x{1.0};
  CHECK_THROWS_AS(forward(cfg, params, short_x), ShapeError);
}

TEST_CASE("forward is bit-identical across repeated runs") {
  NetworkConfig cfg;
  const auto params = init_parameters(cfg);
  std::vector<double> x(cfg.input_dim);
  std::mt19937_64 g(41);
  for (double& v : x) v = rng::normal(g);
  const auto a = forward(cfg, params, x);
  const auto b = forward(cfg, params, x);
  for (std::size_t h = 0; h < 3; ++h) CHECK(a[h] == b[h]);
}

TEST_CASE("backward: zero upstream gives zero gradient, duplication doubles") {
  NetworkConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden_dims = {7};
  cfg.num_bins = 11;
  const auto params = init_parameters(cfg);
  std::vector<double> x(cfg.input_dim);
  std::mt19937_64 g(42);
  for (double& v : x) v = rng::normal(g);

  ForwardCache cache;
  forward(cfg, params, x, &cache);

  std::array<std::vector<double>, 3> zeros;
  for (auto& z : zeros) z.assign(cfg.num_bins, 0.0);
  std::vector<double> grad(parameter_count(cfg), 0.0);
  backward(cfg, params, cache, zeros, grad);
  for (double v : grad) CHECK(v == 0.0);

  std::array<std::vector<double>, 3> up;
  for (auto& z : up) {
    z.resize(cfg.num_bins);
    for (double& v : z) v = rng::normal(g);
  }
  std::vector<double> once(parameter_count(cfg), 0.0);
  backward(cfg, params, cache, up, once);
  std::vector<double> twice(parameter_count(cfg), 0.0);
  backward(cfg, params, cache, up, twice);
  backward(cfg, params, cache, up, twice);
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[i] == 2.0 * once[i]); // x + x == 2x exactly
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  NetworkConfig cfg = tiny_net();
  TrainState s = init_train_state(cfg, AdamHyper{});
  const auto before = s.parameters;
  const std::vector<double> zeros(before.size(), 0.0);
  adam_step(s, zeros);
  CHECK(s.parameters == before);
  CHECK(s.step == 1);
}

TEST_CASE("adam: first step matches the hand recursion") {
  NetworkConfig cfg = tiny_net();
  TrainState s = init_train_state(cfg, AdamHyper{1e-6, 0.9, 0.999, 1e-8});
  std::fill(s.parameters.begin(), s.parameters.end(), 0.0);
  std::vector<double> grad(s.parameters.size(), 1.0);
  adam_step(s, grad);
  // mhat = vhat = 1 after bias correction, so theta = -lr / (1 + eps).
  const double expected = -1e-6 / (1.0 + 1e-8);
  for (double p : s.parameters) {
    CHECK(p == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("adam: non-finite gradient rejected with state untouched") {
  NetworkConfig cfg = tiny_net();
  TrainState s = init_train_state(cfg, AdamHyper{});
  const auto before = s.parameters;
  std::vector<double> grad(before.size(), 0.0);
  grad[3] = std::nan("");
  CHECK_THROWS_AS(adam_step(s, grad), NumericError);
  CHECK(s.parameters == before);
  CHECK(s.step == 0);

  std::vector<double> wrong(before.size() + 1, 0.0);
  CHECK_THROWS_AS(adam_step(s, wrong), ShapeError);
}

TEST_CASE("adam tracks the reference recursion on a quadratic") {
  // f(theta) = theta^2, gradient 2 theta, from theta = 1 at lr = 0.1.
  NetworkConfig cfg = tiny_net();
  TrainState s = init_train_state(cfg, AdamHyper{0.1, 0.9, 0.999, 1e-8});
  s.parameters.assign(1, 1.0);
  s.adam_m.assign(1, 0.0);
  s.adam_v.assign(1, 0.0);

  oracles::ReferenceAdam ref(std::vector<double>{1.0});
  ref.lr = 0.1;

  double max_late = 0.0;
  for (int t = 1; t <= 100; ++t) {
    const std::vector<double> grad{2.0 * s.parameters[0]};
    adam_step(s, grad);
    ref.step(std::vector<double>{2.0 * ref.theta[0]});
    CHECK(std::abs(s.parameters[0] - ref.theta[0]) <= 1e-12);
    if (t >= 50) max_late = std::max(max_late, std::abs(s.parameters[0]));
  }
  CHECK(std::abs(s.parameters[0]) < 0.1);
  CHECK(max_late < 0.1); // oscillation envelope has decayed after warm-up
}

TEST_CASE("train: zero epochs returns the initialized state") {
  const Dataset ds = small_synth(16, 101);
  TrainHyper hyper;
  hyper.epochs = 0;
  const TrainResult r = run_train(ds, LossConfig{}, hyper);
  CHECK(r.state.parameters == init_parameters(NetworkConfig{}));
  CHECK(r.state.step == 0);
  CHECK(r.log.size() == 1);
  CHECK(r.log.front().epoch == 0);
}

TEST_CASE("train: identical seeds give bit-identical results") {
  const Dataset ds = small_synth(48, 102);
  TrainHyper hyper;
  hyper.epochs = 3;
  const TrainResult a = run_train(ds, LossConfig{}, hyper);
  const TrainResult b = run_train(ds, LossConfig{}, hyper);
  CHECK(a.state.parameters == b.state.parameters);
  CHECK(a.state.adam_m == b.state.adam_m);
  CHECK(a.init_param_hash == b.init_param_hash);
  CHECK(a.first_epoch_order_hash == b.first_epoch_order_hash);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].total_loss == b.log[i].total_loss);
    CHECK(a.log[i].distribution_loss == b.log[i].distribution_loss);
    CHECK(a.log[i].mse_loss == b.log[i].mse_loss);
  }
}

TEST_CASE("train: loss drops sharply on a short single-batch overfit") {
  const Dataset ds = small_synth(32, 103);
  TrainHyper hyper;
  hyper.epochs = 300;
  LossConfig loss;
  loss.alpha = 0.01;
  const TrainResult r = run_train(ds, loss, hyper);
  CHECK(r.log.back().total_loss < 0.5 * r.log.front().total_loss);
}

TEST_CASE("train: rejects an empty dataset and names NaN location") {
  Dataset empty;
  CHECK_THROWS_AS(run_train(empty, LossConfig{}, TrainHyper{}), ConfigError);

  const Dataset ds = small_synth(8, 104);
  TrainHyper hyper;
  hyper.epochs = 3;
  hyper.adam.learning_rate = 1e155; // blows the parameters up immediately
  try {
    run_train(ds, LossConfig{}, hyper);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("train: alpha zero metrics equal the distribution loss bitwise") {
  const Dataset ds = small_synth(24, 105);
  TrainHyper hyper;
  hyper.epochs = 2;
  LossConfig loss;
  loss.alpha = 0.0;
  const TrainResult r = run_train(ds, loss, hyper);
  for (const EpochMetrics& m : r.log) {
    CHECK(m.total_loss == m.distribution_loss);
  }
}

TEST_CASE("checkpoint round-trips byte-exactly") {
  const Dataset ds = small_synth(16, 106);
  TrainHyper hyper;
  hyper.epochs = 2;
  const TrainResult r = run_train(ds, LossConfig{}, hyper);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ldlpose_ckpt_test";
  fs::create_directories(dir);
  const std::string p1 = (dir / "a.ldlp").string();
  const std::string p2 = (dir / "b.ldlp").string();

  NetworkConfig net;
  save_checkpoint(p1, net, r.state);
  const Checkpoint loaded = load_checkpoint(p1);
  CHECK(loaded.network.input_dim == net.input_dim);
  CHECK(loaded.network.hidden_dims == net.hidden_dims);
  CHECK(loaded.network.num_bins == net.num_bins);
  CHECK(loaded.network.init_seed == net.init_seed);
  CHECK(loaded.state.parameters == r.state.parameters);
  CHECK(loaded.state.adam_m == r.state.adam_m);
  CHECK(loaded.state.adam_v == r.state.adam_v);
  CHECK(loaded.state.step == r.state.step);
  CHECK(loaded.state.hyper.learning_rate == r.state.hyper.learning_rate);

  save_checkpoint(p2, loaded.network, loaded.state);
  CHECK(read_bytes(p1) == read_bytes(p2));

  std::ofstream bad((dir / "bad.ldlp").string(), std::ios::binary);
  bad << "NOTP";
  bad.close();
  CHECK_THROWS_AS(load_checkpoint((dir / "bad.ldlp").string()), IoError);
}

} // TEST_SUITE
