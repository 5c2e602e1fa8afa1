// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ldlpose/dataset.hpp"
#include "ldlpose/error.hpp"
#include "ldlpose/evaluation.hpp"
#include "ldlpose/label_distribution.hpp"
#include "ldlpose/losses.hpp"
#include "ldlpose/rng.hpp"

using namespace ldlpose;

namespace {

Dataset small_synth(std::size_t n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_samples = n;
  cfg.sample_seed = seed;
  return synth_generate(cfg, BinningConfig{});
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("constant-zero predictor MAE equals mean absolute angle") {
  // Zero parameters give uniform softmax, and the uniform distribution
  // decodes to exactly 0 under symmetric midpoints.
  const BinningConfig binning;
  NetworkConfig net;
  const std::vector<double> params(parameter_count(net), 0.0);
  const Dataset ds = small_synth(500, 301);

  const EvalReport report =
      evaluate(net, params, ds, binning, DecodeMode::expectation);

  std::array<double, 3> oracle{};
  for (const Sample& s : ds.samples) {
    for (std::size_t a = 0; a < 3; ++a) {
      oracle[a] += std::abs(s.pose.component(a));
    }
  }
  for (double& v : oracle) v /= static_cast<double>(ds.size());

  CHECK(report.mae_yaw == doctest::Approx(oracle[0]).epsilon(1e-12));
  CHECK(report.mae_pitch == doctest::Approx(oracle[1]).epsilon(1e-12));
  CHECK(report.mae_roll == doctest::Approx(oracle[2]).epsilon(1e-12));
  CHECK(report.mae_mean ==
        doctest::Approx((report.mae_yaw + report.mae_pitch + report.mae_roll) /
                        3.0)
            .epsilon(1e-15));
}

TEST_CASE("a network built to output the targets reaches near-zero MAE") {
  // All samples share one pose whose target distribution decodes exactly to
  // the continuous ground truth; zero weights + log-target head biases make
  // the network emit that distribution for every input.
  const BinningConfig binning;
  const EncodingConfig enc{4.0, binning};
  const double gt = bin_center(33, binning); // 1.5 deg, symmetric about bin 33
  const LabelDistribution target = encode_gaussian(33, enc);

  NetworkConfig net;
  std::vector<double> params(parameter_count(net), 0.0);
  // Head biases sit after each head's weight block.
  std::size_t off = (net.input_dim + 1) * net.hidden_dims[0];
  const std::size_t last = net.hidden_dims.back();
  for (std::size_t head = 0; head < 3; ++head) {
    for (std::size_t o = 0; o < net.num_bins; ++o) {
      params[off + last * net.num_bins + o] = std::log(target.probs[o]);
    }
    off += (last + 1) * net.num_bins;
  }

  Dataset ds;
  std::mt19937_64 g(302);
  for (int i = 0; i < 20; ++i) {
    Sample s;
    s.pose = PoseTriple{gt, gt, gt};
    s.features.resize(net.input_dim);
    for (double& f : s.features) f = rng::normal(g);
    ds.samples.push_back(std::move(s));
  }

  const EvalReport report =
      evaluate(net, params, ds, binning, DecodeMode::expectation);
  CHECK(report.mae_yaw <= 1e-9);
  CHECK(report.mae_pitch <= 1e-9);
  CHECK(report.mae_roll <= 1e-9);
}

TEST_CASE("evaluation is permutation invariant") {
  const BinningConfig binning;
  NetworkConfig net;
  const std::vector<double> params = init_parameters(net);
  Dataset ds = small_synth(300, 303);

  const EvalReport a = evaluate(net, params, ds, binning, DecodeMode::expectation);
  std::mt19937_64 g(304);
  rng::shuffle(ds.samples, g);
  const EvalReport b = evaluate(net, params, ds, binning, DecodeMode::expectation);

  CHECK(a.mae_yaw == doctest::Approx(b.mae_yaw).epsilon(1e-10));
  CHECK(a.mae_pitch == doctest::Approx(b.mae_pitch).epsilon(1e-10));
  CHECK(a.mae_roll == doctest::Approx(b.mae_roll).epsilon(1e-10));
  CHECK(a.n_eval == b.n_eval);
}

TEST_CASE("strata aggregate to the overall MAE and counts to n_eval") {
  const BinningConfig binning;
  NetworkConfig net;
  const std::vector<double> params = init_parameters(net);
  const Dataset ds = small_synth(1000, 305);
  const EvalReport r = evaluate(net, params, ds, binning, DecodeMode::expectation);

  const std::array<double, 3> overall{r.mae_yaw, r.mae_pitch, r.mae_roll};
  for (std::size_t a = 0; a < 3; ++a) {
    std::size_t total = 0;
    double weighted = 0.0;
    for (const StratumMae& s : r.strata[a]) {
      total += s.count;
      weighted += s.mae_deg * static_cast<double>(s.count);
    }
    CHECK(total == r.n_eval);
    CHECK(weighted / static_cast<double>(r.n_eval) ==
          doctest::Approx(overall[a]).epsilon(1e-10));
  }
}

TEST_CASE("argmax decoding is available at evaluation time") {
  const BinningConfig binning;
  NetworkConfig net;
  const std::vector<double> params = init_parameters(net);
  const Dataset ds = small_synth(50, 306);
  const EvalReport e = evaluate(net, params, ds, binning, DecodeMode::expectation);
  const EvalReport m = evaluate(net, params, ds, binning, DecodeMode::argmax);
  CHECK(e.n_eval == m.n_eval);
  // Untrained outputs are near-uniform, so the two decoders disagree.
  CHECK(e.mae_yaw != doctest::Approx(m.mae_yaw).epsilon(1e-12));
}

TEST_CASE("zero-budget compare yields identical paired arms") {
  CompareConfig cc;
  cc.n_train = 64;
  cc.n_test = 32;
  cc.seeds = {9};
  cc.hyper.epochs = 0;
  const CompareReport r = compare_losses(cc);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].overall_mae == r.rows[1].overall_mae);
  CHECK(r.rows[0].rare_yaw_mae == r.rows[1].rare_yaw_mae);
  CHECK(r.rows[0].rare_yaw_count == r.rows[1].rare_yaw_count);
  CHECK(r.median_overall_gld == r.median_overall_ce);
}

TEST_CASE("sigma to zero: gld branch approaches one-hot CE plus euclidean") {
  const BinningConfig binning;
  const EncodingConfig tight{1e-3, binning};
  const PoseTriple pose{-42.0, 17.0, 3.0};
  const SampleTargets targets =
      make_targets(pose, tight, tight, tight, LabelLossKind::gld);

  std::mt19937_64 g(307);
  std::array<std::vector<double>, 3> logits;
  for (auto& z : logits) {
    z.resize(66);
    for (double& v : z) v = rng::normal(g);
  }

  LossConfig gld_cfg;
  gld_cfg.alpha = 0.0;
  const double gld_value =
      total_loss(logits, targets, pose, gld_cfg, binning).value;

  double expected = 0.0;
  for (std::size_t b = 0; b < 3; ++b) {
    const PredictedDistribution f = softmax(logits[b]);
    expected += one_hot_ce_loss(targets.bins[b], f) +
                euclidean_loss(targets.distributions[b], f);
  }
  CHECK(gld_value == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("compare rejects an empty seed list") {
  CompareConfig cc;
  cc.seeds = {};
  CHECK_THROWS_AS(compare_losses(cc), ConfigError);
}

TEST_CASE("a training abort inside compare names the arm and seed") {
  CompareConfig cc;
  cc.n_train = 16;
  cc.n_test = 8;
  cc.seeds = {5};
  cc.hyper.epochs = 3;
  cc.hyper.adam.learning_rate = 1e155;
  try {
    compare_losses(cc);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gld") != std::string::npos);
    CHECK(msg.find("seed 5") != std::string::npos);
  }
}

} // TEST_SUITE
