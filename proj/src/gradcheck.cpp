// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/gradcheck.hpp"

#include <array>
#include <cmath>
#include <random>

#include "ldlpose/binning.hpp"
#include "ldlpose/error.hpp"
#include "ldlpose/label_distribution.hpp"
#include "ldlpose/losses.hpp"
#include "ldlpose/network.hpp"
#include "ldlpose/rng.hpp"

namespace ldlpose {

std::vector<double> finite_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step) {
  std::vector<double> grad(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + step;
    const double hi = f(probe);
    probe[i] = original - step;
    const double lo = f(probe);
    probe[i] = original;
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(std::span<const double> analytic,
                          std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw ShapeError("max_relative_error: length mismatch");
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]));
  }
  return scale > 0.0 ? worst / scale : worst;
}

namespace {

constexpr std::array<double, 5> kSigmaGrid{0.5, 1.0, 2.0, 4.0, 8.0};
constexpr std::array<double, 5> kAlphaGrid{0.0, 0.01, 0.1, 1.0, 2.0};

std::vector<double> random_logits(std::mt19937_64& g, std::size_t n) {
  std::vector<double> z(n);
  for (double& v : z) v = rng::normal(g);
  return z;
}

LabelDistribution random_gaussian_target(std::mt19937_64& g,
                                         const BinningConfig& binning) {
  const std::size_t gt_bin = rng::below(g, binning.num_bins);
  const double sigma = kSigmaGrid[rng::below(g, kSigmaGrid.size())];
  return encode_gaussian(gt_bin, EncodingConfig{sigma, binning});
}

PoseTriple random_pose(std::mt19937_64& g, const BinningConfig& binning) {
  PoseTriple p;
  p.yaw_deg = rng::uniform(g, binning.range_min_deg, binning.range_max_deg);
  p.pitch_deg = rng::uniform(g, binning.range_min_deg, binning.range_max_deg);
  p.roll_deg = rng::uniform(g, binning.range_min_deg, binning.range_max_deg);
  return p;
}

GradCheckResult run_check(
    const std::string& name, const GradCheckOptions& opts,
    const std::function<double(std::mt19937_64&)>& one_trial) {
  GradCheckResult r;
  r.name = name;
  r.trials = opts.trials;
  std::mt19937_64 g(opts.seed);
  for (std::size_t t = 0; t < opts.trials; ++t) {
    r.max_rel_err = std::max(r.max_rel_err, one_trial(g));
  }
  r.passed = r.max_rel_err < opts.tolerance;
  return r;
}

} // namespace

std::vector<GradCheckResult> run_gradcheck(const GradCheckOptions& opts) {
  if (opts.trials == 0) {
    throw ConfigError("gradcheck: trials must be at least 1");
  }
  BinningConfig binning;
  binning.num_bins = opts.num_bins;
  binning.validate();

  std::vector<GradCheckResult> results;

  // Euclidean distance through softmax.
  results.push_back(run_check("euclidean_loss", opts, [&](std::mt19937_64& g) {
    const LabelDistribution target = random_gaussian_target(g, binning);
    const std::vector<double> z = random_logits(g, binning.num_bins);
    const PredictedDistribution f = softmax(z);
    std::vector<double> analytic =
        softmax_backward(f, euclidean_grad_probs(target, f));
    analytic[0] += opts.inject_error;
    const auto numeric = finite_difference(
        [&](std::span<const double> zz) {
          return euclidean_loss(target, softmax(zz));
        },
        z, opts.step);
    return max_relative_error(analytic, numeric);
  }));

  // KL divergence through softmax.
  results.push_back(run_check("kl_loss", opts, [&](std::mt19937_64& g) {
    const LabelDistribution target = random_gaussian_target(g, binning);
    const std::vector<double> z = random_logits(g, binning.num_bins);
    const PredictedDistribution f = softmax(z);
    std::vector<double> analytic = softmax_backward(f, kl_grad_probs(target, f));
    analytic[0] += opts.inject_error;
    const auto numeric = finite_difference(
        [&](std::span<const double> zz) { return kl_loss(target, softmax(zz)); },
        z, opts.step);
    return max_relative_error(analytic, numeric);
  }));

  // Squared decode error through the expectation decoder and softmax.
  results.push_back(run_check("mse_decode", opts, [&](std::mt19937_64& g) {
    const double gt =
        rng::uniform(g, binning.range_min_deg, binning.range_max_deg);
    const std::vector<double> z = random_logits(g, binning.num_bins);
    const PredictedDistribution f = softmax(z);
    const double pred = expectation_decode(f.probs, binning);
    std::vector<double> dprobs(binning.num_bins);
    for (std::size_t i = 0; i < dprobs.size(); ++i) {
      dprobs[i] = 2.0 * (pred - gt) * bin_center(i, binning);
    }
    std::vector<double> analytic = softmax_backward(f, dprobs);
    analytic[0] += opts.inject_error;
    const auto numeric = finite_difference(
        [&](std::span<const double> zz) {
          return mse_loss(expectation_decode(softmax(zz).probs, binning), gt);
        },
        z, opts.step);
    return max_relative_error(analytic, numeric);
  }));

  // One-hot cross-entropy through softmax.
  results.push_back(run_check("one_hot_ce_loss", opts, [&](std::mt19937_64& g) {
    const std::size_t bin = rng::below(g, binning.num_bins);
    const std::vector<double> z = random_logits(g, binning.num_bins);
    const PredictedDistribution f = softmax(z);
    std::vector<double> analytic = one_hot_ce_grad_logits(bin, f);
    analytic[0] += opts.inject_error;
    const auto numeric = finite_difference(
        [&](std::span<const double> zz) {
          return one_hot_ce_loss(bin, softmax(zz));
        },
        z, opts.step);
    return max_relative_error(analytic, numeric);
  }));

  // Full per-sample loss, all three branches jointly.
  results.push_back(run_check("total_loss", opts, [&](std::mt19937_64& g) {
    LossConfig loss;
    loss.alpha = kAlphaGrid[rng::below(g, kAlphaGrid.size())];
    const PoseTriple pose = random_pose(g, binning);
    EncodingConfig enc{kSigmaGrid[rng::below(g, kSigmaGrid.size())], binning};
    const SampleTargets targets =
        make_targets(pose, enc, enc, enc, LabelLossKind::gld);

    std::array<std::vector<double>, 3> logits;
    for (auto& z : logits) z = random_logits(g, binning.num_bins);
    const TotalLoss tl = total_loss(logits, targets, pose, loss, binning);

    // Flatten the three branches into one variable vector.
    std::vector<double> flat;
    std::vector<double> analytic;
    for (std::size_t b = 0; b < 3; ++b) {
      flat.insert(flat.end(), logits[b].begin(), logits[b].end());
      analytic.insert(analytic.end(), tl.dlogits[b].begin(),
                      tl.dlogits[b].end());
    }
    analytic[0] += opts.inject_error;
    const std::size_t nb = binning.num_bins;
    const auto numeric = finite_difference(
        [&](std::span<const double> x) {
          std::array<std::vector<double>, 3> zz;
          for (std::size_t b = 0; b < 3; ++b) {
            zz[b].assign(x.begin() + static_cast<std::ptrdiff_t>(b * nb),
                         x.begin() + static_cast<std::ptrdiff_t>((b + 1) * nb));
          }
          return total_loss_value(zz, targets, pose, loss, binning).value;
        },
        flat, opts.step);
    return max_relative_error(analytic, numeric);
  }));

  // End-to-end: d(total_loss)/d(network parameters) on a small instance.
  results.push_back(run_check("network", opts, [&](std::mt19937_64& g) {
    BinningConfig small_binning;
    small_binning.num_bins = 11;
    NetworkConfig net;
    net.input_dim = 5;
    net.hidden_dims = {7};
    net.num_bins = small_binning.num_bins;

    LossConfig loss;
    loss.alpha = 0.01;
    EncodingConfig enc{2.0, small_binning};

    const std::size_t n_params = parameter_count(net);
    std::vector<double> params(n_params);
    std::vector<double> features(net.input_dim);
    PoseTriple pose;
    SampleTargets targets;

    // Resample until no hidden pre-activation sits within 1e-4 of the ReLU
    // kink; central differences at step 1e-5 are invalid across it.
    for (;;) {
      for (double& p : params) p = rng::uniform(g, -0.5, 0.5);
      for (double& f : features) f = rng::normal(g);
      pose = random_pose(g, small_binning);
      targets = make_targets(pose, enc, enc, enc, LabelLossKind::gld);
      ForwardCache cache;
      forward(net, params, features, &cache);
      bool near_kink = false;
      for (const auto& layer : cache.pre) {
        for (double a : layer) {
          if (std::abs(a) < 1e-4) near_kink = true;
        }
      }
      if (!near_kink) break;
    }

    ForwardCache cache;
    const auto logits = forward(net, params, features, &cache);
    const TotalLoss tl = total_loss(logits, targets, pose, loss, small_binning);
    std::vector<double> analytic(n_params, 0.0);
    backward(net, params, cache, tl.dlogits, analytic);
    analytic[0] += opts.inject_error;

    const auto numeric = finite_difference(
        [&](std::span<const double> p) {
          const auto zz = forward(net, p, features);
          return total_loss_value(zz, targets, pose, loss, small_binning).value;
        },
        params, opts.step);
    return max_relative_error(analytic, numeric);
  }));

  return results;
}

} // namespace ldlpose
