// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/losses.hpp"

#include <cmath>
#include <string>

#include "ldlpose/error.hpp"

namespace ldlpose {

namespace {

void check_same_length(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw ShapeError(std::string(where) + ": lengths differ (" +
                     std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

} // namespace

void LossConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ConfigError("loss: alpha must be non-negative");
  }
}

PredictedDistribution softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw ShapeError("softmax: empty logits");
  }
  double mx = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) {
      throw NumericError("softmax: non-finite logit");
    }
    if (z > mx) mx = z;
  }
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return PredictedDistribution{std::move(probs)};
}

std::vector<double> softmax_backward(const PredictedDistribution& pred,
                                     std::span<const double> dprobs) {
  const auto& f = pred.probs;
  check_same_length(f.size(), dprobs.size(), "softmax_backward");
  double dot = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    dot += dprobs[i] * f[i];
  }
  std::vector<double> dz(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    dz[i] = f[i] * (dprobs[i] - dot);
  }
  return dz;
}

double euclidean_loss(const LabelDistribution& target,
                      const PredictedDistribution& pred, bool squared) {
  check_same_length(target.probs.size(), pred.probs.size(), "euclidean_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < target.probs.size(); ++i) {
    const double d = target.probs[i] - pred.probs[i];
    s += d * d;
  }
  return squared ? s : std::sqrt(s);
}

std::vector<double> euclidean_grad_probs(const LabelDistribution& target,
                                         const PredictedDistribution& pred,
                                         bool squared) {
  check_same_length(target.probs.size(), pred.probs.size(),
                    "euclidean_grad_probs");
  const std::size_t n = target.probs.size();
  std::vector<double> g(n, 0.0);
  if (squared) {
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = 2.0 * (pred.probs[i] - target.probs[i]);
    }
    return g;
  }
  const double norm = euclidean_loss(target, pred, false);
  if (norm == 0.0) return g; // subgradient 0 at the kink
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = (pred.probs[i] - target.probs[i]) / norm;
  }
  return g;
}

double kl_loss(const LabelDistribution& target,
               const PredictedDistribution& pred) {
  check_same_length(target.probs.size(), pred.probs.size(), "kl_loss");
  for (double f : pred.probs) {
    if (!(f > 0.0)) {
      throw NumericError("kl_loss: predicted probability is not positive");
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < target.probs.size(); ++i) {
    const double d = target.probs[i];
    if (d > 0.0) {
      acc += d * std::log(d / pred.probs[i]);
    }
  }
  return acc;
}

std::vector<double> kl_grad_probs(const LabelDistribution& target,
                                  const PredictedDistribution& pred) {
  check_same_length(target.probs.size(), pred.probs.size(), "kl_grad_probs");
  const std::size_t n = target.probs.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = pred.probs[i];
    if (!(f > 0.0)) {
      throw NumericError("kl_grad_probs: predicted probability is not positive");
    }
    g[i] = target.probs[i] > 0.0 ? -target.probs[i] / f : 0.0;
  }
  return g;
}

double gld_loss(const LabelDistribution& target,
                const PredictedDistribution& pred) {
  return euclidean_loss(target, pred) + kl_loss(target, pred);
}

double mse_loss(double pred_angle_deg, double gt_angle_deg) {
  if (!std::isfinite(pred_angle_deg) || !std::isfinite(gt_angle_deg)) {
    throw NumericError("mse_loss: non-finite angle");
  }
  const double d = pred_angle_deg - gt_angle_deg;
  return d * d;
}

double one_hot_ce_loss(std::size_t target_bin,
                       const PredictedDistribution& pred) {
  if (target_bin >= pred.probs.size()) {
    throw RangeError("one_hot_ce_loss: target_bin " +
                     std::to_string(target_bin) + " outside [0, " +
                     std::to_string(pred.probs.size()) + ")");
  }
  const double f = pred.probs[target_bin];
  if (!(f > 0.0)) {
    throw NumericError("one_hot_ce_loss: predicted probability is not positive");
  }
  return -std::log(f);
}

std::vector<double> one_hot_ce_grad_logits(std::size_t target_bin,
                                           const PredictedDistribution& pred) {
  if (target_bin >= pred.probs.size()) {
    throw RangeError("one_hot_ce_grad_logits: target_bin out of range");
  }
  std::vector<double> dz(pred.probs.begin(), pred.probs.end());
  dz[target_bin] -= 1.0;
  return dz;
}

SampleTargets make_targets(const PoseTriple& pose, const EncodingConfig& cfg_yaw,
                           const EncodingConfig& cfg_pitch,
                           const EncodingConfig& cfg_roll, LabelLossKind kind) {
  const std::array<const EncodingConfig*, 3> cfgs{&cfg_yaw, &cfg_pitch,
                                                  &cfg_roll};
  SampleTargets t;
  for (std::size_t i = 0; i < 3; ++i) {
    const double angle = pose.component(i);
    const BinningConfig& b = cfgs[i]->binning;
    if (!std::isfinite(angle) || angle < b.range_min_deg ||
        angle > b.range_max_deg) {
      throw RangeError(std::string(kAngleNames[i]) + " angle " +
                       std::to_string(angle) + " deg outside [" +
                       std::to_string(b.range_min_deg) + ", " +
                       std::to_string(b.range_max_deg) + "]");
    }
    t.bins[i] = angle_to_bin(angle, b);
  }
  if (kind == LabelLossKind::gld) {
    t.distributions = encode_pose(pose, cfg_yaw, cfg_pitch, cfg_roll);
  }
  return t;
}

namespace {

struct BranchResult {
  double dist = 0.0;
  double mse = 0.0;
  std::vector<double> dlogits; // empty when gradients were not requested
};

BranchResult branch_loss(std::span<const double> logits,
                         const SampleTargets& targets, std::size_t branch,
                         double gt_angle, const LossConfig& cfg,
                         const BinningConfig& binning, bool with_grad) {
  if (logits.size() != binning.num_bins) {
    throw ShapeError(std::string("total_loss: ") + kAngleNames[branch] +
                     " logits have " + std::to_string(logits.size()) +
                     " entries, expected " + std::to_string(binning.num_bins));
  }
  const PredictedDistribution f = softmax(logits);
  BranchResult r;

  if (cfg.label_loss == LabelLossKind::gld) {
    const LabelDistribution& t = targets.distributions[branch];
    if (t.probs.size() != binning.num_bins) {
      throw ShapeError(std::string("total_loss: ") + kAngleNames[branch] +
                       " target distribution missing or mismatched");
    }
    if (cfg.use_euclidean) r.dist += euclidean_loss(t, f, cfg.squared_euclidean);
    if (cfg.use_kl) r.dist += kl_loss(t, f);
    if (with_grad) {
      std::vector<double> dprobs(binning.num_bins, 0.0);
      if (cfg.use_euclidean) {
        const auto ge = euclidean_grad_probs(t, f, cfg.squared_euclidean);
        for (std::size_t i = 0; i < dprobs.size(); ++i) dprobs[i] += ge[i];
      }
      if (cfg.use_kl) {
        const auto gk = kl_grad_probs(t, f);
        for (std::size_t i = 0; i < dprobs.size(); ++i) dprobs[i] += gk[i];
      }
      r.dlogits = softmax_backward(f, dprobs);
    }
  } else {
    const std::size_t bin = targets.bins[branch];
    r.dist = one_hot_ce_loss(bin, f);
    if (with_grad) r.dlogits = one_hot_ce_grad_logits(bin, f);
  }

  const double pred_angle = expectation_decode(f.probs, binning);
  r.mse = mse_loss(pred_angle, gt_angle);
  if (cfg.alpha != 0.0 && with_grad) {
    const double scale = 2.0 * (pred_angle - gt_angle);
    std::vector<double> dprobs(binning.num_bins);
    for (std::size_t i = 0; i < dprobs.size(); ++i) {
      dprobs[i] = scale * bin_center(i, binning);
    }
    const auto dz = softmax_backward(f, dprobs);
    for (std::size_t i = 0; i < dz.size(); ++i) {
      r.dlogits[i] += cfg.alpha * dz[i];
    }
  }

  const double check = r.dist + r.mse;
  if (!std::isfinite(check)) {
    throw NumericError(std::string("total_loss: non-finite value in ") +
                       kAngleNames[branch] + " branch");
  }
  return r;
}

} // namespace

TotalLoss total_loss(const std::array<std::vector<double>, 3>& logits,
                     const SampleTargets& targets, const PoseTriple& gt,
                     const LossConfig& cfg, const BinningConfig& binning) {
  cfg.validate();
  TotalLoss out;
  for (std::size_t b = 0; b < 3; ++b) {
    BranchResult r = branch_loss(logits[b], targets, b, gt.component(b), cfg,
                                 binning, /*with_grad=*/true);
    out.distribution_sum += r.dist;
    out.mse_sum += r.mse;
    out.dlogits[b] = std::move(r.dlogits);
  }
  out.value = out.distribution_sum;
  if (cfg.alpha != 0.0) out.value += cfg.alpha * out.mse_sum;
  return out;
}

TotalLossValue total_loss_value(const std::array<std::vector<double>, 3>& logits,
                                const SampleTargets& targets,
                                const PoseTriple& gt, const LossConfig& cfg,
                                const BinningConfig& binning) {
  cfg.validate();
  TotalLossValue out;
  for (std::size_t b = 0; b < 3; ++b) {
    const BranchResult r = branch_loss(logits[b], targets, b, gt.component(b),
                                       cfg, binning, /*with_grad=*/false);
    out.distribution_sum += r.dist;
    out.mse_sum += r.mse;
  }
  out.value = out.distribution_sum;
  if (cfg.alpha != 0.0) out.value += cfg.alpha * out.mse_sum;
  return out;
}

} // namespace ldlpose
