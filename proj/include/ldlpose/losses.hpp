// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ldlpose/binning.hpp"
#include "ldlpose/label_distribution.hpp"

namespace ldlpose {

/// Softmax output; entries are strictly positive and sum to 1.
struct PredictedDistribution {
  std::vector<double> probs;
};

/// Which per-branch label loss the trainer applies. gld is the Gaussian
/// label distribution loss (Euclidean + KL against the encoded target);
/// one_hot_ce is the plain cross-entropy baseline it is compared against.
enum class LabelLossKind { gld, one_hot_ce };

struct LossConfig {
  double alpha = 0.01;            // weight of the MSE branch
  bool use_euclidean = true;      // ablation switches for the gld terms
  bool use_kl = true;
  bool squared_euclidean = false; // replace ||.||_2 by its square
  LabelLossKind label_loss = LabelLossKind::gld;
  DecodeMode decode_mode = DecodeMode::expectation; // evaluation-time decode

  void validate() const;
};

/// Numerically stable softmax (max subtraction). Throws NumericError on a
/// non-finite logit, ShapeError on empty input.
PredictedDistribution softmax(std::span<const double> logits);

/// Contracts the softmax Jacobian with a gradient in distribution space:
/// dL/dz_k = f_k * (dprobs_k - sum_u dprobs_u * f_u).
std::vector<double> softmax_backward(const PredictedDistribution& pred,
                                     std::span<const double> dprobs);

/// Unsquared L2 norm of target - pred (the squared variant behind a flag).
double euclidean_loss(const LabelDistribution& target,
                      const PredictedDistribution& pred, bool squared = false);

/// d euclidean_loss / d pred. The norm is not differentiable at 0; the
/// gradient there is defined as 0.
std::vector<double> euclidean_grad_probs(const LabelDistribution& target,
                                         const PredictedDistribution& pred,
                                         bool squared = false);

/// KL(target || pred) with the convention 0 * ln(0/f) = 0. Throws
/// NumericError when any pred entry is <= 0.
double kl_loss(const LabelDistribution& target,
               const PredictedDistribution& pred);

std::vector<double> kl_grad_probs(const LabelDistribution& target,
                                  const PredictedDistribution& pred);

/// euclidean_loss + kl_loss, the per-sample Gaussian label distribution loss.
double gld_loss(const LabelDistribution& target,
                const PredictedDistribution& pred);

/// Squared error of the decoded angle, per sample per angle.
double mse_loss(double pred_angle_deg, double gt_angle_deg);

/// -ln pred[target_bin], the soft-max cross-entropy baseline.
double one_hot_ce_loss(std::size_t target_bin,
                       const PredictedDistribution& pred);

/// Gradient of one_hot_ce_loss w.r.t. the logits: pred - onehot(target_bin).
std::vector<double> one_hot_ce_grad_logits(std::size_t target_bin,
                                           const PredictedDistribution& pred);

/// Per-sample supervision for the three branches. The ground-truth bin is
/// always present; the encoded distributions only for the gld loss.
struct SampleTargets {
  std::array<std::size_t, 3> bins{};
  std::array<LabelDistribution, 3> distributions;
};

SampleTargets make_targets(const PoseTriple& pose, const EncodingConfig& cfg_yaw,
                           const EncodingConfig& cfg_pitch,
                           const EncodingConfig& cfg_roll, LabelLossKind kind);

/// Per-sample total loss over the three branches, with analytic gradients
/// w.r.t. each branch's pre-softmax logits.
///
/// value = distribution_sum + alpha * mse_sum, where distribution_sum is the
/// configured label loss summed over branches and mse_sum the squared decode
/// error summed over branches. When alpha == 0 the MSE term is skipped
/// entirely, so value equals distribution_sum bit for bit. The MSE branch
/// always uses expectation decoding (the differentiable decoder);
/// cfg.decode_mode only affects evaluation.
struct TotalLoss {
  double value = 0.0;
  double distribution_sum = 0.0;
  double mse_sum = 0.0;
  std::array<std::vector<double>, 3> dlogits;
};

TotalLoss total_loss(const std::array<std::vector<double>, 3>& logits,
                     const SampleTargets& targets, const PoseTriple& gt,
                     const LossConfig& cfg, const BinningConfig& binning);

/// Loss components without gradients, for metric passes over full datasets.
struct TotalLossValue {
  double value = 0.0;
  double distribution_sum = 0.0;
  double mse_sum = 0.0;
};

TotalLossValue total_loss_value(const std::array<std::vector<double>, 3>& logits,
                                const SampleTargets& targets,
                                const PoseTriple& gt, const LossConfig& cfg,
                                const BinningConfig& binning);

} // namespace ldlpose
