// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/label_distribution.hpp"

#include <cmath>
#include <string>

#include "ldlpose/error.hpp"

namespace ldlpose {

void EncodingConfig::validate() const {
  binning.validate();
  if (!std::isfinite(sigma) || !(sigma > 0.0)) {
    throw ConfigError("encoding: sigma must be positive");
  }
}

LabelDistribution encode_gaussian(std::size_t gt_bin, const EncodingConfig& cfg,
                                  SigmaPrefactor prefactor) {
  cfg.validate();
  const std::size_t n = cfg.binning.num_bins;
  if (gt_bin >= n) {
    throw RangeError("encode_gaussian: gt_bin " + std::to_string(gt_bin) +
                     " outside [0, " + std::to_string(n) + ")");
  }
  std::vector<double> probs(n);
  const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  double sum = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double d = static_cast<double>(l) - static_cast<double>(gt_bin);
    double g = std::exp(-d * d * inv_two_sigma_sq);
    if (prefactor == SigmaPrefactor::included) g /= cfg.sigma;
    probs[l] = g;
    sum += g;
  }
  for (std::size_t l = 0; l < n; ++l) {
    probs[l] /= sum;
  }
  return LabelDistribution{std::move(probs)};
}

std::array<LabelDistribution, 3> encode_pose(const PoseTriple& pose,
                                             const EncodingConfig& cfg_yaw,
                                             const EncodingConfig& cfg_pitch,
                                             const EncodingConfig& cfg_roll) {
  const std::array<const EncodingConfig*, 3> cfgs{&cfg_yaw, &cfg_pitch,
                                                  &cfg_roll};
  std::array<LabelDistribution, 3> out;
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
    out[i] = encode_gaussian(angle_to_bin(angle, b), *cfgs[i]);
  }
  return out;
}

void validate_distribution(std::span<const double> probs, double tol) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw NumericError("distribution entry is negative or non-finite");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw NumericError("distribution sums to " + std::to_string(sum) +
                       ", expected 1");
  }
}

} // namespace ldlpose
