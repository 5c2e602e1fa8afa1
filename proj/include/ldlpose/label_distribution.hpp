// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "ldlpose/binning.hpp"

namespace ldlpose {

/// Normalized probability vector over pose bins for one angle.
struct LabelDistribution {
  std::vector<double> probs;
};

/// Gaussian encoding parameters. sigma is expressed in bin units, so the
/// default sigma = 4 spans 12 degrees under 3-degree bins.
struct EncodingConfig {
  double sigma = 4.0;
  BinningConfig binning;

  void validate() const;
};

/// The 1/sigma prefactor on the unnormalized Gaussian cancels under
/// normalization; both variants are kept so the cancellation is testable.
enum class SigmaPrefactor { omitted, included };

/// Discretized, truncated, renormalized Gaussian centered at gt_bin:
/// D[l] = g(l) / sum_u g(u) with g(l) = exp(-(l - gt_bin)^2 / (2 sigma^2)).
/// The Gaussian is evaluated on integer bin indices; the continuous ground
/// truth is quantized before encoding. Edge truncation is absorbed by the
/// normalizer. Throws RangeError for gt_bin out of range, ConfigError for
/// sigma <= 0.
LabelDistribution encode_gaussian(std::size_t gt_bin, const EncodingConfig& cfg,
                                  SigmaPrefactor prefactor = SigmaPrefactor::omitted);

/// Encodes all three angles of a pose; index order yaw, pitch, roll.
/// Out-of-range errors name the offending angle.
std::array<LabelDistribution, 3> encode_pose(const PoseTriple& pose,
                                             const EncodingConfig& cfg_yaw,
                                             const EncodingConfig& cfg_pitch,
                                             const EncodingConfig& cfg_roll);

/// Throws NumericError unless every entry is finite and >= 0 and the sum is
/// 1 within tol.
void validate_distribution(std::span<const double> probs, double tol = 1e-9);

} // namespace ldlpose
