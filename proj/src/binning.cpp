// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/binning.hpp"

#include <cmath>
#include <string>

#include "ldlpose/error.hpp"

namespace ldlpose {

void BinningConfig::validate() const {
  if (num_bins == 0) {
    throw ConfigError("binning: num_bins must be positive");
  }
  if (!std::isfinite(range_min_deg) || !std::isfinite(range_max_deg)) {
    throw ConfigError("binning: range must be finite");
  }
  if (!(range_max_deg > range_min_deg)) {
    throw ConfigError("binning: range_max_deg must exceed range_min_deg");
  }
  // The derived width must tile the range; with width = span / num_bins this
  // holds up to rounding of the division itself.
  const double span = range_max_deg - range_min_deg;
  if (std::abs(bin_width_deg() * static_cast<double>(num_bins) - span) >
      span * 1e-12) {
    throw ConfigError("binning: bin_width_deg * num_bins does not equal the range");
  }
}

std::size_t angle_to_bin(double angle_deg, const BinningConfig& cfg) {
  if (!std::isfinite(angle_deg) || angle_deg < cfg.range_min_deg ||
      angle_deg > cfg.range_max_deg) {
    throw RangeError("angle " + std::to_string(angle_deg) +
                     " deg outside [" + std::to_string(cfg.range_min_deg) +
                     ", " + std::to_string(cfg.range_max_deg) + "]");
  }
  const double offset = (angle_deg - cfg.range_min_deg) / cfg.bin_width_deg();
  auto idx = static_cast<std::size_t>(offset); // floor; offset >= 0
  if (idx >= cfg.num_bins) idx = cfg.num_bins - 1; // top edge clamps
  return idx;
}

double bin_center(std::size_t idx, const BinningConfig& cfg) {
  if (idx >= cfg.num_bins) {
    throw RangeError("bin index " + std::to_string(idx) + " outside [0, " +
                     std::to_string(cfg.num_bins) + ")");
  }
  const double w = cfg.bin_width_deg();
  const double offset = cfg.center_mode == BinCenterMode::midpoint
                            ? (static_cast<double>(idx) + 0.5)
                            : static_cast<double>(idx);
  return cfg.range_min_deg + w * offset;
}

std::vector<double> bin_centers(const BinningConfig& cfg) {
  std::vector<double> centers(cfg.num_bins);
  for (std::size_t i = 0; i < cfg.num_bins; ++i) {
    centers[i] = bin_center(i, cfg);
  }
  return centers;
}

double expectation_decode(std::span<const double> probs,
                          const BinningConfig& cfg) {
  if (probs.size() != cfg.num_bins) {
    throw ShapeError("expectation_decode: distribution has " +
                     std::to_string(probs.size()) + " entries, binning has " +
                     std::to_string(cfg.num_bins) + " bins");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i] * bin_center(i, cfg);
  }
  return acc;
}

double argmax_decode(std::span<const double> probs, const BinningConfig& cfg) {
  if (probs.empty() || probs.size() != cfg.num_bins) {
    throw ShapeError("argmax_decode: distribution has " +
                     std::to_string(probs.size()) + " entries, binning has " +
                     std::to_string(cfg.num_bins) + " bins");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i; // strict: first max wins ties
  }
  return bin_center(best, cfg);
}

double decode(std::span<const double> probs, const BinningConfig& cfg,
              DecodeMode mode) {
  return mode == DecodeMode::expectation ? expectation_decode(probs, cfg)
                                         : argmax_decode(probs, cfg);
}

} // namespace ldlpose
