// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace ldlpose {

/// Which point of a bin represents it when decoding back to degrees.
/// midpoint minimizes worst-case quantization error; left_edge gives the
/// 3*idx - 99 convention some pose estimators use and is kept for
/// comparison runs.
enum class BinCenterMode { midpoint, left_edge };

/// Angle <-> bin geometry shared by the three angle branches. Defaults: 66
/// contiguous 3-degree bins covering [-99, +99] degrees.
struct BinningConfig {
  std::size_t num_bins = 66;
  double range_min_deg = -99.0;
  double range_max_deg = 99.0;
  BinCenterMode center_mode = BinCenterMode::midpoint;

  double bin_width_deg() const {
    return (range_max_deg - range_min_deg) / static_cast<double>(num_bins);
  }

  /// Throws ConfigError if the geometry is degenerate.
  void validate() const;
};

/// Continuous ground-truth pose in degrees.
struct PoseTriple {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;

  double component(std::size_t i) const {
    return i == 0 ? yaw_deg : (i == 1 ? pitch_deg : roll_deg);
  }
};

inline constexpr std::array<const char*, 3> kAngleNames{"yaw", "pitch",
                                                        "roll"};

/// Maps an angle to its 0-based bin. Bins are half-open [edge, edge + width)
/// except that an angle exactly at range_max_deg falls into the last bin.
/// Throws RangeError for angles outside [range_min_deg, range_max_deg].
std::size_t angle_to_bin(double angle_deg, const BinningConfig& cfg);

/// Representative angle of a bin under cfg.center_mode. Throws RangeError
/// for an out-of-range index.
double bin_center(std::size_t idx, const BinningConfig& cfg);

/// All bin centers in index order.
std::vector<double> bin_centers(const BinningConfig& cfg);

enum class DecodeMode { expectation, argmax };

/// Probability-weighted mean of bin centers. Linear in probs. Throws
/// ShapeError when probs.size() != cfg.num_bins.
double expectation_decode(std::span<const double> probs,
                          const BinningConfig& cfg);

/// Center of the maximal-probability bin; ties break toward the lowest
/// index. Throws ShapeError for an empty or mismatched vector.
double argmax_decode(std::span<const double> probs, const BinningConfig& cfg);

double decode(std::span<const double> probs, const BinningConfig& cfg,
              DecodeMode mode);

} // namespace ldlpose
