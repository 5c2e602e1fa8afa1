// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldlpose/dataset.hpp"
#include "ldlpose/losses.hpp"
#include "ldlpose/network.hpp"
#include "ldlpose/trainer.hpp"

namespace ldlpose {

/// MAE of one angle-magnitude band: |angle| in [lo_deg, hi_deg), the last
/// band closed at the top.
struct StratumMae {
  double lo_deg = 0.0;
  double hi_deg = 0.0;
  std::size_t count = 0;
  double mae_deg = 0.0;
};

inline constexpr std::array<double, 5> kStratumEdgesDeg{0.0, 10.0, 30.0, 60.0,
                                                        99.0};

struct EvalReport {
  double mae_yaw = 0.0;
  double mae_pitch = 0.0;
  double mae_roll = 0.0;
  double mae_mean = 0.0;
  std::array<std::vector<StratumMae>, 3> strata; // yaw, pitch, roll
  std::size_t n_eval = 0;
};

/// Decoded angle per sample per branch, in dataset order.
std::array<std::vector<double>, 3> predict_angles(const NetworkConfig& net,
                                                  std::span<const double> params,
                                                  const Dataset& ds,
                                                  const BinningConfig& binning,
                                                  DecodeMode mode);

EvalReport evaluate(const NetworkConfig& net, std::span<const double> params,
                    const Dataset& ds, const BinningConfig& binning,
                    DecodeMode mode);

void write_eval_csv(const EvalReport& report, const std::string& path,
                    const std::string& header_comment);
void print_eval(const EvalReport& report, std::ostream& out);

/// Paired GLD vs one-hot cross-entropy experiment. Per experiment seed both
/// arms share the training data, the test data, the initial parameters and
/// the shuffle order; the per-branch label loss is the only difference.
struct CompareConfig {
  SynthConfig synth;                 // template; sample_seed re-derived per seed
  std::size_t n_train = 10000;
  std::size_t n_test = 2000;
  BinningConfig binning;
  std::array<double, 3> sigma_bins{4.0, 4.0, 4.0};
  NetworkConfig network;
  LossConfig loss;                   // label_loss is overridden per arm
  TrainHyper hyper;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double rare_yaw_threshold_deg = 60.0;
};

struct ArmSeedResult {
  LabelLossKind arm = LabelLossKind::gld;
  std::uint64_t seed = 0;
  double mae_yaw = 0.0;
  double mae_pitch = 0.0;
  double mae_roll = 0.0;
  double overall_mae = 0.0;   // mean over the three angles
  double rare_yaw_mae = 0.0;  // |yaw| >= rare_yaw_threshold_deg
  std::size_t rare_yaw_count = 0;
};

struct CompareReport {
  std::vector<ArmSeedResult> rows; // one per arm x seed
  double median_overall_gld = 0.0;
  double median_overall_ce = 0.0;
  double median_rare_gld = 0.0;
  double median_rare_ce = 0.0;
  double rare_yaw_threshold_deg = 60.0;
};

CompareReport compare_losses(const CompareConfig& cfg);

void write_comparison_csv(const CompareReport& report, const std::string& path,
                          const std::string& header_comment);
void print_comparison(const CompareReport& report, std::ostream& out);

const char* arm_name(LabelLossKind kind);

} // namespace ldlpose
