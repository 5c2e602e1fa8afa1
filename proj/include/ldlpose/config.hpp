// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldlpose/binning.hpp"
#include "ldlpose/dataset.hpp"
#include "ldlpose/label_distribution.hpp"
#include "ldlpose/losses.hpp"
#include "ldlpose/network.hpp"
#include "ldlpose/trainer.hpp"

namespace ldlpose {

/// All module configurations in one document. Loaded from a flat
/// "key = value" file with [section] headers; command-line flags override
/// file values by the same section.key names.
struct RunConfig {
  BinningConfig binning;
  std::array<double, 3> sigma_bins{4.0, 4.0, 4.0}; // [encoding]
  LossConfig loss;
  NetworkConfig network;
  SynthConfig synth;
  TrainHyper train;
  double val_fraction = 0.0;   // 0 disables the validation split
  std::uint64_t split_seed = 5;
  OutOfRangePolicy ingest_policy = OutOfRangePolicy::discard;
  std::vector<std::uint64_t> compare_seeds{1, 2, 3};
  std::size_t compare_n_train = 10000;
  std::size_t compare_n_test = 2000;
  double rare_yaw_threshold_deg = 60.0;

  EncodingConfig encoding(std::size_t angle) const {
    return EncodingConfig{sigma_bins[angle], binning};
  }

  /// Cross-module consistency (num_bins identical everywhere, input_dim
  /// consistent between network and synth) plus per-module validation.
  /// Throws ConfigError.
  void validate() const;

  /// Stable serialization of every key; the echo file and the config hash
  /// come from this.
  std::string canonical() const;
  std::uint64_t config_hash() const;
};

RunConfig load_run_config(const std::string& path);

/// Applies one "section.key" = value override. Throws ConfigError for an
/// unknown key or an unparsable value.
void apply_override(RunConfig& cfg, const std::string& dotted_key,
                    const std::string& value);

/// "# ldlpose <version> config=<hash>" line carried by all text outputs.
std::string provenance_header(const RunConfig& cfg);

/// Writes canonical() to <dir>/effective_config.ini.
void echo_config(const RunConfig& cfg, const std::string& dir);

} // namespace ldlpose
