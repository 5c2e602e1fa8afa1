// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ldlpose/dataset.hpp"
#include "ldlpose/label_distribution.hpp"
#include "ldlpose/losses.hpp"
#include "ldlpose/network.hpp"

namespace ldlpose {

struct AdamHyper {
  double learning_rate = 1e-3; // desk-scale default; 1e-6 is a fine-tuning rate
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Network parameters plus Adam moment estimates and step counter.
struct TrainState {
  std::vector<double> parameters;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  std::uint64_t step = 0;
  AdamHyper hyper;
};

TrainState init_train_state(const NetworkConfig& cfg, const AdamHyper& hyper);

/// One bias-corrected Adam update, in place. Throws NumericError on a
/// non-finite gradient entry, leaving the state untouched.
void adam_step(TrainState& state, std::span<const double> grad);

struct TrainHyper {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  AdamHyper adam;
  std::uint64_t shuffle_seed = 3;
};

/// Full-training-set metrics after a given number of epochs; epoch 0 is the
/// freshly initialized network. distribution_loss is summed over samples
/// and branches; mse_loss is averaged over samples and summed over branches,
/// matching the batch reduction used during training.
struct EpochMetrics {
  std::size_t epoch = 0;
  double total_loss = 0.0;
  double distribution_loss = 0.0;
  double mse_loss = 0.0;
  bool has_validation = false;
  double val_mae_yaw = 0.0;
  double val_mae_pitch = 0.0;
  double val_mae_roll = 0.0;
  double val_mae_mean = 0.0;
};

struct TrainResult {
  TrainState state;
  std::vector<EpochMetrics> log;
  std::uint64_t init_param_hash = 0;       // FNV-1a over initial parameters
  std::uint64_t first_epoch_order_hash = 0; // FNV-1a over epoch 1's sample order
};

/// Deterministic mini-batch training. Per-epoch Fisher-Yates shuffles draw
/// from a dedicated engine seeded with hyper.shuffle_seed, independent of
/// the init seed. Distribution losses are summed within a batch, the MSE
/// term is averaged (alpha is applied per batch as alpha / batch_size).
/// Throws NumericError naming epoch and batch if the loss turns non-finite.
TrainResult train(const Dataset& train_ds, const Dataset* validation,
                  const NetworkConfig& net, const LossConfig& loss,
                  const EncodingConfig& enc_yaw, const EncodingConfig& enc_pitch,
                  const EncodingConfig& enc_roll, const TrainHyper& hyper);

} // namespace ldlpose
