// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ldlpose/error.hpp"
#include "ldlpose/evaluation.hpp"
#include "ldlpose/hashing.hpp"
#include "ldlpose/rng.hpp"

namespace ldlpose {

TrainState init_train_state(const NetworkConfig& cfg, const AdamHyper& hyper) {
  TrainState s;
  s.parameters = init_parameters(cfg);
  s.adam_m.assign(s.parameters.size(), 0.0);
  s.adam_v.assign(s.parameters.size(), 0.0);
  s.step = 0;
  s.hyper = hyper;
  return s;
}

void adam_step(TrainState& state, std::span<const double> grad) {
  if (grad.size() != state.parameters.size()) {
    throw ShapeError("adam_step: gradient length " +
                     std::to_string(grad.size()) + " != parameter length " +
                     std::to_string(state.parameters.size()));
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw NumericError("adam_step: non-finite gradient");
    }
  }
  state.step += 1;
  const double b1 = state.hyper.beta1;
  const double b2 = state.hyper.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double lr = state.hyper.learning_rate;
  const double eps = state.hyper.epsilon;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    state.adam_m[i] = b1 * state.adam_m[i] + (1.0 - b1) * g;
    state.adam_v[i] = b2 * state.adam_v[i] + (1.0 - b2) * g * g;
    const double mhat = state.adam_m[i] / bc1;
    const double vhat = state.adam_v[i] / bc2;
    state.parameters[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

namespace {

EpochMetrics full_set_metrics(std::size_t epoch, const Dataset& ds,
                              const std::vector<SampleTargets>& targets,
                              const NetworkConfig& net, const LossConfig& loss,
                              const BinningConfig& binning,
                              std::span<const double> params,
                              const Dataset* validation) {
  double dist_sum = 0.0;
  double mse_sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto logits = forward(net, params, ds.samples[i].features);
    const TotalLossValue v =
        total_loss_value(logits, targets[i], ds.samples[i].pose, loss, binning);
    dist_sum += v.distribution_sum;
    mse_sum += v.mse_sum;
  }
  EpochMetrics m;
  m.epoch = epoch;
  m.distribution_loss = dist_sum;
  m.mse_loss = mse_sum / static_cast<double>(ds.size());
  m.total_loss = m.distribution_loss;
  if (loss.alpha != 0.0) m.total_loss += loss.alpha * m.mse_loss;
  if (!std::isfinite(m.total_loss)) {
    throw NumericError("non-finite loss");
  }
  if (validation) {
    const EvalReport r =
        evaluate(net, params, *validation, binning, loss.decode_mode);
    m.has_validation = true;
    m.val_mae_yaw = r.mae_yaw;
    m.val_mae_pitch = r.mae_pitch;
    m.val_mae_roll = r.mae_roll;
    m.val_mae_mean = r.mae_mean;
  }
  return m;
}

} // namespace

TrainResult train(const Dataset& train_ds, const Dataset* validation,
                  const NetworkConfig& net, const LossConfig& loss,
                  const EncodingConfig& enc_yaw, const EncodingConfig& enc_pitch,
                  const EncodingConfig& enc_roll, const TrainHyper& hyper) {
  net.validate();
  loss.validate();
  if (train_ds.empty()) {
    throw ConfigError("train: dataset is empty");
  }
  if (hyper.batch_size == 0) {
    throw ConfigError("train: batch_size must be positive");
  }
  const BinningConfig& binning = enc_yaw.binning;
  if (net.num_bins != binning.num_bins) {
    throw ConfigError("train: network num_bins " + std::to_string(net.num_bins) +
                      " != binning num_bins " + std::to_string(binning.num_bins));
  }
  for (const Sample& s : train_ds.samples) {
    if (s.features.size() != net.input_dim) {
      throw ShapeError("train: sample feature width " +
                       std::to_string(s.features.size()) +
                       " != network input_dim " + std::to_string(net.input_dim));
    }
  }

  // Targets are fixed per sample; encode once.
  std::vector<SampleTargets> targets;
  targets.reserve(train_ds.size());
  for (const Sample& s : train_ds.samples) {
    targets.push_back(
        make_targets(s.pose, enc_yaw, enc_pitch, enc_roll, loss.label_loss));
  }

  TrainResult result;
  result.state = init_train_state(net, hyper.adam);
  result.init_param_hash = hash_doubles(result.state.parameters);

  auto log_epoch = [&](std::size_t epoch) {
    try {
      result.log.push_back(full_set_metrics(epoch, train_ds, targets, net,
                                            loss, binning,
                                            result.state.parameters,
                                            validation));
    } catch (const NumericError& e) {
      throw NumericError("train: " + std::string(e.what()) +
                         " in the metrics pass at epoch " +
                         std::to_string(epoch));
    }
  };

  log_epoch(0);

  const std::size_t n = train_ds.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 shuffler(hyper.shuffle_seed);

  std::vector<double> grad(result.state.parameters.size());

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng::shuffle(order, shuffler);
    if (epoch == 1) {
      result.first_epoch_order_hash =
          fnv1a64(order.data(), order.size() * sizeof(std::size_t));
    }

    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += hyper.batch_size) {
      const std::size_t stop = std::min(start + hyper.batch_size, n);
      const auto batch_n = static_cast<double>(stop - start);

      // Distribution losses sum over the batch; MSE averages, so alpha is
      // applied as alpha / batch_n.
      LossConfig batch_loss_cfg = loss;
      batch_loss_cfg.alpha = loss.alpha / batch_n;

      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      try {
        for (std::size_t k = start; k < stop; ++k) {
          const Sample& s = train_ds.samples[order[k]];
          ForwardCache cache;
          const auto logits =
              forward(net, result.state.parameters, s.features, &cache);
          const TotalLoss tl = total_loss(logits, targets[order[k]], s.pose,
                                          batch_loss_cfg, binning);
          batch_loss += tl.value;
          backward(net, result.state.parameters, cache, tl.dlogits, grad);
        }
        if (!std::isfinite(batch_loss)) {
          throw NumericError("non-finite batch loss");
        }
        adam_step(result.state, grad);
      } catch (const NumericError& e) {
        throw NumericError("train: " + std::string(e.what()) + " at epoch " +
                           std::to_string(epoch) + " batch " +
                           std::to_string(batch_index));
      }
      ++batch_index;
    }

    log_epoch(epoch);
  }

  return result;
}

} // namespace ldlpose
