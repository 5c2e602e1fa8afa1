// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ldlpose {

/// Feed-forward network on feature vectors: input -> hidden layers (ReLU)
/// -> three fully-connected heads of num_bins logits each (yaw, pitch,
/// roll). Stands in for a convolutional backbone at desk scale.
struct NetworkConfig {
  std::size_t input_dim = 16;
  std::vector<std::size_t> hidden_dims = {64};
  std::size_t num_bins = 66;
  std::uint64_t init_seed = 1;

  void validate() const;
};

/// Total parameter count: sum over layers of (in + 1) * out, heads included.
std::size_t parameter_count(const NetworkConfig& cfg);

/// Seeded initialization: weights uniform in +-sqrt(6 / (fan_in + fan_out))
/// per layer, biases zero. Deterministic for a fixed seed.
std::vector<double> init_parameters(const NetworkConfig& cfg);

/// Activations recorded by forward() for use in backward(). post[0] is the
/// input; post[i] the ReLU output of hidden layer i. pre holds the matching
/// pre-activations (used by backward's ReLU mask and by gradient-check
/// instance screening).
struct ForwardCache {
  std::vector<std::vector<double>> post;
  std::vector<std::vector<double>> pre;
};

/// Runs the network; returns logits per head in order yaw, pitch, roll.
/// Deterministic. Throws ShapeError on dimension mismatch.
std::array<std::vector<double>, 3> forward(const NetworkConfig& cfg,
                                           std::span<const double> params,
                                           std::span<const double> features,
                                           ForwardCache* cache = nullptr);

/// Accumulates d(loss)/d(params) into param_grad (+=) from the per-head
/// logit gradients. Requires the cache produced by the matching forward().
void backward(const NetworkConfig& cfg, std::span<const double> params,
              const ForwardCache& cache,
              const std::array<std::vector<double>, 3>& dlogits,
              std::span<double> param_grad);

} // namespace ldlpose
