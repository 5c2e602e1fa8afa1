// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/network.hpp"

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "ldlpose/error.hpp"
#include "ldlpose/rng.hpp"

namespace ldlpose {

namespace {

// (fan_in, fan_out) of every layer in parameter order: hidden stack first,
// then the yaw/pitch/roll heads.
std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(
    const NetworkConfig& cfg) {
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  std::size_t in = cfg.input_dim;
  for (std::size_t h : cfg.hidden_dims) {
    shapes.emplace_back(in, h);
    in = h;
  }
  for (int head = 0; head < 3; ++head) {
    shapes.emplace_back(in, cfg.num_bins);
  }
  return shapes;
}

} // namespace

void NetworkConfig::validate() const {
  if (input_dim == 0) throw ConfigError("network: input_dim must be positive");
  if (num_bins == 0) throw ConfigError("network: num_bins must be positive");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ConfigError("network: hidden dims must be positive");
  }
}

std::size_t parameter_count(const NetworkConfig& cfg) {
  std::size_t count = 0;
  for (const auto& [in, out] : layer_shapes(cfg)) {
    count += (in + 1) * out;
  }
  return count;
}

std::vector<double> init_parameters(const NetworkConfig& cfg) {
  cfg.validate();
  std::vector<double> params(parameter_count(cfg));
  std::mt19937_64 g(cfg.init_seed);
  std::size_t off = 0;
  for (const auto& [in, out] : layer_shapes(cfg)) {
    const double lim =
        std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t i = 0; i < in * out; ++i) {
      params[off + i] = rng::uniform(g, -lim, lim);
    }
    off += in * out;
    for (std::size_t i = 0; i < out; ++i) {
      params[off + i] = 0.0; // biases
    }
    off += out;
  }
  return params;
}

std::array<std::vector<double>, 3> forward(const NetworkConfig& cfg,
                                           std::span<const double> params,
                                           std::span<const double> features,
                                           ForwardCache* cache) {
  if (features.size() != cfg.input_dim) {
    throw ShapeError("forward: feature vector has " +
                     std::to_string(features.size()) + " entries, expected " +
                     std::to_string(cfg.input_dim));
  }
  if (params.size() != parameter_count(cfg)) {
    throw ShapeError("forward: parameter vector has " +
                     std::to_string(params.size()) + " entries, expected " +
                     std::to_string(parameter_count(cfg)));
  }

  std::vector<double> cur(features.begin(), features.end());
  if (cache) {
    cache->post.clear();
    cache->pre.clear();
    cache->post.push_back(cur);
  }

  std::size_t off = 0;
  for (std::size_t h : cfg.hidden_dims) {
    const std::size_t in = cur.size();
    std::vector<double> pre(h);
    for (std::size_t o = 0; o < h; ++o) {
      double acc = params[off + in * h + o]; // bias
      const double* w = &params[off + o * in];
      for (std::size_t i = 0; i < in; ++i) {
        acc += w[i] * cur[i];
      }
      pre[o] = acc;
    }
    off += (in + 1) * h;
    std::vector<double> post(h);
    for (std::size_t o = 0; o < h; ++o) {
      post[o] = pre[o] > 0.0 ? pre[o] : 0.0;
    }
    if (cache) {
      cache->pre.push_back(pre);
      cache->post.push_back(post);
    }
    cur = std::move(post);
  }

  std::array<std::vector<double>, 3> heads;
  const std::size_t in = cur.size();
  for (std::size_t head = 0; head < 3; ++head) {
    std::vector<double> logits(cfg.num_bins);
    for (std::size_t o = 0; o < cfg.num_bins; ++o) {
      double acc = params[off + in * cfg.num_bins + o];
      const double* w = &params[off + o * in];
      for (std::size_t i = 0; i < in; ++i) {
        acc += w[i] * cur[i];
      }
      logits[o] = acc;
    }
    off += (in + 1) * cfg.num_bins;
    heads[head] = std::move(logits);
  }
  return heads;
}

void backward(const NetworkConfig& cfg, std::span<const double> params,
              const ForwardCache& cache,
              const std::array<std::vector<double>, 3>& dlogits,
              std::span<double> param_grad) {
  if (param_grad.size() != parameter_count(cfg)) {
    throw ShapeError("backward: gradient vector has wrong length");
  }
  if (cache.post.size() != cfg.hidden_dims.size() + 1) {
    throw ShapeError("backward: cache does not match network depth");
  }
  for (const auto& d : dlogits) {
    if (d.size() != cfg.num_bins) {
      throw ShapeError("backward: logit gradient has wrong length");
    }
  }

  const std::vector<double>& last = cache.post.back();
  const std::size_t last_dim = last.size();

  // Offset of the first head's parameters.
  std::size_t head_off = 0;
  {
    std::size_t in = cfg.input_dim;
    for (std::size_t h : cfg.hidden_dims) {
      head_off += (in + 1) * h;
      in = h;
    }
  }

  // Heads: accumulate weight/bias gradients and the gradient on the last
  // hidden activation.
  std::vector<double> dlast(last_dim, 0.0);
  std::size_t off = head_off;
  for (std::size_t head = 0; head < 3; ++head) {
    const auto& dz = dlogits[head];
    for (std::size_t o = 0; o < cfg.num_bins; ++o) {
      const double d = dz[o];
      double* gw = &param_grad[off + o * last_dim];
      const double* w = &params[off + o * last_dim];
      for (std::size_t i = 0; i < last_dim; ++i) {
        gw[i] += d * last[i];
        dlast[i] += d * w[i];
      }
      param_grad[off + last_dim * cfg.num_bins + o] += d; // bias
    }
    off += (last_dim + 1) * cfg.num_bins;
  }

  // Hidden stack, in reverse.
  std::vector<double> dcur = std::move(dlast);
  std::size_t layer_off = head_off;
  for (std::size_t li = cfg.hidden_dims.size(); li-- > 0;) {
    const std::size_t out = cfg.hidden_dims[li];
    const std::vector<double>& input = cache.post[li];
    const std::size_t in = input.size();
    layer_off -= (in + 1) * out;

    // ReLU mask from the cached post-activations.
    for (std::size_t o = 0; o < out; ++o) {
      if (!(cache.post[li + 1][o] > 0.0)) dcur[o] = 0.0;
    }

    std::vector<double> dprev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = dcur[o];
      if (d == 0.0) {
        continue;
      }
      double* gw = &param_grad[layer_off + o * in];
      const double* w = &params[layer_off + o * in];
      for (std::size_t i = 0; i < in; ++i) {
        gw[i] += d * input[i];
        dprev[i] += d * w[i];
      }
      param_grad[layer_off + in * out + o] += d; // bias
    }
    dcur = std::move(dprev);
  }
}

} // namespace ldlpose
