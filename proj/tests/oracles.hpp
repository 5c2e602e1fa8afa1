// SPDX-License-Identifier: Apache-2.0
//
// Test-side oracles, implemented independently of the library paths they
// verify: a central-difference gradient, a plain Adam recursion, and
// direct-summation loss values.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

inline std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  std::vector<double> grad(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = probe[i];
    probe[i] = keep + h;
    const double hi = f(probe);
    probe[i] = keep - h;
    const double lo = f(probe);
    probe[i] = keep;
    grad[i] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

inline double vector_rel_error(std::span<const double> a,
                               std::span<const double> b) {
  double scale = 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

/// Textbook bias-corrected Adam, written out step by step.
struct ReferenceAdam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> theta;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;

  explicit ReferenceAdam(std::vector<double> theta0)
      : theta(std::move(theta0)),
        m(theta.size(), 0.0),
        v(theta.size(), 0.0) {}

  void step(std::span<const double> grad) {
    t += 1;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      const double mhat = m[i] / (1.0 - std::pow(beta1, static_cast<double>(t)));
      const double vhat = v[i] / (1.0 - std::pow(beta2, static_cast<double>(t)));
      theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
};

/// KL by direct per-term summation.
inline double kl_direct(std::span<const double> d, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) acc += d[i] * std::log(d[i] / f[i]);
  }
  return acc;
}

/// L2 distance by direct summation.
inline double euclidean_direct(std::span<const double> d,
                               std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    acc += (d[i] - f[i]) * (d[i] - f[i]);
  }
  return std::sqrt(acc);
}

/// Unnormalized Gaussian mass over integer offsets, direct summation.
inline double gaussian_normalizer(std::size_t gt_bin, std::size_t num_bins,
                                  double sigma) {
  double acc = 0.0;
  for (std::size_t l = 0; l < num_bins; ++l) {
    const double d = static_cast<double>(l) - static_cast<double>(gt_bin);
    acc += std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return acc;
}

} // namespace oracles
