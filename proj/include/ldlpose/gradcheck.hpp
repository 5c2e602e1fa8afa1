// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ldlpose {

/// Central finite difference of a scalar function, component by component.
std::vector<double> finite_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step);

/// max_i |a_i - n_i| normalized by the largest gradient magnitude of the
/// instance (falls back to the absolute difference when both vectors are
/// zero). Componentwise normalization would blow up on entries that are
/// incidentally tiny; the gradient scale is the meaningful yardstick.
double max_relative_error(std::span<const double> analytic,
                          std::span<const double> numeric);

struct GradCheckOptions {
  std::size_t trials = 100;
  std::size_t num_bins = 66;
  std::uint64_t seed = 2024;
  double step = 1e-5;
  double tolerance = 1e-6;
  /// Testing hook: added to the first analytic gradient component of every
  /// instance, so a nonzero value must make the checker fail.
  double inject_error = 0.0;
};

struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t trials = 0;
  bool passed = false;
};

/// Finite-difference verification of every analytic gradient path:
/// euclidean_loss, kl_loss, mse through the expectation decoder,
/// one_hot_ce_loss, total_loss, and the end-to-end network backward.
std::vector<GradCheckResult> run_gradcheck(const GradCheckOptions& opts);

} // namespace ldlpose
