// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <cmath>

#include "doctest.h"
#include "ldlpose/binning.hpp"
#include "ldlpose/error.hpp"
#include "ldlpose/label_distribution.hpp"
#include "oracles.hpp"

using namespace ldlpose;

namespace {

EncodingConfig enc(double sigma) { return EncodingConfig{sigma, BinningConfig{}}; }

constexpr std::array<double, 5> kSigmas{0.5, 1.0, 2.0, 4.0, 8.0};

} // namespace

TEST_SUITE("label_distribution") {

TEST_CASE("peak bin and normalization at the default sigma") {
  const LabelDistribution d = encode_gaussian(23, enc(4.0));
  std::size_t peak = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < d.probs.size(); ++i) {
    if (d.probs[i] > d.probs[peak]) peak = i;
    sum += d.probs[i];
  }
  CHECK(peak == 23);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("peak value matches the direct-summation normalizer") {
  const LabelDistribution d = encode_gaussian(33, enc(4.0));
  const double normalizer = oracles::gaussian_normalizer(33, 66, 4.0);
  CHECK(d.probs[33] == doctest::Approx(1.0 / normalizer).epsilon(1e-14));
  // Far from the edges the normalizer is close to sqrt(2 pi) * sigma.
  CHECK(d.probs[33] == doctest::Approx(0.0997).epsilon(1e-3));
}

TEST_CASE("tiny sigma degenerates to one-hot") {
  const LabelDistribution d = encode_gaussian(33, enc(1e-3));
  CHECK(d.probs[33] >= 0.999);
  CHECK(d.probs[32] <= 1e-9);
}

TEST_CASE("normalization across the sigma grid and all bins") {
  for (double sigma : kSigmas) {
    for (std::size_t bin = 0; bin < 66; ++bin) {
      const LabelDistribution d = encode_gaussian(bin, enc(sigma));
      double sum = 0.0;
      for (double p : d.probs) sum += p;
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("sigma prefactor cancels under normalization") {
  for (double sigma : kSigmas) {
    for (std::size_t bin : {0u, 7u, 33u, 65u}) {
      const LabelDistribution without = encode_gaussian(bin, enc(sigma));
      const LabelDistribution with =
          encode_gaussian(bin, enc(sigma), SigmaPrefactor::included);
      for (std::size_t i = 0; i < 66; ++i) {
        CHECK(std::abs(without.probs[i] - with.probs[i]) <= 1e-15);
      }
    }
  }
}

TEST_CASE("symmetry about the ground-truth bin") {
  for (double sigma : kSigmas) {
    const std::size_t alpha = 33;
    const LabelDistribution d = encode_gaussian(alpha, enc(sigma));
    for (std::size_t k = 1; k <= 32; ++k) {
      CHECK(std::abs(d.probs[alpha - k] - d.probs[alpha + k]) <= 1e-12);
    }
  }
}

TEST_CASE("mode at the ground-truth bin for every bin") {
  for (std::size_t bin = 0; bin < 66; ++bin) {
    const LabelDistribution d = encode_gaussian(bin, enc(4.0));
    std::size_t peak = 0;
    for (std::size_t i = 1; i < 66; ++i) {
      if (d.probs[i] > d.probs[peak]) peak = i;
    }
    CHECK(peak == bin);
  }
}

TEST_CASE("probability decays monotonically with distance from the mode") {
  const LabelDistribution d = encode_gaussian(20, enc(4.0));
  for (std::size_t l = 20; l + 1 < 66; ++l) {
    CHECK(d.probs[l + 1] <= d.probs[l] + 1e-15);
  }
  for (std::size_t l = 20; l > 0; --l) {
    CHECK(d.probs[l - 1] <= d.probs[l] + 1e-15);
  }
}

TEST_CASE("edge truncation biases the expected angle toward the interior") {
  const BinningConfig binning;
  for (std::size_t alpha : {0u, 1u, 2u, 3u, 4u}) {
    const LabelDistribution d = encode_gaussian(alpha, enc(4.0));
    const double decoded = expectation_decode(d.probs, binning);
    CHECK(decoded > bin_center(alpha, binning));
    CHECK(decoded < 0.0);
  }
  for (std::size_t alpha : {61u, 62u, 63u, 64u, 65u}) {
    const LabelDistribution d = encode_gaussian(alpha, enc(4.0));
    const double decoded = expectation_decode(d.probs, binning);
    CHECK(decoded < bin_center(alpha, binning));
    CHECK(decoded > 0.0);
  }
}

TEST_CASE("encode_pose composes per-angle encodings") {
  const EncodingConfig e = enc(4.0);
  const auto dists = encode_pose(PoseTriple{-30.0, 0.0, 0.0}, e, e, e);
  auto argmax = [](const LabelDistribution& d) {
    std::size_t peak = 0;
    for (std::size_t i = 1; i < d.probs.size(); ++i) {
      if (d.probs[i] > d.probs[peak]) peak = i;
    }
    return peak;
  };
  CHECK(argmax(dists[0]) == 23);
  CHECK(argmax(dists[1]) == 33);
  CHECK(argmax(dists[2]) == 33);

  const auto same = encode_pose(PoseTriple{0.0, 0.0, 0.0}, e, e, e);
  for (std::size_t i = 0; i < 66; ++i) {
    CHECK(same[0].probs[i] == same[1].probs[i]);
    CHECK(same[1].probs[i] == same[2].probs[i]);
  }
}

TEST_CASE("errors name the angle and reject bad configs") {
  const EncodingConfig e = enc(4.0);
  auto thrown_message = [&](const PoseTriple& pose) {
    try {
      encode_pose(pose, e, e, e);
    } catch (const RangeError& err) {
      return std::string(err.what());
    }
    return std::string();
  };
  CHECK(thrown_message(PoseTriple{200.0, 0.0, 0.0}).find("yaw") !=
        std::string::npos);
  CHECK(thrown_message(PoseTriple{0.0, 0.0, -120.0}).find("roll") !=
        std::string::npos);
  CHECK_THROWS_AS(encode_gaussian(66, e), RangeError);
  CHECK_THROWS_AS(encode_gaussian(0, enc(0.0)), ConfigError);
  CHECK_THROWS_AS(encode_gaussian(0, enc(-1.0)), ConfigError);
}

} // TEST_SUITE
