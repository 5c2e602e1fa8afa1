// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldlpose/binning.hpp"

namespace ldlpose {

struct Sample {
  std::vector<double> features;
  PoseTriple pose;
};

enum class Provenance { synthetic, ingested };

struct Dataset {
  std::vector<Sample> samples;
  Provenance provenance = Provenance::synthetic;
  std::uint64_t seed = 0; // sample_seed when synthetic

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Smooth, injective pose -> feature map: sin/cos of each angle plus all
/// pairwise products of those six terms (21 values), pushed through a
/// frozen seeded random linear projection to input_dim.
class PoseEmbedding {
public:
  static constexpr std::size_t kLiftDim = 21;

  PoseEmbedding(std::size_t input_dim, std::uint64_t seed);

  std::vector<double> operator()(const PoseTriple& pose) const;

  std::size_t input_dim() const { return input_dim_; }

private:
  std::size_t input_dim_;
  std::vector<double> projection_; // input_dim x kLiftDim, row-major
};

/// Synthetic imbalanced pose task: poses from zero-mean truncated Gaussians
/// (heavy around 0, sparse at large angles), features from the embedding
/// plus Gaussian noise.
struct SynthConfig {
  std::size_t n_samples = 12000;
  std::size_t input_dim = 16;
  PoseTriple pose_scale_deg{25.0, 20.0, 12.0}; // std-dev per angle
  double noise_std = 0.05;
  std::uint64_t embed_seed = 7;
  std::uint64_t sample_seed = 11;

  void validate() const;
};

/// Fully deterministic given the two seeds. Poses are rejection-sampled
/// into the binning range.
Dataset synth_generate(const SynthConfig& cfg, const BinningConfig& binning);

/// What to do with annotations outside the binning range on ingestion.
enum class OutOfRangePolicy { discard, clamp };

struct LoadResult {
  Dataset dataset;
  std::size_t dropped = 0; // samples removed by the discard policy
};

/// Reads the CSV annotation file (columns id, yaw_deg, pitch_deg, roll_deg)
/// paired with an LDLF feature matrix; row i of the matrix belongs to CSV
/// row i. Throws IoError on missing files, malformed content, or a
/// row-count mismatch between the two files.
LoadResult load_dataset(const std::string& csv_path,
                        const std::string& features_path,
                        const BinningConfig& binning,
                        OutOfRangePolicy policy = OutOfRangePolicy::discard);

/// Writes the CSV + LDLF pair. header_comment (if non-empty) becomes a
/// leading '#' line of the CSV; the binary file carries magic and version
/// instead. Round-trips bit-exactly through load_dataset.
void write_dataset(const Dataset& ds, const std::string& csv_path,
                   const std::string& features_path,
                   const std::string& header_comment);

/// Seeded shuffle followed by contiguous partition. Fractions must be
/// positive and sum to 1 within 1e-9; an empty part is an error.
std::vector<Dataset> split(const Dataset& ds, std::span<const double> fractions,
                           std::uint64_t seed);

// LDLF feature-matrix file: magic "LDLF", u32 version, u64 rows, u64 cols,
// then row-major little-endian IEEE-754 doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values; // row-major
};

void write_ldlf(const std::string& path, std::size_t rows, std::size_t cols,
                std::span<const double> row_major);
Matrix read_ldlf(const std::string& path);

} // namespace ldlpose
