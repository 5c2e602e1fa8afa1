// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "ldlpose/error.hpp"
#include "ldlpose/rng.hpp"

namespace ldlpose {

namespace {

constexpr char kLdlfMagic[4] = {'L', 'D', 'L', 'F'};
constexpr std::uint32_t kLdlfVersion = 1;
constexpr const char* kCsvHeader = "id,yaw_deg,pitch_deg,roll_deg";

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw IoError(path + ": truncated file");
  }
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t get_u64(std::ifstream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw IoError(path + ": truncated file");
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::ifstream& in, const std::string& path) {
  return std::bit_cast<double>(get_u64(in, path));
}

double parse_double_field(const std::string& field, const std::string& path,
                          std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw IoError(path + ":" + std::to_string(line_no) +
                  ": cannot parse number '" + field + "'");
  }
  if (!std::isfinite(value)) {
    throw IoError(path + ":" + std::to_string(line_no) +
                  ": non-finite value '" + field + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

PoseEmbedding::PoseEmbedding(std::size_t input_dim, std::uint64_t seed)
    : input_dim_(input_dim), projection_(input_dim * kLiftDim) {
  if (input_dim == 0) {
    throw ConfigError("embedding: input_dim must be positive");
  }
  std::mt19937_64 g(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(kLiftDim));
  for (double& w : projection_) {
    w = rng::normal(g) * scale;
  }
}

std::vector<double> PoseEmbedding::operator()(const PoseTriple& pose) const {
  constexpr double deg2rad = std::numbers::pi / 180.0;
  std::array<double, 6> trig{};
  for (std::size_t a = 0; a < 3; ++a) {
    const double rad = pose.component(a) * deg2rad;
    trig[2 * a] = std::sin(rad);
    trig[2 * a + 1] = std::cos(rad);
  }
  std::array<double, kLiftDim> lift{};
  std::size_t k = 0;
  for (std::size_t i = 0; i < 6; ++i) lift[k++] = trig[i];
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) lift[k++] = trig[i] * trig[j];
  }

  std::vector<double> out(input_dim_, 0.0);
  for (std::size_t r = 0; r < input_dim_; ++r) {
    const double* row = &projection_[r * kLiftDim];
    double acc = 0.0;
    for (std::size_t c = 0; c < kLiftDim; ++c) {
      acc += row[c] * lift[c];
    }
    out[r] = acc;
  }
  return out;
}

void SynthConfig::validate() const {
  if (n_samples == 0) throw ConfigError("synth: n_samples must be positive");
  if (input_dim == 0) throw ConfigError("synth: input_dim must be positive");
  for (std::size_t a = 0; a < 3; ++a) {
    const double s = pose_scale_deg.component(a);
    if (!std::isfinite(s) || !(s > 0.0)) {
      throw ConfigError(std::string("synth: ") + kAngleNames[a] +
                        " pose scale must be positive");
    }
  }
  if (!std::isfinite(noise_std) || noise_std < 0.0) {
    throw ConfigError("synth: noise_std must be non-negative");
  }
}

Dataset synth_generate(const SynthConfig& cfg, const BinningConfig& binning) {
  cfg.validate();
  binning.validate();

  const PoseEmbedding embed(cfg.input_dim, cfg.embed_seed);
  std::mt19937_64 g(cfg.sample_seed);

  Dataset ds;
  ds.provenance = Provenance::synthetic;
  ds.seed = cfg.sample_seed;
  ds.samples.reserve(cfg.n_samples);

  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    PoseTriple pose;
    double* angles[3] = {&pose.yaw_deg, &pose.pitch_deg, &pose.roll_deg};
    for (std::size_t a = 0; a < 3; ++a) {
      const double scale = cfg.pose_scale_deg.component(a);
      double v;
      do {
        v = rng::normal(g) * scale;
      } while (v < binning.range_min_deg || v > binning.range_max_deg);
      *angles[a] = v;
    }
    Sample s;
    s.pose = pose;
    s.features = embed(pose);
    if (cfg.noise_std > 0.0) {
      for (double& f : s.features) {
        f += cfg.noise_std * rng::normal(g);
      }
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void write_ldlf(const std::string& path, std::size_t rows, std::size_t cols,
                std::span<const double> row_major) {
  if (row_major.size() != rows * cols) {
    throw ShapeError("write_ldlf: value count does not match rows * cols");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out.write(kLdlfMagic, 4);
  put_u32(out, kLdlfVersion);
  put_u64(out, rows);
  put_u64(out, cols);
  for (double v : row_major) put_f64(out, v);
  if (!out) throw IoError(path + ": write failed");
}

Matrix read_ldlf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kLdlfMagic, 4) != 0) {
    throw IoError(path + ": not an LDLF file");
  }
  const std::uint32_t version = get_u32(in, path);
  if (version != kLdlfVersion) {
    throw IoError(path + ": unsupported LDLF version " +
                  std::to_string(version));
  }
  Matrix m;
  m.rows = get_u64(in, path);
  m.cols = get_u64(in, path);
  m.values.resize(m.rows * m.cols);
  for (double& v : m.values) v = get_f64(in, path);
  return m;
}

LoadResult load_dataset(const std::string& csv_path,
                        const std::string& features_path,
                        const BinningConfig& binning, OutOfRangePolicy policy) {
  binning.validate();

  std::ifstream csv(csv_path);
  if (!csv) throw IoError(csv_path + ": cannot open");

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<PoseTriple> poses;
  while (std::getline(csv, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw IoError(csv_path + ":" + std::to_string(line_no) +
                      ": expected header '" + kCsvHeader + "', got '" + line +
                      "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw IoError(csv_path + ":" + std::to_string(line_no) +
                    ": expected 4 columns, got " +
                    std::to_string(fields.size()));
    }
    PoseTriple p;
    p.yaw_deg = parse_double_field(fields[1], csv_path, line_no);
    p.pitch_deg = parse_double_field(fields[2], csv_path, line_no);
    p.roll_deg = parse_double_field(fields[3], csv_path, line_no);
    poses.push_back(p);
  }
  if (!header_seen) {
    throw IoError(csv_path + ": missing header row");
  }

  const Matrix m = read_ldlf(features_path);
  if (m.rows != poses.size()) {
    throw IoError("row-count mismatch: " + csv_path + " has " +
                  std::to_string(poses.size()) + " rows, " + features_path +
                  " has " + std::to_string(m.rows));
  }

  LoadResult result;
  result.dataset.provenance = Provenance::ingested;
  result.dataset.samples.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    PoseTriple p = poses[i];
    bool in_range = true;
    double* angles[3] = {&p.yaw_deg, &p.pitch_deg, &p.roll_deg};
    for (double* a : angles) {
      if (*a < binning.range_min_deg || *a > binning.range_max_deg) {
        if (policy == OutOfRangePolicy::clamp) {
          *a = std::clamp(*a, binning.range_min_deg, binning.range_max_deg);
        } else {
          in_range = false;
        }
      }
    }
    if (!in_range) {
      ++result.dropped;
      continue;
    }
    Sample s;
    s.pose = p;
    s.features.assign(m.values.begin() + static_cast<std::ptrdiff_t>(i * m.cols),
                      m.values.begin() +
                          static_cast<std::ptrdiff_t>((i + 1) * m.cols));
    for (double f : s.features) {
      if (!std::isfinite(f)) {
        throw IoError(features_path + ": non-finite feature in row " +
                      std::to_string(i));
      }
    }
    result.dataset.samples.push_back(std::move(s));
  }
  return result;
}

void write_dataset(const Dataset& ds, const std::string& csv_path,
                   const std::string& features_path,
                   const std::string& header_comment) {
  const std::size_t cols = ds.empty() ? 0 : ds.samples.front().features.size();
  for (const Sample& s : ds.samples) {
    if (s.features.size() != cols) {
      throw ShapeError("write_dataset: inconsistent feature widths");
    }
  }

  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw IoError(csv_path + ": cannot open for writing");
  if (!header_comment.empty()) csv << "# " << header_comment << "\n";
  csv << kCsvHeader << "\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const PoseTriple& p = ds.samples[i].pose;
    csv << i << ',' << format_g17(p.yaw_deg) << ',' << format_g17(p.pitch_deg)
        << ',' << format_g17(p.roll_deg) << "\n";
  }
  if (!csv) throw IoError(csv_path + ": write failed");

  std::vector<double> values;
  values.reserve(ds.samples.size() * cols);
  for (const Sample& s : ds.samples) {
    values.insert(values.end(), s.features.begin(), s.features.end());
  }
  write_ldlf(features_path, ds.samples.size(), cols, values);
}

std::vector<Dataset> split(const Dataset& ds, std::span<const double> fractions,
                           std::uint64_t seed) {
  if (fractions.empty()) {
    throw ConfigError("split: no fractions given");
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (!std::isfinite(f) || !(f > 0.0)) {
      throw ConfigError("split: fractions must be positive");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split: fractions sum to " + std::to_string(sum) +
                      ", expected 1");
  }

  std::mt19937_64 g(seed);
  const std::vector<std::size_t> perm = rng::permutation(ds.size(), g);

  const std::size_t n = ds.size();
  std::vector<std::size_t> bounds;
  bounds.push_back(0);
  double cum = 0.0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    cum += fractions[k];
    const auto b = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * cum + 1e-9));
    bounds.push_back(std::min(b, n));
  }
  bounds.back() = n;

  std::vector<Dataset> parts;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    if (bounds[k + 1] <= bounds[k]) {
      throw ConfigError("split: part " + std::to_string(k) + " is empty");
    }
    Dataset part;
    part.provenance = ds.provenance;
    part.seed = ds.seed;
    part.samples.reserve(bounds[k + 1] - bounds[k]);
    for (std::size_t i = bounds[k]; i < bounds[k + 1]; ++i) {
      part.samples.push_back(ds.samples[perm[i]]);
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

} // namespace ldlpose
