// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ldlpose/error.hpp"

namespace ldlpose {

namespace {

constexpr char kMagic[4] = {'L', 'D', 'L', 'P'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kActivationRelu = 0;

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
    throw IoError(path + ": truncated checkpoint");
  }
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t get_u64(std::ifstream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw IoError(path + ": truncated checkpoint");
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::ifstream& in, const std::string& path) {
  return std::bit_cast<double>(get_u64(in, path));
}

} // namespace

void save_checkpoint(const std::string& path, const NetworkConfig& net,
                     const TrainState& state) {
  if (state.parameters.size() != parameter_count(net) ||
      state.adam_m.size() != state.parameters.size() ||
      state.adam_v.size() != state.parameters.size()) {
    throw ShapeError("save_checkpoint: state does not match network config");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");

  out.write(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(net.input_dim));
  put_u32(out, static_cast<std::uint32_t>(net.hidden_dims.size()));
  for (std::size_t h : net.hidden_dims) {
    put_u32(out, static_cast<std::uint32_t>(h));
  }
  put_u32(out, static_cast<std::uint32_t>(net.num_bins));
  put_u32(out, kActivationRelu);
  put_u64(out, net.init_seed);

  put_u64(out, state.step);
  put_f64(out, state.hyper.learning_rate);
  put_f64(out, state.hyper.beta1);
  put_f64(out, state.hyper.beta2);
  put_f64(out, state.hyper.epsilon);

  put_u64(out, state.parameters.size());
  for (double v : state.parameters) put_f64(out, v);
  for (double v : state.adam_m) put_f64(out, v);
  for (double v : state.adam_v) put_f64(out, v);

  if (!out) throw IoError(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(path + ": not an LDLP checkpoint");
  }
  const std::uint32_t version = get_u32(in, path);
  if (version != kFormatVersion) {
    throw IoError(path + ": unsupported checkpoint version " +
                  std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.network.input_dim = get_u32(in, path);
  const std::uint32_t n_hidden = get_u32(in, path);
  ckpt.network.hidden_dims.resize(n_hidden);
  for (std::uint32_t i = 0; i < n_hidden; ++i) {
    ckpt.network.hidden_dims[i] = get_u32(in, path);
  }
  ckpt.network.num_bins = get_u32(in, path);
  const std::uint32_t activation = get_u32(in, path);
  if (activation != kActivationRelu) {
    throw IoError(path + ": unknown activation code " +
                  std::to_string(activation));
  }
  ckpt.network.init_seed = get_u64(in, path);

  ckpt.state.step = get_u64(in, path);
  ckpt.state.hyper.learning_rate = get_f64(in, path);
  ckpt.state.hyper.beta1 = get_f64(in, path);
  ckpt.state.hyper.beta2 = get_f64(in, path);
  ckpt.state.hyper.epsilon = get_f64(in, path);

  const std::uint64_t count = get_u64(in, path);
  if (count != parameter_count(ckpt.network)) {
    throw IoError(path + ": parameter count " + std::to_string(count) +
                  " does not match the stored network configuration");
  }
  ckpt.state.parameters.resize(count);
  ckpt.state.adam_m.resize(count);
  ckpt.state.adam_v.resize(count);
  for (double& v : ckpt.state.parameters) v = get_f64(in, path);
  for (double& v : ckpt.state.adam_m) v = get_f64(in, path);
  for (double& v : ckpt.state.adam_v) v = get_f64(in, path);

  char extra;
  if (in.read(&extra, 1)) {
    throw IoError(path + ": trailing bytes after checkpoint payload");
  }
  return ckpt;
}

} // namespace ldlpose
