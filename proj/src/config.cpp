// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ldlpose/error.hpp"
#include "ldlpose/hashing.hpp"
#include "ldlpose/version.hpp"

namespace ldlpose {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& v, const std::string& key) {
  double out = 0.0;
  const char* begin = v.data();
  const char* end = begin + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
    throw ConfigError(key + ": cannot parse number '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  const char* begin = v.data();
  const char* end = begin + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key + ": cannot parse integer '" + v + "'");
  }
  return out;
}

std::size_t parse_size(const std::string& v, const std::string& key) {
  return static_cast<std::size_t>(parse_u64(v, key));
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": cannot parse boolean '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct KeyDef {
  const char* key; // "section.name"
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      {"binning.num_bins",
       [](RunConfig& c, const std::string& v) {
         c.binning.num_bins = parse_size(v, "binning.num_bins");
       },
       [](const RunConfig& c) { return std::to_string(c.binning.num_bins); }},
      {"binning.range_min_deg",
       [](RunConfig& c, const std::string& v) {
         c.binning.range_min_deg = parse_double(v, "binning.range_min_deg");
       },
       [](const RunConfig& c) { return format_value(c.binning.range_min_deg); }},
      {"binning.range_max_deg",
       [](RunConfig& c, const std::string& v) {
         c.binning.range_max_deg = parse_double(v, "binning.range_max_deg");
       },
       [](const RunConfig& c) { return format_value(c.binning.range_max_deg); }},
      {"binning.decode_centers",
       [](RunConfig& c, const std::string& v) {
         if (v == "midpoint") {
           c.binning.center_mode = BinCenterMode::midpoint;
         } else if (v == "left_edge") {
           c.binning.center_mode = BinCenterMode::left_edge;
         } else {
           throw ConfigError(
               "binning.decode_centers: expected midpoint or left_edge, got '" +
               v + "'");
         }
       },
       [](const RunConfig& c) {
         return c.binning.center_mode == BinCenterMode::midpoint
                    ? "midpoint"
                    : "left_edge";
       }},
      {"encoding.sigma_yaw",
       [](RunConfig& c, const std::string& v) {
         c.sigma_bins[0] = parse_double(v, "encoding.sigma_yaw");
       },
       [](const RunConfig& c) { return format_value(c.sigma_bins[0]); }},
      {"encoding.sigma_pitch",
       [](RunConfig& c, const std::string& v) {
         c.sigma_bins[1] = parse_double(v, "encoding.sigma_pitch");
       },
       [](const RunConfig& c) { return format_value(c.sigma_bins[1]); }},
      {"encoding.sigma_roll",
       [](RunConfig& c, const std::string& v) {
         c.sigma_bins[2] = parse_double(v, "encoding.sigma_roll");
       },
       [](const RunConfig& c) { return format_value(c.sigma_bins[2]); }},
      {"loss.alpha",
       [](RunConfig& c, const std::string& v) {
         c.loss.alpha = parse_double(v, "loss.alpha");
       },
       [](const RunConfig& c) { return format_value(c.loss.alpha); }},
      {"loss.use_euclidean",
       [](RunConfig& c, const std::string& v) {
         c.loss.use_euclidean = parse_bool(v, "loss.use_euclidean");
       },
       [](const RunConfig& c) {
         return c.loss.use_euclidean ? "true" : "false";
       }},
      {"loss.use_kl",
       [](RunConfig& c, const std::string& v) {
         c.loss.use_kl = parse_bool(v, "loss.use_kl");
       },
       [](const RunConfig& c) { return c.loss.use_kl ? "true" : "false"; }},
      {"loss.squared_euclidean",
       [](RunConfig& c, const std::string& v) {
         c.loss.squared_euclidean = parse_bool(v, "loss.squared_euclidean");
       },
       [](const RunConfig& c) {
         return c.loss.squared_euclidean ? "true" : "false";
       }},
      {"loss.label_loss",
       [](RunConfig& c, const std::string& v) {
         if (v == "gld") {
           c.loss.label_loss = LabelLossKind::gld;
         } else if (v == "one_hot_ce") {
           c.loss.label_loss = LabelLossKind::one_hot_ce;
         } else {
           throw ConfigError(
               "loss.label_loss: expected gld or one_hot_ce, got '" + v + "'");
         }
       },
       [](const RunConfig& c) {
         return c.loss.label_loss == LabelLossKind::gld ? "gld" : "one_hot_ce";
       }},
      {"loss.decode_mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "expectation") {
           c.loss.decode_mode = DecodeMode::expectation;
         } else if (v == "argmax") {
           c.loss.decode_mode = DecodeMode::argmax;
         } else {
           throw ConfigError(
               "loss.decode_mode: expected expectation or argmax, got '" + v +
               "'");
         }
       },
       [](const RunConfig& c) {
         return c.loss.decode_mode == DecodeMode::expectation ? "expectation"
                                                              : "argmax";
       }},
      {"network.input_dim",
       [](RunConfig& c, const std::string& v) {
         c.network.input_dim = parse_size(v, "network.input_dim");
       },
       [](const RunConfig& c) { return std::to_string(c.network.input_dim); }},
      {"network.hidden_dims",
       [](RunConfig& c, const std::string& v) {
         c.network.hidden_dims.clear();
         for (const std::string& part : split_list(v)) {
           c.network.hidden_dims.push_back(
               parse_size(part, "network.hidden_dims"));
         }
       },
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.network.hidden_dims.size(); ++i) {
           if (i) out += ",";
           out += std::to_string(c.network.hidden_dims[i]);
         }
         return out;
       }},
      {"network.num_bins",
       [](RunConfig& c, const std::string& v) {
         c.network.num_bins = parse_size(v, "network.num_bins");
       },
       [](const RunConfig& c) { return std::to_string(c.network.num_bins); }},
      {"network.init_seed",
       [](RunConfig& c, const std::string& v) {
         c.network.init_seed = parse_u64(v, "network.init_seed");
       },
       [](const RunConfig& c) { return std::to_string(c.network.init_seed); }},
      {"synth.n_samples",
       [](RunConfig& c, const std::string& v) {
         c.synth.n_samples = parse_size(v, "synth.n_samples");
       },
       [](const RunConfig& c) { return std::to_string(c.synth.n_samples); }},
      {"synth.input_dim",
       [](RunConfig& c, const std::string& v) {
         c.synth.input_dim = parse_size(v, "synth.input_dim");
       },
       [](const RunConfig& c) { return std::to_string(c.synth.input_dim); }},
      {"synth.yaw_std_deg",
       [](RunConfig& c, const std::string& v) {
         c.synth.pose_scale_deg.yaw_deg = parse_double(v, "synth.yaw_std_deg");
       },
       [](const RunConfig& c) {
         return format_value(c.synth.pose_scale_deg.yaw_deg);
       }},
      {"synth.pitch_std_deg",
       [](RunConfig& c, const std::string& v) {
         c.synth.pose_scale_deg.pitch_deg =
             parse_double(v, "synth.pitch_std_deg");
       },
       [](const RunConfig& c) {
         return format_value(c.synth.pose_scale_deg.pitch_deg);
       }},
      {"synth.roll_std_deg",
       [](RunConfig& c, const std::string& v) {
         c.synth.pose_scale_deg.roll_deg = parse_double(v, "synth.roll_std_deg");
       },
       [](const RunConfig& c) {
         return format_value(c.synth.pose_scale_deg.roll_deg);
       }},
      {"synth.noise_std",
       [](RunConfig& c, const std::string& v) {
         c.synth.noise_std = parse_double(v, "synth.noise_std");
       },
       [](const RunConfig& c) { return format_value(c.synth.noise_std); }},
      {"synth.embed_seed",
       [](RunConfig& c, const std::string& v) {
         c.synth.embed_seed = parse_u64(v, "synth.embed_seed");
       },
       [](const RunConfig& c) { return std::to_string(c.synth.embed_seed); }},
      {"synth.sample_seed",
       [](RunConfig& c, const std::string& v) {
         c.synth.sample_seed = parse_u64(v, "synth.sample_seed");
       },
       [](const RunConfig& c) { return std::to_string(c.synth.sample_seed); }},
      {"train.epochs",
       [](RunConfig& c, const std::string& v) {
         c.train.epochs = parse_size(v, "train.epochs");
       },
       [](const RunConfig& c) { return std::to_string(c.train.epochs); }},
      {"train.batch_size",
       [](RunConfig& c, const std::string& v) {
         c.train.batch_size = parse_size(v, "train.batch_size");
       },
       [](const RunConfig& c) { return std::to_string(c.train.batch_size); }},
      {"train.learning_rate",
       [](RunConfig& c, const std::string& v) {
         c.train.adam.learning_rate = parse_double(v, "train.learning_rate");
       },
       [](const RunConfig& c) {
         return format_value(c.train.adam.learning_rate);
       }},
      {"train.beta1",
       [](RunConfig& c, const std::string& v) {
         c.train.adam.beta1 = parse_double(v, "train.beta1");
       },
       [](const RunConfig& c) { return format_value(c.train.adam.beta1); }},
      {"train.beta2",
       [](RunConfig& c, const std::string& v) {
         c.train.adam.beta2 = parse_double(v, "train.beta2");
       },
       [](const RunConfig& c) { return format_value(c.train.adam.beta2); }},
      {"train.epsilon",
       [](RunConfig& c, const std::string& v) {
         c.train.adam.epsilon = parse_double(v, "train.epsilon");
       },
       [](const RunConfig& c) { return format_value(c.train.adam.epsilon); }},
      {"train.shuffle_seed",
       [](RunConfig& c, const std::string& v) {
         c.train.shuffle_seed = parse_u64(v, "train.shuffle_seed");
       },
       [](const RunConfig& c) { return std::to_string(c.train.shuffle_seed); }},
      {"train.val_fraction",
       [](RunConfig& c, const std::string& v) {
         c.val_fraction = parse_double(v, "train.val_fraction");
       },
       [](const RunConfig& c) { return format_value(c.val_fraction); }},
      {"train.split_seed",
       [](RunConfig& c, const std::string& v) {
         c.split_seed = parse_u64(v, "train.split_seed");
       },
       [](const RunConfig& c) { return std::to_string(c.split_seed); }},
      {"data.out_of_range_policy",
       [](RunConfig& c, const std::string& v) {
         if (v == "discard") {
           c.ingest_policy = OutOfRangePolicy::discard;
         } else if (v == "clamp") {
           c.ingest_policy = OutOfRangePolicy::clamp;
         } else {
           throw ConfigError(
               "data.out_of_range_policy: expected discard or clamp, got '" +
               v + "'");
         }
       },
       [](const RunConfig& c) {
         return c.ingest_policy == OutOfRangePolicy::discard ? "discard"
                                                             : "clamp";
       }},
      {"compare.seeds",
       [](RunConfig& c, const std::string& v) {
         c.compare_seeds.clear();
         for (const std::string& part : split_list(v)) {
           c.compare_seeds.push_back(parse_u64(part, "compare.seeds"));
         }
       },
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.compare_seeds.size(); ++i) {
           if (i) out += ",";
           out += std::to_string(c.compare_seeds[i]);
         }
         return out;
       }},
      {"compare.n_train",
       [](RunConfig& c, const std::string& v) {
         c.compare_n_train = parse_size(v, "compare.n_train");
       },
       [](const RunConfig& c) { return std::to_string(c.compare_n_train); }},
      {"compare.n_test",
       [](RunConfig& c, const std::string& v) {
         c.compare_n_test = parse_size(v, "compare.n_test");
       },
       [](const RunConfig& c) { return std::to_string(c.compare_n_test); }},
      {"compare.rare_yaw_threshold_deg",
       [](RunConfig& c, const std::string& v) {
         c.rare_yaw_threshold_deg =
             parse_double(v, "compare.rare_yaw_threshold_deg");
       },
       [](const RunConfig& c) {
         return format_value(c.rare_yaw_threshold_deg);
       }},
  };
  return table;
}

const KeyDef* find_key(const std::string& dotted) {
  for (const KeyDef& def : key_table()) {
    if (dotted == def.key) return &def;
  }
  return nullptr;
}

} // namespace

void RunConfig::validate() const {
  binning.validate();
  for (std::size_t a = 0; a < 3; ++a) {
    encoding(a).validate();
  }
  loss.validate();
  network.validate();
  synth.validate();
  if (train.batch_size == 0) {
    throw ConfigError("train.batch_size must be positive");
  }
  if (!std::isfinite(val_fraction) || val_fraction < 0.0 ||
      val_fraction >= 1.0) {
    throw ConfigError("train.val_fraction must lie in [0, 1)");
  }
  if (network.num_bins != binning.num_bins) {
    throw ConfigError("num_bins mismatch: network.num_bins " +
                      std::to_string(network.num_bins) +
                      " != binning.num_bins " +
                      std::to_string(binning.num_bins));
  }
  if (synth.input_dim != network.input_dim) {
    throw ConfigError("input_dim mismatch: synth.input_dim " +
                      std::to_string(synth.input_dim) +
                      " != network.input_dim " +
                      std::to_string(network.input_dim));
  }
  if (compare_seeds.empty()) {
    throw ConfigError("compare.seeds must not be empty");
  }
  if (compare_n_train == 0 || compare_n_test == 0) {
    throw ConfigError("compare sample counts must be positive");
  }
  if (!std::isfinite(rare_yaw_threshold_deg) || rare_yaw_threshold_deg <= 0.0) {
    throw ConfigError("compare.rare_yaw_threshold_deg must be positive");
  }
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  std::string section;
  for (const KeyDef& def : key_table()) {
    const std::string dotted = def.key;
    const std::size_t dot = dotted.find('.');
    const std::string sec = dotted.substr(0, dot);
    const std::string name = dotted.substr(dot + 1);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << name << " = " << def.get(*this) << "\n";
  }
  return out.str();
}

std::uint64_t RunConfig::config_hash() const { return fnv1a64(canonical()); }

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path + ": cannot open config file");
  }
  RunConfig cfg;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string dotted = section.empty() ? key : section + "." + key;
    const KeyDef* def = find_key(dotted);
    if (!def) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": unknown key '" + dotted + "'");
    }
    def->set(cfg, value);
  }
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& dotted_key,
                    const std::string& value) {
  const KeyDef* def = find_key(dotted_key);
  if (!def) {
    throw ConfigError("unknown config key '" + dotted_key + "'");
  }
  def->set(cfg, value);
}

std::string provenance_header(const RunConfig& cfg) {
  return std::string("ldlpose ") + kVersion +
         " config=" + to_hex16(cfg.config_hash());
}

void echo_config(const RunConfig& cfg, const std::string& dir) {
  const std::filesystem::path path =
      std::filesystem::path(dir) / "effective_config.ini";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "# " << provenance_header(cfg) << "\n" << cfg.canonical();
  if (!out) throw IoError(path.string() + ": write failed");
}

} // namespace ldlpose
