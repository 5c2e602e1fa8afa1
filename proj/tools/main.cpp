// SPDX-License-Identifier: Apache-2.0
//
// ldlpose command-line tool: Gaussian label-distribution learning for
// yaw/pitch/roll estimation on feature vectors. Subcommands: encode,
// gradcheck, synth, train, eval, compare. Exit codes: 0 success,
// 1 runtime/numeric failure, 2 usage or configuration error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ldlpose/checkpoint.hpp"
#include "ldlpose/config.hpp"
#include "ldlpose/dataset.hpp"
#include "ldlpose/error.hpp"
#include "ldlpose/evaluation.hpp"
#include "ldlpose/gradcheck.hpp"
#include "ldlpose/hashing.hpp"
#include "ldlpose/label_distribution.hpp"
#include "ldlpose/losses.hpp"
#include "ldlpose/trainer.hpp"
#include "ldlpose/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ldlpose;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct EncodeOptions {
  std::optional<double> yaw;
  std::optional<double> pitch;
  std::optional<double> roll;
  double sigma = 4.0;
  std::size_t bins = 66;
  double range = 99.0;
  std::string out = "distribution.csv";
};

std::string with_suffix(const std::string& path, const std::string& tag) {
  const fs::path p(path);
  fs::path out = p.parent_path() / p.stem();
  out += "." + tag;
  out += p.extension();
  return out.string();
}

int cmd_encode(const EncodeOptions& opt) {
  BinningConfig binning;
  binning.num_bins = opt.bins;
  binning.range_min_deg = -opt.range;
  binning.range_max_deg = opt.range;
  binning.validate();
  EncodingConfig enc{opt.sigma, binning};
  enc.validate();

  std::vector<std::pair<std::string, double>> requested;
  if (opt.yaw) requested.emplace_back("yaw", *opt.yaw);
  if (opt.pitch) requested.emplace_back("pitch", *opt.pitch);
  if (opt.roll) requested.emplace_back("roll", *opt.roll);
  if (requested.empty()) {
    throw ConfigError(
        "encode: give at least one of --gt-yaw/--gt-pitch/--gt-roll");
  }
  for (const auto& [name, angle] : requested) {
    if (!std::isfinite(angle) || angle < binning.range_min_deg ||
        angle > binning.range_max_deg) {
      throw RangeError(name + " angle " + format_g17(angle) + " deg outside [" +
                       format_g17(binning.range_min_deg) + ", " +
                       format_g17(binning.range_max_deg) + "]");
    }
  }

  // Provenance hash over the effective flag values.
  std::string flags = "encode sigma=" + format_g17(opt.sigma) +
                      " bins=" + std::to_string(opt.bins) +
                      " range=" + format_g17(opt.range);
  for (const auto& [name, angle] : requested) {
    flags += " " + name + "=" + format_g17(angle);
  }
  const std::string header = std::string("ldlpose ") + kVersion +
                             " config=" + to_hex16(fnv1a64(flags));

  for (const auto& [name, angle] : requested) {
    const LabelDistribution dist =
        encode_gaussian(angle_to_bin(angle, binning), enc);
    validate_distribution(dist.probs);
    const std::string path =
        requested.size() == 1 ? opt.out : with_suffix(opt.out, name);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "# " << header << "\n";
    out << "bin_center_deg,probability\n";
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
      out << format_g17(bin_center(i, binning)) << ','
          << format_g17(dist.probs[i]) << "\n";
    }
    if (!out) throw IoError(path + ": write failed");
    std::cout << "wrote " << name << " distribution (" << opt.bins
              << " bins) to " << path << "\n";
  }
  return 0;
}

struct GradcheckOptions {
  std::size_t trials = 100;
  std::size_t bins = 66;
  std::uint64_t seed = 2024;
  bool inject_error = false;
};

int cmd_gradcheck(const GradcheckOptions& opt) {
  GradCheckOptions gco;
  gco.trials = opt.trials;
  gco.num_bins = opt.bins;
  gco.seed = opt.seed;
  if (opt.inject_error) gco.inject_error = 1e-3;

  const auto results = run_gradcheck(gco);
  bool all_passed = true;
  for (const auto& r : results) {
    std::printf("%-16s max_rel_err=%.3e  trials=%zu  %s\n", r.name.c_str(),
                r.max_rel_err, r.trials, r.passed ? "ok" : "FAILED");
    all_passed = all_passed && r.passed;
  }
  if (!all_passed) {
    std::string failed;
    for (const auto& r : results) {
      if (!r.passed) failed += (failed.empty() ? "" : ", ") + r.name;
    }
    std::cerr << "gradcheck failed: " << failed << " exceeded tolerance "
              << gco.tolerance << "\n";
    return 1;
  }
  std::printf("all gradients within %.1e of central finite differences\n",
              gco.tolerance);
  return 0;
}

struct ConfigCliOptions {
  std::string config_path;
  std::vector<std::string> overrides; // section.key=value
  std::optional<double> alpha;
};

RunConfig resolve_config(const ConfigCliOptions& opt) {
  RunConfig cfg =
      opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  for (const std::string& item : opt.overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects section.key=value, got '" + item + "'");
    }
    apply_override(cfg, item.substr(0, eq), item.substr(eq + 1));
  }
  if (opt.alpha) {
    apply_override(cfg, "loss.alpha", format_g17(*opt.alpha));
  }
  cfg.validate();
  return cfg;
}

int cmd_synth(const ConfigCliOptions& copt, const std::string& out_dir) {
  const RunConfig cfg = resolve_config(copt);
  fs::create_directories(out_dir);
  const Dataset ds = synth_generate(cfg.synth, cfg.binning);
  const fs::path dir(out_dir);
  write_dataset(ds, (dir / "annotations.csv").string(),
                (dir / "features.ldlf").string(), provenance_header(cfg));
  echo_config(cfg, out_dir);
  std::cout << "wrote " << ds.size() << " samples (input_dim "
            << cfg.synth.input_dim << ") to " << out_dir << "\n";
  return 0;
}

LoadResult load_data_dir(const RunConfig& cfg, const std::string& data_dir) {
  const fs::path dir(data_dir);
  LoadResult loaded = load_dataset((dir / "annotations.csv").string(),
                                   (dir / "features.ldlf").string(),
                                   cfg.binning, cfg.ingest_policy);
  if (loaded.dropped > 0) {
    std::cout << "discarded " << loaded.dropped
              << " out-of-range samples on ingestion\n";
  }
  if (loaded.dataset.empty()) {
    throw ConfigError(data_dir + ": no usable samples");
  }
  if (loaded.dataset.samples.front().features.size() != cfg.network.input_dim) {
    throw ConfigError(
        "feature width " +
        std::to_string(loaded.dataset.samples.front().features.size()) +
        " does not match network.input_dim " +
        std::to_string(cfg.network.input_dim));
  }
  return loaded;
}

void write_metrics_csv(const std::vector<EpochMetrics>& log,
                       const std::string& path, const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << "# " << header << "\n";
  const bool with_val = !log.empty() && log.front().has_validation;
  out << "epoch,total_loss,distribution_loss,mse_loss";
  if (with_val) out << ",val_mae_yaw,val_mae_pitch,val_mae_roll,val_mae_mean";
  out << "\n";
  for (const EpochMetrics& m : log) {
    out << m.epoch << ',' << format_g17(m.total_loss) << ','
        << format_g17(m.distribution_loss) << ',' << format_g17(m.mse_loss);
    if (with_val) {
      out << ',' << format_g17(m.val_mae_yaw) << ','
          << format_g17(m.val_mae_pitch) << ',' << format_g17(m.val_mae_roll)
          << ',' << format_g17(m.val_mae_mean);
    }
    out << "\n";
  }
  if (!out) throw IoError(path + ": write failed");
}

int cmd_train(const ConfigCliOptions& copt, const std::string& data_dir,
              const std::string& out_dir) {
  const RunConfig cfg = resolve_config(copt);
  const LoadResult loaded = load_data_dir(cfg, data_dir);

  Dataset train_ds = loaded.dataset;
  Dataset val_ds;
  const Dataset* val_ptr = nullptr;
  if (cfg.val_fraction > 0.0) {
    const std::array<double, 2> fractions{1.0 - cfg.val_fraction,
                                          cfg.val_fraction};
    auto parts = split(loaded.dataset, fractions, cfg.split_seed);
    train_ds = std::move(parts[0]);
    val_ds = std::move(parts[1]);
    val_ptr = &val_ds;
  }

  fs::create_directories(out_dir);
  const TrainResult result =
      train(train_ds, val_ptr, cfg.network, cfg.loss, cfg.encoding(0),
            cfg.encoding(1), cfg.encoding(2), cfg.train);

  const fs::path dir(out_dir);
  save_checkpoint((dir / "checkpoint.ldlp").string(), cfg.network,
                  result.state);
  write_metrics_csv(result.log, (dir / "metrics.csv").string(),
                    provenance_header(cfg));
  echo_config(cfg, out_dir);

  const EpochMetrics& first = result.log.front();
  const EpochMetrics& last = result.log.back();
  std::printf("trained %zu epochs on %zu samples: loss %.6g -> %.6g\n",
              cfg.train.epochs, train_ds.size(), first.total_loss,
              last.total_loss);
  if (last.has_validation) {
    std::printf(
        "validation MAE (deg): yaw %.4f pitch %.4f roll %.4f mean %.4f\n",
        last.val_mae_yaw, last.val_mae_pitch, last.val_mae_roll,
        last.val_mae_mean);
  }
  return 0;
}

int cmd_eval(const ConfigCliOptions& copt, const std::string& checkpoint_path,
             const std::string& data_dir, const std::string& out_dir) {
  const RunConfig cfg = resolve_config(copt);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (ckpt.network.num_bins != cfg.binning.num_bins) {
    throw ConfigError("checkpoint num_bins " +
                      std::to_string(ckpt.network.num_bins) +
                      " != binning.num_bins " +
                      std::to_string(cfg.binning.num_bins));
  }
  const LoadResult loaded =
      load_dataset((fs::path(data_dir) / "annotations.csv").string(),
                   (fs::path(data_dir) / "features.ldlf").string(), cfg.binning,
                   cfg.ingest_policy);
  if (loaded.dataset.empty()) {
    throw ConfigError(data_dir + ": no usable samples");
  }
  if (loaded.dataset.samples.front().features.size() !=
      ckpt.network.input_dim) {
    throw ConfigError("feature width does not match checkpoint input_dim");
  }

  const EvalReport report =
      evaluate(ckpt.network, ckpt.state.parameters, loaded.dataset, cfg.binning,
               cfg.loss.decode_mode);

  fs::create_directories(out_dir);
  write_eval_csv(report, (fs::path(out_dir) / "report.csv").string(),
                 provenance_header(cfg));
  echo_config(cfg, out_dir);
  print_eval(report, std::cout);
  return 0;
}

int cmd_compare(const ConfigCliOptions& copt, const std::string& out_dir) {
  const RunConfig cfg = resolve_config(copt);

  CompareConfig cc;
  cc.synth = cfg.synth;
  cc.n_train = cfg.compare_n_train;
  cc.n_test = cfg.compare_n_test;
  cc.binning = cfg.binning;
  cc.sigma_bins = cfg.sigma_bins;
  cc.network = cfg.network;
  cc.loss = cfg.loss;
  cc.hyper = cfg.train;
  cc.seeds = cfg.compare_seeds;
  cc.rare_yaw_threshold_deg = cfg.rare_yaw_threshold_deg;

  fs::create_directories(out_dir);
  const CompareReport report = compare_losses(cc);
  write_comparison_csv(report, (fs::path(out_dir) / "comparison.csv").string(),
                       provenance_header(cfg));
  echo_config(cfg, out_dir);
  print_comparison(report, std::cout);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian label-distribution learning for facial pose "
               "(yaw/pitch/roll) estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("ldlpose ") + kVersion);

  EncodeOptions enc_opt;
  CLI::App* enc =
      app.add_subcommand("encode", "Emit a Gaussian label distribution as CSV");
  enc->add_option("--gt-yaw", enc_opt.yaw, "ground-truth yaw in degrees");
  enc->add_option("--gt-pitch", enc_opt.pitch, "ground-truth pitch in degrees");
  enc->add_option("--gt-roll", enc_opt.roll, "ground-truth roll in degrees");
  enc->add_option("--sigma", enc_opt.sigma, "std-dev in bin units")
      ->capture_default_str();
  enc->add_option("--bins", enc_opt.bins, "number of bins")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000}))
      ->capture_default_str();
  enc->add_option("--range", enc_opt.range, "symmetric range in degrees")
      ->capture_default_str();
  enc->add_option("--out", enc_opt.out, "output CSV path")
      ->capture_default_str();

  GradcheckOptions gc_opt;
  CLI::App* gc = app.add_subcommand(
      "gradcheck", "Verify analytic gradients against finite differences");
  gc->add_option("--trials", gc_opt.trials, "random instances per loss")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}))
      ->capture_default_str();
  gc->add_option("--bins", gc_opt.bins, "number of bins")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
      ->capture_default_str();
  gc->add_option("--seed", gc_opt.seed, "rng seed")->capture_default_str();
  gc->add_flag("--inject-error", gc_opt.inject_error,
               "testing hook: perturb analytic gradients so the check fails");

  ConfigCliOptions synth_cfg;
  std::string synth_out = "out";
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate the synthetic imbalanced pose dataset");
  synth->add_option("--config", synth_cfg.config_path, "config file");
  synth->add_option("--set", synth_cfg.overrides,
                    "override, section.key=value (repeatable)");
  synth->add_option("--out-dir", synth_out, "output directory")
      ->capture_default_str();

  ConfigCliOptions train_cfg;
  std::string train_data;
  std::string train_out = "out";
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train the multi-head network");
  train_cmd->add_option("--config", train_cfg.config_path, "config file");
  train_cmd->add_option("--set", train_cfg.overrides,
                        "override, section.key=value (repeatable)");
  train_cmd->add_option("--alpha", train_cfg.alpha,
                        "shortcut for --set loss.alpha=...");
  train_cmd
      ->add_option("--data-dir", train_data,
                   "directory with annotations.csv + features.ldlf")
      ->required();
  train_cmd->add_option("--out-dir", train_out, "output directory")
      ->capture_default_str();

  ConfigCliOptions eval_cfg;
  std::string eval_ckpt;
  std::string eval_data;
  std::string eval_out = "out";
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--config", eval_cfg.config_path, "config file");
  eval_cmd->add_option("--set", eval_cfg.overrides,
                       "override, section.key=value (repeatable)");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")
      ->required();
  eval_cmd
      ->add_option("--data-dir", eval_data,
                   "directory with annotations.csv + features.ldlf")
      ->required();
  eval_cmd->add_option("--out-dir", eval_out, "output directory")
      ->capture_default_str();

  ConfigCliOptions cmp_cfg;
  std::string cmp_out = "out";
  CLI::App* cmp = app.add_subcommand(
      "compare", "Paired GLD vs one-hot cross-entropy experiment");
  cmp->add_option("--config", cmp_cfg.config_path, "config file");
  cmp->add_option("--set", cmp_cfg.overrides,
                  "override, section.key=value (repeatable)");
  cmp->add_option("--alpha", cmp_cfg.alpha, "shortcut for --set loss.alpha=...");
  cmp->add_option("--out-dir", cmp_out, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (*enc) return cmd_encode(enc_opt);
    if (*gc) return cmd_gradcheck(gc_opt);
    if (*synth) return cmd_synth(synth_cfg, synth_out);
    if (*train_cmd) return cmd_train(train_cfg, train_data, train_out);
    if (*eval_cmd) return cmd_eval(eval_cfg, eval_ckpt, eval_data, eval_out);
    if (*cmp) return cmd_compare(cmp_cfg, cmp_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
