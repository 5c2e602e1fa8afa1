// SPDX-License-Identifier: Apache-2.0
#include "ldlpose/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "ldlpose/error.hpp"

namespace ldlpose {

namespace {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int digits = 4) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

const char* arm_name(LabelLossKind kind) {
  return kind == LabelLossKind::gld ? "gld" : "one_hot_ce";
}

std::array<std::vector<double>, 3> predict_angles(const NetworkConfig& net,
                                                  std::span<const double> params,
                                                  const Dataset& ds,
                                                  const BinningConfig& binning,
                                                  DecodeMode mode) {
  if (net.num_bins != binning.num_bins) {
    throw ConfigError("predict_angles: network num_bins != binning num_bins");
  }
  std::array<std::vector<double>, 3> out;
  for (auto& v : out) v.reserve(ds.size());
  for (const Sample& s : ds.samples) {
    const auto logits = forward(net, params, s.features);
    for (std::size_t a = 0; a < 3; ++a) {
      const PredictedDistribution f = softmax(logits[a]);
      out[a].push_back(decode(f.probs, binning, mode));
    }
  }
  return out;
}

EvalReport evaluate(const NetworkConfig& net, std::span<const double> params,
                    const Dataset& ds, const BinningConfig& binning,
                    DecodeMode mode) {
  if (ds.empty()) {
    throw ConfigError("evaluate: dataset is empty");
  }
  const auto predicted = predict_angles(net, params, ds, binning, mode);

  EvalReport report;
  report.n_eval = ds.size();

  const std::size_t n_bands = kStratumEdgesDeg.size() - 1;
  std::array<double, 3> err_sum{};
  std::array<std::vector<double>, 3> band_sum;
  std::array<std::vector<std::size_t>, 3> band_count;
  for (std::size_t a = 0; a < 3; ++a) {
    band_sum[a].assign(n_bands, 0.0);
    band_count[a].assign(n_bands, 0);
  }

  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      const double gt = ds.samples[i].pose.component(a);
      const double err = std::abs(predicted[a][i] - gt);
      err_sum[a] += err;
      const double mag = std::abs(gt);
      std::size_t band = n_bands - 1;
      for (std::size_t b = 0; b + 1 < n_bands; ++b) {
        if (mag >= kStratumEdgesDeg[b] && mag < kStratumEdgesDeg[b + 1]) {
          band = b;
          break;
        }
      }
      band_sum[a][band] += err;
      band_count[a][band] += 1;
    }
  }

  const auto n = static_cast<double>(ds.size());
  report.mae_yaw = err_sum[0] / n;
  report.mae_pitch = err_sum[1] / n;
  report.mae_roll = err_sum[2] / n;
  report.mae_mean = (report.mae_yaw + report.mae_pitch + report.mae_roll) / 3.0;

  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < n_bands; ++b) {
      StratumMae s;
      s.lo_deg = kStratumEdgesDeg[b];
      s.hi_deg = kStratumEdgesDeg[b + 1];
      s.count = band_count[a][b];
      s.mae_deg = s.count > 0
                      ? band_sum[a][b] / static_cast<double>(s.count)
                      : 0.0;
      report.strata[a].push_back(s);
    }
  }
  return report;
}

void write_eval_csv(const EvalReport& report, const std::string& path,
                    const std::string& header_comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "angle,stratum,count,mae_deg\n";
  const std::array<const char*, 3> names = kAngleNames;
  const std::array<double, 3> overall{report.mae_yaw, report.mae_pitch,
                                      report.mae_roll};
  for (std::size_t a = 0; a < 3; ++a) {
    out << names[a] << ",overall," << report.n_eval << ','
        << format_g17(overall[a]) << "\n";
    for (const StratumMae& s : report.strata[a]) {
      out << names[a] << ",[" << format_g17(s.lo_deg) << ':'
          << format_g17(s.hi_deg) << ")," << s.count << ','
          << format_g17(s.mae_deg) << "\n";
    }
  }
  out << "mean,overall," << report.n_eval << ',' << format_g17(report.mae_mean)
      << "\n";
  if (!out) throw IoError(path + ": write failed");
}

void print_eval(const EvalReport& report, std::ostream& out) {
  out << "MAE over " << report.n_eval << " samples (deg)\n";
  out << "  angle      overall";
  for (std::size_t b = 0; b + 1 < kStratumEdgesDeg.size(); ++b) {
    out << "   [" << kStratumEdgesDeg[b] << ',' << kStratumEdgesDeg[b + 1]
        << ')';
  }
  out << "\n";
  const std::array<double, 3> overall{report.mae_yaw, report.mae_pitch,
                                      report.mae_roll};
  for (std::size_t a = 0; a < 3; ++a) {
    out << "  " << kAngleNames[a];
    for (std::size_t pad = std::string(kAngleNames[a]).size(); pad < 9; ++pad)
      out << ' ';
    out << format_fixed(overall[a]);
    for (const StratumMae& s : report.strata[a]) {
      out << "   " << format_fixed(s.mae_deg) << " (n=" << s.count << ')';
    }
    out << "\n";
  }
  out << "  mean     " << format_fixed(report.mae_mean) << "\n";
}

CompareReport compare_losses(const CompareConfig& cfg) {
  if (cfg.seeds.empty()) {
    throw ConfigError("compare: at least one seed is required");
  }
  cfg.binning.validate();
  cfg.network.validate();
  cfg.loss.validate();

  std::array<EncodingConfig, 3> enc;
  for (std::size_t a = 0; a < 3; ++a) {
    enc[a] = EncodingConfig{cfg.sigma_bins[a], cfg.binning};
    enc[a].validate();
  }

  CompareReport report;
  report.rare_yaw_threshold_deg = cfg.rare_yaw_threshold_deg;

  std::vector<double> overall_gld, overall_ce, rare_gld, rare_ce;

  for (const std::uint64_t seed : cfg.seeds) {
    SynthConfig train_synth = cfg.synth;
    train_synth.n_samples = cfg.n_train;
    train_synth.sample_seed = cfg.synth.sample_seed + 2 * seed + 1;
    SynthConfig test_synth = cfg.synth;
    test_synth.n_samples = cfg.n_test;
    test_synth.sample_seed = cfg.synth.sample_seed + 2 * seed + 2;

    const Dataset train_ds = synth_generate(train_synth, cfg.binning);
    const Dataset test_ds = synth_generate(test_synth, cfg.binning);

    NetworkConfig net = cfg.network;
    net.init_seed = cfg.network.init_seed + seed;
    TrainHyper hyper = cfg.hyper;
    hyper.shuffle_seed = cfg.hyper.shuffle_seed + seed;

    std::array<TrainResult, 2> results;
    const std::array<LabelLossKind, 2> arms{LabelLossKind::gld,
                                            LabelLossKind::one_hot_ce};
    for (std::size_t k = 0; k < 2; ++k) {
      LossConfig loss = cfg.loss;
      loss.label_loss = arms[k];
      try {
        results[k] =
            train(train_ds, nullptr, net, loss, enc[0], enc[1], enc[2], hyper);
      } catch (const NumericError& e) {
        throw NumericError("compare: " + std::string(arm_name(arms[k])) +
                           " arm, seed " + std::to_string(seed) + ": " +
                           e.what());
      }
    }

    // Paired design: identical starting point and batch order.
    if (results[0].init_param_hash != results[1].init_param_hash ||
        results[0].first_epoch_order_hash != results[1].first_epoch_order_hash) {
      throw Error("compare: arms diverged in initialization or batch order");
    }

    for (std::size_t k = 0; k < 2; ++k) {
      const EvalReport er = evaluate(net, results[k].state.parameters, test_ds,
                                     cfg.binning, cfg.loss.decode_mode);
      const auto predicted =
          predict_angles(net, results[k].state.parameters, test_ds, cfg.binning,
                         cfg.loss.decode_mode);
      double rare_sum = 0.0;
      std::size_t rare_count = 0;
      for (std::size_t i = 0; i < test_ds.size(); ++i) {
        const double gt = test_ds.samples[i].pose.yaw_deg;
        if (std::abs(gt) >= cfg.rare_yaw_threshold_deg) {
          rare_sum += std::abs(predicted[0][i] - gt);
          ++rare_count;
        }
      }

      ArmSeedResult row;
      row.arm = arms[k];
      row.seed = seed;
      row.mae_yaw = er.mae_yaw;
      row.mae_pitch = er.mae_pitch;
      row.mae_roll = er.mae_roll;
      row.overall_mae = er.mae_mean;
      row.rare_yaw_count = rare_count;
      row.rare_yaw_mae =
          rare_count > 0 ? rare_sum / static_cast<double>(rare_count) : 0.0;
      report.rows.push_back(row);

      (arms[k] == LabelLossKind::gld ? overall_gld : overall_ce)
          .push_back(row.overall_mae);
      (arms[k] == LabelLossKind::gld ? rare_gld : rare_ce)
          .push_back(row.rare_yaw_mae);
    }
  }

  report.median_overall_gld = median(overall_gld);
  report.median_overall_ce = median(overall_ce);
  report.median_rare_gld = median(rare_gld);
  report.median_rare_ce = median(rare_ce);
  return report;
}

void write_comparison_csv(const CompareReport& report, const std::string& path,
                          const std::string& header_comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "arm,seed,metric,value\n";
  for (const ArmSeedResult& r : report.rows) {
    const std::string arm = arm_name(r.arm);
    out << arm << ',' << r.seed << ",mae_yaw," << format_g17(r.mae_yaw) << "\n";
    out << arm << ',' << r.seed << ",mae_pitch," << format_g17(r.mae_pitch)
        << "\n";
    out << arm << ',' << r.seed << ",mae_roll," << format_g17(r.mae_roll)
        << "\n";
    out << arm << ',' << r.seed << ",overall_mae," << format_g17(r.overall_mae)
        << "\n";
    out << arm << ',' << r.seed << ",rare_yaw_mae,"
        << format_g17(r.rare_yaw_mae) << "\n";
    out << arm << ',' << r.seed << ",rare_yaw_count," << r.rare_yaw_count
        << "\n";
  }
  out << "gld,median,overall_mae," << format_g17(report.median_overall_gld)
      << "\n";
  out << "gld,median,rare_yaw_mae," << format_g17(report.median_rare_gld)
      << "\n";
  out << "one_hot_ce,median,overall_mae,"
      << format_g17(report.median_overall_ce) << "\n";
  out << "one_hot_ce,median,rare_yaw_mae,"
      << format_g17(report.median_rare_ce) << "\n";
  if (!out) throw IoError(path + ": write failed");
}

void print_comparison(const CompareReport& report, std::ostream& out) {
  out << "paired comparison, rare stratum |yaw| >= "
      << format_fixed(report.rare_yaw_threshold_deg, 1) << " deg\n";
  out << "  arm         seed   overall MAE   rare-yaw MAE   rare n\n";
  for (const ArmSeedResult& r : report.rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "  %-10s %5llu   %11.4f   %12.4f   %6zu\n",
                  arm_name(r.arm), static_cast<unsigned long long>(r.seed),
                  r.overall_mae, r.rare_yaw_mae, r.rare_yaw_count);
    out << line;
  }
  char line[160];
  std::snprintf(line, sizeof(line), "  %-10s %5s   %11.4f   %12.4f\n", "gld",
                "med", report.median_overall_gld, report.median_rare_gld);
  out << line;
  std::snprintf(line, sizeof(line), "  %-10s %5s   %11.4f   %12.4f\n",
                "one_hot_ce", "med", report.median_overall_ce,
                report.median_rare_ce);
  out << line;
  const bool rare_better = report.median_rare_gld < report.median_rare_ce;
  out << "  median rare-yaw MAE: gld "
      << (rare_better ? "<" : ">=") << " one_hot_ce\n";
}

} // namespace ldlpose
