// SPDX-License-Identifier: Apache-2.0
//
// Integration tests for the ldlpose CLI surface: exit codes, error
// messages, and the synth -> train -> eval pipeline. Usage:
//   cli_tests <path-to-ldlpose-binary> [scratch-dir]
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "subprocess.hpp"

namespace fs = std::filesystem;
using testutil::run;
using testutil::slurp;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_tests <ldlpose-binary> [scratch-dir]\n");
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch =
      argc > 2 ? fs::path(argv[2]) : fs::path("cli_scratch");
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  const std::string log = (scratch / "out.txt").string();
  auto in_scratch = [&](const std::string& name) {
    return (scratch / name).string();
  };

  // --- encode error handling -------------------------------------------
  int rc = run(cli + " encode --gt-yaw 150", log);
  check(rc == 2, "encode with out-of-range yaw exits 2");
  check(slurp(log).find("yaw") != std::string::npos,
        "encode error message names the angle");

  rc = run(cli + " encode --gt-yaw 0 --sigma 0.001 --out " +
               in_scratch("tight.csv"),
           log);
  const auto tight = testutil::read_two_column_csv(in_scratch("tight.csv"));
  double peak = 0.0;
  for (const auto& [center, p] : tight) peak = std::max(peak, p);
  check(rc == 0 && tight.size() == 66 && peak >= 0.999,
        "tiny sigma concentrates the mass in one row");

  // --- gradcheck exit codes --------------------------------------------
  rc = run(cli + " gradcheck --trials 0", log);
  check(rc == 2, "gradcheck --trials 0 is a usage error (exit 2)");
  rc = run(cli + " gradcheck --trials 4", log);
  check(rc == 0, "gradcheck with few trials passes (exit 0)");
  rc = run(cli + " gradcheck --trials 4 --inject-error", log);
  check(rc == 1, "gradcheck with injected error fails (exit 1)");

  // --- config validation happens before any work ------------------------
  const std::string mismatch_dir = in_scratch("mismatch");
  rc = run(cli + " synth --set binning.num_bins=50 --out-dir " + mismatch_dir,
           log);
  check(rc == 2, "num_bins mismatch exits 2");
  check(!fs::exists(mismatch_dir), "no output directory created on config error");

  // --- pipeline at the default configuration ----------------------------
  const std::string data_dir = in_scratch("data");
  const std::string run_dir = in_scratch("run");
  const std::string eval_dir = in_scratch("eval");
  rc = run(cli + " synth --out-dir " + data_dir, log);
  check(rc == 0, "synth with defaults succeeds");
  rc = run(cli + " train --data-dir " + data_dir + " --out-dir " + run_dir, log);
  check(rc == 0, "train with defaults succeeds");
  rc = run(cli + " eval --checkpoint " + run_dir +
               "/checkpoint.ldlp --data-dir " + data_dir + " --out-dir " +
               eval_dir,
           log);
  check(rc == 0, "eval succeeds");

  // Parse the overall mean MAE from report.csv.
  double mae_mean = 1e9;
  {
    std::ifstream in(eval_dir + "/report.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("mean,overall,", 0) == 0) {
        mae_mean = std::stod(line.substr(line.rfind(',') + 1));
      }
    }
  }
  check(mae_mean < 15.0, "pipeline MAE below the 15 degree sanity bound (got " +
                             std::to_string(mae_mean) + ")");

  // --- alpha changes the checkpoint; reruns do not -----------------------
  const std::string small = in_scratch("small");
  rc = run(cli + " synth --set synth.n_samples=200 --out-dir " + small, log);
  check(rc == 0, "small synth succeeds");
  const std::string base_flags = " train --set train.epochs=2 --data-dir " +
                                 small + " --out-dir ";
  rc = run(cli + base_flags + in_scratch("a0") + " --alpha 0", log);
  rc |= run(cli + base_flags + in_scratch("a001") + " --alpha 0.01", log);
  rc |= run(cli + base_flags + in_scratch("a0_again") + " --alpha 0", log);
  check(rc == 0, "alpha sweep trainings succeed");
  check(!testutil::files_identical(in_scratch("a0") + "/checkpoint.ldlp",
                                   in_scratch("a001") + "/checkpoint.ldlp"),
        "alpha 0 and alpha 0.01 produce different checkpoints");
  check(testutil::files_identical(in_scratch("a0") + "/checkpoint.ldlp",
                                  in_scratch("a0_again") + "/checkpoint.ldlp"),
        "identical config produces byte-identical checkpoints");

  if (g_failures > 0) {
    std::printf("%d CLI check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all CLI checks passed\n");
  return 0;
}
