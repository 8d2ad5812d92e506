// Copyright 2026 The Preflearn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// preflearn: pairwise-comparison utility learning experiments.
//
//   preflearn run          --config cfg.json [--output out.csv] [--reproducible]
//   preflearn sweep        --config cfg.json [--output out.csv] [--reproducible]
//   preflearn verify-noise --model logistic|gaussian
//   preflearn demo         --which thm2|thm6
//
// Exit codes: 0 success, 2 usage error, 3 learner abort.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "preflearn/preflearn.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitLearnerAbort = 3;

struct CommonOpts {
  std::string config_path;
  std::string output_override;
  std::string jsonl_override;
  bool reproducible = false;
};

preflearn::ExperimentConfig load_config(const CommonOpts& opts) {
  preflearn::ExperimentConfig cfg = preflearn::config_from_file(opts.config_path);
  if (!opts.output_override.empty()) cfg.output = opts.output_override;
  if (!opts.jsonl_override.empty()) cfg.jsonl = opts.jsonl_override;
  if (opts.reproducible) cfg.reproducible = true;
  return cfg;
}

void print_trial_summary(const std::vector<preflearn::TrialRecord>& records) {
  long long successes = 0;
  double total_e2 = 0.0;
  for (const auto& r : records) {
    successes += r.success_flag ? 1 : 0;
    total_e2 += r.e2;
  }
  std::printf("trials: %zu  successes: %lld  mean e2: %.6g\n", records.size(),
              successes, total_e2 / static_cast<double>(records.size()));
}

int cmd_run(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto records = preflearn::run_experiment(cfg);
  print_trial_summary(records);
  if (!cfg.output.empty()) std::printf("wrote %s\n", cfg.output.c_str());
  for (const auto& r : records) {
    if (!r.diagnostic.empty()) {
      std::fprintf(stderr, "trial %lld aborted: %s\n", r.trial_index,
                   r.diagnostic.c_str());
      return kExitLearnerAbort;
    }
  }
  return kExitOk;
}

int cmd_sweep(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto sweep = preflearn::run_sweep(cfg);
  std::printf("grid_value,median_seminorm,iqr_seminorm,median_e2,median_e1,"
              "median_queries\n");
  for (const auto& row : sweep.summary)
    std::printf("%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", row.grid_value,
                row.median_seminorm, row.iqr_seminorm, row.median_e2,
                row.median_e1, row.median_queries);
  if (sweep.grid_is_n)
    std::printf("log-log slope of median seminorm vs n: %.4f\n", sweep.slope);
  else
    std::printf("median queries per log2(1/eps) step: %.4f\n", sweep.slope);
  if (!cfg.output.empty())
    std::printf("wrote %s and %s.summary.csv\n", cfg.output.c_str(),
                cfg.output.c_str());
  for (const auto& r : sweep.records) {
    if (!r.diagnostic.empty()) {
      std::fprintf(stderr, "trial %lld aborted: %s\n", r.trial_index,
                   r.diagnostic.c_str());
      return kExitLearnerAbort;
    }
  }
  return kExitOk;
}

int cmd_verify_noise(const std::string& model) {
  preflearn::NoiseModel nm = [&] {
    if (model == "logistic") return preflearn::NoiseModel::logistic(1.0);
    if (model == "gaussian") return preflearn::NoiseModel::gaussian(1.0);
    throw std::invalid_argument("verify-noise: --model must be logistic or gaussian");
  }();
  const auto v = preflearn::verify_noise(nm);
  std::printf("model: %s\n", v.model.c_str());
  std::printf("max |F(z)+F(-z)-1| on [-10,10] (1000 pts): %.3e\n",
              v.max_symmetry_violation);
  std::printf("max |F(F^-1(p))-p| on (0,1) grid:          %.3e\n",
              v.max_inverse_roundtrip);
  std::printf("gamma = min F'(z)^2 - F''(z)F(z) on [-1,1]: %.6f\n", v.gamma_b1);
  if (v.model == "logistic")
    std::printf("max |F'^2 - F''F - F^3(1-F)|:               %.3e\n",
                v.max_logistic_identity);
  std::printf("\ninverse-cdf bound slack on (0, 1/2], F^-1(x) - bound(x):\n");
  std::printf("%10s %16s %16s %14s\n", "x", "F^-1(x)", "bound(x)", "slack");
  const auto& rows = v.bound_report.rows;
  for (std::size_t i = 0; i < rows.size(); i += 9)
    std::printf("%10.4f %16.8f %16.8f %14.3e\n", rows[i].x, rows[i].inv,
                rows[i].bound, rows[i].slack);
  std::printf("max slack: %.3e\n", v.bound_report.max_slack);
  std::printf("%s\n", v.pass ? "PASS" : "FAIL");
  return v.pass ? kExitOk : kExitFailure;
}

int cmd_demo(const std::string& which, std::uint64_t seed) {
  if (which == "thm6") {
    const auto demo = preflearn::demo_coordinate_dominant(3, 500, seed);
    std::printf("coordinate-dominant pairs, zero noise, m=3, n=500\n");
    std::printf("hidden weights A = (1,0,0), hidden weights B = (0,1,0), "
                "distance sqrt(2)\n");
    auto print_vec = [](const char* label, const preflearn::Vec& v) {
      std::printf("%s (", label);
      for (std::size_t i = 0; i < v.size(); ++i)
        std::printf("%s%.6f", i ? ", " : "", v[i]);
      std::printf(")\n");
    };
    print_vec("learner output for A:", demo.w_hat_a);
    print_vec("learner output for B:", demo.w_hat_b);
    std::printf("outputs identical: %s\n", demo.identical_outputs ? "yes" : "no");
    std::printf("e2 vs A: %.6f, e2 vs B: %.6f, max: %.6f (>= sqrt(2)/2 = %.6f)\n",
                demo.e2_a, demo.e2_b, demo.max_e2, std::sqrt(2.0) / 2.0);
    const bool ok = demo.identical_outputs && demo.max_e2 >= std::sqrt(2.0) / 2.0;
    std::printf("%s\n", ok ? "PASS" : "FAIL");
    return ok ? kExitOk : kExitFailure;
  }
  if (which == "thm2") {
    const auto demo = preflearn::demo_small_margin({1e-1, 1e-2, 1e-3}, seed);
    std::printf("single fixed pair, logistic(1) noise: labels needed for a "
                "majority vote to recover the true sign in >= 90%% of runs\n");
    std::printf("%12s %16s\n", "margin", "labels needed");
    for (const auto& pt : demo.points)
      std::printf("%12.0e %16lld\n", pt.margin, pt.labels_needed);
    for (std::size_t i = 0; i < demo.ratios.size(); ++i)
      std::printf("growth at step %zu: x%.1f\n", i + 1, demo.ratios[i]);
    const bool ok = demo.grows_10x && demo.quadratic_within_3x;
    std::printf("scaling consistent with margin^-2 (within 3x): %s\n",
                demo.quadratic_within_3x ? "yes" : "no");
    std::printf("%s\n", ok ? "PASS" : "FAIL");
    return ok ? kExitOk : kExitFailure;
  }
  throw std::invalid_argument("demo: --which must be thm2 or thm6");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairwise-comparison utility learning experiments"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string model = "logistic";
  std::string which;
  std::uint64_t demo_seed = 1;

  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("--config", opts.config_path, "config JSON path")->required();
  run->add_option("--output", opts.output_override, "override CSV output path");
  run->add_option("--jsonl", opts.jsonl_override, "also write JSONL detail");
  run->add_flag("--reproducible", opts.reproducible,
                "write wall_seconds as 0 for byte-identical output");

  auto* sweep = app.add_subcommand("sweep", "run a sample-complexity sweep");
  sweep->add_option("--config", opts.config_path, "config JSON path")->required();
  sweep->add_option("--output", opts.output_override, "override CSV output path");
  sweep->add_option("--jsonl", opts.jsonl_override, "also write JSONL detail");
  sweep->add_flag("--reproducible", opts.reproducible,
                  "write wall_seconds as 0 for byte-identical output");

  auto* verify = app.add_subcommand("verify-noise",
                                    "run the noise-model property checks");
  verify->add_option("--model", model, "logistic or gaussian")->required();

  auto* demo = app.add_subcommand("demo", "run an impossibility demonstration");
  demo->add_option("--which", which, "thm2 or thm6")->required();
  demo->add_option("--seed", demo_seed, "demo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(opts);
    if (sweep->parsed()) return cmd_sweep(opts);
    if (verify->parsed()) return cmd_verify_noise(model);
    if (demo->parsed()) return cmd_demo(which, demo_seed);
  } catch (const preflearn::LearnerAbort& e) {
    std::fprintf(stderr, "learner abort: %s\n", e.what());
    return kExitLearnerAbort;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
