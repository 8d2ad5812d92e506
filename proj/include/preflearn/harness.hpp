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

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"
#include "preflearn/active.hpp"
#include "preflearn/distributions.hpp"
#include "preflearn/metrics.hpp"
#include "preflearn/oracle.hpp"
#include "preflearn/passive.hpp"

// Trial orchestration: per-trial seeding, learner dispatch, metric
// collection, CSV/JSONL output, sample-complexity sweeps, and the two
// runnable impossibility demonstrations.

namespace preflearn {

enum class Mode {
  kPassiveErm,
  kPassiveMle,
  kActiveNoiseFree,
  kActiveNoisy,
  kImpossibilityDemo,
};

inline std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kPassiveErm: return "passive_erm";
    case Mode::kPassiveMle: return "passive_mle";
    case Mode::kActiveNoiseFree: return "active_noise_free";
    case Mode::kActiveNoisy: return "active_noisy";
    case Mode::kImpossibilityDemo: return "impossibility_demo";
  }
  return "?";
}

inline Mode mode_from_name(const std::string& name) {
  if (name == "passive_erm") return Mode::kPassiveErm;
  if (name == "passive_mle") return Mode::kPassiveMle;
  if (name == "active_noise_free") return Mode::kActiveNoiseFree;
  if (name == "active_noisy") return Mode::kActiveNoisy;
  if (name == "impossibility_demo") return Mode::kImpossibilityDemo;
  throw std::invalid_argument("unknown mode: " + name);
}

struct ExperimentConfig {
  Mode mode = Mode::kActiveNoiseFree;
  int m = 2;
  double eps = 0.1;
  double delta = 0.1;
  NoiseModel noise = NoiseModel::zero();
  PairDistribution distribution = PairDistribution::uniform_box(2);
  Embedding embedding = Embedding::identity(2);
  long long n = 0;      // passive dataset size
  Vec n_grid;           // sweep grid over n (passive modes)
  Vec eps_grid;         // sweep grid over eps (active modes)
  int trials = 1;
  long long n_mc = 10000;     // pairs for the e1 Monte Carlo estimate
  long long n_sigma = 10000;  // pairs for Sigma in active modes
  MleSettings mle;            // optimizer settings for passive_mle
  std::uint64_t master_seed = 1;
  std::string output;  // CSV path ("" = don't write)
  std::string jsonl;   // optional JSONL path with full per-trial detail
  // Writes wall_seconds as 0 so outputs can be compared byte for byte.
  bool reproducible = false;

  bool is_passive() const {
    return mode == Mode::kPassiveErm || mode == Mode::kPassiveMle ||
           mode == Mode::kImpossibilityDemo;
  }

  void validate() const {
    if (m < 2) throw std::invalid_argument("config: need m >= 2");
    if (trials < 1) throw std::invalid_argument("config: need trials >= 1");
    if (n_mc < 1) throw std::invalid_argument("config: need n_mc >= 1");
    if (embedding.output_dim() != m)
      throw std::invalid_argument("config: embedding output dim != m");
    if (distribution.dim() != embedding.input_dim())
      throw std::invalid_argument("config: distribution dim != embedding dim");
    if (is_passive() && n < 1 && n_grid.empty())
      throw std::invalid_argument("config: passive modes need n >= 1");
    if (!is_passive() && !(eps > 0.0 && eps < 1.0) && eps_grid.empty())
      throw std::invalid_argument("config: active modes need eps in (0,1)");
    if (mode == Mode::kActiveNoiseFree &&
        noise.kind() != NoiseModel::Kind::kZero)
      throw std::invalid_argument(
          "config: active_noise_free requires zero noise");
    if (mode == Mode::kActiveNoisy && !noise.has_density())
      throw std::invalid_argument("config: active_noisy requires noisy labels");
    if (mode == Mode::kPassiveMle && !noise.has_density())
      throw std::invalid_argument("config: passive_mle requires noisy labels");
    if (mode == Mode::kActiveNoisy && !(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("config: active_noisy needs delta in (0,1)");
    for (double g : n_grid)
      if (g < 1.0) throw std::invalid_argument("config: n_grid entries >= 1");
    for (double g : eps_grid)
      if (!(g > 0.0 && g < 1.0))
        throw std::invalid_argument("config: eps_grid entries in (0,1)");
  }
};

struct TrialRecord {
  long long trial_index = 0;
  std::uint64_t seed = 0;
  long long n_or_queries = 0;
  double e1_estimate = 0.0;
  double e1_stderr = 0.0;
  double e2 = 0.0;
  double seminorm_e2 = 0.0;
  double lambda_min = 0.0;
  double wall_seconds = 0.0;
  bool success_flag = false;
  // Not part of the CSV schema; carried for JSONL output and tests.
  Vec w_star;
  Vec w_hat;
  std::string diagnostic;
  double grid_value = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Substream tags hung off the per-trial seed.
constexpr std::uint64_t kStreamWStar = 0;
constexpr std::uint64_t kStreamOracle = 1;
constexpr std::uint64_t kStreamPairs = 2;
constexpr std::uint64_t kStreamE1 = 3;
constexpr std::uint64_t kStreamSigma = 4;
// The impossibility demo reuses one pair stream across trials so that only
// w* differs between them.
constexpr std::uint64_t kSharedPairsTag = 0xC0FFEEull;

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double median(Vec values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline double quantile(Vec values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace detail

inline Dataset generate_dataset(Oracle& oracle, const PairDistribution& dist,
                                long long n, SplitMix64& pair_rng,
                                std::uint64_t pair_seed = 0) {
  if (n < 1) throw std::invalid_argument("generate_dataset: need n >= 1");
  Dataset ds;
  ds.examples.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    QueryPair pair = dist.sample(oracle.embedding(), pair_rng);
    const int y = oracle.query(pair);
    ds.examples.emplace_back(std::move(pair), y);
  }
  ds.meta.distribution = dist.name();
  ds.meta.seed = pair_seed;
  ds.meta.n = ds.examples.size();
  return ds;
}

// Runs one trial: builds the hidden w* and the oracle from seeds derived
// from (master_seed, trial_index), runs the configured learner, and scores
// it against w*. Deterministic given (config, trial_index), independent of
// any other trial.
inline TrialRecord run_trial(const ExperimentConfig& cfg, long long trial_index) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const std::uint64_t trial_seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(trial_index));
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.seed = trial_seed;

  WeightVector w_star = [&] {
    if (cfg.mode == Mode::kImpossibilityDemo)
      return WeightVector::vertex(cfg.m, static_cast<int>(trial_index % cfg.m));
    SplitMix64 rng(mix_seed(trial_seed, detail::kStreamWStar));
    return sample_weight_vector(cfg.m, rng);
  }();
  rec.w_star = w_star.values();

  Oracle oracle(w_star, cfg.noise, cfg.embedding,
                mix_seed(trial_seed, detail::kStreamOracle));
  const std::uint64_t pair_seed =
      cfg.mode == Mode::kImpossibilityDemo
          ? mix_seed(cfg.master_seed, detail::kSharedPairsTag)
          : mix_seed(trial_seed, detail::kStreamPairs);
  SplitMix64 pair_rng(pair_seed);

  WeightVector w_hat = WeightVector::uniform(cfg.m);
  bool success = false;
  std::optional<CovarianceMatrix> sigma;

  try {
    switch (cfg.mode) {
      case Mode::kPassiveErm:
      case Mode::kImpossibilityDemo: {
        Dataset ds = generate_dataset(oracle, cfg.distribution, cfg.n,
                                      pair_rng, pair_seed);
        ErmResult res = fit_erm_noise_free(ds);
        w_hat = res.w;
        success = cfg.mode == Mode::kImpossibilityDemo || res.consistent;
        sigma = covariance_from_dataset(ds);
        rec.n_or_queries = cfg.n;
        break;
      }
      case Mode::kPassiveMle: {
        Dataset ds = generate_dataset(oracle, cfg.distribution, cfg.n,
                                      pair_rng, pair_seed);
        MleResult res = fit_mle(ds, cfg.noise, cfg.mle);
        w_hat = res.w;
        success = !res.floored;
        sigma = covariance_from_dataset(ds);
        rec.n_or_queries = cfg.n;
        break;
      }
      case Mode::kActiveNoiseFree: {
        ActiveRunReport report = active_noise_free(oracle, cfg.eps);
        w_hat = report.w_hat;
        rec.n_or_queries = report.queries_used;
        success = e2_distance(w_hat, w_star) <= cfg.eps;
        break;
      }
      case Mode::kActiveNoisy: {
        ActiveRunReport report = active_noisy(oracle, cfg.eps, cfg.delta, cfg.noise);
        w_hat = report.w_hat;
        rec.n_or_queries = report.queries_used;
        success = e2_distance(w_hat, w_star) <= kNoisyGeometrySlack * cfg.eps;
        break;
      }
    }
  } catch (const LearnerAbort& abort) {
    rec.diagnostic = abort.what();
    success = false;
  }

  if (!sigma) {
    SplitMix64 sigma_rng(mix_seed(trial_seed, detail::kStreamSigma));
    std::vector<Vec> deltas;
    deltas.reserve(static_cast<std::size_t>(cfg.n_sigma));
    for (long long i = 0; i < cfg.n_sigma; ++i)
      deltas.push_back(cfg.distribution.sample(cfg.embedding, sigma_rng).delta);
    sigma = covariance_from_deltas(deltas);
  }

  SplitMix64 e1_rng(mix_seed(trial_seed, detail::kStreamE1));
  const E1Estimate e1 = estimate_e1(
      w_hat, w_star,
      [&](SplitMix64& rng) { return cfg.distribution.sample(cfg.embedding, rng); },
      cfg.n_mc, e1_rng);

  rec.e1_estimate = e1.estimate;
  rec.e1_stderr = e1.std_error;
  rec.e2 = e2_distance(w_hat, w_star);
  rec.seminorm_e2 = covariance_seminorm(sub(w_hat.values(), w_star.values()), *sigma);
  rec.lambda_min = min_eigenvalue(*sigma);
  rec.success_flag = success;
  rec.w_hat = w_hat.values();

  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_seconds =
      cfg.reproducible ? 0.0 : std::chrono::duration<double>(t1 - t0).count();
  return rec;
}

inline void write_csv(const std::string& path,
                      const std::vector<TrialRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "trial_index,seed,n_or_queries,e1_estimate,e1_stderr,e2,"
         "seminorm_e2,lambda_min,wall_seconds,success_flag\n";
  for (const TrialRecord& r : records) {
    out << r.trial_index << ',' << r.seed << ',' << r.n_or_queries << ','
        << detail::format_g17(r.e1_estimate) << ','
        << detail::format_g17(r.e1_stderr) << ',' << detail::format_g17(r.e2)
        << ',' << detail::format_g17(r.seminorm_e2) << ','
        << detail::format_g17(r.lambda_min) << ','
        << detail::format_g17(r.wall_seconds) << ','
        << (r.success_flag ? 1 : 0) << "\n";
  }
}

inline void write_jsonl(const std::string& path,
                        const std::vector<TrialRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const TrialRecord& r : records) {
    nlohmann::json j;
    j["trial_index"] = r.trial_index;
    j["seed"] = r.seed;
    j["n_or_queries"] = r.n_or_queries;
    j["e1_estimate"] = r.e1_estimate;
    j["e1_stderr"] = r.e1_stderr;
    j["e2"] = r.e2;
    j["seminorm_e2"] = r.seminorm_e2;
    j["lambda_min"] = r.lambda_min;
    j["wall_seconds"] = r.wall_seconds;
    j["success_flag"] = r.success_flag;
    j["w_star"] = r.w_star;
    j["w_hat"] = r.w_hat;
    if (!std::isnan(r.grid_value)) j["grid_value"] = r.grid_value;
    if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
    out << j.dump() << "\n";
  }
}

// Runs cfg.trials independent trials and writes the CSV/JSONL outputs if
// paths are configured.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.trials));
  for (int t = 0; t < cfg.trials; ++t) records.push_back(run_trial(cfg, t));
  if (!cfg.output.empty()) write_csv(cfg.output, records);
  if (!cfg.jsonl.empty()) write_jsonl(cfg.jsonl, records);
  return records;
}

struct SweepSummaryRow {
  double grid_value = 0.0;
  double median_seminorm = 0.0;
  double iqr_seminorm = 0.0;
  double median_e2 = 0.0;
  double median_e1 = 0.0;
  double median_queries = 0.0;
};

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<SweepSummaryRow> summary;
  // For n sweeps: slope of log(median seminorm) vs log(n). For eps sweeps:
  // slope of median query count per unit of log2(1/eps).
  double slope = 0.0;
  bool grid_is_n = true;
};

inline void write_summary_csv(const std::string& path, const SweepResult& sweep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "grid_value,median_seminorm,iqr_seminorm,median_e2,median_e1,"
         "median_queries\n";
  for (const SweepSummaryRow& row : sweep.summary) {
    out << detail::format_g17(row.grid_value) << ','
        << detail::format_g17(row.median_seminorm) << ','
        << detail::format_g17(row.iqr_seminorm) << ','
        << detail::format_g17(row.median_e2) << ','
        << detail::format_g17(row.median_e1) << ','
        << detail::format_g17(row.median_queries) << "\n";
  }
}

// Sweeps over n_grid (passive) or eps_grid (active): cfg.trials trials per
// grid point with globally unique trial indices, a per-grid-point summary,
// and a fitted slope.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool over_n = !cfg.n_grid.empty();
  if (over_n == !cfg.eps_grid.empty())
    throw std::invalid_argument(
        "run_sweep: exactly one of n_grid / eps_grid must be set");
  const Vec& grid = over_n ? cfg.n_grid : cfg.eps_grid;

  SweepResult sweep;
  sweep.grid_is_n = over_n;
  Vec xs, ys;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ExperimentConfig point = cfg;
    point.output.clear();
    point.jsonl.clear();
    if (over_n)
      point.n = static_cast<long long>(std::llround(grid[g]));
    else
      point.eps = grid[g];
    Vec seminorms, e2s, e1s, queries;
    for (int t = 0; t < cfg.trials; ++t) {
      const long long index = static_cast<long long>(g) * cfg.trials + t;
      TrialRecord rec = run_trial(point, index);
      rec.grid_value = grid[g];
      seminorms.push_back(rec.seminorm_e2);
      e2s.push_back(rec.e2);
      e1s.push_back(rec.e1_estimate);
      queries.push_back(static_cast<double>(rec.n_or_queries));
      sweep.records.push_back(std::move(rec));
    }
    SweepSummaryRow row;
    row.grid_value = grid[g];
    row.median_seminorm = detail::median(seminorms);
    row.iqr_seminorm =
        detail::quantile(seminorms, 0.75) - detail::quantile(seminorms, 0.25);
    row.median_e2 = detail::median(e2s);
    row.median_e1 = detail::median(e1s);
    row.median_queries = detail::median(queries);
    sweep.summary.push_back(row);
    if (over_n) {
      xs.push_back(std::log(grid[g]));
      ys.push_back(std::log(std::max(row.median_seminorm, 1e-300)));
    } else {
      xs.push_back(std::log2(1.0 / grid[g]));
      ys.push_back(row.median_queries);
    }
  }

  // Ordinary least squares slope.
  const double n = static_cast<double>(xs.size());
  const double mx = sum(xs) / n;
  const double my = sum(ys) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  sweep.slope = sxx > 0.0 ? sxy / sxx : 0.0;

  if (!cfg.output.empty()) {
    write_csv(cfg.output, sweep.records);
    write_summary_csv(cfg.output + ".summary.csv", sweep);
  }
  if (!cfg.jsonl.empty()) write_jsonl(cfg.jsonl, sweep.records);
  return sweep;
}

// ---------------------------------------------------------------------------
// Impossibility demonstrations.

// Coordinate-dominant pairs: with monotone hypotheses every label is 1, so a
// passive learner sees identical data for any hidden w*. Fits the same
// pair sequence against two hidden vertices at l2 distance sqrt(2) and
// reports whether the outputs coincide.
struct DominantDemoResult {
  Vec w_hat_a;
  Vec w_hat_b;
  bool identical_outputs = false;
  double e2_a = 0.0;
  double e2_b = 0.0;
  double max_e2 = 0.0;
};

inline DominantDemoResult demo_coordinate_dominant(int m, long long n,
                                                   std::uint64_t seed) {
  const Embedding embedding = Embedding::identity(m);
  const PairDistribution dist =
      PairDistribution::coordinate_dominant(m, Vec(static_cast<std::size_t>(m), 1.0));
  DominantDemoResult result;
  const WeightVector w_a = WeightVector::vertex(m, 0);
  const WeightVector w_b = WeightVector::vertex(m, 1);
  auto fit_for = [&](const WeightVector& w_star) {
    SplitMix64 pair_rng(mix_seed(seed, detail::kSharedPairsTag));
    Oracle oracle(w_star, NoiseModel::zero(), embedding,
                  mix_seed(seed, detail::kStreamOracle));
    Dataset ds = generate_dataset(oracle, dist, n, pair_rng);
    return fit_erm_noise_free(ds).w;
  };
  const WeightVector h_a = fit_for(w_a);
  const WeightVector h_b = fit_for(w_b);
  result.w_hat_a = h_a.values();
  result.w_hat_b = h_b.values();
  result.identical_outputs = result.w_hat_a == result.w_hat_b;
  result.e2_a = e2_distance(h_a, w_a);
  result.e2_b = e2_distance(h_b, w_b);
  result.max_e2 = std::max(result.e2_a, result.e2_b);
  return result;
}

// Small-margin pair: how many labels a majority vote needs before it
// identifies the true comparison sign reliably. The need scales like the
// inverse square of the margin, which is the sample-complexity blow-up the
// passive lower bound is built on.
struct SignComplexityPoint {
  double margin = 0.0;
  long long labels_needed = 0;
};

struct SmallMarginDemoResult {
  std::vector<SignComplexityPoint> points;
  Vec ratios;              // consecutive labels_needed ratios
  bool grows_10x = false;  // every ratio >= 10
  bool quadratic_within_3x = false;  // every ratio in [100/3, 300]
};

inline SmallMarginDemoResult demo_small_margin(
    const Vec& margins = {1e-1, 1e-2, 1e-3}, std::uint64_t seed = 1,
    int repetitions = 64, double target_rate = 0.9) {
  const NoiseModel noise = NoiseModel::logistic(1.0);
  SmallMarginDemoResult result;
  std::uint64_t stream_index = 0;
  for (double margin : margins) {
    const double p = noise.cdf(margin);
    const int need = static_cast<int>(
        std::ceil(target_rate * static_cast<double>(repetitions)));
    long long found = -1;
    long long prev_t = 0;
    // Geometric grid with ratio sqrt(2); fine enough that the measured
    // ratios resolve a quadratic law within the factor-3 test window.
    for (int k = 0; found < 0 && k < 52; ++k) {
      const long long t = static_cast<long long>(std::ceil(std::pow(2.0, 0.5 * k)));
      if (t == prev_t) continue;
      prev_t = t;
      int successes = 0;
      for (int r = 0; r < repetitions; ++r) {
        SplitMix64 rng(mix_seed(seed, stream_index++));
        long long s = 0;
        for (long long i = 0; i < t; ++i) s += rng.uniform() < p ? 1 : 0;
        if (2 * s > t) ++successes;  // strict majority for the true sign (+)
      }
      if (successes >= need) found = t;
    }
    if (found < 0)
      throw std::runtime_error("demo_small_margin: search cap exceeded");
    result.points.push_back(SignComplexityPoint{margin, found});
  }
  result.grows_10x = true;
  result.quadratic_within_3x = true;
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    const double ratio = static_cast<double>(result.points[i].labels_needed) /
                         static_cast<double>(result.points[i - 1].labels_needed);
    result.ratios.push_back(ratio);
    if (ratio < 10.0) result.grows_10x = false;
    if (ratio < 100.0 / 3.0 || ratio > 300.0) result.quadratic_within_3x = false;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Noise property verification used by the `verify-noise` CLI command.

struct NoiseVerification {
  std::string model;
  double max_symmetry_violation = 0.0;    // |F(z)+F(-z)-1| over the grid
  double max_inverse_roundtrip = 0.0;     // |F(F^-1(p)) - p| over the grid
  InverseBoundReport bound_report;        // slack table on (0, 1/2]
  double max_logistic_identity = 0.0;     // |F'^2 - F''F - F^3(1-F)|
  double gamma_b1 = 0.0;                  // strong convexity over [-1, 1]
  bool pass = false;
};

inline NoiseVerification verify_noise(const NoiseModel& nm) {
  NoiseVerification v;
  v.model = nm.name();
  for (int i = 0; i < 1000; ++i) {
    const double z = -10.0 + 20.0 * i / 999.0;
    v.max_symmetry_violation = std::max(
        v.max_symmetry_violation, std::fabs(nm.cdf(z) + nm.cdf(-z) - 1.0));
  }
  for (int i = 1; i < 100; ++i) {
    const double p = i / 100.0;
    v.max_inverse_roundtrip = std::max(
        v.max_inverse_roundtrip, std::fabs(nm.cdf(nm.inv_cdf(p)) - p));
  }
  Vec grid;
  for (int i = 1; i <= 100; ++i) grid.push_back(i / 200.0);
  v.bound_report = nm.check_inverse_poly_bound(grid);
  if (nm.kind() == NoiseModel::Kind::kLogistic) {
    for (int i = 0; i < 1000; ++i) {
      const double z = -10.0 + 20.0 * i / 999.0;
      const double f = nm.cdf(z);
      const double lhs = nm.pdf(z) * nm.pdf(z) - nm.pdf_derivative(z) * f;
      v.max_logistic_identity = std::max(
          v.max_logistic_identity, std::fabs(lhs - f * f * f * (1.0 - f)));
    }
  }
  v.gamma_b1 = nm.strong_convexity_gamma(1.0);
  v.pass = v.max_symmetry_violation <= 1e-12 &&
           v.max_inverse_roundtrip <= 1e-10 &&
           v.bound_report.max_slack <= 1e-12 &&
           v.max_logistic_identity <= 1e-12 && v.gamma_b1 > 0.0;
  return v;
}

// ---------------------------------------------------------------------------
// JSON config parsing (CLI surface).

inline NoiseModel noise_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") return NoiseModel::zero();
  if (kind == "logistic") return NoiseModel::logistic(j.value("scale", 1.0));
  if (kind == "gaussian") return NoiseModel::gaussian(j.value("sigma", 1.0));
  if (kind == "tabulated") {
    if (!j.contains("path"))
      throw std::invalid_argument("noise config: tabulated needs 'path'");
    return NoiseModel::tabulated_from_csv(j.at("path").get<std::string>());
  }
  throw std::invalid_argument("noise config: unknown kind '" + kind + "'");
}

inline PairDistribution distribution_from_json(const nlohmann::json& j, int d,
                                               const Embedding& embedding) {
  const std::string kind = j.value("kind", "uniform_box");
  if (kind == "uniform_box") return PairDistribution::uniform_box(d);
  if (kind == "gaussian_truncated")
    return PairDistribution::gaussian_truncated(d, j.value("sigma", 0.25));
  if (kind == "small_margin") {
    if (!j.contains("x") || !j.contains("x_prime"))
      throw std::invalid_argument(
          "distribution config: small_margin needs x and x_prime");
    return PairDistribution::small_margin(embedding.make_pair(
        j.at("x").get<Vec>(), j.at("x_prime").get<Vec>()));
  }
  if (kind == "coordinate_dominant") {
    Vec dir = j.contains("direction") ? j.at("direction").get<Vec>()
                                      : Vec(static_cast<std::size_t>(d), 1.0);
    return PairDistribution::coordinate_dominant(d, std::move(dir));
  }
  if (kind == "aligned_line") {
    if (!j.contains("slopes"))
      throw std::invalid_argument("distribution config: aligned_line needs slopes");
    return PairDistribution::aligned_line(j.at("slopes").get<Vec>());
  }
  throw std::invalid_argument("distribution config: unknown kind '" + kind + "'");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (!j.contains("mode"))
    throw std::invalid_argument("config: missing 'mode'");
  cfg.mode = mode_from_name(j.at("mode").get<std::string>());
  cfg.m = j.value("m", 2);
  cfg.eps = j.value("eps", 0.1);
  cfg.delta = j.value("delta", 0.1);
  cfg.noise = j.contains("noise") ? noise_from_json(j.at("noise"))
                                  : NoiseModel::zero();
  cfg.embedding = j.contains("embedding")
                      ? embedding_from_json(j.at("embedding"), cfg.m)
                      : Embedding::identity(cfg.m);
  const int d = cfg.embedding.input_dim();
  cfg.distribution =
      j.contains("distribution")
          ? distribution_from_json(j.at("distribution"), d, cfg.embedding)
          : PairDistribution::uniform_box(d);
  cfg.n = j.value("n", 0LL);
  if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<Vec>();
  if (j.contains("eps_grid")) cfg.eps_grid = j.at("eps_grid").get<Vec>();
  cfg.trials = j.value("trials", 1);
  cfg.n_mc = j.value("n_mc", 10000LL);
  cfg.n_sigma = j.value("n_sigma", 10000LL);
  if (j.contains("mle")) {
    const auto& jm = j.at("mle");
    cfg.mle.max_iterations = jm.value("max_iterations", cfg.mle.max_iterations);
    cfg.mle.gradient_tolerance =
        jm.value("gradient_tolerance", cfg.mle.gradient_tolerance);
    cfg.mle.initial_step = jm.value("initial_step", cfg.mle.initial_step);
    cfg.mle.step_shrink = jm.value("step_shrink", cfg.mle.step_shrink);
    cfg.mle.sufficient_decrease =
        jm.value("sufficient_decrease", cfg.mle.sufficient_decrease);
    cfg.mle.validate();
  }
  cfg.master_seed = j.value("master_seed", std::uint64_t{1});
  cfg.output = j.value("output", std::string{});
  cfg.jsonl = j.value("jsonl", std::string{});
  cfg.reproducible = j.value("reproducible", false);
  cfg.validate();
  return cfg;
}

inline ExperimentConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

}  // namespace preflearn
