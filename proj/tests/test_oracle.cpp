#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "preflearn/oracle.hpp"
#include "testutil.hpp"

using namespace preflearn;
using Catch::Matchers::WithinAbs;

namespace {

Oracle make_oracle(Vec w, NoiseModel nm, std::uint64_t seed) {
  const int m = static_cast<int>(w.size());
  return Oracle(WeightVector(std::move(w)), std::move(nm),
                Embedding::identity(m), seed);
}

}  // namespace

TEST_CASE("noise-free oracle follows the sign of the margin") {
  Oracle o = make_oracle({0.5, 0.5}, NoiseModel::zero(), 3);
  QueryPair positive = testutil::pair_from_delta({0.4, 0.2});
  for (int i = 0; i < 20; ++i) REQUIRE(o.query(positive) == 1);
  CHECK(o.query_count() == 20);
}

TEST_CASE("noise-free zero margin is a fair coin") {
  Oracle o = make_oracle({0.5, 0.5}, NoiseModel::zero(), 5);
  QueryPair tie = testutil::pair_from_delta({0.2, -0.2});
  long long ones = 0;
  const long long n = 200000;
  for (long long i = 0; i < n; ++i) ones += o.query(tie);
  CHECK_THAT(static_cast<double>(ones) / n, WithinAbs(0.5, 0.004));
}

TEST_CASE("logistic oracle matches the closed-form flip probability") {
  Oracle o = make_oracle({0.3, 0.7}, NoiseModel::logistic(1.0), 11);
  QueryPair pair = testutil::pair_from_delta({1.0, -1.0});  // margin -0.4
  const double expected = 1.0 / (1.0 + std::exp(0.4));
  long long ones = 0;
  const long long n = 100000;
  for (long long i = 0; i < n; ++i) ones += o.query(pair);
  CHECK_THAT(static_cast<double>(ones) / n, WithinAbs(expected, 0.005));
  CHECK(o.query_count() == n);
}

TEST_CASE("label frequency sits within 3 sigma of F(margin)") {
  Oracle o = make_oracle({0.25, 0.35, 0.4}, NoiseModel::logistic(0.7), 21);
  QueryPair pair = testutil::pair_from_delta({0.3, -0.5, 0.1});
  const double margin = 0.25 * 0.3 - 0.35 * 0.5 + 0.4 * 0.1;
  const double p = NoiseModel::logistic(0.7).cdf(margin);
  const long long n = 100000;
  long long ones = 0;
  for (long long i = 0; i < n; ++i) ones += o.query(pair);
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  CHECK_THAT(static_cast<double>(ones) / n, WithinAbs(p, 3.0 * sigma));
}

TEST_CASE("repeated_query sums labels and counts every repetition") {
  SECTION("deterministic extremes under zero noise") {
    Oracle o = make_oracle({0.5, 0.5}, NoiseModel::zero(), 17);
    CHECK(o.repeated_query(testutil::pair_from_delta({0.4, 0.2}), 50) == 50);
    CHECK(o.repeated_query(testutil::pair_from_delta({-0.4, -0.2}), 50) == 0);
    CHECK(o.query_count() == 100);
  }

  SECTION("binomial concentration at a zero margin") {
    Oracle o = make_oracle({0.5, 0.5}, NoiseModel::logistic(1.0), 19);
    const long long reps = 10000;
    const long long s =
        o.repeated_query(testutil::pair_from_delta({0.2, -0.2}), reps);
    CHECK_THAT(static_cast<double>(s) / reps, WithinAbs(0.5, 0.02));
    CHECK(o.query_count() == reps);
  }

  SECTION("rejects nonpositive repetition counts") {
    Oracle o = make_oracle({0.5, 0.5}, NoiseModel::logistic(1.0), 23);
    CHECK_THROWS_AS(o.repeated_query(testutil::pair_from_delta({0.1, 0.0}), 0),
                    std::invalid_argument);
  }
}

TEST_CASE("eta is the misreport probability") {
  Oracle o = make_oracle({0.5, 0.5}, NoiseModel::logistic(1.0), 29);
  CHECK_THAT(o.eta(testutil::pair_from_delta({0.8, 0.0})),   // margin 0.4
             WithinAbs(1.0 / (1.0 + std::exp(0.4)), 1e-12));
  CHECK_THAT(o.eta(testutil::pair_from_delta({-0.8, 0.0})),  // margin -0.4
             WithinAbs(1.0 / (1.0 + std::exp(0.4)), 1e-12));
  CHECK_THAT(o.eta(testutil::pair_from_delta({0.2, -0.2})), WithinAbs(0.5, 1e-12));

  Oracle big = make_oracle({1.0, 0.0}, NoiseModel::logistic(1.0), 31);
  // margin 1: scale the pair so |w*^T delta| = 1 is out of reach; use 0.99
  CHECK(big.eta(testutil::pair_from_delta({0.99, 0.0})) ==
        NoiseModel::logistic(1.0).cdf(-0.99));

  Oracle noiseless = make_oracle({0.5, 0.5}, NoiseModel::zero(), 37);
  CHECK_THROWS_AS(noiseless.eta(testutil::pair_from_delta({0.1, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("equal seeds and query sequences replay identically") {
  auto run = [](std::uint64_t seed) {
    Oracle o = make_oracle({0.4, 0.6}, NoiseModel::logistic(1.0), seed);
    std::vector<int> labels;
    SplitMix64 pair_rng(123);
    for (int i = 0; i < 200; ++i) {
      Vec delta = {pair_rng.uniform(-1.0, 1.0), pair_rng.uniform(-1.0, 1.0)};
      labels.push_back(o.query(testutil::pair_from_delta(delta)));
    }
    labels.push_back(static_cast<int>(o.query_count()));
    return labels;
  };
  CHECK(run(77) == run(77));
  CHECK(run(77) != run(78));
}
