#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "preflearn/distributions.hpp"
#include "preflearn/harness.hpp"
#include "preflearn/oracle.hpp"
#include "preflearn/passive.hpp"
#include "testutil.hpp"

using namespace preflearn;
using Catch::Matchers::WithinAbs;

TEST_CASE("erm on a single strict example returns the max-margin vertex") {
  Dataset ds = testutil::dataset_from({{{1.0, -1.0}, 1}});
  ErmResult res = fit_erm_noise_free(ds);
  CHECK(res.consistent);
  CHECK_THAT(res.w[0], WithinAbs(1.0, 1e-9));
  CHECK_THAT(res.w[1], WithinAbs(0.0, 1e-9));
  CHECK_THAT(res.min_slack, WithinAbs(1.0, 1e-9));
}

TEST_CASE("erm flags contradictory strict signs") {
  Dataset ds = testutil::dataset_from({{{1.0, -1.0}, 1}, {{-1.0, 1.0}, 1}});
  ErmResult res = fit_erm_noise_free(ds);
  CHECK_FALSE(res.consistent);
  CHECK_THAT(res.w[0], WithinAbs(0.5, 1e-9));
  CHECK_THAT(res.w[1], WithinAbs(0.5, 1e-9));
}

TEST_CASE("erm rejects an empty dataset") {
  Dataset empty;
  CHECK_THROWS_AS(fit_erm_noise_free(empty), std::invalid_argument);
}

TEST_CASE("erm is blind to w* on coordinate-dominant data") {
  // All differences strictly positive, all labels 1: every simplex point is
  // feasible and the output cannot depend on the hidden weights.
  const int m = 3;
  const Embedding e = Embedding::identity(m);
  const PairDistribution dist =
      PairDistribution::coordinate_dominant(m, {1.0, 1.0, 1.0});
  auto fit_against = [&](const WeightVector& w_star) {
    Oracle oracle(w_star, NoiseModel::zero(), e, 5);
    SplitMix64 pair_rng(17);
    Dataset ds = generate_dataset(oracle, dist, 300, pair_rng);
    for (const auto& ex : ds.examples) REQUIRE(ex.y == 1);
    ErmResult res = fit_erm_noise_free(ds);
    REQUIRE(res.consistent);
    return res.w.values();
  };
  Vec from_a = fit_against(WeightVector::vertex(m, 0));
  Vec from_b = fit_against(WeightVector::vertex(m, 2));
  CHECK(from_a == from_b);
}

TEST_CASE("erm classifies every example on separable noise-free data") {
  SplitMix64 rng(211);
  for (int rep = 0; rep < 10; ++rep) {
    const int m = 3;
    const Embedding e = Embedding::identity(m);
    WeightVector w_star = sample_weight_vector(m, rng);
    Oracle oracle(w_star, NoiseModel::zero(), e, rng.next());
    SplitMix64 pair_rng(rng.next());
    Dataset ds = generate_dataset(oracle, PairDistribution::uniform_box(m), 300,
                                  pair_rng);
    ErmResult res = fit_erm_noise_free(ds);
    for (const auto& ex : ds.examples) {
      const double margin = dot(res.w.values(), ex.pair.delta);
      const double slack = ex.y == 1 ? margin : -margin;
      REQUIRE(slack >= -1e-12);
    }
  }
}

TEST_CASE("loss and gradient on frozen instances") {
  NoiseModel lg = NoiseModel::logistic(1.0);

  SECTION("hand-computed single example") {
    Dataset ds = testutil::dataset_from({{{0.4, -0.4}, 1}});
    LossGrad lgd = loss_and_gradient(Vec{0.5, 0.5}, ds, lg);
    CHECK_THAT(lgd.loss, WithinAbs(std::log(2.0), 1e-12));
    CHECK_THAT(lgd.grad[0], WithinAbs(-0.2, 1e-12));
    CHECK_THAT(lgd.grad[1], WithinAbs(0.2, 1e-12));
    CHECK_FALSE(lgd.floored);
  }

  SECTION("all-zero differences mean a flat coin loss") {
    Dataset ds = testutil::dataset_from({{{0.0, 0.0}, 1}, {{0.0, 0.0}, 0}});
    LossGrad lgd = loss_and_gradient(Vec{0.3, 0.7}, ds, lg);
    CHECK_THAT(lgd.loss, WithinAbs(std::log(2.0), 1e-12));
    CHECK_THAT(norm2(lgd.grad), WithinAbs(0.0, 1e-15));
  }

  SECTION("rejects zero noise and empty data") {
    Dataset ds = testutil::dataset_from({{{0.4, -0.4}, 1}});
    CHECK_THROWS_AS(loss_and_gradient(Vec{0.5, 0.5}, ds, NoiseModel::zero()),
                    std::invalid_argument);
    Dataset empty;
    CHECK_THROWS_AS(loss_and_gradient(Vec{0.5, 0.5}, empty, lg),
                    std::invalid_argument);
  }
}

TEST_CASE("analytic gradient matches central differences to 1e-6 relative") {
  SplitMix64 rng(223);
  const NoiseModel lg = NoiseModel::logistic(1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 2 + static_cast<int>(rng.next() % 3);
    std::vector<std::pair<Vec, int>> rows;
    const int n = 5 + static_cast<int>(rng.next() % 20);
    for (int i = 0; i < n; ++i) {
      Vec delta(static_cast<std::size_t>(m));
      for (double& x : delta) x = rng.uniform(-1.0, 1.0);
      rows.emplace_back(delta, static_cast<int>(rng.next() % 2));
    }
    Dataset ds = testutil::dataset_from(rows);
    Vec w = sample_weight_vector(m, rng).values();
    Vec analytic = loss_and_gradient(w, ds, lg).grad;
    Vec numeric = testutil::finite_difference_gradient(w, ds, lg);
    REQUIRE(testutil::relative_error(analytic, numeric) <= 1e-6);
  }
}

TEST_CASE("logistic loss is convex along simplex segments") {
  SplitMix64 rng(227);
  const NoiseModel lg = NoiseModel::logistic(1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int m = 3;
    std::vector<std::pair<Vec, int>> rows;
    for (int i = 0; i < 15; ++i) {
      Vec delta(static_cast<std::size_t>(m));
      for (double& x : delta) x = rng.uniform(-1.0, 1.0);
      rows.emplace_back(delta, static_cast<int>(rng.next() % 2));
    }
    Dataset ds = testutil::dataset_from(rows);
    Vec a = sample_weight_vector(m, rng).values();
    Vec b = sample_weight_vector(m, rng).values();
    const int steps = 20;
    Vec values;
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      Vec w = add(scaled(a, 1.0 - t), scaled(b, t));
      values.push_back(loss_and_gradient(w, ds, lg).loss);
    }
    for (int s = 1; s < steps; ++s)
      REQUIRE(values[s + 1] - 2.0 * values[s] + values[s - 1] >= -1e-9);
  }
}

TEST_CASE("mle settings are validated") {
  MleSettings bad;
  bad.max_iterations = 0;
  Dataset ds = testutil::dataset_from({{{0.4, -0.4}, 1}});
  CHECK_THROWS_AS(fit_mle(ds, NoiseModel::logistic(1.0), bad),
                  std::invalid_argument);
  Dataset empty;
  CHECK_THROWS_AS(fit_mle(empty, NoiseModel::logistic(1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_mle(ds, NoiseModel::zero()), std::invalid_argument);
}

TEST_CASE("mle stays at the centroid on sign-symmetric balanced data") {
  // Every delta is orthogonal to the centroid and both labels appear, so the
  // centroid is a stationary point of the projected problem.
  Dataset ds = testutil::dataset_from(
      {{{0.6, -0.6}, 1}, {{0.6, -0.6}, 0}, {{-0.2, 0.2}, 1}, {{-0.2, 0.2}, 0}});
  MleResult res = fit_mle(ds, NoiseModel::logistic(1.0));
  CHECK(res.converged);
  CHECK_THAT(res.w[0], WithinAbs(0.5, 1e-8));
  CHECK_THAT(res.loss, WithinAbs(std::log(2.0), 1e-12));
}

TEST_CASE("mle loss decreases monotonically across accepted steps") {
  SplitMix64 rng(229);
  const int m = 3;
  const Embedding e = Embedding::identity(m);
  Oracle oracle(sample_weight_vector(m, rng), NoiseModel::logistic(1.0), e, 7);
  SplitMix64 pair_rng(31);
  Dataset ds = generate_dataset(oracle, PairDistribution::uniform_box(m), 500,
                                pair_rng);
  MleResult res = fit_mle(ds, NoiseModel::logistic(1.0));
  REQUIRE(res.accepted_losses.size() >= 2);
  for (std::size_t i = 1; i < res.accepted_losses.size(); ++i)
    REQUIRE(res.accepted_losses[i] <= res.accepted_losses[i - 1] + 1e-15);
  CHECK_FALSE(res.floored);
}

TEST_CASE("mle recovers w* at desk scale") {
  const int m = 3;
  const Embedding e = Embedding::identity(m);
  const WeightVector w_star({0.2, 0.3, 0.5});
  Oracle oracle(w_star, NoiseModel::logistic(1.0), e, 12345);
  SplitMix64 pair_rng(54321);
  Dataset ds = generate_dataset(oracle, PairDistribution::uniform_box(m), 10000,
                                pair_rng);
  MleResult res = fit_mle(ds, NoiseModel::logistic(1.0));
  // termination by tolerance or by the iteration cap are both in contract;
  // either way the mapping norm must be tiny and the estimate accurate
  CHECK(res.gradient_mapping_norm <= 1e-6);
  CHECK(e2_distance(res.w, w_star) <= 0.1);
}
