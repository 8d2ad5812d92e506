#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "preflearn/simplex.hpp"
#include "testutil.hpp"

using namespace preflearn;
using Catch::Matchers::WithinAbs;

TEST_CASE("frame basis is orthonormal and zero-sum") {
  for (int m : {2, 3, 5, 10}) {
    SimplexFrame frame(m);
    for (int i = 0; i < frame.axes(); ++i) {
      CHECK_THAT(norm2(frame.basis(i)), WithinAbs(1.0, 1e-12));
      CHECK_THAT(sum(frame.basis(i)), WithinAbs(0.0, 1e-12));
      for (int j = i + 1; j < frame.axes(); ++j)
        CHECK_THAT(dot(frame.basis(i), frame.basis(j)), WithinAbs(0.0, 1e-12));
    }
    // the centroid sits at the coordinate origin
    for (double t : frame.coords(frame.centroid()))
      CHECK_THAT(t, WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("coords is an isometry of the affine hull") {
  SplitMix64 rng(41);
  for (int m : {2, 3, 6}) {
    SimplexFrame frame(m);
    for (int k = 0; k < 300; ++k) {
      Vec u = sample_weight_vector(m, rng).values();
      Vec v = sample_weight_vector(m, rng).values();
      const double direct = norm2(sub(u, v));
      const double in_coords = norm2(sub(frame.coords(u), frame.coords(v)));
      REQUIRE_THAT(in_coords, WithinAbs(direct, 1e-12));
    }
  }
}

TEST_CASE("point_from_coords inverts coords") {
  SimplexFrame frame(4);
  SplitMix64 rng(43);
  for (int k = 0; k < 200; ++k) {
    Vec t = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
             rng.uniform(-0.5, 0.5)};
    Vec back = frame.coords(frame.point_from_coords(t));
    REQUIRE(norm_inf(sub(back, t)) < 1e-12);
  }
  CHECK(frame.point_from_coords({0.0, 0.0, 0.0}) == frame.centroid());
}

TEST_CASE("m=2 frame matches the hand geometry") {
  SimplexFrame frame(2);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK_THAT(frame.basis(0)[0], WithinAbs(r, 1e-15));
  CHECK_THAT(frame.basis(0)[1], WithinAbs(-r, 1e-15));

  VersionSpace vs = initial_version_space(frame);
  CHECK_THAT(vs.lo[0], WithinAbs(-r, 1e-15));
  CHECK_THAT(vs.hi[0], WithinAbs(r, 1e-15));
  CHECK_THAT(vs.width(0), WithinAbs(std::sqrt(2.0), 1e-15));

  // t = coords((0.3, 0.7)) and back
  Vec w = {0.3, 0.7};
  const double t = frame.coords(w)[0];
  CHECK_THAT(t, WithinAbs(-0.4 / std::sqrt(2.0), 1e-15));
  Vec back = frame.point_from_coords({t});
  CHECK_THAT(back[0], WithinAbs(0.3, 1e-15));
  CHECK_THAT(back[1], WithinAbs(0.7, 1e-15));
}

TEST_CASE("initial version space is the exact vertex bounding box") {
  for (int m : {3, 5, 8}) {
    SimplexFrame frame(m);
    VersionSpace vs = initial_version_space(frame);
    for (int axis = 0; axis < frame.axes(); ++axis) {
      double lo = 1e300, hi = -1e300;
      for (int j = 0; j < m; ++j) {
        const double t = frame.coords(WeightVector::vertex(m, j).values())[axis];
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
      CHECK_THAT(vs.lo[axis], WithinAbs(lo, 1e-14));
      CHECK_THAT(vs.hi[axis], WithinAbs(hi, 1e-14));
    }
  }
}

TEST_CASE("cut normals separate exactly along the chosen axis") {
  SECTION("hand-checked m = 2 cut through the centroid") {
    SimplexFrame frame(2);
    Vec v = cut_normal(frame, 0, 0.0);
    CHECK(v == frame.basis(0));
    Vec w_star = {0.3, 0.7};
    CHECK_THAT(dot(v, w_star), WithinAbs(-0.4 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(dot(v, frame.centroid()), WithinAbs(0.0, 1e-15));
  }

  SECTION("cut at the upper box face leaves the simplex on one side") {
    SimplexFrame frame(3);
    VersionSpace vs = initial_version_space(frame);
    Vec v = cut_normal(frame, 1, vs.hi[1]);
    SplitMix64 rng(59);
    for (int k = 0; k < 200; ++k) {
      Vec w = sample_weight_vector(3, rng).values();
      REQUIRE(dot(v, w) <= 1e-12);
    }
  }

  SECTION("side consistency on random cuts") {
    SplitMix64 rng(61);
    for (int m : {2, 3, 5}) {
      SimplexFrame frame(m);
      VersionSpace vs = initial_version_space(frame);
      for (int k = 0; k < 1000 / m; ++k) {
        Vec w = sample_weight_vector(m, rng).values();
        const int axis = static_cast<int>(rng.next() % static_cast<unsigned>(frame.axes()));
        const double c = rng.uniform(vs.lo[axis], vs.hi[axis]);
        const Vec v = cut_normal(frame, axis, c);
        const double side = dot(v, w);
        const double gap = frame.coords(w)[axis] - c;
        REQUIRE_THAT(side, WithinAbs(gap, 1e-12));
      }
    }
  }
}

TEST_CASE("build_query keeps endpoints in the box and preserves signs") {
  SECTION("hand-checked m = 2 query") {
    SimplexFrame frame(2);
    Embedding e = Embedding::identity(2);
    const double r = 1.0 / std::sqrt(2.0);
    auto [pair, alpha] = build_query(frame, e, {r, -r});
    CHECK_THAT(alpha, WithinAbs(std::sqrt(2.0) / 2.0, 1e-12));
    CHECK_THAT(pair.x[0], WithinAbs(0.5, 1e-12));
    CHECK_THAT(pair.x[1], WithinAbs(0.5, 1e-12));
    CHECK_THAT(pair.delta[0], WithinAbs(0.5, 1e-12));
    CHECK_THAT(pair.delta[1], WithinAbs(-0.5, 1e-12));
    CHECK_THAT(pair.x_prime[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(pair.x_prime[1], WithinAbs(0.0, 1e-12));
  }

  SECTION("random cut normals across dimensions") {
    SplitMix64 rng(67);
    for (int m : {2, 3, 5, 10}) {
      SimplexFrame frame(m);
      Embedding e = Embedding::identity(m);
      VersionSpace vs = initial_version_space(frame);
      for (int k = 0; k < 100; ++k) {
        const int axis = static_cast<int>(rng.next() % static_cast<unsigned>(frame.axes()));
        const double c = rng.uniform(vs.lo[axis], vs.hi[axis]);
        const Vec v = cut_normal(frame, axis, c);
        auto [pair, alpha] = build_query(frame, e, v);
        CHECK(alpha > 0.0);
        CHECK(alpha <= 1.0 + 1e-12);
        for (std::size_t i = 0; i < pair.x_prime.size(); ++i) {
          REQUIRE(pair.x_prime[i] >= -1e-9);
          REQUIRE(pair.x_prime[i] <= 1.0 + 1e-9);
        }
        // delta is a positive multiple of v
        Vec w = sample_weight_vector(m, rng).values();
        const double lhs = dot(w, pair.delta);
        const double rhs = dot(w, v) * alpha / norm2(v);
        REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-10));
      }
    }
  }

  SECTION("spread-out normals cap alpha at one and the delta norm at one") {
    // alpha depends only on the direction of v; an even spread over five
    // coordinates pushes ||v||_2 past 2 ||v||_inf, which triggers the cap.
    SimplexFrame frame(5);
    Embedding e = Embedding::identity(5);
    Vec v(5, 1e-6);
    auto [pair, alpha] = build_query(frame, e, v);
    CHECK(alpha == 1.0);
    CHECK(norm2(pair.delta) <= 1.0 + 1e-12);
  }

  CHECK_THROWS_AS(build_query(SimplexFrame(2), Embedding::identity(2), {0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("project_to_simplex matches the brute-force oracle") {
  SECTION("frozen examples") {
    CHECK(project_to_simplex({0.5, 0.5}).values() == Vec{0.5, 0.5});
    CHECK(project_to_simplex({1.2, -0.2}).values() == Vec{1.0, 0.0});
    CHECK(project_to_simplex({0.0, 0.0}).values() == Vec{0.5, 0.5});
  }

  SECTION("random points vs subset enumeration") {
    SplitMix64 rng(71);
    for (int m : {2, 3, 5}) {
      for (int k = 0; k < 300; ++k) {
        Vec p(static_cast<std::size_t>(m));
        for (double& x : p) x = rng.uniform(-2.0, 2.0);
        Vec expected = testutil::brute_force_simplex_projection(p);
        Vec got = project_to_simplex(p).values();
        REQUIRE(norm_inf(sub(got, expected)) < 1e-10);
      }
    }
  }

  SECTION("idempotent and non-expansive toward simplex points") {
    SplitMix64 rng(73);
    for (int k = 0; k < 300; ++k) {
      Vec p = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
               rng.uniform(-2.0, 2.0)};
      WeightVector w = project_to_simplex(p);
      Vec again = project_to_simplex(w.values()).values();
      REQUIRE(norm_inf(sub(again, w.values())) < 1e-12);
      Vec target = sample_weight_vector(3, rng).values();
      REQUIRE(norm2(sub(w.values(), target)) <=
              norm2(sub(p, target)) + 1e-12);
    }
  }
}
