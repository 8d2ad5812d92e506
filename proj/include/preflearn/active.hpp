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

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "preflearn/metrics.hpp"
#include "preflearn/oracle.hpp"
#include "preflearn/simplex.hpp"

// Active learning of the hidden weights by query synthesis: per-axis binary
// search over the version-space box in simplex coordinates. Each query's
// embedded difference is a positive multiple of the cut hyperplane's normal,
// so a label reveals which side of the cut w* lies on. The noise-free
// variant trusts single labels; the noisy variant majority-votes repeated
// queries and stops an axis early when the vote is too close to call, which
// itself certifies that w* is near the cut.

namespace preflearn {

struct AxisReport {
  int axis = 0;
  int cuts_made = 0;
  bool stopped_early = false;
  std::optional<double> recorded_hyperplane_coordinate;
};

struct ActiveRunReport {
  WeightVector w_hat;
  long long queries_used = 0;
  std::vector<AxisReport> per_axis;
  // F(eps / sqrt(m-1)) before per-query rescaling; noisy runs only.
  double unscaled_p0 = 0.0;
};

// Observer invoked after every accepted cut; used by tests to check that the
// true weights never leave the version space.
using CutObserver = std::function<void(const VersionSpace&, int axis)>;

namespace detail {

// Number of halvings required to bring `width` to at most `target`,
// evaluated with the same comparison the search loop uses.
inline int halvings_needed(double width, double target) {
  int k = 0;
  while (width > target && k < 64) {
    width /= 2.0;
    ++k;
  }
  return k;
}

}  // namespace detail

// Worst-case query budget of the noise-free search: (m-1) axes times the
// halving count of the widest initial interval.
inline long long noise_free_query_bound(int m, double eps) {
  VersionSpace vs = initial_version_space(m);
  const double target = 2.0 * eps / std::sqrt(static_cast<double>(m - 1));
  return static_cast<long long>(m - 1) *
         detail::halvings_needed(vs.max_width(), target);
}

// Noise-free active learning. Returns w_hat with ||w_hat - w*||_2 <= eps
// after at most noise_free_query_bound(m, eps) single-label queries: each
// axis interval is halved until its width is at most 2 eps / sqrt(m-1), so
// the centre of the final box is within eps of w*, and projection onto the
// simplex can only move it closer.
inline ActiveRunReport active_noise_free(Oracle& oracle, double eps,
                                         const CutObserver& observer = {}) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("active_noise_free: eps must lie in (0,1)");
  if (oracle.noise().kind() != NoiseModel::Kind::kZero)
    throw std::invalid_argument(
        "active_noise_free: oracle must be noise-free");
  const int m = oracle.embedding().output_dim();
  const SimplexFrame frame(m);
  VersionSpace vs = initial_version_space(frame);
  const double target = 2.0 * eps / std::sqrt(static_cast<double>(m - 1));

  const long long count_before = oracle.query_count();
  std::vector<AxisReport> per_axis;
  for (int axis = 0; axis < frame.axes(); ++axis) {
    AxisReport ar;
    ar.axis = axis;
    while (vs.width(axis) > target) {
      const double c = vs.midpoint(axis);
      const Vec v = cut_normal(frame, axis, c);
      auto [pair, alpha] = build_query(frame, oracle.embedding(), v);
      (void)alpha;
      if (oracle.query(pair) == 1)
        vs.lo[static_cast<std::size_t>(axis)] = c;
      else
        vs.hi[static_cast<std::size_t>(axis)] = c;
      ++ar.cuts_made;
      if (observer) observer(vs, axis);
    }
    per_axis.push_back(ar);
  }

  ActiveRunReport report{
      project_to_simplex(frame.point_from_coords(vs.midpoints()))};
  report.queries_used = oracle.query_count() - count_before;
  report.per_axis = std::move(per_axis);
  return report;
}

// Active learning under label noise by repeated queries and majority vote.
//
// Per constructed query the margin of a hypothesis at coordinate gap g from
// the cut is (alpha / ||v||_2) g, so the vote threshold probability is
// rescaled to p0' = F(alpha * eps / (sqrt(m-1) ||v||_2)). The repetition
// count T = ceil(4 / (p0' - 1/2)^2 * ln(1/(1-q))) with q = (1-delta)^{1/K}
// splits the confidence budget across the worst-case K voting rounds. A
// decisive vote (|S_T - T/2| > T (p0'-1/2)/2) halves the interval toward the
// majority side; an indecisive one certifies that w* is within the
// F-inverse band of the cut, so the axis stops and records the cut
// coordinate. With probability at least 1 - delta the result satisfies
// ||w_hat - w*||_2 <= kNoisyGeometrySlack * eps.
inline constexpr double kNoisyGeometrySlack = 2.0;

inline ActiveRunReport active_noisy(Oracle& oracle, double eps, double delta,
                                    const NoiseModel& nm,
                                    const CutObserver& observer = {}) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("active_noisy: eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("active_noisy: delta must lie in (0,1)");
  if (!nm.has_density())
    throw std::invalid_argument("active_noisy: noise model must have density");
  if (oracle.noise().kind() == NoiseModel::Kind::kZero)
    throw std::invalid_argument("active_noisy: oracle noise must not be zero");

  const int m = oracle.embedding().output_dim();
  const SimplexFrame frame(m);
  VersionSpace vs = initial_version_space(frame);
  const double root = std::sqrt(static_cast<double>(m - 1));
  const double target = 2.0 * eps / root;

  ActiveRunReport report{WeightVector::uniform(m)};
  report.unscaled_p0 = nm.cdf(eps / root);

  // Worst-case number of voting rounds; fixed up front so the per-round
  // confidence q can be allocated before any query is asked.
  const long long budget_rounds =
      static_cast<long long>(frame.axes()) *
      detail::halvings_needed(vs.max_width(), target);
  const long long count_before = oracle.query_count();

  Vec final_coords(static_cast<std::size_t>(frame.axes()), 0.0);
  if (budget_rounds == 0) {
    final_coords = vs.midpoints();
    for (int axis = 0; axis < frame.axes(); ++axis)
      report.per_axis.push_back(AxisReport{axis, 0, false, std::nullopt});
    report.w_hat = project_to_simplex(frame.point_from_coords(final_coords));
    return report;
  }

  // ln(1/(1-q)) for q = (1-delta)^(1/K), computed through log1p/expm1 so a
  // tiny delta split across many rounds keeps full precision.
  const double ln_term =
      -std::log(-std::expm1(std::log1p(-delta) /
                            static_cast<double>(budget_rounds)));

  for (int axis = 0; axis < frame.axes(); ++axis) {
    AxisReport ar;
    ar.axis = axis;
    while (vs.width(axis) > target) {
      const double c = vs.midpoint(axis);
      const Vec v = cut_normal(frame, axis, c);
      auto [pair, alpha] = build_query(frame, oracle.embedding(), v);
      const double margin_at_band = alpha * eps / (root * norm2(v));
      const double p0 = nm.cdf(margin_at_band);
      if (p0 <= 0.5 + 1e-12) {
        std::ostringstream msg;
        msg << "active_noisy: flat noise c.d.f., p0 = " << p0
            << " at margin " << margin_at_band;
        throw LearnerAbort(msg.str());
      }
      const double t_real =
          std::ceil(4.0 / ((p0 - 0.5) * (p0 - 0.5)) * ln_term);
      if (!(t_real <= 1e8)) {
        std::ostringstream msg;
        msg << "active_noisy: repetition count " << t_real
            << " exceeds the 1e8 cap (p0 = " << p0 << ")";
        throw LearnerAbort(msg.str());
      }
      const long long reps = std::max<long long>(1, static_cast<long long>(t_real));
      const long long s = oracle.repeated_query(pair, reps);
      const double centered = static_cast<double>(s) - 0.5 * static_cast<double>(reps);
      const double vote_threshold = static_cast<double>(reps) * (p0 - 0.5) / 2.0;
      if (std::fabs(centered) > vote_threshold) {
        if (centered > 0.0)
          vs.lo[static_cast<std::size_t>(axis)] = c;
        else
          vs.hi[static_cast<std::size_t>(axis)] = c;
        ++ar.cuts_made;
        if (observer) observer(vs, axis);
      } else {
        ar.stopped_early = true;
        ar.recorded_hyperplane_coordinate = c;
        break;
      }
    }
    final_coords[static_cast<std::size_t>(axis)] =
        ar.stopped_early ? *ar.recorded_hyperplane_coordinate
                         : vs.midpoint(axis);
    report.per_axis.push_back(ar);
  }

  report.w_hat = project_to_simplex(frame.point_from_coords(final_coords));
  report.queries_used = oracle.query_count() - count_before;
  return report;
}

}  // namespace preflearn
