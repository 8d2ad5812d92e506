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
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "preflearn/model.hpp"

// Geometry of the hypothesis simplex {w >= 0, ||w||_1 = 1}: an orthonormal
// coordinate system for its affine hull, the axis-aligned version-space box
// the active learners binary-search over, origin-through cutting hyperplanes,
// in-box query construction, and Euclidean projection back onto the simplex.

namespace preflearn {

// Orthonormal frame for the simplex's affine hull. The basis is produced by
// modified Gram-Schmidt over {e_1 - e_m, ..., e_{m-1} - e_m}, in that order,
// so the coordinate system (and with it every query sequence) is identical
// across runs. Each basis vector sums to zero, so coords() is an isometry
// between the affine hull and R^{m-1}.
class SimplexFrame {
 public:
  explicit SimplexFrame(int m) : m_(m) {
    if (m < 2) throw std::invalid_argument("SimplexFrame: need m >= 2");
    centroid_.assign(static_cast<std::size_t>(m), 1.0 / m);
    basis_.reserve(static_cast<std::size_t>(m - 1));
    for (int i = 0; i < m - 1; ++i) {
      Vec v(static_cast<std::size_t>(m), 0.0);
      v[static_cast<std::size_t>(i)] = 1.0;
      v[static_cast<std::size_t>(m - 1)] = -1.0;
      for (const Vec& b : basis_) axpy(-dot(v, b), b, v);
      const double nrm = norm2(v);
      if (nrm < 1e-12)
        throw std::logic_error("SimplexFrame: degenerate basis vector");
      basis_.push_back(scaled(v, 1.0 / nrm));
    }
  }

  int m() const { return m_; }
  int axes() const { return m_ - 1; }
  const Vec& centroid() const { return centroid_; }
  const Vec& basis(int i) const { return basis_[static_cast<std::size_t>(i)]; }

  // Frame coordinates of a point on (or near) the affine hull.
  Vec coords(const Vec& w) const {
    Vec t(static_cast<std::size_t>(axes()));
    Vec diff = sub(w, centroid_);
    for (int i = 0; i < axes(); ++i)
      t[static_cast<std::size_t>(i)] = dot(basis_[static_cast<std::size_t>(i)], diff);
    return t;
  }

  // centroid + sum_i t_i b_i; inverse of coords() on the affine hull.
  Vec point_from_coords(const Vec& t) const {
    if (static_cast<int>(t.size()) != axes())
      throw std::invalid_argument("point_from_coords: wrong dimension");
    Vec p = centroid_;
    for (int i = 0; i < axes(); ++i)
      axpy(t[static_cast<std::size_t>(i)], basis_[static_cast<std::size_t>(i)], p);
    return p;
  }

 private:
  int m_;
  Vec centroid_;
  std::vector<Vec> basis_;
};

// Product-of-intervals version space in frame coordinates. The box always
// contains the polytope of surviving hypotheses; each accepted cut halves
// one interval.
struct VersionSpace {
  SimplexFrame frame;
  Vec lo;
  Vec hi;

  double width(int axis) const {
    return hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)];
  }
  double midpoint(int axis) const {
    return 0.5 * (lo[static_cast<std::size_t>(axis)] + hi[static_cast<std::size_t>(axis)]);
  }
  Vec midpoints() const {
    Vec t(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) t[i] = 0.5 * (lo[i] + hi[i]);
    return t;
  }
  double max_width() const {
    double w = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) w = std::max(w, hi[i] - lo[i]);
    return w;
  }
  bool contains_coords(const Vec& t, double tol = 1e-12) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (t[i] < lo[i] - tol || t[i] > hi[i] + tol) return false;
    return true;
  }
};

// Exact bounding box of the simplex in frame coordinates, from projecting
// the m vertices onto each axis.
inline VersionSpace initial_version_space(const SimplexFrame& frame) {
  const int m = frame.m();
  Vec lo(static_cast<std::size_t>(m - 1),
         std::numeric_limits<double>::infinity());
  Vec hi(static_cast<std::size_t>(m - 1),
         -std::numeric_limits<double>::infinity());
  for (int j = 0; j < m; ++j) {
    Vec vertex(static_cast<std::size_t>(m), 0.0);
    vertex[static_cast<std::size_t>(j)] = 1.0;
    Vec t = frame.coords(vertex);
    for (int i = 0; i < m - 1; ++i) {
      lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(i)]);
      hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(i)]);
    }
  }
  return VersionSpace{frame, std::move(lo), std::move(hi)};
}

inline VersionSpace initial_version_space(int m) {
  return initial_version_space(SimplexFrame(m));
}

// Normal vector of the hyperplane through the origin containing the slice
// {coords(w)_axis = c} of the simplex: v = b_axis - c * (1,...,1). For every
// w with sum w = 1, v.w = coords(w)_axis - c, so the label of a query along
// v tells which side of the slice w* lies on.
inline Vec cut_normal(const SimplexFrame& frame, int axis, double c) {
  if (axis < 0 || axis >= frame.axes())
    throw std::invalid_argument("cut_normal: axis out of range");
  Vec v = frame.basis(axis);
  for (double& x : v) x -= c;
  return v;
}

// Builds a comparison query whose embedded difference is a positive multiple
// of v, anchored at the center of the embedded box: delta = alpha * v/||v||
// with alpha = min((1/2) ||v||_2 / ||v||_inf, 1), which keeps both endpoints
// inside [0,1]^m while preserving sign(w.delta) = sign(w.v). The scale alpha
// is returned for margin bookkeeping in the noisy learner.
inline std::pair<QueryPair, double> build_query(const SimplexFrame& frame,
                                                const Embedding& embedding,
                                                const Vec& v) {
  (void)frame;
  const double n2 = norm2(v);
  const double ninf = norm_inf(v);
  if (!(n2 > 0.0)) throw std::invalid_argument("build_query: v must be nonzero");
  const double alpha = std::min(0.5 * n2 / ninf, 1.0);
  Vec anchor(v.size(), 0.5);
  Vec target = anchor;
  axpy(alpha / n2, v, target);
  Vec x = embedding.invert(anchor);
  Vec x_prime = embedding.invert(target);
  return {embedding.make_pair(x, x_prime), alpha};
}

// Euclidean projection onto the simplex (sort-based pivot). Idempotent and
// non-expansive toward every simplex point.
inline WeightVector project_to_simplex(const Vec& p) {
  const std::size_t m = p.size();
  if (m < 2) throw std::invalid_argument("project_to_simplex: need m >= 2");
  Vec u = p;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    cumulative += u[j];
    const double candidate = (1.0 - cumulative) / static_cast<double>(j + 1);
    if (u[j] + candidate > 0.0) tau = candidate;
  }
  Vec w(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = std::max(p[i] + tau, 0.0);
    total += w[i];
  }
  // Renormalize the last nonzero entry's round-off so the l1 invariant is
  // met exactly enough for WeightVector.
  if (total > 0.0 && std::fabs(total - 1.0) > 1e-15)
    for (double& x : w) x /= total;
  return WeightVector(std::move(w));
}

}  // namespace preflearn
