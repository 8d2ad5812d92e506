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
#include <cstddef>
#include <stdexcept>
#include <vector>

// Dense helpers for the small (m <= a few dozen) vectors and matrices this
// library works with. Sums are sequential and fixed-order so results are
// bitwise deterministic.

namespace preflearn {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::fabs(x));
  return s;
}

inline double sum(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec scaled(const Vec& a, double c) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline void axpy(double c, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

// y = M x for an r x c matrix stored row-major as nested vectors.
inline Vec matvec(const Mat& M, const Vec& x) {
  Vec y(M.size(), 0.0);
  for (std::size_t i = 0; i < M.size(); ++i) y[i] = dot(M[i], x);
  return y;
}

// y = M^T x.
inline Vec matvec_t(const Mat& M, const Vec& x) {
  if (M.empty()) return {};
  Vec y(M[0].size(), 0.0);
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M[i].size(); ++j) y[j] += M[i][j] * x[i];
  return y;
}

// In-place Cholesky factor of a symmetric positive definite matrix.
// Returns false if a pivot drops below `eps`, which doubles as the rank
// check for A A^T in the affine embedding.
inline bool cholesky(Mat& a, double eps = 1e-12) {
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (d <= eps) return false;
    a[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }
  return true;
}

// Solves L L^T x = b given the lower-triangular factor from cholesky().
inline Vec cholesky_solve(const Mat& L, const Vec& b) {
  const std::size_t n = L.size();
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i][k] * y[k];
    y[i] = s / L[i][i];
  }
  Vec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= L[k][ii] * x[k];
    x[ii] = s / L[ii][ii];
  }
  return x;
}

inline Mat zeros(std::size_t r, std::size_t c) {
  return Mat(r, Vec(c, 0.0));
}

}  // namespace preflearn
