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
#include <stdexcept>
#include <utility>
#include <vector>

#include "preflearn/linalg.hpp"
#include "preflearn/model.hpp"
#include "preflearn/rng.hpp"

// The two error functionals, the covariance seminorm they are compared
// through, and the small-matrix spectral helpers backing the lambda_min
// checks.

namespace preflearn {

// Empirical second moment of embedded pair differences,
// Sigma = (1/n) sum delta_i delta_i^T.
struct CovarianceMatrix {
  Mat sigma;
  long long n = 0;

  void validate() const {
    const std::size_t m = sigma.size();
    for (std::size_t i = 0; i < m; ++i) {
      if (sigma[i].size() != m)
        throw std::invalid_argument("CovarianceMatrix: not square");
      for (std::size_t j = 0; j < m; ++j)
        if (std::fabs(sigma[i][j] - sigma[j][i]) > 1e-12)
          throw std::invalid_argument("CovarianceMatrix: not symmetric");
    }
  }
};

inline CovarianceMatrix covariance_from_deltas(const std::vector<Vec>& deltas) {
  if (deltas.empty())
    throw std::invalid_argument("covariance: need at least one difference");
  const std::size_t m = deltas.front().size();
  CovarianceMatrix cov;
  cov.sigma = zeros(m, m);
  cov.n = static_cast<long long>(deltas.size());
  for (const Vec& d : deltas)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) cov.sigma[i][j] += d[i] * d[j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) cov.sigma[i][j] /= static_cast<double>(cov.n);
  return cov;
}

inline CovarianceMatrix covariance_from_dataset(const Dataset& ds) {
  std::vector<Vec> deltas;
  deltas.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) deltas.push_back(ex.pair.delta);
  return covariance_from_deltas(deltas);
}

// ||v||_Sigma = sqrt(v^T Sigma v).
inline double covariance_seminorm(const Vec& v, const CovarianceMatrix& cov) {
  if (v.size() != cov.sigma.size())
    throw std::invalid_argument("covariance_seminorm: dimension mismatch");
  double q = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) q += v[i] * dot(cov.sigma[i], v);
  if (q < -1e-10)
    throw std::runtime_error("covariance_seminorm: negative quadratic form");
  return std::sqrt(std::max(q, 0.0));
}

// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
// sweeping until the off-diagonal Frobenius norm drops below 1e-12.
inline Vec jacobi_eigenvalues(Mat a) {
  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != m)
      throw std::invalid_argument("jacobi_eigenvalues: not square");
    for (std::size_t j = 0; j < m; ++j)
      if (std::fabs(a[i][j] - a[j][i]) > 1e-12)
        throw std::invalid_argument("jacobi_eigenvalues: not symmetric");
  }
  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j) s += a[i][j] * a[i][j];
    return std::sqrt(s);
  };
  const int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > 1e-12; ++sweep) {
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = a[p][q];
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  Vec eig(m);
  for (std::size_t i = 0; i < m; ++i) eig[i] = a[i][i];
  return eig;
}

inline double min_eigenvalue(const CovarianceMatrix& cov) {
  cov.validate();
  Vec eig = jacobi_eigenvalues(cov.sigma);
  double lo = eig.front();
  for (double e : eig) lo = std::min(lo, e);
  return lo;
}

inline double max_eigenvalue(const CovarianceMatrix& cov) {
  cov.validate();
  Vec eig = jacobi_eigenvalues(cov.sigma);
  double hi = eig.front();
  for (double e : eig) hi = std::max(hi, e);
  return hi;
}

// l2 parameter estimation error (unsquared).
inline double e2_distance(const WeightVector& w_hat, const WeightVector& w_star) {
  if (w_hat.dim() != w_star.dim())
    throw std::invalid_argument("e2_distance: dimension mismatch");
  return norm2(sub(w_hat.values(), w_star.values()));
}

// e2 under the p-th-power reading.
inline double e2_distance_pow(const WeightVector& w_hat,
                              const WeightVector& w_star, double p) {
  return std::pow(e2_distance(w_hat, w_star), p);
}

struct E1Estimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of the prediction disagreement probability between two
// weight vectors over a pair distribution. A zero margin predicts a fair
// coin, so a pair where exactly one predictor has margin zero contributes
// 1/2, and a pair where both do also contributes 1/2 (independent coins).
// Using the expected contribution instead of sampled coins leaves the mean
// unchanged and only lowers the variance.
template <typename PairSampler>
E1Estimate estimate_e1(const WeightVector& u_hat, const WeightVector& u_star,
                       PairSampler&& sample_pair, long long n_mc,
                       SplitMix64& rng) {
  if (n_mc < 1) throw std::invalid_argument("estimate_e1: need n_mc >= 1");
  double total = 0.0;
  for (long long i = 0; i < n_mc; ++i) {
    const QueryPair pair = sample_pair(rng);
    const double a = dot(u_hat.values(), pair.delta);
    const double b = dot(u_star.values(), pair.delta);
    if (a == 0.0 || b == 0.0)
      total += 0.5;
    else if ((a > 0.0) != (b > 0.0))
      total += 1.0;
  }
  E1Estimate out;
  out.estimate = total / static_cast<double>(n_mc);
  out.std_error = std::sqrt(std::max(out.estimate * (1.0 - out.estimate), 0.0) /
                          static_cast<double>(n_mc));
  return out;
}

}  // namespace preflearn
