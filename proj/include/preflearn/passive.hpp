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
#include <stdexcept>
#include <utility>
#include <vector>

#include "preflearn/model.hpp"
#include "preflearn/noise.hpp"
#include "preflearn/simplex.hpp"

// Passive learners over a fixed dataset: the noise-free ERM (max-margin
// linear feasibility over the simplex) for the prediction objective, and the
// generalized maximum-likelihood estimator for the parameter-estimation
// objective.

namespace preflearn {

struct ErmResult {
  WeightVector w;
  // min over non-degenerate examples of the signed slack s_i w^T delta_i
  // (+inf when every example has delta = 0).
  double min_slack = 0.0;
  // True iff some hypothesis attains a strictly positive minimum slack,
  // i.e. the strict-sign constraints are simultaneously satisfiable.
  bool consistent = false;
};

namespace detail {

// Signed slack of example i at w: positive iff w classifies it correctly
// with margin. Examples with delta = 0 are ties, satisfied by equality, and
// are skipped by callers.
inline double signed_slack(const LabeledExample& ex, const Vec& w) {
  const double margin = dot(w, ex.pair.delta);
  return ex.y == 1 ? margin : -margin;
}

inline double min_slack_over(const std::vector<const LabeledExample*>& active,
                             const Vec& w, std::size_t* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < active.size(); ++i) {
    const double s = signed_slack(*active[i], w);
    if (s < best) {
      best = s;
      if (argmin) *argmin = i;
    }
  }
  return best;
}

}  // namespace detail

// Noise-free ERM: maximize the minimum signed slack over the simplex by
// projected subgradient ascent on the piecewise-linear objective
// J(w) = min_i s_i w^T delta_i, then, if the best point still violates some
// constraint, run cyclic relaxation projections (violated halfspace, then
// simplex) to land on an exactly consistent hypothesis when one exists.
// Returns the max-margin point on success and the minimum-violation point,
// flagged inconsistent, when the strict signs contradict each other.
inline ErmResult fit_erm_noise_free(const Dataset& data) {
  if (data.examples.empty())
    throw std::invalid_argument("fit_erm_noise_free: empty dataset");
  const int m = static_cast<int>(data.examples.front().pair.delta.size());

  std::vector<const LabeledExample*> active;
  for (const auto& ex : data.examples) {
    if (norm_inf(ex.pair.delta) > 0.0) active.push_back(&ex);
  }
  if (active.empty()) {
    // Every example is a tie; any hypothesis is consistent by equality.
    return ErmResult{WeightVector::uniform(m),
                     std::numeric_limits<double>::infinity(), true};
  }

  const int kSubgradientIters = 4000;
  const double kStep0 = 0.5;

  Vec w(static_cast<std::size_t>(m), 1.0 / m);
  Vec best_w = w;
  std::size_t worst = 0;
  double best_obj = detail::min_slack_over(active, w, &worst);
  for (int k = 1; k <= kSubgradientIters; ++k) {
    const LabeledExample& ex = *active[worst];
    const double sign = ex.y == 1 ? 1.0 : -1.0;
    const double step = kStep0 / std::sqrt(static_cast<double>(k));
    Vec candidate = w;
    axpy(sign * step, ex.pair.delta, candidate);
    w = project_to_simplex(candidate).values();
    const double obj = detail::min_slack_over(active, w, &worst);
    if (obj > best_obj) {
      best_obj = obj;
      best_w = w;
    }
  }

  // Relaxation cleanup: alternate projections onto each violated halfspace
  // {s_i w^T delta_i >= 0} and the simplex until no violations remain.
  if (best_obj < 0.0) {
    Vec v = best_w;
    const int kMaxSweeps = 500;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      bool violated = false;
      for (const LabeledExample* ex : active) {
        const double s = detail::signed_slack(*ex, v);
        if (s < 0.0) {
          violated = true;
          const double sign = ex->y == 1 ? 1.0 : -1.0;
          const double nn = dot(ex->pair.delta, ex->pair.delta);
          axpy(-s * sign / nn, ex->pair.delta, v);
          v = project_to_simplex(v).values();
        }
      }
      if (!violated) break;
    }
    const double obj = detail::min_slack_over(active, v, &worst);
    if (obj > best_obj) {
      best_obj = obj;
      best_w = v;
    }
  }

  ErmResult result{project_to_simplex(best_w), best_obj,
                   best_obj > 1e-12};
  result.min_slack = detail::min_slack_over(active, result.w.values());
  result.consistent = result.min_slack > 1e-12;
  return result;
}

struct MleSettings {
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;
  double initial_step = 1.0;
  double step_shrink = 0.5;
  double sufficient_decrease = 1e-4;

  void validate() const {
    if (max_iterations <= 0 || !(gradient_tolerance > 0.0) ||
        !(initial_step > 0.0) || !(step_shrink > 0.0 && step_shrink < 1.0) ||
        !(sufficient_decrease > 0.0))
      throw std::invalid_argument("MleSettings: all parameters must be positive");
  }
};

struct LossGrad {
  double loss = 0.0;
  Vec grad;
  // Set when some example's likelihood hit the 1e-300 floor inside the log;
  // never fires for logistic or gaussian noise on bounded margins.
  bool floored = false;
};

// Negative mean log-likelihood of the labels under noise model F and its
// gradient:
//   loss(w) = -(1/n) sum_i log( y_i F(z_i) + (1-y_i) F(-z_i) ),  z_i = w^T delta_i
//   grad(w) = -(1/n) sum_i [ y_i F'(z_i)/F(z_i) - (1-y_i) F'(-z_i)/F(-z_i) ] delta_i
// The sum runs in dataset order so repeated evaluations are bitwise equal.
inline LossGrad loss_and_gradient(const Vec& w, const Dataset& data,
                                  const NoiseModel& nm) {
  if (data.examples.empty())
    throw std::invalid_argument("loss_and_gradient: empty dataset");
  if (!nm.has_density())
    throw std::invalid_argument("loss_and_gradient: noise model needs a density");
  constexpr double kFloor = 1e-300;
  LossGrad out;
  out.grad.assign(w.size(), 0.0);
  const double n = static_cast<double>(data.examples.size());
  for (const auto& ex : data.examples) {
    const double z = dot(w, ex.pair.delta);
    const double zs = ex.y == 1 ? z : -z;
    double p = nm.cdf(zs);
    if (p < kFloor) {
      p = kFloor;
      out.floored = true;
    }
    out.loss -= std::log(p) / n;
    const double coeff =
        (ex.y == 1 ? -1.0 : 1.0) * nm.pdf_given_cdf(zs, p) / (p * n);
    axpy(coeff, ex.pair.delta, out.grad);
  }
  return out;
}

inline LossGrad loss_and_gradient(const WeightVector& w, const Dataset& data,
                                  const NoiseModel& nm) {
  return loss_and_gradient(w.values(), data, nm);
}

struct MleResult {
  WeightVector w;
  double loss = 0.0;
  double gradient_mapping_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool floored = false;
  // Loss after every accepted step, for the monotonicity check.
  Vec accepted_losses;
};

// Generalized MLE by projected gradient descent over the simplex with
// Armijo backtracking along the projection arc. Terminates when the
// unit-step projected gradient mapping ||w - proj(w - grad)|| falls below
// the tolerance.
inline MleResult fit_mle(const Dataset& data, const NoiseModel& nm,
                         const MleSettings& settings = MleSettings{}) {
  settings.validate();
  if (data.examples.empty())
    throw std::invalid_argument("fit_mle: empty dataset");
  if (!nm.has_density())
    throw std::invalid_argument("fit_mle: zero-noise model is unsupported");
  const int m = static_cast<int>(data.examples.front().pair.delta.size());

  Vec w(static_cast<std::size_t>(m), 1.0 / m);
  LossGrad lg = loss_and_gradient(w, data, nm);
  MleResult result{WeightVector::uniform(m)};
  result.floored = lg.floored;
  result.accepted_losses.push_back(lg.loss);

  int iter = 0;
  for (; iter < settings.max_iterations; ++iter) {
    Vec trial = w;
    axpy(-1.0, lg.grad, trial);
    Vec mapped = project_to_simplex(trial).values();
    const double mapping_norm = norm2(sub(w, mapped));
    result.gradient_mapping_norm = mapping_norm;
    if (mapping_norm <= settings.gradient_tolerance) {
      result.converged = true;
      break;
    }

    double step = settings.initial_step;
    bool accepted = false;
    bool improved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vec candidate = w;
      axpy(-step, lg.grad, candidate);
      candidate = project_to_simplex(candidate).values();
      Vec dir = sub(candidate, w);
      LossGrad next = loss_and_gradient(candidate, data, nm);
      if (next.loss <=
          lg.loss + settings.sufficient_decrease * dot(lg.grad, dir)) {
        accepted = true;
        improved = next.loss < lg.loss;
        if (improved) {
          w = std::move(candidate);
          lg = std::move(next);
          result.floored = result.floored || lg.floored;
          result.accepted_losses.push_back(lg.loss);
        }
        break;
      }
      step *= settings.step_shrink;
    }
    // No acceptable step, or an accepted step that cannot lower the loss in
    // floating point: the iteration has hit its numerical floor.
    if (!accepted || !improved) break;
  }

  result.w = project_to_simplex(w);
  result.loss = lg.loss;
  result.iterations = iter;
  return result;
}

}  // namespace preflearn
