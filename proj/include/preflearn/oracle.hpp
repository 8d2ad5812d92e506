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

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "preflearn/model.hpp"
#include "preflearn/noise.hpp"
#include "preflearn/rng.hpp"

namespace preflearn {

// The labeling oracle. It holds the hidden true weights w*, answers pairwise
// comparison queries with P(y = 1) = F(w*^T delta), and counts every label it
// serves, so experiment sample complexities can be audited against it. The
// flip probability is evaluated through the induced difference c.d.f.
// directly rather than by sampling two utility perturbations; the two are
// equivalent by construction and this form is exact.
//
// An oracle is single-owner mutable state (counter + stream). Parallel trials
// each build their own with independent seeds.
class Oracle {
 public:
  Oracle(WeightVector w_star, NoiseModel noise, Embedding embedding,
         std::uint64_t seed)
      : w_star_(std::move(w_star)),
        noise_(std::move(noise)),
        embedding_(std::move(embedding)),
        rng_(seed) {
    if (w_star_.dim() != embedding_.output_dim())
      throw std::invalid_argument("Oracle: w* and embedding dim mismatch");
  }

  const NoiseModel& noise() const { return noise_; }
  const Embedding& embedding() const { return embedding_; }
  long long query_count() const { return query_count_; }

  // The hidden weights, exposed for evaluation and instrumentation only;
  // learners must not touch this.
  const WeightVector& true_weights() const { return w_star_; }

  int query(const QueryPair& pair) {
    ++query_count_;
    return noise_.sample_flip(dot(w_star_.values(), pair.delta), rng_);
  }

  // Sum of T independent labels for the same pair; counts as T queries.
  long long repeated_query(const QueryPair& pair, long long repetitions) {
    if (repetitions < 1)
      throw std::invalid_argument("repeated_query: need T >= 1");
    const double p = noise_.cdf(dot(w_star_.values(), pair.delta));
    long long s = 0;
    for (long long i = 0; i < repetitions; ++i)
      s += rng_.uniform() < p ? 1 : 0;
    query_count_ += repetitions;
    return s;
  }

  // Misreport probability eta(delta) = F(-|w*^T delta|) in (0, 1/2].
  double eta(const QueryPair& pair) const {
    if (!noise_.has_density())
      throw std::invalid_argument("eta: unsupported for the zero-noise oracle");
    return noise_.cdf(-std::fabs(dot(w_star_.values(), pair.delta)));
  }

 private:
  WeightVector w_star_;
  NoiseModel noise_;
  Embedding embedding_;
  SplitMix64 rng_;
  long long query_count_ = 0;
};

}  // namespace preflearn
