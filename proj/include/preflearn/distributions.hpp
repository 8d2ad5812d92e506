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
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "preflearn/model.hpp"
#include "preflearn/rng.hpp"

// Input-pair distributions, including the two adversarial constructions the
// impossibility demonstrations run on: a single fixed pair with a tiny
// margin (labels are a near-fair coin under any continuous noise), and
// coordinate-dominant pairs (every monotone hypothesis labels them 1, so the
// labels carry no information about w*).

namespace preflearn {

class PairDistribution {
 public:
  enum class Kind {
    kUniformBox,
    kGaussianTruncated,
    kSmallMargin,
    kCoordinateDominant,
    kAlignedLine,
  };

  static PairDistribution uniform_box(int d) {
    PairDistribution pd(Kind::kUniformBox, d);
    return pd;
  }

  static PairDistribution gaussian_truncated(int d, double sigma) {
    if (!(sigma > 0.0))
      throw std::invalid_argument("gaussian_truncated: sigma must be > 0");
    PairDistribution pd(Kind::kGaussianTruncated, d);
    pd.sigma_ = sigma;
    return pd;
  }

  // Always returns the one given pair.
  static PairDistribution small_margin(QueryPair pair) {
    PairDistribution pd(Kind::kSmallMargin, static_cast<int>(pair.x.size()));
    pd.fixed_pair_ = std::move(pair);
    return pd;
  }

  // Pairs with x' - x strictly positive in every coordinate, with the step
  // proportions taken from `direction` (all components > 0).
  static PairDistribution coordinate_dominant(int d, Vec direction) {
    if (static_cast<int>(direction.size()) != d)
      throw std::invalid_argument("coordinate_dominant: direction size");
    for (double g : direction)
      if (!(g > 0.0))
        throw std::invalid_argument(
            "coordinate_dominant: direction must be strictly positive");
    PairDistribution pd(Kind::kCoordinateDominant, d);
    pd.direction_ = std::move(direction);
    return pd;
  }

  // Both candidates on the line x_i = k_i * x_1 inside the box; the label of
  // any monotone linear utility is decided by the first coordinate alone.
  static PairDistribution aligned_line(Vec slopes) {
    for (double k : slopes)
      if (!(k > 0.0))
        throw std::invalid_argument("aligned_line: slopes must be positive");
    PairDistribution pd(Kind::kAlignedLine, static_cast<int>(slopes.size()));
    pd.slopes_ = std::move(slopes);
    return pd;
  }

  Kind kind() const { return kind_; }
  int dim() const { return d_; }

  std::string name() const {
    switch (kind_) {
      case Kind::kUniformBox: return "uniform_box";
      case Kind::kGaussianTruncated: return "gaussian_truncated";
      case Kind::kSmallMargin: return "small_margin";
      case Kind::kCoordinateDominant: return "coordinate_dominant";
      case Kind::kAlignedLine: return "aligned_line";
    }
    return "?";
  }

  QueryPair sample(const Embedding& embedding, SplitMix64& rng) const {
    if (embedding.input_dim() != d_)
      throw std::invalid_argument("PairDistribution: embedding dim mismatch");
    const InputBox& box = embedding.box();
    switch (kind_) {
      case Kind::kUniformBox: {
        Vec x = uniform_point(box, rng);
        Vec xp = uniform_point(box, rng);
        return embedding.make_pair(x, xp);
      }
      case Kind::kGaussianTruncated: {
        Vec x = truncated_gaussian_point(box, rng);
        Vec xp = truncated_gaussian_point(box, rng);
        return embedding.make_pair(x, xp);
      }
      case Kind::kSmallMargin:
        return *fixed_pair_;
      case Kind::kCoordinateDominant: {
        Vec x = uniform_point(box, rng);
        // Strictly positive step toward the box's upper corner: scale each
        // coordinate's headroom by the direction profile and a shared draw
        // from (0, 1].
        const double gmax = *std::max_element(direction_.begin(), direction_.end());
        const double t = 1.0 - rng.uniform();  // (0, 1]
        Vec xp(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
          double headroom = box.hi[j] - x[j];
          if (headroom <= 0.0) headroom = box.hi[j] - box.lo[j];
          xp[j] = std::min(x[j] + 0.5 * t * (direction_[j] / gmax) * headroom,
                           box.hi[j]);
          if (!(xp[j] > x[j])) {
            // Degenerate headroom: re-anchor x strictly inside.
            x[j] = box.lo[j] + 0.5 * (box.hi[j] - box.lo[j]);
            xp[j] = x[j] + 0.25 * t * (direction_[j] / gmax) *
                               (box.hi[j] - box.lo[j]);
          }
        }
        return embedding.make_pair(x, xp);
      }
      case Kind::kAlignedLine: {
        const double kmax = *std::max_element(slopes_.begin(), slopes_.end());
        const double tmax = 1.0 / kmax;
        const double t = rng.uniform() * tmax;
        const double tp = rng.uniform() * tmax;
        Vec x(slopes_.size()), xp(slopes_.size());
        for (std::size_t j = 0; j < slopes_.size(); ++j) {
          x[j] = t * slopes_[j];
          xp[j] = tp * slopes_[j];
        }
        return embedding.make_pair(x, xp);
      }
    }
    throw std::logic_error("PairDistribution: unreachable");
  }

 private:
  PairDistribution(Kind kind, int d) : kind_(kind), d_(d) {
    if (d < 1) throw std::invalid_argument("PairDistribution: need d >= 1");
  }

  static Vec uniform_point(const InputBox& box, SplitMix64& rng) {
    Vec x(box.lo.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] = rng.uniform(box.lo[j], box.hi[j]);
    return x;
  }

  // Gaussian centered at the box centre, rejection-sampled into the box
  // (clamped after a retry cap so sampling always terminates).
  Vec truncated_gaussian_point(const InputBox& box, SplitMix64& rng) const {
    Vec x(box.lo.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double mid = 0.5 * (box.lo[j] + box.hi[j]);
      double value = mid;
      for (int attempt = 0; attempt < 64; ++attempt) {
        const double u1 = std::max(rng.uniform(), 0x1.0p-53);
        const double u2 = rng.uniform();
        value = mid + sigma_ * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * M_PI * u2);
        if (value >= box.lo[j] && value <= box.hi[j]) break;
      }
      x[j] = std::clamp(value, box.lo[j], box.hi[j]);
    }
    return x;
  }

  Kind kind_;
  int d_;
  double sigma_ = 0.25;
  std::optional<QueryPair> fixed_pair_;
  Vec direction_;
  Vec slopes_;
};

}  // namespace preflearn
