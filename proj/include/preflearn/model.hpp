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
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"
#include "preflearn/linalg.hpp"
#include "preflearn/rng.hpp"

// Core domain types shared by every learner: weight vectors on the
// probability simplex, candidate embeddings, comparison pairs, and labeled
// datasets. Everything here is immutable after construction and safe to
// share across threads.

namespace preflearn {

// Thrown when an active learner cannot continue (degenerate noise model,
// repetition budget blow-up). Carries a human-readable diagnostic.
class LearnerAbort : public std::runtime_error {
 public:
  explicit LearnerAbort(const std::string& what) : std::runtime_error(what) {}
};

// A point on the probability simplex: w >= 0, sum w = 1 within 1e-9.
// Components above -1e-12 are clipped to zero so that floating-point
// projection residue does not trip the nonnegativity invariant.
class WeightVector {
 public:
  static constexpr double kSumTolerance = 1e-9;
  static constexpr double kNegativeClip = -1e-12;

  explicit WeightVector(Vec w) : w_(std::move(w)) {
    if (w_.size() < 2)
      throw std::invalid_argument("WeightVector: need dimension m >= 2");
    for (double& x : w_) {
      if (x < 0.0) {
        if (x < kNegativeClip)
          throw std::invalid_argument("WeightVector: negative component");
        x = 0.0;
      }
    }
    if (std::fabs(sum(w_) - 1.0) > kSumTolerance)
      throw std::invalid_argument("WeightVector: components must sum to 1");
  }

  static WeightVector uniform(int m) {
    return WeightVector(Vec(static_cast<std::size_t>(m), 1.0 / m));
  }

  // Vertex e_i of the simplex.
  static WeightVector vertex(int m, int i) {
    Vec w(static_cast<std::size_t>(m), 0.0);
    w[static_cast<std::size_t>(i)] = 1.0;
    return WeightVector(std::move(w));
  }

  const Vec& values() const { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }
  int dim() const { return static_cast<int>(w_.size()); }

 private:
  Vec w_;
};

// Draws a weight vector uniformly from the simplex (normalized standard
// exponentials).
inline WeightVector sample_weight_vector(int m, SplitMix64& rng) {
  Vec w(static_cast<std::size_t>(m));
  double total = 0.0;
  for (double& x : w) {
    double u = rng.uniform();
    // uniform() can return exactly 0; nudge to keep log finite.
    x = -std::log(u > 0.0 ? u : 0x1.0p-53);
    total += x;
  }
  for (double& x : w) x /= total;
  return WeightVector(std::move(w));
}

// Axis-aligned box of admissible candidate inputs.
struct InputBox {
  Vec lo;
  Vec hi;

  static InputBox unit(int d) {
    return InputBox{Vec(static_cast<std::size_t>(d), 0.0),
                    Vec(static_cast<std::size_t>(d), 1.0)};
  }

  bool contains(const Vec& x, double tol = 1e-12) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
  }
};

// A pair of candidates together with the cached embedded difference
// delta = phi(x') - phi(x) in [-1, 1]^m.
struct QueryPair {
  Vec x;
  Vec x_prime;
  Vec delta;

  QueryPair(Vec x_in, Vec x_prime_in, Vec delta_in)
      : x(std::move(x_in)),
        x_prime(std::move(x_prime_in)),
        delta(std::move(delta_in)) {
    for (double v : delta)
      if (v < -1.0 - 1e-9 || v > 1.0 + 1e-9)
        throw std::invalid_argument("QueryPair: delta outside [-1,1]^m");
  }
};

struct LabeledExample {
  QueryPair pair;
  int y;  // 1 iff x' is preferred

  LabeledExample(QueryPair p, int label) : pair(std::move(p)), y(label) {
    if (y != 0 && y != 1)
      throw std::invalid_argument("LabeledExample: y must be 0 or 1");
  }
};

struct DatasetMeta {
  std::string distribution;
  std::uint64_t seed = 0;
  std::size_t n = 0;
};

struct Dataset {
  std::vector<LabeledExample> examples;
  DatasetMeta meta;

  std::size_t size() const { return examples.size(); }
};

// Candidate embedding phi mapping the input box into [0,1]^m. Identity and
// invertible affine maps are supported so that inversion is exact; Newton
// style approximate inversion for general phi is out of scope.
class Embedding {
 public:
  enum class Kind { kIdentity, kAffine };

  static Embedding identity(int d) { return identity(d, InputBox::unit(d)); }

  static Embedding identity(int d, InputBox box, double round_trip_tol = 1e-10) {
    Embedding e;
    e.kind_ = Kind::kIdentity;
    e.input_dim_ = d;
    e.output_dim_ = d;
    e.box_ = std::move(box);
    e.tol_ = round_trip_tol;
    e.validate_range();
    return e;
  }

  // phi(x) = A x + b with A an m x d matrix of full row rank.
  static Embedding affine(Mat a, Vec b, InputBox box,
                          double round_trip_tol = 1e-10) {
    Embedding e;
    e.kind_ = Kind::kAffine;
    e.a_ = std::move(a);
    e.b_ = std::move(b);
    e.output_dim_ = static_cast<int>(e.a_.size());
    if (e.output_dim_ == 0)
      throw std::invalid_argument("Embedding: empty matrix");
    e.input_dim_ = static_cast<int>(e.a_[0].size());
    for (const auto& row : e.a_)
      if (static_cast<int>(row.size()) != e.input_dim_)
        throw std::invalid_argument("Embedding: ragged matrix");
    if (static_cast<int>(e.b_.size()) != e.output_dim_)
      throw std::invalid_argument("Embedding: offset size mismatch");
    e.box_ = std::move(box);
    e.tol_ = round_trip_tol;

    // Gram matrix A A^T; a failed Cholesky means A is row-rank deficient
    // and no exact inverse exists.
    const std::size_t m = e.a_.size();
    Mat gram = zeros(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) gram[i][j] = dot(e.a_[i], e.a_[j]);
    if (!cholesky(gram))
      throw std::invalid_argument("Embedding: A must have full row rank");
    e.gram_chol_ = std::move(gram);
    e.validate_range();
    return e;
  }

  static Embedding affine(Mat a, Vec b) {
    const int d = a.empty() ? 0 : static_cast<int>(a[0].size());
    return affine(std::move(a), std::move(b), InputBox::unit(d));
  }

  Kind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const InputBox& box() const { return box_; }
  double round_trip_tolerance() const { return tol_; }

  Vec embed(const Vec& x) const {
    if (static_cast<int>(x.size()) != input_dim_)
      throw std::invalid_argument("embed: wrong input dimension");
    if (!box_.contains(x))
      throw std::domain_error("embed: input outside declared box");
    if (kind_ == Kind::kIdentity) return x;
    Vec v = matvec(a_, x);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += b_[i];
    return v;
  }

  // Exact preimage of v under phi; throws std::domain_error when v is not in
  // the image of the input box.
  Vec invert(const Vec& v) const {
    if (static_cast<int>(v.size()) != output_dim_)
      throw std::invalid_argument("invert: wrong dimension");
    Vec x;
    if (kind_ == Kind::kIdentity) {
      x = v;
    } else {
      Vec rhs = sub(v, b_);
      Vec z = cholesky_solve(gram_chol_, rhs);
      x = matvec_t(a_, z);
      // Minimum-norm solve of an inconsistent system leaves a residual.
      Vec back = matvec(a_, x);
      for (std::size_t i = 0; i < back.size(); ++i) back[i] += b_[i];
      if (norm_inf(sub(back, v)) >= tol_)
        throw std::domain_error("invert: no preimage (residual too large)");
    }
    // Snap boundary round-off into the box; anything further out is a
    // genuine image violation.
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < box_.lo[i]) {
        if (x[i] < box_.lo[i] - 1e-9)
          throw std::domain_error("invert: no preimage inside input box");
        x[i] = box_.lo[i];
      } else if (x[i] > box_.hi[i]) {
        if (x[i] > box_.hi[i] + 1e-9)
          throw std::domain_error("invert: no preimage inside input box");
        x[i] = box_.hi[i];
      }
    }
    return x;
  }

  QueryPair make_pair(const Vec& x, const Vec& x_prime) const {
    Vec px = embed(x);
    Vec pxp = embed(x_prime);
    return QueryPair(x, x_prime, sub(pxp, px));
  }

 private:
  Embedding() = default;

  // Interval arithmetic over the box: phi must land in [0,1]^m everywhere,
  // checked once at construction.
  void validate_range() const {
    if (static_cast<int>(box_.lo.size()) != input_dim_ ||
        static_cast<int>(box_.hi.size()) != input_dim_)
      throw std::invalid_argument("Embedding: box dimension mismatch");
    for (int i = 0; i < input_dim_; ++i)
      if (box_.lo[i] > box_.hi[i])
        throw std::invalid_argument("Embedding: empty box");
    const double slack = 1e-12;
    if (kind_ == Kind::kIdentity) {
      for (int i = 0; i < input_dim_; ++i)
        if (box_.lo[i] < -slack || box_.hi[i] > 1.0 + slack)
          throw std::invalid_argument(
              "Embedding: identity box must lie in [0,1]^d");
      return;
    }
    for (int i = 0; i < output_dim_; ++i) {
      double lo = b_[i], hi = b_[i];
      for (int j = 0; j < input_dim_; ++j) {
        const double u = a_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        lo += std::min(u * box_.lo[j], u * box_.hi[j]);
        hi += std::max(u * box_.lo[j], u * box_.hi[j]);
      }
      if (lo < -slack || hi > 1.0 + slack)
        throw std::invalid_argument(
            "Embedding: image exits [0,1]^m over the declared box");
    }
  }

  Kind kind_ = Kind::kIdentity;
  int input_dim_ = 0;
  int output_dim_ = 0;
  Mat a_;
  Vec b_;
  Mat gram_chol_;
  InputBox box_;
  double tol_ = 1e-10;
};

// Embedding config: {"kind":"identity"} or {"kind":"affine","A":[[..]],"b":[..]}.
// `m` supplies the dimension for the identity kind.
inline Embedding embedding_from_json(const nlohmann::json& j, int m) {
  const std::string kind = j.value("kind", "identity");
  if (kind == "identity") return Embedding::identity(m);
  if (kind == "affine") {
    if (!j.contains("A") || !j.contains("b"))
      throw std::invalid_argument("embedding config: affine needs A and b");
    Mat a = j.at("A").get<Mat>();
    Vec b = j.at("b").get<Vec>();
    return Embedding::affine(std::move(a), std::move(b));
  }
  throw std::invalid_argument("embedding config: unknown kind '" + kind + "'");
}

// One example per line: {"x":[...],"x_prime":[...],"y":0|1}, LF endings.
inline void write_dataset_jsonl(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& ex : ds.examples) {
    nlohmann::json j;
    j["x"] = ex.pair.x;
    j["x_prime"] = ex.pair.x_prime;
    j["y"] = ex.y;
    out << j.dump() << "\n";
  }
}

inline Dataset read_dataset_jsonl(const std::string& path, const Embedding& e) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  Dataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Vec x = j.at("x").get<Vec>();
    Vec xp = j.at("x_prime").get<Vec>();
    ds.examples.emplace_back(e.make_pair(x, xp), j.at("y").get<int>());
  }
  if (ds.examples.empty())
    throw std::invalid_argument("dataset file has no examples: " + path);
  ds.meta.distribution = "file:" + path;
  ds.meta.n = ds.examples.size();
  return ds;
}

}  // namespace preflearn
