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
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "preflearn/linalg.hpp"
#include "preflearn/rng.hpp"

// Symmetric comparison-noise models. A model is the c.d.f. F of the
// difference of the two candidates' utility perturbations; symmetry
// F(z) + F(-z) = 1 and F(0) = 1/2 make the label distribution
// P(y = 1) = F(w^T delta). The logistic kind is the Bradley-Terry model,
// the gaussian kind is Thurstone-Mosteller, and the zero kind is the
// noise-free sign oracle (ties resolved by a fair coin).

namespace preflearn {

namespace detail {

// Standard normal quantile: Acklam's rational approximation polished with
// two Newton steps against erfc, accurate to ~1 ulp over (0,1).
inline double standard_normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace detail

struct InverseBoundRow {
  double x;      // grid point in (0, 1/2]
  double inv;    // F^{-1}(x)
  double bound;  // polynomial upper bound at x
  double slack;  // inv - bound, expected <= 0
};

struct InverseBoundReport {
  std::vector<InverseBoundRow> rows;
  double max_slack = -std::numeric_limits<double>::infinity();
};

class NoiseModel {
 public:
  enum class Kind { kZero, kLogistic, kGaussian, kTabulated };

  static NoiseModel zero() { return NoiseModel(Kind::kZero, 0.0); }

  static NoiseModel logistic(double scale) {
    if (!(scale > 0.0))
      throw std::invalid_argument("logistic noise: scale must be > 0");
    return NoiseModel(Kind::kLogistic, scale);
  }

  static NoiseModel gaussian(double sigma) {
    if (!(sigma > 0.0))
      throw std::invalid_argument("gaussian noise: sigma must be > 0");
    return NoiseModel(Kind::kGaussian, sigma);
  }

  // A c.d.f. given by samples (z_i, F_i) with strictly increasing z and
  // nondecreasing F; evaluated by monotone linear interpolation. Symmetry is
  // enforced by averaging F(z) with 1 - F(-z).
  static NoiseModel tabulated(Vec zs, Vec fs) {
    if (zs.size() != fs.size() || zs.size() < 2)
      throw std::invalid_argument("tabulated noise: need >= 2 grid rows");
    for (std::size_t i = 1; i < zs.size(); ++i) {
      if (!(zs[i] > zs[i - 1]))
        throw std::invalid_argument("tabulated noise: z must be increasing");
      if (fs[i] < fs[i - 1] - 1e-12)
        throw std::invalid_argument("tabulated noise: F must be nondecreasing");
    }
    for (double f : fs)
      if (f < -1e-12 || f > 1.0 + 1e-12)
        throw std::invalid_argument("tabulated noise: F outside [0,1]");

    NoiseModel nm(Kind::kTabulated, 0.0);
    // Symmetrized grid over {z} U {-z} U {0}.
    Vec grid = zs;
    for (double z : zs) grid.push_back(-z);
    grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    nm.tab_z_ = grid;
    nm.tab_f_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double raw_pos = interp(zs, fs, grid[i]);
      double raw_neg = interp(zs, fs, -grid[i]);
      nm.tab_f_[i] = 0.5 * (raw_pos + (1.0 - raw_neg));
    }
    return nm;
  }

  // CSV with header "z,F" and strictly increasing z.
  static NoiseModel tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cdf table: " + path);
    std::string line;
    if (!std::getline(in, line))
      throw std::invalid_argument("cdf table is empty: " + path);
    auto strip = [](std::string s) {
      s.erase(std::remove_if(s.begin(), s.end(),
                             [](unsigned char ch) { return std::isspace(ch); }),
              s.end());
      return s;
    };
    if (strip(line) != "z,F")
      throw std::invalid_argument("cdf table must start with header 'z,F'");
    Vec zs, fs;
    while (std::getline(in, line)) {
      if (strip(line).empty()) continue;
      std::istringstream ss(line);
      std::string za, fa;
      if (!std::getline(ss, za, ',') || !std::getline(ss, fa))
        throw std::invalid_argument("malformed cdf row: " + line);
      zs.push_back(std::stod(za));
      fs.push_back(std::stod(fa));
    }
    return tabulated(std::move(zs), std::move(fs));
  }

  Kind kind() const { return kind_; }
  double scale() const { return param_; }
  bool has_density() const { return kind_ != Kind::kZero; }

  std::string name() const {
    switch (kind_) {
      case Kind::kZero: return "zero";
      case Kind::kLogistic: return "logistic";
      case Kind::kGaussian: return "gaussian";
      case Kind::kTabulated: return "tabulated";
    }
    return "?";
  }

  // F(z). The zero kind is the unit step with F(0) = 1/2, which makes the
  // sign convention at a zero margin (fair coin) fall out of the generic
  // sampling path.
  double cdf(double z) const {
    switch (kind_) {
      case Kind::kZero:
        return z < 0.0 ? 0.0 : (z > 0.0 ? 1.0 : 0.5);
      case Kind::kLogistic: {
        const double t = z / param_;
        if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
        const double e = std::exp(t);
        return e / (1.0 + e);
      }
      case Kind::kGaussian:
        return 0.5 * std::erfc(-z / (param_ * std::sqrt(2.0)));
      case Kind::kTabulated:
        return interp(tab_z_, tab_f_, z);
    }
    return 0.0;
  }

  // Density F'(z). Analytic for logistic/gaussian; central differences
  // (h = 1e-5) for tabulated.
  double pdf(double z) const {
    switch (kind_) {
      case Kind::kZero:
        throw std::invalid_argument("zero noise has no density");
      case Kind::kLogistic: {
        const double f = cdf(z);
        return f * (1.0 - f) / param_;
      }
      case Kind::kGaussian: {
        const double t = z / param_;
        return std::exp(-0.5 * t * t) / (param_ * std::sqrt(2.0 * M_PI));
      }
      case Kind::kTabulated: {
        const double h = 1e-5;
        return (cdf(z + h) - cdf(z - h)) / (2.0 * h);
      }
    }
    return 0.0;
  }

  // pdf(z) when F(z) is already at hand; saves the second exp/erfc in the
  // likelihood inner loop.
  double pdf_given_cdf(double z, double f) const {
    if (kind_ == Kind::kLogistic) return f * (1.0 - f) / param_;
    return pdf(z);
  }

  // Second derivative F''(z), same conventions as pdf().
  double pdf_derivative(double z) const {
    switch (kind_) {
      case Kind::kZero:
        throw std::invalid_argument("zero noise has no density");
      case Kind::kLogistic: {
        const double f = cdf(z);
        return f * (1.0 - f) * (1.0 - 2.0 * f) / (param_ * param_);
      }
      case Kind::kGaussian: {
        const double t = z / param_;
        return -t * std::exp(-0.5 * t * t) /
               (param_ * param_ * std::sqrt(2.0 * M_PI));
      }
      case Kind::kTabulated: {
        const double h = 1e-5;
        return (cdf(z + h) - 2.0 * cdf(z) + cdf(z - h)) / (h * h);
      }
    }
    return 0.0;
  }

  // Functional inverse of F on (0,1); |cdf(inv_cdf(p)) - p| <= 1e-10.
  double inv_cdf(double p) const {
    if (!(p > 0.0 && p < 1.0))
      throw std::domain_error("inv_cdf: p must lie in (0,1)");
    switch (kind_) {
      case Kind::kZero:
        throw std::invalid_argument("inv_cdf: unsupported for zero noise");
      case Kind::kLogistic:
        return param_ * std::log(p / (1.0 - p));
      case Kind::kGaussian:
        return param_ * detail::standard_normal_quantile(p);
      case Kind::kTabulated: {
        if (p < tab_f_.front() || p > tab_f_.back())
          throw std::domain_error(
              "inv_cdf: p outside the range of the tabulated c.d.f.");
        auto it = std::lower_bound(tab_f_.begin(), tab_f_.end(), p);
        std::size_t j = static_cast<std::size_t>(it - tab_f_.begin());
        if (j == 0) return tab_z_.front();
        const double f0 = tab_f_[j - 1], f1 = tab_f_[j];
        if (f1 <= f0) return tab_z_[j - 1];  // flat segment: left endpoint
        const double t = (p - f0) / (f1 - f0);
        return tab_z_[j - 1] + t * (tab_z_[j] - tab_z_[j - 1]);
      }
    }
    return 0.0;
  }

  // One Bernoulli label: 1 with probability F(margin). Always consumes
  // exactly one draw from the stream, so label sequences are a pure function
  // of (seed, query sequence).
  int sample_flip(double margin, SplitMix64& rng) const {
    return rng.uniform() < cdf(margin) ? 1 : 0;
  }

  // Checks the polynomial upper bounds on F^{-1} over (0, 1/2]:
  // logit(x) <= 4x - 2 and probit(x) <= sqrt(2*pi)*x - sqrt(2*pi)/2, both
  // tangent at x = 1/2. Meaningful for scale-1 models; the report carries
  // the per-point slack either way.
  InverseBoundReport check_inverse_poly_bound(const Vec& grid) const {
    if (kind_ != Kind::kLogistic && kind_ != Kind::kGaussian)
      throw std::invalid_argument(
          "check_inverse_poly_bound: only logistic/gaussian supported");
    InverseBoundReport report;
    for (double x : grid) {
      if (!(x > 0.0 && x <= 0.5))
        throw std::domain_error("check_inverse_poly_bound: grid in (0, 1/2]");
      InverseBoundRow row;
      row.x = x;
      row.inv = inv_cdf(x);
      row.bound = kind_ == Kind::kLogistic
                      ? 4.0 * x - 2.0
                      : std::sqrt(2.0 * M_PI) * x - std::sqrt(2.0 * M_PI) / 2.0;
      row.slack = row.inv - row.bound;
      report.max_slack = std::max(report.max_slack, row.slack);
      report.rows.push_back(row);
    }
    return report;
  }

  // min over z in [-B, B] of F'(z)^2 - F''(z) F(z), the strong-convexity
  // constant of the comparison log-loss restricted to achievable margins.
  // For the standard logistic this equals F(z)^3 (1 - F(z)) and the minimum
  // sits at z = -B.
  double strong_convexity_gamma(double B, int grid_points = 2001) const {
    if (!has_density())
      throw std::invalid_argument(
          "strong_convexity_gamma: unsupported for zero noise");
    if (!(B > 0.0))
      throw std::invalid_argument("strong_convexity_gamma: B must be > 0");
    if (grid_points < 2) grid_points = 2;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
      const double z = -B + 2.0 * B * i / (grid_points - 1);
      const double fp = pdf(z);
      best = std::min(best, fp * fp - pdf_derivative(z) * cdf(z));
    }
    return best;
  }

 private:
  NoiseModel(Kind kind, double param) : kind_(kind), param_(param) {}

  // Piecewise-linear interpolation clamped to the grid's edge values.
  static double interp(const Vec& zs, const Vec& fs, double z) {
    if (z <= zs.front()) return fs.front();
    if (z >= zs.back()) return fs.back();
    auto it = std::upper_bound(zs.begin(), zs.end(), z);
    std::size_t j = static_cast<std::size_t>(it - zs.begin());
    const double t = (z - zs[j - 1]) / (zs[j] - zs[j - 1]);
    return fs[j - 1] + t * (fs[j] - fs[j - 1]);
  }

  Kind kind_;
  double param_;
  Vec tab_z_;
  Vec tab_f_;
};

}  // namespace preflearn
