#pragma once

// Continuous piecewise-linear paths on [0,1] pinned at 0, and the rescaled
// partial-sum paths theta_n (natural time) and eta_n (variance time).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lilmc/error.hpp"

namespace lilmc {

enum class PathVariant { plain, theta, eta_variance_time, eta_sigma_n };

inline const char* to_string(PathVariant v) {
  switch (v) {
    case PathVariant::plain:
      return "plain";
    case PathVariant::theta:
      return "theta";
    case PathVariant::eta_variance_time:
      return "eta-variance-time";
    case PathVariant::eta_sigma_n:
      return "eta-sigma-n";
  }
  return "?";
}

struct PolygonalPath {
  std::vector<double> t;
  std::vector<double> v;
  std::size_t n = 0;
  PathVariant variant = PathVariant::plain;

  static PolygonalPath zero() { return {{0.0, 1.0}, {0.0, 0.0}, 0, PathVariant::plain}; }

  /// x(t) = slope * t.
  static PolygonalPath linear(double slope) { return {{0.0, 1.0}, {0.0, slope}, 0, PathVariant::plain}; }

  static PolygonalPath from_points(std::vector<double> t, std::vector<double> v) {
    PolygonalPath p{std::move(t), std::move(v), 0, PathVariant::plain};
    p.validate();
    return p;
  }

  std::size_t size() const { return t.size(); }

  void validate() const {
    if (t.size() < 2 || t.size() != v.size()) throw ValidationError("path needs >= 2 matching breakpoints");
    if (t.front() != 0.0 || t.back() != 1.0) throw ValidationError("path breakpoints must span [0,1]");
    if (v.front() != 0.0) throw ValidationError("path must start at 0");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw ValidationError("path breakpoints must be strictly increasing");
  }

  double operator()(double s) const {
    if (s <= 0.0) return v.front();
    if (s >= 1.0) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double w = (s - t[k - 1]) / (t[k] - t[k - 1]);
    return v[k - 1] + w * (v[k] - v[k - 1]);
  }

  PolygonalPath scaled(double lambda) const {
    PolygonalPath p = *this;
    for (auto& x : p.v) x *= lambda;
    return p;
  }
};

/// log log x, defined for x > e.
inline double loglog(double x) { return std::log(std::log(x)); }

/// theta_n from W_0 = 0, W_1, ..., W_n (W_k = psi(X_1) + ... + psi(X_k)).
/// Vertices at k/n with values W_k / (sigma sqrt(2 n log log n)); the zero
/// path when n <= e.
inline PolygonalPath build_theta(std::span<const double> W, double sigma, std::size_t n) {
  if (!(sigma > 0.0)) throw DegenerateVariance("theta_n needs sigma > 0");
  if (static_cast<double>(n) <= std::numbers::e) {
    PolygonalPath z = PolygonalPath::zero();
    z.n = n;
    z.variant = PathVariant::theta;
    return z;
  }
  if (W.size() < n + 1) throw ValidationError("theta_n needs W_0..W_n");
  const double nn = static_cast<double>(n);
  const double denom = sigma * std::sqrt(2.0 * nn * loglog(nn));
  PolygonalPath p;
  p.n = n;
  p.variant = PathVariant::theta;
  p.t.resize(n + 1);
  p.v.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    p.t[k] = static_cast<double>(k) / nn;
    p.v[k] = W[k] / denom;
  }
  p.t[n] = 1.0;
  p.v[0] = 0.0;
  return p;
}

/// Partial sums W_0 = 0, W_k = x_1 + ... + x_k of per-step values.
inline std::vector<double> partial_sums(std::span<const double> steps) {
  std::vector<double> W(steps.size() + 1, 0.0);
  for (std::size_t k = 0; k < steps.size(); ++k) W[k + 1] = W[k] + steps[k];
  return W;
}

/// g(s) = sup{n : s_n^2 <= s} over s2[0..], with s2[0] = 0.
inline std::size_t variance_time_index(std::span<const double> s2, double s) {
  const auto it = std::upper_bound(s2.begin(), s2.end(), s);
  return it == s2.begin() ? 0 : static_cast<std::size_t>(it - s2.begin()) - 1;
}

/// eta_n from Z[1..n] and s2[1..n] (index 0 ignored, taken as 0). Vertices at
/// s_k^2 / s_n^2 with values S_k / denominator, where the denominator is
/// sqrt(2 s_n^2 log log s_n^2) (variance time) or sigma sqrt(2 n log log n).
inline PolygonalPath build_eta(std::span<const double> Z, std::span<const double> s2, std::size_t n,
                               PathVariant variant = PathVariant::eta_variance_time, double sigma = 0.0) {
  if (variant != PathVariant::eta_variance_time && variant != PathVariant::eta_sigma_n)
    throw ValidationError("build_eta needs an eta variant");
  if (Z.size() < n + 1 || s2.size() < n + 1) throw ValidationError("eta_n needs Z and s2 up to index n");
  double prev = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (!(s2[k] > prev)) throw ValidationError("s_k^2 must be strictly increasing");
    prev = s2[k];
  }
  PolygonalPath p = PolygonalPath::zero();
  p.n = n;
  p.variant = variant;
  double denom = 0.0;
  if (variant == PathVariant::eta_variance_time) {
    if (n == 0 || s2[n] <= std::numbers::e) return p;
    denom = std::sqrt(2.0 * s2[n] * loglog(s2[n]));
  } else {
    if (!(sigma > 0.0)) throw DegenerateVariance("eta_n (sigma-n) needs sigma > 0");
    if (static_cast<double>(n) <= std::numbers::e) return p;
    const double nn = static_cast<double>(n);
    denom = sigma * std::sqrt(2.0 * nn * loglog(nn));
  }
  p.t.assign(n + 1, 0.0);
  p.v.assign(n + 1, 0.0);
  double S = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    S += Z[k];
    p.t[k] = s2[k] / s2[n];
    p.v[k] = S / denom;
  }
  p.t[n] = 1.0;
  return p;
}

/// Integral of x'(t)^2: sum of (dv)^2 / dt.
inline double path_energy(const PolygonalPath& p) {
  double e = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double dv = p.v[i] - p.v[i - 1];
    e += dv * dv / (p.t[i] - p.t[i - 1]);
  }
  return e;
}

enum class Functional { endpoint, supremum, integral };

inline const char* to_string(Functional f) {
  switch (f) {
    case Functional::endpoint:
      return "endpoint";
    case Functional::supremum:
      return "sup";
    case Functional::integral:
      return "integral";
  }
  return "?";
}

inline double functional_eval(const PolygonalPath& p, Functional which) {
  switch (which) {
    case Functional::endpoint:
      return p.v.back();
    case Functional::supremum:
      return *std::max_element(p.v.begin(), p.v.end());
    case Functional::integral: {
      double s = 0.0;
      for (std::size_t i = 1; i < p.size(); ++i) s += 0.5 * (p.v[i] + p.v[i - 1]) * (p.t[i] - p.t[i - 1]);
      return s;
    }
  }
  return 0.0;
}

/// sup_t |p(t) - q(t)|, attained on the merged breakpoint set.
inline double sup_distance(const PolygonalPath& p, const PolygonalPath& q) {
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p.size() || j < q.size()) {
    double s;
    if (j >= q.size() || (i < p.size() && p.t[i] <= q.t[j]))
      s = p.t[i];
    else
      s = q.t[j];
    d = std::max(d, std::abs(p(s) - q(s)));
    while (i < p.size() && p.t[i] <= s) ++i;
    while (j < q.size() && q.t[j] <= s) ++j;
  }
  return d;
}

inline void write_path_csv(std::ostream& out, const PolygonalPath& p) {
  out.precision(17);
  out << "t,value\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << p.t[i] << ',' << p.v[i] << '\n';
}

}  // namespace lilmc
