#pragma once

// Brute-force references that share no code with the library solvers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lilmc/path.hpp"
#include "lilmc/random.hpp"

namespace brute {

using lilmc::PolygonalPath;
using lilmc::path_energy;

// Minimum over all vertices of the transportation polytope: every basic
// feasible solution has its support in some set of m + n - 1 cells, so
// enumerate those sets, solve the marginal equations on them, and keep the
// nonnegative solutions.
inline double enumerate_couplings(const std::vector<double>& a, const std::vector<double>& b, const Eigen::MatrixXd& C) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  const int cells = m * n;
  const int k = m + n - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    // Row sums (m equations) and all but the last column sum.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd rhs(k);
    for (int i = 0; i < m; ++i) rhs(i) = a[i];
    for (int j = 0; j < n - 1; ++j) rhs(m + j) = b[j];
    for (int c = 0; c < k; ++c) {
      const int i = pick[c] / n;
      const int j = pick[c] % n;
      A(i, c) = 1.0;
      if (j < n - 1) A(m + j, c) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(rhs);
      if (x.minCoeff() >= -1e-12) {
        double cost = 0.0;
        for (int c = 0; c < k; ++c) cost += x(c) * C(pick[c] / n, pick[c] % n);
        best = std::min(best, cost);
      }
    }
    int p = k - 1;
    while (p >= 0 && pick[p] == cells - k + p) --p;
    if (p < 0) break;
    ++pick[p];
    for (int q = p + 1; q < k; ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

// Minimal energy of a path pinned at 0 through the boxes [v_i - eps, v_i + eps]
// at t_1..t_m, by projected Gauss-Seidel on the convex quadratic. Optimal paths
// are linear between gates, so gate values determine them.
inline double corridor_energy_cd(const PolygonalPath& p, double eps, int sweeps = 20000) {
  const std::size_t m = p.size() - 1;
  std::vector<double> x(p.size(), 0.0);
  for (std::size_t i = 1; i <= m; ++i) x[i] = std::clamp(0.0, p.v[i] - eps, p.v[i] + eps);
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 1; i <= m; ++i) {
      const double wl = 1.0 / (p.t[i] - p.t[i - 1]);
      double target;
      if (i < m) {
        const double wr = 1.0 / (p.t[i + 1] - p.t[i]);
        target = (wl * x[i - 1] + wr * x[i + 1]) / (wl + wr);
      } else {
        target = x[i - 1];
      }
      x[i] = std::clamp(target, p.v[i] - eps, p.v[i] + eps);
    }
  }
  double e = 0.0;
  for (std::size_t i = 1; i <= m; ++i) e += (x[i] - x[i - 1]) * (x[i] - x[i - 1]) / (p.t[i] - p.t[i - 1]);
  return e;
}

inline double dist_to_K_oracle(const PolygonalPath& p, double tol) {
  if (path_energy(p) <= 1.0) return 0.0;
  double lo = 0.0, hi = 0.0;
  for (double v : p.v) hi = std::max(hi, std::abs(v));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (corridor_energy_cd(p, mid) <= 1.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Coarse slope-grid search over K: polygonal paths with breakpoints at p's
// breakpoints and slopes from a grid, energy <= 1. Returns the best sup
// distance found; an upper bound for the true distance.
inline double dist_to_K_grid(const PolygonalPath& p, int levels) {
  const std::size_t segs = p.size() - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(segs, 0);
  const double smax = 4.0;
  while (true) {
    double e = 0.0, x = 0.0, d = 0.0;
    for (std::size_t i = 0; i < segs; ++i) {
      const double slope = -smax + 2.0 * smax * idx[i] / (levels - 1);
      const double dt = p.t[i + 1] - p.t[i];
      e += slope * slope * dt;
      x += slope * dt;
      d = std::max(d, std::abs(x - p.v[i + 1]));
    }
    if (e <= 1.0) best = std::min(best, d);
    std::size_t k = 0;
    while (k < segs && ++idx[k] == levels) idx[k++] = 0;
    if (k == segs) break;
  }
  return best;
}

// Random path with at most max_breaks breakpoints and values in [-scale, scale].
inline PolygonalPath random_path(lilmc::RandomStream& rng, std::size_t max_breaks, double scale) {
  const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_breaks - 1));
  std::vector<double> t{0.0};
  std::vector<double> cuts;
  for (std::size_t i = 1; i < m; ++i) cuts.push_back(0.05 + 0.9 * rng.uniform());
  std::sort(cuts.begin(), cuts.end());
  for (double c : cuts)
    if (c > t.back() + 1e-3) t.push_back(c);
  t.push_back(1.0);
  std::vector<double> v{0.0};
  for (std::size_t i = 1; i < t.size(); ++i) v.push_back(scale * (2.0 * rng.uniform() - 1.0));
  return PolygonalPath::from_points(t, v);
}

}  // namespace brute
