#pragma once

// Exact Wasserstein-1 distances: a transportation-simplex solver for finite
// supports and the order-statistics formula for equal-size 1-D samples.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lilmc/error.hpp"
#include "lilmc/random.hpp"

namespace lilmc {

/// Probability measure with finitely many atoms.
struct FiniteMeasure {
  std::vector<double> points;
  std::vector<double> weights;

  static FiniteMeasure dirac(double x) { return {{x}, {1.0}}; }

  /// Measure on states 0..m-1 from a weight vector.
  static FiniteMeasure on_states(const Eigen::VectorXd& w) {
    FiniteMeasure m;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      m.points.push_back(static_cast<double>(i));
      m.weights.push_back(w(i));
    }
    return m;
  }

  static FiniteMeasure empirical(std::span<const double> samples) {
    FiniteMeasure m;
    m.points.assign(samples.begin(), samples.end());
    m.weights.assign(samples.size(), 1.0 / static_cast<double>(samples.size()));
    return m.merged();
  }

  void validate() const {
    if (points.empty() || points.size() != weights.size())
      throw ValidationError("finite measure needs matching, nonempty points and weights");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ValidationError("finite measure has a negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("finite measure weights must sum to 1");
  }

  /// Sorted support with duplicate points merged by summing their weights.
  FiniteMeasure merged() const {
    std::map<double, double> acc;
    for (std::size_t i = 0; i < points.size(); ++i) acc[points[i]] += weights[i];
    FiniteMeasure m;
    for (const auto& [p, w] : acc) {
      m.points.push_back(p);
      m.weights.push_back(w);
    }
    return m;
  }

  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += points[i] * weights[i];
    return s;
  }
};

struct TransportFlow {
  std::size_t from = 0;
  std::size_t to = 0;
  double mass = 0.0;
};

struct TransportPlan {
  double cost = 0.0;
  std::vector<TransportFlow> flows;
  std::size_t pivots = 0;
};

namespace detail {

// Transportation simplex on a spanning-tree basis with m + n - 1 cells
// (degenerate cells carry zero flow). Rows are nodes 0..m-1, columns m..m+n-1.
template <class Cost>
TransportPlan solve_transport_simplex(const std::vector<double>& supply, const std::vector<double>& demand,
                                      const Cost& cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  struct Cell {
    std::size_t i, j;
    double flow;
  };
  std::vector<Cell> basis;
  basis.reserve(m + n - 1);

  // North-west corner start: a monotone staircase always has m + n - 1 cells.
  {
    std::vector<double> ra = supply;
    std::vector<double> rb = demand;
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const double x = (i == m - 1 && j == n - 1) ? std::max(0.0, std::min(ra[i], rb[j])) : std::min(ra[i], rb[j]);
      basis.push_back({i, j, x});
      ra[i] -= x;
      rb[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (ra[i] <= rb[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const std::size_t nodes = m + n;
  std::vector<std::vector<std::size_t>> adj(nodes);
  for (std::size_t c = 0; c < basis.size(); ++c) {
    adj[basis[c].i].push_back(c);
    adj[m + basis[c].j].push_back(c);
  }
  auto other = [&](std::size_t cell, std::size_t node) {
    return node < m ? m + basis[cell].j : basis[cell].i;
  };
  auto detach = [&](std::size_t node, std::size_t cell) {
    auto& v = adj[node];
    v.erase(std::find(v.begin(), v.end(), cell));
  };

  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(cost(i, j)));
  const double tol = 1e-12 * std::max(1.0, scale);

  std::vector<double> pot(nodes);
  std::vector<std::size_t> parent_cell(nodes);
  std::vector<std::size_t> parent(nodes);
  std::vector<std::size_t> depth(nodes);
  std::vector<std::size_t> queue(nodes);
  std::vector<char> seen(nodes);
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

  TransportPlan plan;
  const std::size_t max_pivots = 50 * (m + n) * (m + n) + 1000;
  for (;;) {
    std::fill(seen.begin(), seen.end(), 0);
    pot[0] = 0.0;
    parent[0] = none;
    depth[0] = 0;
    seen[0] = 1;
    std::size_t head = 0;
    std::size_t tail = 0;
    queue[tail++] = 0;
    while (head < tail) {
      const std::size_t u = queue[head++];
      for (const std::size_t c : adj[u]) {
        const std::size_t w = other(c, u);
        if (seen[w]) continue;
        seen[w] = 1;
        // u_i + v_j = c_ij
        pot[w] = cost(basis[c].i, basis[c].j) - pot[u];
        parent[w] = u;
        parent_cell[w] = c;
        depth[w] = depth[u] + 1;
        queue[tail++] = w;
      }
    }

    double best = -tol;
    std::size_t ei = none;
    std::size_t ej = none;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double reduced = cost(i, j) - pot[i] - pot[m + j];
        if (reduced < best) {
          best = reduced;
          ei = i;
          ej = j;
        }
      }
    }
    if (ei == none) break;
    if (++plan.pivots > max_pivots) throw Error("transportation simplex did not converge");

    // Tree path from column node to row node; signs alternate starting with '-'.
    std::vector<std::size_t> from_col;
    std::vector<std::size_t> from_row;
    std::size_t a = m + ej;
    std::size_t b = ei;
    while (depth[a] > depth[b]) {
      from_col.push_back(parent_cell[a]);
      a = parent[a];
    }
    while (depth[b] > depth[a]) {
      from_row.push_back(parent_cell[b]);
      b = parent[b];
    }
    while (a != b) {
      from_col.push_back(parent_cell[a]);
      a = parent[a];
      from_row.push_back(parent_cell[b]);
      b = parent[b];
    }
    std::vector<std::size_t> cycle = from_col;
    cycle.insert(cycle.end(), from_row.rbegin(), from_row.rend());

    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = none;
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      if (basis[cycle[k]].flow < theta) {
        theta = basis[cycle[k]].flow;
        leaving = cycle[k];
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      Cell& c = basis[cycle[k]];
      c.flow = (k % 2 == 0) ? std::max(0.0, c.flow - theta) : c.flow + theta;
    }
    detach(basis[leaving].i, leaving);
    detach(m + basis[leaving].j, leaving);
    basis[leaving] = {ei, ej, theta};
    adj[ei].push_back(leaving);
    adj[m + ej].push_back(leaving);
  }

  for (const Cell& c : basis) {
    if (c.flow > 0.0) {
      plan.flows.push_back({c.i, c.j, c.flow});
      plan.cost += c.flow * cost(c.i, c.j);
    }
  }
  return plan;
}

}  // namespace detail

/// Optimal transport plan between weight vectors `mu` (rows) and `nu`
/// (columns) under cost(i, j). Zero-weight atoms are dropped before solving.
template <class Cost>
TransportPlan solve_transport(std::span<const double> mu, std::span<const double> nu, const Cost& cost) {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<double> supply;
  std::vector<double> demand;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) {
      rows.push_back(i);
      supply.push_back(mu[i]);
    }
  for (std::size_t j = 0; j < nu.size(); ++j)
    if (nu[j] > 0.0) {
      cols.push_back(j);
      demand.push_back(nu[j]);
    }
  if (rows.empty() || cols.empty()) throw ValidationError("transport between empty measures");
  auto reduced = [&](std::size_t i, std::size_t j) { return cost(rows[i], cols[j]); };
  TransportPlan plan = detail::solve_transport_simplex(supply, demand, reduced);
  for (auto& f : plan.flows) {
    f.from = rows[f.from];
    f.to = cols[f.to];
  }
  return plan;
}

/// Checks that `cost` is a metric: zero diagonal, symmetric, nonnegative and
/// the triangle inequality on every triple (up to 64 points) or on 20000
/// random triples otherwise.
inline void audit_metric(const Eigen::MatrixXd& cost, double tol = 1e-12) {
  const Eigen::Index k = cost.rows();
  if (cost.cols() != k) throw ValidationError("cost matrix must be square");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(cost(i, i)) > tol) throw ValidationError("cost matrix has a nonzero diagonal");
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!(cost(i, j) >= 0.0)) throw ValidationError("cost matrix has a negative entry");
      if (std::abs(cost(i, j) - cost(j, i)) > tol) throw ValidationError("cost matrix is not symmetric");
    }
  }
  auto check = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c) {
    if (cost(a, c) > cost(a, b) + cost(b, c) + tol) throw ValidationError("cost matrix violates the triangle inequality");
  };
  if (k <= 64) {
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b)
        for (Eigen::Index c = 0; c < k; ++c) check(a, b, c);
  } else {
    RandomStream rng(0x5eed, 0, StreamPurpose::probe);
    auto pick = [&] { return std::min<Eigen::Index>(static_cast<Eigen::Index>(rng.uniform() * k), k - 1); };
    for (int t = 0; t < 20000; ++t) check(pick(), pick(), pick());
  }
}

/// W1 between two weight vectors on a common index set with the given metric.
inline double w1_finite(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::MatrixXd& metric) {
  if (mu.size() != nu.size() || metric.rows() != mu.size())
    throw ValidationError("measures and metric must share one index set");
  FiniteMeasure::on_states(mu).validate();
  FiniteMeasure::on_states(nu).validate();
  audit_metric(metric);
  const std::span<const double> a(mu.data(), static_cast<std::size_t>(mu.size()));
  const std::span<const double> b(nu.data(), static_cast<std::size_t>(nu.size()));
  return solve_transport(a, b, [&](std::size_t i, std::size_t j) {
           return metric(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
         }).cost;
}

/// W1 between two finite measures on the real line (cost |x - y|).
inline double w1_finite(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  mu.validate();
  nu.validate();
  const FiniteMeasure a = mu.merged();
  const FiniteMeasure b = nu.merged();
  return solve_transport(std::span<const double>(a.weights), std::span<const double>(b.weights),
                         [&](std::size_t i, std::size_t j) { return std::abs(a.points[i] - b.points[j]); })
      .cost;
}

/// (1/N) sum |x_(i) - y_(i)| for equal-size samples. Unsorted input is sorted
/// on a copy.
inline double w1_empirical_1d(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("w1_empirical_1d needs equal sample counts");
  if (xs.empty()) throw ValidationError("w1_empirical_1d needs at least one sample");
  std::vector<double> sx;
  std::vector<double> sy;
  if (!std::is_sorted(xs.begin(), xs.end())) {
    sx.assign(xs.begin(), xs.end());
    std::sort(sx.begin(), sx.end());
    xs = sx;
  }
  if (!std::is_sorted(ys.begin(), ys.end())) {
    sy.assign(ys.begin(), ys.end());
    std::sort(sy.begin(), sy.end());
    ys = sy;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += std::abs(xs[i] - ys[i]);
  return s / static_cast<double>(xs.size());
}

}  // namespace lilmc
