#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "lilmc/random.hpp"
#include "lilmc/strassen.hpp"
#include "brute_force.hpp"

using namespace lilmc;

namespace {

PolygonalPath tent() { return PolygonalPath::from_points({0.0, 0.5, 1.0}, {0.0, 0.5, 0.0}); }

}  // namespace

TEST(Theta, WorkedExample) {
  const std::vector<double> steps{1, 1, -2, 1};
  const auto W = partial_sums(steps);
  const auto p = build_theta(W, 1.0, 4);
  const double expect = 2.0 / std::sqrt(8.0 * std::log(std::log(4.0)));
  EXPECT_NEAR(p(0.5), expect, 1e-14);
  EXPECT_NEAR(p(0.5), 1.23724, 1e-5);
  // Interior point: (W_1 + (nt - 1) psi_2) / denom at t = 0.375.
  EXPECT_NEAR(p(0.375), (1.0 + 0.5 * 1.0) / std::sqrt(8.0 * std::log(std::log(4.0))), 1e-14);
}

TEST(Theta, EndpointAndZeroCases) {
  const std::vector<double> steps{0.3, -1.1, 2.0};
  const auto p = build_theta(partial_sums(steps), 2.0, 3);
  EXPECT_NEAR(functional_eval(p, Functional::endpoint), 1.2 / (2.0 * std::sqrt(6.0 * std::log(std::log(3.0)))), 1e-14);
  const std::vector<double> zeros(10, 0.0);
  EXPECT_EQ(path_energy(build_theta(partial_sums(zeros), 1.0, 10)), 0.0);
  // n <= e gives the zero path.
  const auto small = build_theta(partial_sums(steps), 1.0, 2);
  EXPECT_EQ(small.v, (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(build_theta(partial_sums(steps), 0.0, 3), DegenerateVariance);
}

TEST(Eta, WorkedExample) {
  const std::vector<double> Z{0, 1, -1, 2};
  const std::vector<double> s2{0, 1, 2, 6};
  const auto p = build_eta(Z, s2, 3);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_NEAR(p.t[1], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p.t[2], 2.0 / 6.0, 1e-15);
  const double denom = std::sqrt(12.0 * std::log(std::log(6.0)));
  EXPECT_NEAR(p.v[1], 1.0 / denom, 1e-14);
  EXPECT_NEAR(p.v[2], 0.0, 1e-14);
  EXPECT_NEAR(p.v[3], 2.0 / denom, 1e-14);
  // loglog 6 = 0.583198..., so the denominator is 2.645445, not sqrt(7).
  EXPECT_NEAR(p.v[1], 0.378008, 1e-6);
  EXPECT_NEAR(p.v[3], 0.756017, 1e-6);
}

TEST(Eta, ValidationAndZeroCases) {
  const std::vector<double> Z{0, 1, -1, 2};
  EXPECT_THROW(build_eta(Z, std::vector<double>{0, 1, 1, 6}, 3), ValidationError);
  // s_n^2 <= e gives the zero path.
  EXPECT_EQ(path_energy(build_eta(Z, std::vector<double>{0, 0.5, 1, 2}, 3)), 0.0);
  EXPECT_EQ(variance_time_index(std::vector<double>{0, 1, 2, 6}, 5.9), 2u);
  EXPECT_EQ(variance_time_index(std::vector<double>{0, 1, 2, 6}, 6.0), 3u);
  EXPECT_EQ(variance_time_index(std::vector<double>{0, 1, 2, 6}, 0.5), 0u);
}

TEST(Eta, CoincidesWithThetaForUnitVarianceIid) {
  RandomStream rng(3, 0, StreamPurpose::control);
  const std::size_t n = 500;
  std::vector<double> Z(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    Z[k] = rng.normal();
    s2[k] = static_cast<double>(k);
  }
  const auto W = partial_sums(std::span<const double>(Z).subspan(1));
  const auto theta = build_theta(W, 1.0, n);
  const auto eta = build_eta(Z, s2, n);
  const auto eta_sigma = build_eta(Z, s2, n, PathVariant::eta_sigma_n, 1.0);
  EXPECT_LE(sup_distance(theta, eta), 1e-12);
  EXPECT_LE(sup_distance(theta, eta_sigma), 1e-12);
}

TEST(Energy, Examples) {
  EXPECT_DOUBLE_EQ(path_energy(PolygonalPath::linear(1.0)), 1.0);
  EXPECT_DOUBLE_EQ(path_energy(tent()), 1.0);
  EXPECT_DOUBLE_EQ(path_energy(PolygonalPath::linear(2.0)), 4.0);
}

TEST(Functionals, Examples) {
  const auto line = PolygonalPath::linear(1.0);
  EXPECT_DOUBLE_EQ(functional_eval(line, Functional::endpoint), 1.0);
  EXPECT_DOUBLE_EQ(functional_eval(line, Functional::supremum), 1.0);
  EXPECT_DOUBLE_EQ(functional_eval(line, Functional::integral), 0.5);
  EXPECT_DOUBLE_EQ(functional_eval(tent(), Functional::endpoint), 0.0);
  EXPECT_DOUBLE_EQ(functional_eval(tent(), Functional::supremum), 0.5);
  EXPECT_DOUBLE_EQ(functional_eval(tent(), Functional::integral), 0.25);
  for (auto f : {Functional::endpoint, Functional::supremum, Functional::integral})
    EXPECT_EQ(functional_eval(PolygonalPath::zero(), f), 0.0);
}

TEST(Functionals, MaximaOverDiscretizedK) {
  // Brute force over slope grids with energy <= 1: the maxima of x(1), sup x
  // and int x approach 1, 1 and 1/sqrt(3) from below.
  const int segs = 4, levels = 33;
  double best_end = 0, best_sup = 0, best_int = 0;
  std::vector<int> idx(segs, 0);
  while (true) {
    double e = 0, x = 0, sup = 0, integral = 0;
    for (int i = 0; i < segs; ++i) {
      const double s = -2.0 + 4.0 * idx[i] / (levels - 1);
      e += s * s / segs;
      integral += (x + 0.5 * s / segs) / segs;
      x += s / segs;
      sup = std::max(sup, x);
    }
    if (e <= 1.0 + 1e-12) {
      best_end = std::max(best_end, x);
      best_sup = std::max(best_sup, sup);
      best_int = std::max(best_int, integral);
    }
    int k = 0;
    while (k < segs && ++idx[k] == levels) idx[k++] = 0;
    if (k == segs) break;
  }
  EXPECT_NEAR(best_end, 1.0, 1e-12);
  EXPECT_NEAR(best_sup, 1.0, 1e-12);
  EXPECT_LE(best_int, 1.0 / std::sqrt(3.0) + 1e-12);
  EXPECT_GE(best_int, 0.95 / std::sqrt(3.0));
}

TEST(SupDistance, Examples) {
  const auto a = PolygonalPath::linear(1.0);
  EXPECT_EQ(sup_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(sup_distance(a, PolygonalPath::zero()), 1.0);
  EXPECT_DOUBLE_EQ(sup_distance(a, PolygonalPath::linear(2.0)), 1.0);
  // Maximum at a breakpoint of only one path.
  EXPECT_DOUBLE_EQ(sup_distance(tent(), PolygonalPath::zero()), 0.5);
}

TEST(TautString, MatchesCoordinateDescentEnergy) {
  RandomStream rng(41, 0, StreamPurpose::probe);
  for (int inst = 0; inst < 100; ++inst) {
    const auto p = brute::random_path(rng, 8, 2.0);
    const double eps = 0.05 + 0.5 * rng.uniform();
    const auto c = project_to_corridor(p, eps);
    EXPECT_NEAR(c.energy, brute::corridor_energy_cd(p, eps), 1e-8);
    // The returned path stays in the corridor and its energy matches.
    PolygonalPath q;
    q.t = c.t;
    q.v = c.v;
    EXPECT_LE(sup_distance(p, q), eps + 1e-12);
    EXPECT_NEAR(path_energy(q), c.energy, 1e-9 * std::max(1.0, c.energy));
  }
}

TEST(TautString, Validation) {
  const std::vector<double> t{0.0, 1.0};
  EXPECT_THROW(taut_string(t, std::vector<double>{0.1, 0.0}, std::vector<double>{0.2, 1.0}), ValidationError);
  EXPECT_THROW(taut_string(t, std::vector<double>{-1.0, 1.0}, std::vector<double>{1.0, 1.0}), ValidationError);
  EXPECT_THROW(taut_string(std::vector<double>{0.0, 0.5}, std::vector<double>{-1, -1}, std::vector<double>{1, 1}),
               ValidationError);
}

TEST(DistToK, Examples) {
  EXPECT_EQ(dist_to_K(PolygonalPath::zero()), 0.0);
  EXPECT_EQ(dist_to_K(PolygonalPath::linear(1.0)), 0.0);
  EXPECT_NEAR(dist_to_K(PolygonalPath::linear(2.0), 1e-7), 1.0, 1e-6);
  EXPECT_NEAR(dist_to_K(PolygonalPath::linear(-2.0), 1e-7), 1.0, 1e-6);
  // A spike of height 2 at t = 1/2: best approximant in K is within 1 of it
  // at the spike, which forces deviation on the flanks as well.
  EXPECT_GT(dist_to_K(PolygonalPath::from_points({0, 0.5, 1}, {0, 2, 0})), 0.5);
}

TEST(DistToK, AgreesWithIndependentSolverOnRandomPaths) {
  RandomStream rng(42, 0, StreamPurpose::probe);
  const double tol = 1e-7;
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto p = brute::random_path(rng, 6, 2.5);
    worst = std::max(worst, std::abs(dist_to_K(p, tol) - brute::dist_to_K_oracle(p, tol)));
  }
  EXPECT_LE(worst, 10 * tol);
}

TEST(DistToK, SlopeGridSearchIsAnUpperBound) {
  RandomStream rng(43, 0, StreamPurpose::probe);
  for (int inst = 0; inst < 20; ++inst) {
    const auto p = brute::random_path(rng, 4, 2.0);
    const double d = dist_to_K(p, 1e-7);
    const double grid = brute::dist_to_K_grid(p, 161);
    EXPECT_LE(d, grid + 1e-7);
    EXPECT_LE(grid - d, 0.06);
  }
}

TEST(DistToK, ZeroExactlyInsideK) {
  RandomStream rng(44, 0, StreamPurpose::probe);
  for (int inst = 0; inst < 100; ++inst) {
    const auto p = brute::random_path(rng, 8, 1.5);
    const double d = dist_to_K(p, 1e-7);
    if (path_energy(p) <= 1.0)
      EXPECT_EQ(d, 0.0);
    else
      EXPECT_GT(d, 0.0);
  }
}

TEST(DistToK, OneLipschitzInSupMetric) {
  RandomStream rng(45, 0, StreamPurpose::probe);
  const double tol = 1e-7;
  for (int inst = 0; inst < 100; ++inst) {
    const auto p = brute::random_path(rng, 6, 2.0);
    const auto q = brute::random_path(rng, 6, 2.0);
    EXPECT_LE(std::abs(dist_to_K(p, tol) - dist_to_K(q, tol)), sup_distance(p, q) + 2 * tol);
  }
}

TEST(DistToK, NondecreasingUnderScaling) {
  RandomStream rng(46, 0, StreamPurpose::probe);
  const double tol = 1e-8;
  for (int inst = 0; inst < 30; ++inst) {
    auto p = brute::random_path(rng, 6, 1.0);
    if (path_energy(p) <= 1.0) p = p.scaled(2.0 / std::sqrt(path_energy(p)));
    double prev = dist_to_K(p, tol);
    for (double lambda : {1.25, 1.5, 2.0, 3.0, 5.0}) {
      const double d = dist_to_K(p.scaled(lambda), tol);
      EXPECT_GE(d, prev - 2 * tol);
      prev = d;
    }
  }
}

TEST(DistToK, ProjectionLiesInKAndAttainsDistance) {
  RandomStream rng(47, 0, StreamPurpose::probe);
  const double tol = 1e-7;
  for (int inst = 0; inst < 100; ++inst) {
    const auto p = brute::random_path(rng, 8, 3.0);
    const auto x = project_to_K(p, tol);
    EXPECT_LE(path_energy(x), 1.0 + 1e-9);
    EXPECT_LE(sup_distance(p, x), dist_to_K(p, tol) + 3 * tol);
  }
}

TEST(Subsequence, GeometricIsIncreasing) {
  const auto ns = geometric_subsequence(100000, 1.5, 16);
  ASSERT_FALSE(ns.empty());
  EXPECT_EQ(ns.front(), 16u);
  EXPECT_LE(ns.back(), 100000u);
  for (std::size_t i = 1; i < ns.size(); ++i) EXPECT_GT(ns[i], ns[i - 1]);
  EXPECT_THROW(geometric_subsequence(100, 1.0), ValidationError);
}

TEST(ClusterTracker, ZeroPathsAndUnitLine) {
  ClusterTracker zeros;
  for (std::size_t n : {10, 20, 40}) {
    auto z = PolygonalPath::zero();
    z.n = n;
    zeros.add(z);
  }
  const auto& r = zeros.report();
  EXPECT_EQ(r.last().max_endpoint, 0.0);
  EXPECT_EQ(r.last().max_supremum, 0.0);
  EXPECT_EQ(r.last().window_min_dist, 0.0);

  ClusterTracker t;
  auto a = PolygonalPath::zero();
  a.n = 1;
  auto b = PolygonalPath::linear(1.0);
  b.n = 2;
  t.add(a);
  t.add(b);
  EXPECT_DOUBLE_EQ(t.report().last().max_endpoint, 1.0);
  EXPECT_TRUE(t.report().endpoint_in_band());
  EXPECT_THROW(t.add(a), ValidationError);
  EXPECT_THROW(ClusterTracker().report(), ValidationError);
}

TEST(ClusterTracker, RunningMaximaNondecreasing) {
  RandomStream rng(48, 0, StreamPurpose::probe);
  ClusterTracker t;
  for (std::size_t n = 1; n <= 30; ++n) {
    auto p = brute::random_path(rng, 5, 1.5);
    p.n = n;
    t.add(p);
  }
  const auto& recs = t.report().records;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    EXPECT_GE(recs[i].max_endpoint, recs[i - 1].max_endpoint);
    EXPECT_GE(recs[i].max_supremum, recs[i - 1].max_supremum);
    EXPECT_GE(recs[i].max_integral, recs[i - 1].max_integral);
  }
}

TEST(LilRatio, CheckpointsAndMaximum) {
  std::vector<double> W(1001);
  for (std::size_t k = 0; k <= 1000; ++k) W[k] = std::sqrt(static_cast<double>(k));
  const auto s = lil_ratio_series(W, 1.0, 10, 1000);
  EXPECT_EQ(s.checkpoints, (std::vector<std::size_t>{10, 100, 1000}));
  const double r10 = std::sqrt(10.0) / std::sqrt(20.0 * std::log(std::log(10.0)));
  EXPECT_NEAR(s.ratio_at[0], r10, 1e-14);
  EXPECT_EQ(s.argmax, 10u);
  EXPECT_THROW(lil_ratio_series(W, 0.0, 10, 1000), DegenerateVariance);
}

TEST(PathCsv, OneRowPerVertex) {
  std::ostringstream out;
  write_path_csv(out, tent());
  EXPECT_EQ(out.str(), "t,value\n0,0\n0.5,0.5\n1,0\n");
}
