#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"

using namespace lilmc;

TEST(Kernel, RejectsNonStochasticMatrix) {
  Eigen::MatrixXd P(2, 2);
  P << 0.5, 0.6, 0.2, 0.8;
  EXPECT_THROW(TransitionKernel::finite(P), ValidationError);
  P << 1.1, -0.1, 0.2, 0.8;
  EXPECT_THROW(TransitionKernel::finite(P), ValidationError);
  EXPECT_THROW(TransitionKernel::finite(Eigen::MatrixXd(2, 3)), ValidationError);
}

TEST(Kernel, RejectsBadIfsAndAr) {
  EXPECT_THROW(TransitionKernel::ifs({{1.0, 0.0}}, {1.0}), ValidationError);
  EXPECT_THROW(TransitionKernel::ifs({{0.5, 0.0}, {0.5, 0.5}}, {0.5, 0.6}), ValidationError);
  EXPECT_THROW(TransitionKernel::ifs({{0.5, 0.7}}, {1.0}), ValidationError);
  EXPECT_THROW(TransitionKernel::ar(1.0, Noise{}), ValidationError);
  EXPECT_THROW(TransitionKernel::ar(0.5, Noise{NoiseKind::student_t, 0.0, 1.0, 3}), ValidationError);
  EXPECT_NO_THROW(TransitionKernel::ar(0.5, Noise{NoiseKind::student_t, 0.0, 1.0, 4}));
}

TEST(Kernel, RejectsBadMetric) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  EXPECT_THROW(StateSpace::finite(3, d), ValidationError);
  d << 0, 1, -1, 1, 0, 1, -1, 1, 0;
  EXPECT_THROW(StateSpace::finite(3, d), ValidationError);
}

TEST(Kernel, DyadicIfsStepsStayOnBinaryGrid) {
  const auto k = oracle::dyadic_ifs();
  RandomStream rng(1, 0, StreamPurpose::simulate);
  double x = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double y = k.step(x, rng);
    ASSERT_TRUE(y == x / 2 || y == x / 2 + 0.5);
    x = y;
  }
  EXPECT_THROW(k.step(1.5, rng), DomainError);
}

TEST(Kernel, FiniteTransitionFrequencies) {
  const auto k = oracle::two_state();
  RandomStream rng(2, 0, StreamPurpose::simulate);
  const int n = 100000;
  int to_one = 0;
  for (int i = 0; i < n; ++i) to_one += k.step(0.0, rng) == 1.0;
  const double p = 0.1;
  EXPECT_NEAR(static_cast<double>(to_one) / n, p, 5.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Kernel, ArStationaryVariance) {
  const auto k = oracle::ar_half();
  const auto t = simulate(k, InitialDistribution::dirac(0.0), 200000, 3);
  double sq = 0.0;
  for (std::size_t i = 1000; i < t.states.size(); ++i) sq += t.states[i] * t.states[i];
  EXPECT_NEAR(sq / static_cast<double>(t.states.size() - 1000), 4.0 / 3.0, 0.05);
}

TEST(Kernel, NoiseMeansAndVariances) {
  EXPECT_DOUBLE_EQ((Noise{NoiseKind::uniform, -1.0, 3.0, 0}).mean(), 1.0);
  EXPECT_DOUBLE_EQ((Noise{NoiseKind::uniform, -1.0, 3.0, 0}).variance(), 16.0 / 12.0);
  EXPECT_DOUBLE_EQ((Noise{NoiseKind::laplace, 0.0, 2.0, 0}).variance(), 8.0);
  EXPECT_DOUBLE_EQ((Noise{NoiseKind::student_t, 0.0, 1.0, 5}).variance(), 5.0 / 3.0);
  RandomStream rng(4, 0, StreamPurpose::simulate);
  const Noise lap{NoiseKind::laplace, 1.0, 0.5, 0};
  double s = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = lap.sample(rng);
    s += x;
    sq += (x - 1.0) * (x - 1.0);
  }
  EXPECT_NEAR(s / n, 1.0, 0.01);
  EXPECT_NEAR(sq / n, 0.5, 0.02);
}

TEST(Kernel, HashDependsOnParameters) {
  Eigen::MatrixXd Q = oracle::two_state_matrix();
  Q(0, 0) = 0.8;
  Q(0, 1) = 0.2;
  EXPECT_EQ(oracle::two_state().hash(), oracle::two_state().hash());
  EXPECT_NE(oracle::two_state().hash(), TransitionKernel::finite(Q).hash());
  EXPECT_NE(oracle::ar_half().hash(), TransitionKernel::ar(0.5, Noise{NoiseKind::gaussian, 0.0, 2.0, 0}).hash());
}

TEST(Observable, TableAffineAndCentering) {
  const auto k = oracle::two_state();
  const auto psi = oracle::two_state_psi(k);
  EXPECT_DOUBLE_EQ(psi.lipschitz(), 3.0);
  EXPECT_DOUBLE_EQ(psi(1.0), -2.0);
  const auto shifted = psi.centered(0.5);
  EXPECT_DOUBLE_EQ(shifted(0.0), 0.5);
  EXPECT_FALSE(psi.is_zero());
  EXPECT_TRUE(Observable::table({0.0, 0.0}, k.space()).is_zero());
  EXPECT_THROW(Observable::table({1.0}, k.space()), ValidationError);
  const auto aff = Observable::affine(-2.0, 1.0);
  EXPECT_DOUBLE_EQ(aff.lipschitz(), 2.0);
  EXPECT_NEAR(estimate_lipschitz(aff, StateSpace::interval(0, 1, 0), 1000, 1), 2.0, 1e-9);
}

TEST(Trajectory, ReplaysFromSeedAndReplica) {
  const auto k = oracle::ar_half();
  const auto a = simulate(k, InitialDistribution::gaussian(0.0, 1.0), 500, 11, 3);
  const auto b = simulate(k, InitialDistribution::gaussian(0.0, 1.0), 500, 11, 3);
  const auto c = simulate(k, InitialDistribution::gaussian(0.0, 1.0), 500, 11, 4);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, c.states);
  EXPECT_EQ(a.horizon(), 500u);
  EXPECT_EQ(a.kernel_hash, k.hash());
}

TEST(Trajectory, InitialDistributionValidation) {
  const auto k = oracle::two_state();
  EXPECT_THROW(InitialDistribution::dirac(2.0).validate_for(k.space()), DomainError);
  EXPECT_THROW(InitialDistribution::discrete({0.5, 0.6}).validate_for(k.space()), DomainError);
  EXPECT_NO_THROW(InitialDistribution::discrete({0.5, 0.5}).validate_for(k.space()));
  const auto t = simulate(k, InitialDistribution::discrete({0.0, 1.0}), 3, 1);
  EXPECT_EQ(t.states[0], 1.0);
}

TEST(Trajectory, CsvHasHeaderAndOneRowPerState) {
  const auto t = simulate(oracle::two_state(), InitialDistribution::dirac(0.0), 10, 5);
  std::ostringstream out;
  write_trajectory_csv(out, t);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  EXPECT_EQ(rows, 12);  // column header plus X_0..X_10
}
