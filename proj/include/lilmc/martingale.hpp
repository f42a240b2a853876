#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "lilmc/corrector.hpp"
#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/trajectory.hpp"

namespace lilmc {

/// Z_n, S_n = Z_1 + ... + Z_n and W_n = psi(X_1) + ... + psi(X_n), all indexed
/// from 0 (Z[0] = S[0] = W[0] = 0).
struct MartingaleSeries {
  std::vector<double> Z;
  std::vector<double> S;
  std::vector<double> W;
  std::uint64_t trajectory_seed = 0;
  std::uint32_t trajectory_replica = 0;
  std::uint64_t kernel_hash = 0;
  SeriesConvention convention = SeriesConvention::from_one;

  std::size_t length() const { return Z.empty() ? 0 : Z.size() - 1; }
};

/// Z_n = chi(X_n) - chi(X_{n-1}) + psi(X_n) along the trajectory.
inline MartingaleSeries decompose(const Trajectory& traj, const Corrector& chi, std::uint64_t kernel_hash = 0) {
  if (kernel_hash != 0 && traj.kernel_hash != kernel_hash)
    throw ValidationError("trajectory and corrector were built for different kernels");
  const std::size_t n = traj.horizon();
  MartingaleSeries out;
  out.trajectory_seed = traj.seed;
  out.trajectory_replica = traj.replica;
  out.kernel_hash = traj.kernel_hash;
  out.convention = chi.convention();
  out.Z.assign(n + 1, 0.0);
  out.S.assign(n + 1, 0.0);
  out.W.assign(n + 1, 0.0);
  if (traj.states.empty()) return out;
  double prev_chi = chi.chi(traj.states[0]);
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = traj.states[k];
    const double c = chi.chi(x);
    const double p = chi.psi(x);
    out.Z[k] = c - prev_chi + p;
    out.S[k] = out.S[k - 1] + out.Z[k];
    out.W[k] = out.W[k - 1] + p;
    prev_chi = c;
  }
  return out;
}

/// decompose(simulate(...)) without storing the states; same stream.
inline MartingaleSeries simulate_martingale(const TransitionKernel& kernel, const InitialDistribution& initial,
                                            const Corrector& chi, std::size_t n, std::uint64_t seed,
                                            std::uint32_t replica = 0) {
  initial.validate_for(kernel.space());
  RandomStream rng(seed, replica, StreamPurpose::simulate);
  MartingaleSeries out;
  out.trajectory_seed = seed;
  out.trajectory_replica = replica;
  out.kernel_hash = kernel.hash();
  out.convention = chi.convention();
  out.Z.assign(n + 1, 0.0);
  out.S.assign(n + 1, 0.0);
  out.W.assign(n + 1, 0.0);
  double x = initial.sample(rng);
  double prev_chi = chi.chi(x);
  for (std::size_t k = 1; k <= n; ++k) {
    x = kernel.step_unchecked(x, rng);
    const double c = chi.chi(x);
    const double p = chi.psi(x);
    out.Z[k] = c - prev_chi + p;
    out.S[k] = out.S[k - 1] + out.Z[k];
    out.W[k] = out.W[k - 1] + p;
    prev_chi = c;
  }
  return out;
}

/// W_0 = 0, W_k = psi(X_1) + ... + psi(X_k) along simulate(...)'s stream.
inline std::vector<double> psi_partial_sums(const TransitionKernel& kernel, const InitialDistribution& initial,
                                            const Observable& psi, std::size_t n, std::uint64_t seed,
                                            std::uint32_t replica = 0) {
  initial.validate_for(kernel.space());
  RandomStream rng(seed, replica, StreamPurpose::simulate);
  std::vector<double> W(n + 1, 0.0);
  double x = initial.sample(rng);
  for (std::size_t k = 1; k <= n; ++k) {
    x = kernel.step_unchecked(x, rng);
    W[k] = W[k - 1] + psi(x);
  }
  return W;
}

/// Z for a single transition x -> y.
inline double increment(const Corrector& chi, double x, double y) { return chi.chi(y) - chi.chi(x) + chi.psi(y); }

/// Per-state conditional mean sum_y P(x, y) Z(x -> y), computed through
/// apply_P: P(chi + psi)(x) - chi(x).
inline Eigen::VectorXd conditional_mean_residuals(const FiniteKernel& kernel, const Corrector& chi) {
  const Eigen::Index m = kernel.matrix.rows();
  Eigen::VectorXd chi_v(m);
  Eigen::VectorXd psi_v(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    chi_v(i) = chi.chi(static_cast<double>(i));
    psi_v(i) = chi.psi(static_cast<double>(i));
  }
  return apply_P(kernel, chi_v + psi_v) - chi_v;
}

/// Per-state conditional second moment sum_y P(x, y) Z(x -> y)^2.
inline Eigen::VectorXd conditional_second_moments(const FiniteKernel& kernel, const Corrector& chi) {
  const Eigen::Index m = kernel.matrix.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index y = 0; y < m; ++y) {
      const double z = increment(chi, static_cast<double>(x), static_cast<double>(y));
      out(x) += kernel.matrix(x, y) * z * z;
    }
  return out;
}

}  // namespace lilmc
