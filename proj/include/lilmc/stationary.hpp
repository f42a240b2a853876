#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lilmc/contraction.hpp"
#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/trajectory.hpp"
#include "lilmc/transport.hpp"

namespace lilmc {

/// The invariant law mu*: exact weights for finite kernels, or an empirical
/// sample (with occupation weights when the space is finite).
struct StationaryMeasure {
  Provenance provenance = Provenance::exact;
  Eigen::VectorXd weights;
  std::vector<double> samples;
  std::size_t burn_in = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  bool has_weights() const { return weights.size() > 0; }

  template <class F>
  double expectation(F&& f) const {
    if (has_weights()) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < weights.size(); ++i) s += weights(i) * f(static_cast<double>(i));
      return s;
    }
    if (samples.empty()) throw Error("stationary measure is empty");
    double s = 0.0;
    for (double x : samples) s += f(x);
    return s / static_cast<double>(samples.size());
  }

  double mean() const {
    return expectation([](double x) { return x; });
  }
};

/// Solves mu* P = mu*, sum mu* = 1. Entries in [-1e-12, 0) are clamped to 0.
inline StationaryMeasure stationary_finite(const FiniteKernel& kernel) {
  const Eigen::Index m = kernel.matrix.rows();
  const Eigen::MatrixXd A = kernel.matrix.transpose() - Eigen::MatrixXd::Identity(m, m);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-10);
  if (lu.rank() < m - 1)
    throw NonUniqueStationary("stationary equation has a " + std::to_string(m - lu.rank()) +
                              "-dimensional solution space");
  Eigen::MatrixXd aug(m + 1, m);
  aug.topRows(m) = A;
  aug.row(m).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(m) = 1.0;
  Eigen::VectorXd mu = aug.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (mu(i) < -1e-12) throw NonUniqueStationary("stationary solve produced a negative weight");
    if (mu(i) < 0.0) mu(i) = 0.0;
  }
  mu /= mu.sum();
  StationaryMeasure out;
  out.provenance = Provenance::exact;
  out.weights = std::move(mu);
  return out;
}

inline StationaryMeasure stationary_finite(const TransitionKernel& kernel) {
  return stationary_finite(kernel.as_finite());
}

/// ||mu P - mu||_1.
inline double stationary_residual(const FiniteKernel& kernel, const Eigen::VectorXd& mu) {
  return (transfer(kernel, mu) - mu).lpNorm<1>();
}

/// Empirical law of X_burn, ..., X_{burn+n} started at the reference state.
inline StationaryMeasure stationary_empirical(const TransitionKernel& kernel, std::size_t burn_in, std::size_t n,
                                              std::uint64_t seed) {
  RandomStream rng(seed, 0, StreamPurpose::stationary);
  double x = kernel.space().reference();
  for (std::size_t k = 0; k < burn_in; ++k) x = kernel.step_unchecked(x, rng);
  StationaryMeasure out;
  out.provenance = Provenance::empirical;
  out.burn_in = burn_in;
  out.n = n;
  out.seed = seed;
  out.samples.reserve(n + 1);
  out.samples.push_back(x);
  for (std::size_t k = 0; k < n; ++k) {
    x = kernel.step_unchecked(x, rng);
    out.samples.push_back(x);
  }
  if (kernel.space().is_finite()) {
    out.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kernel.space().size()));
    for (double s : out.samples) out.weights(static_cast<Eigen::Index>(s)) += 1.0;
    out.weights /= static_cast<double>(out.samples.size());
  }
  return out;
}

/// Burn-in after which c gamma^n * diameter drops below tol (at least 1).
inline std::size_t recommended_burn_in(const ContractionCertificate& cert, double diameter, double tol) {
  if (!(diameter > 0.0) || cert.c == 0.0) return 1;
  const double n = std::log(tol / (cert.c * diameter)) / std::log(cert.gamma);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(n)));
}

/// d(delta_x, mu*): exact transport for finite weights, mean |x - s| over the
/// stationary sample otherwise.
inline double distance_to_stationary(const StateSpace& space, double x, const StationaryMeasure& mu) {
  if (space.is_finite()) {
    const Eigen::VectorXd w = mu.has_weights() ? mu.weights : Eigen::VectorXd();
    Eigen::VectorXd dirac = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    dirac(static_cast<Eigen::Index>(space.index(x))) = 1.0;
    return w1_finite(dirac, w, space.metric_matrix());
  }
  const std::vector<double> at_x(mu.samples.size(), x);
  return w1_empirical_1d(at_x, mu.samples);
}

}  // namespace lilmc
