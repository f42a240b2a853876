#pragma once

// Asymptotic variance sigma^2 = E_{mu*} Z_1^2 by two independent routes
// (corrector and Green-Kubo), the cumulative variance curve s_n^2, martingale
// ensembles, and the uniform moment check on rho_{x0}(X_n).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lilmc/contraction.hpp"
#include "lilmc/corrector.hpp"
#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/martingale.hpp"
#include "lilmc/parallel.hpp"
#include "lilmc/stationary.hpp"
#include "lilmc/trajectory.hpp"

namespace lilmc {

enum class VarianceMethod { corrector_exact, corrector_mc, green_kubo_exact, green_kubo_mc, ensemble };

inline const char* to_string(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::corrector_exact:
      return "corrector-exact";
    case VarianceMethod::corrector_mc:
      return "corrector-mc";
    case VarianceMethod::green_kubo_exact:
      return "green-kubo-exact";
    case VarianceMethod::green_kubo_mc:
      return "green-kubo-mc";
    case VarianceMethod::ensemble:
      return "ensemble";
  }
  return "?";
}

inline constexpr double kDegenerateVariance = 1e-12;

struct VarianceEstimate {
  double sigma2 = 0.0;
  VarianceMethod method = VarianceMethod::corrector_exact;
  double standard_error = 0.0;
  std::size_t sample_size = 0;
  std::size_t lag_cutoff = 0;

  bool degenerate() const { return sigma2 < kDegenerateVariance; }

  const VarianceEstimate& require_nondegenerate() const {
    if (degenerate()) throw DegenerateVariance("sigma^2 = " + std::to_string(sigma2) + " is below 1e-12");
    return *this;
  }
};

/// Exact sigma^2 = sum_x mu*(x) [P h^2(x) - (P h(x))^2] on a finite chain.
inline VarianceEstimate sigma2_corrector(const FiniteKernel& kernel, const Corrector& chi,
                                         const StationaryMeasure& mu_star) {
  if (!mu_star.has_weights()) throw ValidationError("exact sigma^2 needs stationary weights");
  const Eigen::Index m = kernel.matrix.rows();
  Eigen::VectorXd h(m);
  for (Eigen::Index i = 0; i < m; ++i) h(i) = chi.h(static_cast<double>(i));
  const Eigen::VectorXd Ph = apply_P(kernel, h);
  const Eigen::VectorXd Ph2 = apply_P(kernel, h.cwiseProduct(h));
  const Eigen::VectorXd cond = Ph2 - Ph.cwiseProduct(Ph);
  VarianceEstimate out;
  out.sigma2 = std::max(0.0, mu_star.weights.dot(cond));
  out.method = VarianceMethod::corrector_exact;
  return out;
}

/// Exact sigma^2 for an affine IFS or AR kernel and affine psi = s (x - m).
/// With h = psi / (1 - a_bar), Z_1 = s/(1 - a_bar) ((a_J - a_bar) X_0 + b_J - b_bar)
/// for an IFS and s/(1 - a) (noise - E noise) for AR; the stationary second
/// moment of an IFS solves E X^2 = E a^2 E X^2 + 2 E[ab] m + E b^2.
inline VarianceEstimate sigma2_affine(const TransitionKernel& kernel, const Observable& psi) {
  const auto d = affine_drift(kernel);
  if (!d) throw DomainError("sigma2_affine needs an IFS or AR kernel");
  if (psi.kind() != ObservableKind::affine) throw DomainError("sigma2_affine needs an affine observable");
  const double k = psi.slope() / (1.0 - d->slope);
  double var = 0.0;
  if (const auto* ar = kernel.as_ar()) {
    var = ar->noise.variance();
  } else {
    const auto& ifs = *kernel.as_ifs();
    double ea2 = 0.0, eab = 0.0, eb2 = 0.0;
    for (std::size_t j = 0; j < ifs.maps.size(); ++j) {
      const double p = ifs.probabilities[j];
      ea2 += p * ifs.maps[j].slope * ifs.maps[j].slope;
      eab += p * ifs.maps[j].slope * ifs.maps[j].intercept;
      eb2 += p * ifs.maps[j].intercept * ifs.maps[j].intercept;
    }
    const double m = d->drift / (1.0 - d->slope);
    const double ex2 = (2.0 * eab * m + eb2) / (1.0 - ea2);
    const double var_a = ea2 - d->slope * d->slope;
    const double cov_ab = eab - d->slope * d->drift;
    const double var_b = eb2 - d->drift * d->drift;
    var = var_a * ex2 + 2.0 * cov_ab * m + var_b;
  }
  VarianceEstimate out;
  out.sigma2 = std::max(0.0, k * k * var);
  out.method = VarianceMethod::corrector_exact;
  return out;
}

struct McVarianceOptions {
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;
  /// Steps from the reference state when mu* has no weights to sample from.
  std::size_t burn_in = 200;
  unsigned threads = 1;
};

/// Stationary-start Monte Carlo mean of Z_1^2.
inline VarianceEstimate sigma2_corrector_mc(const TransitionKernel& kernel, const Corrector& chi,
                                            const StationaryMeasure& mu_star, const McVarianceOptions& opt = {}) {
  if (opt.samples < 2) throw ValidationError("sigma2_corrector_mc needs at least 2 samples");
  std::vector<double> z2(opt.samples);
  const InitialDistribution start =
      mu_star.has_weights()
          ? InitialDistribution::discrete(std::vector<double>(mu_star.weights.data(),
                                                              mu_star.weights.data() + mu_star.weights.size()))
          : InitialDistribution::dirac(kernel.space().reference());
  parallel_for(opt.samples, opt.threads, [&](std::size_t r) {
    RandomStream rng(opt.seed, static_cast<std::uint32_t>(r), StreamPurpose::variance);
    double x = start.sample(rng);
    if (!mu_star.has_weights())
      for (std::size_t k = 0; k < opt.burn_in; ++k) x = kernel.step_unchecked(x, rng);
    const double y = kernel.step_unchecked(x, rng);
    const double z = increment(chi, x, y);
    z2[r] = z * z;
  });
  const double n = static_cast<double>(opt.samples);
  const double mean = pairwise_sum(z2) / n;
  std::vector<double> dev(opt.samples);
  for (std::size_t r = 0; r < opt.samples; ++r) dev[r] = (z2[r] - mean) * (z2[r] - mean);
  VarianceEstimate out;
  out.sigma2 = mean;
  out.method = VarianceMethod::corrector_mc;
  out.standard_error = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
  out.sample_size = opt.samples;
  return out;
}

/// Exact Green-Kubo sum Var(psi) + 2 sum_{k=1}^K Cov(psi(X_0), psi(X_k)) on a
/// finite chain. K is the smallest cutoff whose certified tail bound
/// 2 ||psi||_{L1(mu*)} L c diam gamma^{K+1} / (1 - gamma) is below tol.
inline VarianceEstimate sigma2_green_kubo(const FiniteKernel& kernel, const Observable& psi,
                                          const StationaryMeasure& mu_star, const ContractionCertificate& cert,
                                          const StateSpace& space, double tol = 1e-13) {
  if (!mu_star.has_weights()) throw ValidationError("exact Green-Kubo needs stationary weights");
  cert.validate();
  const Eigen::Index m = kernel.matrix.rows();
  const Eigen::VectorXd f = psi.values(static_cast<std::size_t>(m));
  const Eigen::VectorXd wf = mu_star.weights.cwiseProduct(f);
  const double l1 = mu_star.weights.dot(f.cwiseAbs());
  const double scale = 2.0 * l1 * psi.lipschitz() * cert.c * space.diameter() / (1.0 - cert.gamma);
  std::size_t cutoff = 1;
  while (scale * std::pow(cert.gamma, static_cast<double>(cutoff + 1)) >= tol && cutoff < 1000000) ++cutoff;
  double total = wf.dot(f);
  Eigen::VectorXd pk = f;
  for (std::size_t k = 1; k <= cutoff; ++k) {
    pk = apply_P(kernel, pk);
    total += 2.0 * wf.dot(pk);
  }
  VarianceEstimate out;
  out.sigma2 = std::max(0.0, total);
  out.method = VarianceMethod::green_kubo_exact;
  out.lag_cutoff = cutoff;
  return out;
}

struct GreenKuboMcOptions {
  std::size_t samples = 1000000;
  std::size_t burn_in = 200;
  std::uint64_t seed = 1;
  double tol = 1e-4;
  std::size_t batches = 20;
};

/// Autocovariance summation along one stationary trajectory. The standard
/// error comes from the spread of the same estimator over equal batches.
inline VarianceEstimate sigma2_green_kubo_mc(const TransitionKernel& kernel, const Observable& psi,
                                             const ContractionCertificate& cert, const GreenKuboMcOptions& opt = {}) {
  cert.validate();
  std::size_t cutoff = 1;
  while (cert.c * std::pow(cert.gamma, static_cast<double>(cutoff)) / (1.0 - cert.gamma) >= opt.tol &&
         cutoff < 100000)
    ++cutoff;
  if (opt.samples < opt.batches * (cutoff + 2)) throw ValidationError("too few samples for the Green-Kubo cutoff");
  RandomStream rng(opt.seed, 0, StreamPurpose::variance);
  double x = kernel.space().reference();
  for (std::size_t k = 0; k < opt.burn_in; ++k) x = kernel.step_unchecked(x, rng);
  std::vector<double> v(opt.samples);
  for (auto& value : v) {
    value = psi(x);
    x = kernel.step_unchecked(x, rng);
  }
  auto estimate = [&](std::size_t begin, std::size_t end) {
    const double n = static_cast<double>(end - begin);
    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += v[i];
    mean /= n;
    double total = 0.0;
    for (std::size_t k = 0; k <= cutoff; ++k) {
      double acc = 0.0;
      for (std::size_t i = begin; i + k < end; ++i) acc += (v[i] - mean) * (v[i + k] - mean);
      total += (k == 0 ? 1.0 : 2.0) * acc / n;
    }
    return total;
  };
  VarianceEstimate out;
  out.sigma2 = std::max(0.0, estimate(0, v.size()));
  out.method = VarianceMethod::green_kubo_mc;
  out.sample_size = opt.samples;
  out.lag_cutoff = cutoff;
  std::vector<double> per_batch(opt.batches);
  const std::size_t width = v.size() / opt.batches;
  for (std::size_t b = 0; b < opt.batches; ++b) per_batch[b] = estimate(b * width, (b + 1) * width);
  double mean = 0.0;
  for (double e : per_batch) mean += e;
  mean /= static_cast<double>(opt.batches);
  double var = 0.0;
  for (double e : per_batch) var += (e - mean) * (e - mean);
  var /= static_cast<double>(opt.batches - 1);
  out.standard_error = std::sqrt(var / static_cast<double>(opt.batches));
  return out;
}

/// Martingale differences of independent replicas, replica-major:
/// z(r, k) for k = 1..n.
struct ZEnsemble {
  std::size_t replicas = 0;
  std::size_t n = 0;
  std::vector<double> data;

  double z(std::size_t r, std::size_t k) const { return data[r * n + (k - 1)]; }
  std::span<const double> replica(std::size_t r) const { return {data.data() + r * n, n}; }
};

/// Replica r follows simulate(kernel, initial, n, seed, first_replica + r).
inline ZEnsemble martingale_ensemble(const TransitionKernel& kernel, const InitialDistribution& initial,
                                     const Corrector& chi, std::size_t n, std::size_t replicas, std::uint64_t seed,
                                     unsigned threads = 1, std::uint32_t first_replica = 1000) {
  ZEnsemble e;
  e.replicas = replicas;
  e.n = n;
  e.data.resize(replicas * n);
  initial.validate_for(kernel.space());
  parallel_for(replicas, threads, [&](std::size_t r) {
    RandomStream rng(seed, first_replica + static_cast<std::uint32_t>(r), StreamPurpose::ensemble);
    double x = initial.sample(rng);
    double cx = chi.chi(x);
    for (std::size_t k = 1; k <= n; ++k) {
      const double y = kernel.step_unchecked(x, rng);
      const double cy = chi.chi(y);
      e.data[r * n + (k - 1)] = cy - cx + chi.psi(y);
      x = y;
      cx = cy;
    }
  });
  return e;
}

/// i.i.d. N(0,1) differences: the harness self-validation channel.
inline ZEnsemble gaussian_control_ensemble(std::size_t n, std::size_t replicas, std::uint64_t seed,
                                           unsigned threads = 1) {
  ZEnsemble e;
  e.replicas = replicas;
  e.n = n;
  e.data.resize(replicas * n);
  parallel_for(replicas, threads, [&](std::size_t r) {
    RandomStream rng(seed, static_cast<std::uint32_t>(r), StreamPurpose::control);
    for (std::size_t k = 0; k < n; ++k) e.data[r * n + k] = rng.normal();
  });
  return e;
}

/// One i.i.d. N(0,1) series with W = S.
inline MartingaleSeries gaussian_control_series(std::size_t n, std::uint64_t seed, std::uint32_t replica = 0) {
  RandomStream rng(seed, replica, StreamPurpose::control);
  MartingaleSeries s;
  s.trajectory_seed = seed;
  s.trajectory_replica = replica;
  s.Z.assign(n + 1, 0.0);
  s.S.assign(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    s.Z[k] = rng.normal();
    s.S[k] = s.S[k - 1] + s.Z[k];
  }
  s.W = s.S;
  return s;
}

inline ZEnsemble ensemble_from_series(const std::vector<MartingaleSeries>& series) {
  if (series.empty()) throw ValidationError("empty ensemble");
  ZEnsemble e;
  e.replicas = series.size();
  e.n = series.front().length();
  e.data.reserve(e.replicas * e.n);
  for (const auto& s : series) {
    if (s.length() != e.n) throw ValidationError("ensemble members differ in length");
    e.data.insert(e.data.end(), s.Z.begin() + 1, s.Z.end());
  }
  return e;
}

/// s_n^2 estimated two ways: `s2` = sum_{k<=n} mean_r Z_k^2 (nondecreasing by
/// construction, unbiased by orthogonality of increments) and `s2_direct` =
/// mean_r S_n^2. Index 0 holds 0.
struct VarianceCurve {
  std::vector<double> s2;
  std::vector<double> s2_direct;
  std::size_t replicas = 0;

  double ratio(std::size_t n) const { return s2[n] / static_cast<double>(n); }
};

inline VarianceCurve variance_curve(const ZEnsemble& e) {
  if (e.replicas < 2) throw ValidationError("variance_curve needs at least 2 replicas");
  VarianceCurve c;
  c.replicas = e.replicas;
  c.s2.assign(e.n + 1, 0.0);
  c.s2_direct.assign(e.n + 1, 0.0);
  std::vector<double> partial(e.replicas, 0.0);
  std::vector<double> sq(e.replicas);
  std::vector<double> ssq(e.replicas);
  for (std::size_t k = 1; k <= e.n; ++k) {
    for (std::size_t r = 0; r < e.replicas; ++r) {
      const double z = e.z(r, k);
      partial[r] += z;
      sq[r] = z * z;
      ssq[r] = partial[r] * partial[r];
    }
    const double R = static_cast<double>(e.replicas);
    c.s2[k] = c.s2[k - 1] + pairwise_sum(sq) / R;
    c.s2_direct[k] = pairwise_sum(ssq) / R;
  }
  return c;
}

inline VarianceCurve variance_curve(const std::vector<MartingaleSeries>& ensemble) {
  return variance_curve(ensemble_from_series(ensemble));
}

/// Moment audit of rho_{x0}(X_n)^{2+delta} along an n-grid.
struct MomentReport {
  double delta = 1.0;
  std::vector<std::size_t> grid;
  std::vector<double> estimates;
  std::vector<double> standard_errors;
  double max_estimate = 0.0;
  double median = 0.0;
  bool trend_bounded = true;
  std::string initial;
};

/// Fails `trend_bounded` if some estimate exceeds twice the median by more
/// than three standard errors.
inline MomentReport moment_check_h3(const TransitionKernel& kernel, const InitialDistribution& initial, double delta,
                                    std::vector<std::size_t> n_grid, std::size_t replicas, std::uint64_t seed,
                                    unsigned threads = 1) {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  if (n_grid.empty() || replicas < 2) throw ValidationError("moment check needs a grid and >= 2 replicas");
  std::sort(n_grid.begin(), n_grid.end());
  initial.validate_for(kernel.space());
  const std::size_t G = n_grid.size();
  const double p = 2.0 + delta;
  std::vector<double> values(replicas * G);
  parallel_for(replicas, threads, [&](std::size_t r) {
    RandomStream rng(seed, static_cast<std::uint32_t>(r), StreamPurpose::moments);
    double x = initial.sample(rng);
    std::size_t at = 0;
    for (std::size_t g = 0; g < G; ++g) {
      for (; at < n_grid[g]; ++at) x = kernel.step_unchecked(x, rng);
      values[r * G + g] = std::pow(kernel.space().distance_to_reference(x), p);
    }
  });
  MomentReport rep;
  rep.delta = delta;
  rep.grid = n_grid;
  rep.initial = initial.describe();
  const double R = static_cast<double>(replicas);
  std::vector<double> col(replicas);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t r = 0; r < replicas; ++r) col[r] = values[r * G + g];
    const double mean = pairwise_sum(col) / R;
    for (auto& v : col) v = (v - mean) * (v - mean);
    rep.estimates.push_back(mean);
    rep.standard_errors.push_back(std::sqrt(pairwise_sum(col) / (R - 1.0) / R));
  }
  rep.max_estimate = *std::max_element(rep.estimates.begin(), rep.estimates.end());
  std::vector<double> sorted = rep.estimates;
  std::sort(sorted.begin(), sorted.end());
  rep.median = G % 2 ? sorted[G / 2] : 0.5 * (sorted[G / 2 - 1] + sorted[G / 2]);
  for (std::size_t g = 0; g < G; ++g)
    if (rep.estimates[g] - 3.0 * rep.standard_errors[g] > 2.0 * rep.median) rep.trend_bounded = false;
  return rep;
}

}  // namespace lilmc
