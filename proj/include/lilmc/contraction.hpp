#pragma once

// Certification of geometric contraction in W1:
//   d(mu P^n, nu P^n) <= c * gamma^n * d(mu, nu).
// Finite kernels are audited exactly on Dirac pairs; for the discrete metric
// the Dirac bound extends to all measures by convexity of W1. Samplable
// kernels are audited with synchronously coupled replica ensembles.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/parallel.hpp"
#include "lilmc/random.hpp"
#include "lilmc/transport.hpp"

namespace lilmc {

enum class Provenance { exact, empirical };

inline const char* to_string(Provenance p) { return p == Provenance::exact ? "exact" : "empirical"; }

/// One audited horizon for one start pair: lhs = d(delta_x P^n, delta_y P^n),
/// bound = c gamma^n d(delta_x, delta_y).
struct RatioRow {
  std::size_t n = 0;
  double x = 0.0;
  double y = 0.0;
  double initial = 0.0;
  double lhs = 0.0;
  double bound = 0.0;
};

struct ContractionCertificate {
  double c = 1.0;
  double gamma = 0.5;
  int n0 = 2;
  double gamma0 = 0.25;
  Provenance provenance = Provenance::exact;
  std::vector<RatioRow> ratios;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("certificate gamma must lie in (0,1)");
    if (!(c >= 0.0)) throw ValidationError("certificate c must be nonnegative");
    if (n0 < 2) throw ValidationError("certificate n0 must be at least 2");
    if (!(gamma0 < 1.0)) throw ValidationError("certificate gamma0 must be < 1");
  }
};

struct N0Result {
  int n0 = 2;
  double gamma0 = 0.0;
};

/// Smallest n0 >= 2 with c^2 gamma^n0 < 1.
inline N0Result compute_n0(double c, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("compute_n0 needs gamma in (0,1)");
  if (!(c >= 0.0)) throw DomainError("compute_n0 needs c >= 0");
  int n0 = 2;
  double g0 = c * c * std::pow(gamma, n0);
  while (!(g0 < 1.0)) {
    ++n0;
    g0 = c * c * std::pow(gamma, n0);
  }
  return {n0, g0};
}

/// Result of an audit: a certificate, or the ratio table explaining why none
/// was issued.
struct CertificationOutcome {
  std::optional<ContractionCertificate> certificate;
  std::vector<RatioRow> ratios;
  Provenance provenance = Provenance::exact;
  double fitted_gamma = 1.0;
  double fitted_c = 0.0;
  std::string reason;

  bool certified() const { return certificate.has_value(); }

  const ContractionCertificate& require() const {
    if (!certificate) throw NoGapCertified("no contraction certificate: " + reason);
    return *certificate;
  }
};

struct CertifyOptions {
  std::size_t replicas = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Fitted gamma >= 1 - gap_tolerance means no gap.
  double gap_tolerance = 1e-6;
  /// Used when every audited distance beyond the first horizon is zero.
  double gamma_floor = 0.01;
};

namespace detail {

inline CertificationOutcome fit_certificate(std::vector<RatioRow> rows, std::vector<std::size_t> horizons,
                                            Provenance provenance, const CertifyOptions& opt) {
  CertificationOutcome out;
  out.provenance = provenance;
  // Worst normalized distance per horizon.
  std::vector<double> worst(horizons.size(), 0.0);
  for (const auto& r : rows) {
    const auto h = static_cast<std::size_t>(std::lower_bound(horizons.begin(), horizons.end(), r.n) - horizons.begin());
    worst[h] = std::max(worst[h], r.lhs / r.initial);
  }
  double gamma = -1.0;
  for (std::size_t h = 1; h < horizons.size(); ++h) {
    if (!(worst[h - 1] > 0.0)) continue;
    const double step = std::pow(worst[h] / worst[h - 1], 1.0 / static_cast<double>(horizons[h] - horizons[h - 1]));
    gamma = std::max(gamma, step);
  }
  if (horizons.size() == 1 && worst[0] > 0.0) gamma = std::pow(worst[0], 1.0 / static_cast<double>(horizons[0]));
  if (gamma < 0.0) gamma = 0.0;
  out.fitted_gamma = gamma;
  if (!(gamma < 1.0 - opt.gap_tolerance)) {
    out.reason = "fitted decay ratio " + std::to_string(gamma) + " is not below 1";
    out.ratios = std::move(rows);
    return out;
  }
  gamma = std::max(gamma, opt.gamma_floor);
  double c = 0.0;
  for (std::size_t h = 0; h < horizons.size(); ++h)
    c = std::max(c, worst[h] / std::pow(gamma, static_cast<double>(horizons[h])));
  out.fitted_c = c;
  for (auto& r : rows) r.bound = c * std::pow(gamma, static_cast<double>(r.n)) * r.initial;
  const N0Result n0 = compute_n0(c, gamma);
  ContractionCertificate cert;
  cert.c = c;
  cert.gamma = gamma;
  cert.n0 = n0.n0;
  cert.gamma0 = n0.gamma0;
  cert.provenance = provenance;
  cert.ratios = rows;
  out.ratios = std::move(rows);
  out.certificate = std::move(cert);
  return out;
}

inline std::vector<std::size_t> normalized_horizons(std::vector<std::size_t> horizons) {
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
  if (horizons.empty()) throw ValidationError("at least one horizon is required");
  if (horizons.front() == 0) throw ValidationError("horizons must be >= 1");
  return horizons;
}

}  // namespace detail

/// All unordered pairs of distinct states of a finite kernel.
inline std::vector<std::pair<double, double>> all_state_pairs(std::size_t states) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < states; ++i)
    for (std::size_t j = i + 1; j < states; ++j) pairs.emplace_back(static_cast<double>(i), static_cast<double>(j));
  return pairs;
}

/// Audits the contraction on the given start pairs and horizons and fits
/// (c, gamma, n0, gamma0). gamma is the largest per-step decay ratio between
/// consecutive horizons; c is the smallest constant making every audited row
/// hold.
inline CertificationOutcome certify_contraction(const TransitionKernel& kernel,
                                                const std::vector<std::pair<double, double>>& start_pairs,
                                                std::vector<std::size_t> horizons, const CertifyOptions& opt = {}) {
  horizons = detail::normalized_horizons(std::move(horizons));
  const StateSpace& space = kernel.space();
  std::vector<std::pair<double, double>> pairs;
  for (const auto& [x, y] : start_pairs) {
    if (!space.contains(x) || !space.contains(y)) throw DomainError("start pair outside the state space");
    if (space.distance(x, y) > 0.0) pairs.emplace_back(x, y);
  }
  if (pairs.empty()) throw ValidationError("certification needs a start pair at positive distance");

  std::vector<RatioRow> rows;
  if (kernel.is_finite()) {
    const FiniteKernel& fk = kernel.as_finite();
    const Eigen::Index m = fk.matrix.rows();
    for (const auto& [x, y] : pairs) {
      Eigen::VectorXd mx = Eigen::VectorXd::Zero(m);
      Eigen::VectorXd my = Eigen::VectorXd::Zero(m);
      mx(static_cast<Eigen::Index>(x)) = 1.0;
      my(static_cast<Eigen::Index>(y)) = 1.0;
      std::size_t at = 0;
      for (const std::size_t n : horizons) {
        for (; at < n; ++at) {
          mx = transfer(fk, mx);
          my = transfer(fk, my);
        }
        rows.push_back({n, x, y, space.distance(x, y), w1_finite(mx, my, space.metric_matrix()), 0.0});
      }
    }
    return detail::fit_certificate(std::move(rows), std::move(horizons), Provenance::exact, opt);
  }

  if (opt.replicas == 0) throw ValidationError("empirical certification needs replicas >= 1");
  const std::size_t R = opt.replicas;
  const std::size_t H = horizons.size();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [x, y] = pairs[p];
    std::vector<double> xs(H * R);
    std::vector<double> ys(H * R);
    parallel_for(R, opt.threads, [&](std::size_t r) {
      RandomStream sx(opt.seed, static_cast<std::uint32_t>(p * R + r), StreamPurpose::certify);
      RandomStream sy = sx;  // synchronous coupling
      double a = x;
      double b = y;
      std::size_t at = 0;
      for (std::size_t h = 0; h < H; ++h) {
        for (; at < horizons[h]; ++at) {
          a = kernel.step_unchecked(a, sx);
          b = kernel.step_unchecked(b, sy);
        }
        xs[h * R + r] = a;
        ys[h * R + r] = b;
      }
    });
    for (std::size_t h = 0; h < H; ++h) {
      std::span<double> ex(xs.data() + h * R, R);
      std::span<double> ey(ys.data() + h * R, R);
      std::sort(ex.begin(), ex.end());
      std::sort(ey.begin(), ey.end());
      rows.push_back({horizons[h], x, y, space.distance(x, y), w1_empirical_1d(ex, ey), 0.0});
    }
  }
  return detail::fit_certificate(std::move(rows), std::move(horizons), Provenance::empirical, opt);
}

}  // namespace lilmc
