#pragma once

// Corrector of the additive functional sum psi(X_i).
//
// Canonical convention: chi = sum_{i>=1} P^i psi and h = chi + psi =
// sum_{i>=0} P^i psi, so that Z_n = chi(X_n) - chi(X_{n-1}) + psi(X_n) =
// h(X_n) - P h(X_{n-1}) has conditional mean zero. The literal reading
// chi = sum_{i>=0} P^i psi is kept available only to show that it breaks the
// martingale property.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lilmc/contraction.hpp"
#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/observable.hpp"
#include "lilmc/parallel.hpp"
#include "lilmc/stationary.hpp"

namespace lilmc {

enum class SeriesConvention {
  from_one,   ///< chi = sum_{i>=1} P^i psi (canonical)
  from_zero,  ///< chi = sum_{i>=0} P^i psi (literal)
};

inline const char* to_string(SeriesConvention c) {
  return c == SeriesConvention::from_one ? "sum_from_1" : "sum_from_0";
}

enum class CorrectorForm { table, affine, callable };

/// Immutable corrector; evaluates chi and h = sum_{i>=0} P^i psi.
class Corrector {
 public:
  /// Exact value table of h over finite states.
  static Corrector from_table(Eigen::VectorXd h, Observable psi, double lipschitz_bound) {
    Corrector c(std::move(psi));
    c.form_ = CorrectorForm::table;
    c.h_table_ = std::move(h);
    c.lipschitz_bound_ = lipschitz_bound;
    return c;
  }

  /// h(x) = slope * x + intercept.
  static Corrector from_affine(double slope, double intercept, Observable psi, double lipschitz_bound) {
    Corrector c(std::move(psi));
    c.form_ = CorrectorForm::affine;
    c.h_slope_ = slope;
    c.h_intercept_ = intercept;
    c.lipschitz_bound_ = lipschitz_bound;
    return c;
  }

  /// Arbitrary estimator of h with a per-call error bound.
  static Corrector from_callable(std::function<double(double)> h, double per_call_error, Observable psi,
                                 double lipschitz_bound) {
    Corrector c(std::move(psi));
    c.form_ = CorrectorForm::callable;
    c.h_fn_ = std::make_shared<const std::function<double(double)>>(std::move(h));
    c.per_call_error_ = per_call_error;
    c.lipschitz_bound_ = lipschitz_bound;
    return c;
  }

  double h(double x) const {
    switch (form_) {
      case CorrectorForm::table:
        return h_table_(static_cast<Eigen::Index>(x));
      case CorrectorForm::affine:
        return h_slope_ * x + h_intercept_;
      case CorrectorForm::callable:
        return (*h_fn_)(x);
    }
    return 0.0;
  }

  double chi(double x) const {
    return convention_ == SeriesConvention::from_one ? h(x) - psi_(x) : h(x);
  }

  double psi(double x) const { return psi_(x); }
  const Observable& observable() const { return psi_; }
  SeriesConvention convention() const { return convention_; }
  CorrectorForm form() const { return form_; }
  double lipschitz_bound() const { return lipschitz_bound_; }
  double per_call_error() const { return per_call_error_; }
  const Eigen::VectorXd& h_table() const { return h_table_; }
  double h_slope() const { return h_slope_; }
  double h_intercept() const { return h_intercept_; }

  Eigen::VectorXd chi_table() const {
    Eigen::VectorXd out(h_table_.size());
    for (Eigen::Index i = 0; i < h_table_.size(); ++i) out(i) = chi(static_cast<double>(i));
    return out;
  }

  /// max chi - min chi over a finite space; +inf for unbounded forms.
  double oscillation(const StateSpace& space) const {
    if (form_ == CorrectorForm::table) {
      const Eigen::VectorXd c = chi_table();
      return c.maxCoeff() - c.minCoeff();
    }
    if (form_ == CorrectorForm::affine && space.kind() == SpaceKind::interval) {
      const double slope = convention_ == SeriesConvention::from_one ? h_slope_ - psi_.slope() : h_slope_;
      return std::abs(slope) * (space.hi() - space.lo());
    }
    return std::numeric_limits<double>::infinity();
  }

  /// Same h, but chi read with the sum starting at i = 0.
  Corrector literal() const {
    Corrector c = *this;
    c.convention_ = SeriesConvention::from_zero;
    return c;
  }

 private:
  explicit Corrector(Observable psi) : psi_(std::move(psi)) {}

  Observable psi_;
  CorrectorForm form_ = CorrectorForm::table;
  SeriesConvention convention_ = SeriesConvention::from_one;
  Eigen::VectorXd h_table_;
  double h_slope_ = 0.0;
  double h_intercept_ = 0.0;
  std::shared_ptr<const std::function<double(double)>> h_fn_;
  double per_call_error_ = 0.0;
  double lipschitz_bound_ = std::numeric_limits<double>::infinity();
};

/// Lip(chi) <= L c gamma / (1 - gamma) for the canonical convention.
inline double corrector_lipschitz_bound(double psi_lipschitz, const ContractionCertificate& cert) {
  return psi_lipschitz * cert.c * cert.gamma / (1.0 - cert.gamma);
}

/// Exact corrector of a finite chain: h solves (I - P) h = psi with
/// <h, mu*> = 0.
inline Corrector corrector_finite(const FiniteKernel& kernel, const Observable& psi, const StationaryMeasure& mu_star,
                                  const std::optional<ContractionCertificate>& cert = std::nullopt) {
  if (!mu_star.has_weights()) throw ValidationError("corrector_finite needs stationary weights");
  const Eigen::Index m = kernel.matrix.rows();
  const Eigen::VectorXd f = psi.values(static_cast<std::size_t>(m));
  const double mean = mu_star.weights.dot(f);
  if (std::abs(mean) > 1e-10)
    throw ValidationError("observable is not centered: <psi, mu*> = " + std::to_string(mean));
  Eigen::MatrixXd aug(m + 1, m);
  aug.topRows(m) = Eigen::MatrixXd::Identity(m, m) - kernel.matrix;
  aug.row(m) = mu_star.weights.transpose();
  Eigen::VectorXd rhs(m + 1);
  rhs.head(m) = f;
  rhs(m) = 0.0;
  const auto qr = aug.colPivHouseholderQr();
  if (qr.rank() < m) throw NonUniqueStationary("Poisson system is singular");
  Eigen::VectorXd h = qr.solve(rhs);
  const double residual = (aug * h - rhs).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, h.lpNorm<Eigen::Infinity>());
  if (residual > 1e-10 * scale) throw NonUniqueStationary("Poisson system has no consistent solution");
  const double lip = cert ? corrector_lipschitz_bound(psi.lipschitz(), *cert) : std::numeric_limits<double>::infinity();
  return Corrector::from_table(std::move(h), psi, lip);
}

/// Mean of the transition x -> P(x, .) applied to the identity, for affine
/// kernels: P id(x) = slope * x + drift.
struct AffineDrift {
  double slope = 0.0;
  double drift = 0.0;
};

inline std::optional<AffineDrift> affine_drift(const TransitionKernel& kernel) {
  if (const auto* ifs = kernel.as_ifs()) {
    AffineDrift d;
    for (std::size_t k = 0; k < ifs->maps.size(); ++k) {
      d.slope += ifs->probabilities[k] * ifs->maps[k].slope;
      d.drift += ifs->probabilities[k] * ifs->maps[k].intercept;
    }
    return d;
  }
  if (const auto* ar = kernel.as_ar()) return AffineDrift{ar->coefficient, ar->noise.mean()};
  return std::nullopt;
}

/// Stationary mean of an affine IFS or AR kernel.
inline double affine_stationary_mean(const TransitionKernel& kernel) {
  const auto d = affine_drift(kernel);
  if (!d) throw DomainError("kernel has no affine drift");
  return d->drift / (1.0 - d->slope);
}

/// Closed-form corrector for affine kernels and affine observables. With
/// P id = a x + b and centered psi(x) = s (x - m), P^i psi = a^i psi, hence
/// h = psi / (1 - a).
inline Corrector corrector_affine(const TransitionKernel& kernel, const Observable& psi,
                                  const std::optional<ContractionCertificate>& cert = std::nullopt) {
  const auto d = affine_drift(kernel);
  if (!d) throw DomainError("corrector_affine needs an IFS or AR kernel");
  if (psi.kind() != ObservableKind::affine) throw DomainError("corrector_affine needs an affine observable");
  const double m = d->drift / (1.0 - d->slope);
  if (std::abs(psi(m)) > 1e-10 * std::max(1.0, std::abs(psi.slope())))
    throw ValidationError("observable is not centered: <psi, mu*> = " + std::to_string(psi(m)));
  const double k = 1.0 / (1.0 - d->slope);
  const double lip = cert ? corrector_lipschitz_bound(psi.lipschitz(), *cert) : std::abs(psi.slope() * d->slope * k);
  return Corrector::from_affine(psi.slope() * k, (psi.intercept() - psi.offset()) * k, psi, lip);
}

/// Smallest N with L c gamma^{N+1} / (1 - gamma) * diameter < tol / 2.
inline std::size_t default_truncation(double psi_lipschitz, const ContractionCertificate& cert, double diameter,
                                      double tol) {
  const double scale = psi_lipschitz * cert.c * diameter / (1.0 - cert.gamma);
  std::size_t N = 1;
  while (scale * std::pow(cert.gamma, static_cast<double>(N + 1)) >= tol / 2.0 && N < 100000) ++N;
  return N;
}

struct McCorrectorEstimate {
  double x = 0.0;
  double estimate = 0.0;
  double error_bound = 0.0;
  double truncation_error = 0.0;
  double standard_error = 0.0;
  std::size_t truncation = 0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
};

/// Truncated-series Monte Carlo estimate of h(x) = sum_{i=0}^N E_x psi(X_i).
/// error_bound = L c gamma^{N+1}/(1-gamma) d(delta_x, mu*) + 3 * standard error
/// of the replica sums.
inline McCorrectorEstimate corrector_mc(const TransitionKernel& kernel, const Observable& psi, double x,
                                        std::size_t truncation, std::size_t replicas, std::uint64_t seed,
                                        const ContractionCertificate& cert, double distance_to_stationary,
                                        unsigned threads = 1) {
  if (truncation < 1 || replicas < 1) throw ValidationError("corrector_mc needs N >= 1 and R >= 1");
  if (!kernel.space().contains(x)) throw DomainError("corrector_mc start point outside the space");
  cert.validate();
  std::vector<double> sums(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    RandomStream rng(seed, static_cast<std::uint32_t>(r), StreamPurpose::corrector);
    double state = x;
    double s = psi(state);
    for (std::size_t i = 1; i <= truncation; ++i) {
      state = kernel.step_unchecked(state, rng);
      s += psi(state);
    }
    sums[r] = s;
  });
  const double mean = pairwise_sum(sums) / static_cast<double>(replicas);
  double se = 0.0;
  if (replicas > 1) {
    std::vector<double> dev(replicas);
    for (std::size_t r = 0; r < replicas; ++r) dev[r] = (sums[r] - mean) * (sums[r] - mean);
    se = std::sqrt(pairwise_sum(dev) / static_cast<double>(replicas - 1) / static_cast<double>(replicas));
  }
  McCorrectorEstimate out;
  out.x = x;
  out.estimate = mean;
  out.truncation_error = psi.lipschitz() * cert.c * std::pow(cert.gamma, static_cast<double>(truncation + 1)) /
                         (1.0 - cert.gamma) * distance_to_stationary;
  out.standard_error = se;
  out.error_bound = out.truncation_error + 3.0 * se;
  out.truncation = truncation;
  out.replicas = replicas;
  out.seed = seed;
  return out;
}

}  // namespace lilmc
