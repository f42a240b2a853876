#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "lilmc/error.hpp"

namespace lilmc {

enum class SpaceKind { finite, interval, line };

/// State space with its metric and the reference point x0.
///
/// Finite spaces hold states as integral doubles 0..m-1 and use the discrete
/// 0/1 metric unless a metric matrix is supplied. Scalar spaces use |x - y|.
class StateSpace {
 public:
  static StateSpace finite(std::size_t states, std::optional<Eigen::MatrixXd> metric = std::nullopt,
                           std::size_t reference = 0) {
    if (states == 0) throw ValidationError("finite state space needs at least one state");
    StateSpace s;
    s.kind_ = SpaceKind::finite;
    s.size_ = states;
    if (metric) {
      if (metric->rows() != static_cast<Eigen::Index>(states) || metric->cols() != metric->rows())
        throw ValidationError("metric matrix must be " + std::to_string(states) + "x" +
                              std::to_string(states));
      s.metric_ = *metric;
      s.custom_metric_ = true;
      s.validate_metric();
    } else {
      s.metric_ = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(states),
                                        static_cast<Eigen::Index>(states));
      s.metric_.diagonal().setZero();
    }
    s.reference_ = static_cast<double>(reference);
    if (!s.contains(s.reference_)) throw ValidationError("reference state outside the space");
    return s;
  }

  static StateSpace interval(double lo, double hi, double reference) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw ValidationError("interval needs finite lo < hi");
    StateSpace s;
    s.kind_ = SpaceKind::interval;
    s.lo_ = lo;
    s.hi_ = hi;
    s.reference_ = reference;
    if (!s.contains(reference)) throw ValidationError("reference point outside the interval");
    return s;
  }

  static StateSpace line(double reference = 0.0) {
    StateSpace s;
    s.kind_ = SpaceKind::line;
    s.lo_ = -std::numeric_limits<double>::infinity();
    s.hi_ = std::numeric_limits<double>::infinity();
    s.reference_ = reference;
    return s;
  }

  SpaceKind kind() const { return kind_; }
  bool is_finite() const { return kind_ == SpaceKind::finite; }
  std::size_t size() const { return size_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double reference() const { return reference_; }
  bool has_custom_metric() const { return custom_metric_; }

  /// Full cost matrix of a finite space.
  const Eigen::MatrixXd& metric_matrix() const { return metric_; }

  bool contains(double x) const {
    if (!std::isfinite(x)) return false;
    switch (kind_) {
      case SpaceKind::finite:
        return x >= 0.0 && x < static_cast<double>(size_) && std::floor(x) == x;
      case SpaceKind::interval:
        return x >= lo_ && x <= hi_;
      case SpaceKind::line:
        return true;
    }
    return false;
  }

  std::size_t index(double x) const {
    if (!is_finite() || !contains(x)) throw DomainError("state " + std::to_string(x) + " is not in the space");
    return static_cast<std::size_t>(x);
  }

  double distance(double x, double y) const {
    if (is_finite()) {
      return metric_(static_cast<Eigen::Index>(index(x)), static_cast<Eigen::Index>(index(y)));
    }
    return std::abs(x - y);
  }

  /// rho_{x0}(x) = rho(x0, x).
  double distance_to_reference(double x) const { return distance(reference_, x); }

  double diameter() const {
    switch (kind_) {
      case SpaceKind::finite:
        return metric_.maxCoeff();
      case SpaceKind::interval:
        return hi_ - lo_;
      case SpaceKind::line:
        return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
      case SpaceKind::finite:
        out << "finite(" << size_;
        if (custom_metric_) {
          out << ";metric=";
          for (Eigen::Index i = 0; i < metric_.rows(); ++i)
            for (Eigen::Index j = 0; j < metric_.cols(); ++j) out << metric_(i, j) << ',';
        }
        out << ";ref=" << reference_ << ')';
        break;
      case SpaceKind::interval:
        out << "interval(" << lo_ << ',' << hi_ << ";ref=" << reference_ << ')';
        break;
      case SpaceKind::line:
        out << "line(ref=" << reference_ << ')';
        break;
    }
    return out.str();
  }

 private:
  StateSpace() = default;

  void validate_metric() const {
    const Eigen::Index m = metric_.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (metric_(i, i) != 0.0) throw ValidationError("metric must vanish on the diagonal");
      for (Eigen::Index j = 0; j < m; ++j) {
        if (i != j && !(metric_(i, j) > 0.0)) throw ValidationError("metric must separate states");
        if (metric_(i, j) != metric_(j, i)) throw ValidationError("metric must be symmetric");
        for (Eigen::Index k = 0; k < m; ++k) {
          if (metric_(i, k) > metric_(i, j) + metric_(j, k) + 1e-12)
            throw ValidationError("metric violates the triangle inequality");
        }
      }
    }
  }

  SpaceKind kind_ = SpaceKind::line;
  std::size_t size_ = 0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double reference_ = 0.0;
  bool custom_metric_ = false;
  Eigen::MatrixXd metric_;
};

}  // namespace lilmc
