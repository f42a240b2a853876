#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lilmc/error.hpp"
#include "lilmc/random.hpp"
#include "lilmc/state_space.hpp"

namespace lilmc {

enum class ObservableKind { table, affine, custom };

/// Real Lipschitz function psi on the state space, with declared constant L
/// and a centering offset: psi(x) = raw(x) - offset.
class Observable {
 public:
  /// Value table over a finite space. L is computed from the space metric.
  static Observable table(std::vector<double> values, const StateSpace& space) {
    if (!space.is_finite() || values.size() != space.size())
      throw ValidationError("table observable needs one value per finite state");
    double lip = 0.0;
    const auto& d = space.metric_matrix();
    for (std::size_t i = 0; i < values.size(); ++i)
      for (std::size_t j = 0; j < values.size(); ++j)
        if (i != j)
          lip = std::max(lip, std::abs(values[i] - values[j]) /
                                  d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    Observable o;
    o.kind_ = ObservableKind::table;
    o.table_ = std::move(values);
    o.lipschitz_ = lip;
    return o;
  }

  static Observable affine(double slope, double intercept) {
    Observable o;
    o.kind_ = ObservableKind::affine;
    o.slope_ = slope;
    o.intercept_ = intercept;
    o.lipschitz_ = std::abs(slope);
    return o;
  }

  static Observable custom(std::function<double(double)> f, double lipschitz, std::string name) {
    if (!(lipschitz >= 0.0)) throw ValidationError("Lipschitz constant must be nonnegative");
    Observable o;
    o.kind_ = ObservableKind::custom;
    o.custom_ = std::make_shared<const std::function<double(double)>>(std::move(f));
    o.lipschitz_ = lipschitz;
    o.name_ = std::move(name);
    return o;
  }

  double operator()(double x) const { return raw(x) - offset_; }

  double raw(double x) const {
    switch (kind_) {
      case ObservableKind::table:
        return table_.at(static_cast<std::size_t>(x));
      case ObservableKind::affine:
        return slope_ * x + intercept_;
      case ObservableKind::custom:
        return (*custom_)(x);
    }
    return 0.0;
  }

  /// Copy with `mean` additionally subtracted.
  Observable centered(double mean) const {
    Observable o = *this;
    o.offset_ += mean;
    return o;
  }

  ObservableKind kind() const { return kind_; }
  double lipschitz() const { return lipschitz_; }
  double offset() const { return offset_; }
  double slope() const { return slope_; }
  double intercept() const { return intercept_; }
  const std::vector<double>& raw_table() const { return table_; }

  /// Centered values on states 0..m-1.
  Eigen::VectorXd values(std::size_t states) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(states));
    for (std::size_t i = 0; i < states; ++i) v(static_cast<Eigen::Index>(i)) = (*this)(static_cast<double>(i));
    return v;
  }

  /// True when psi is identically zero after centering.
  bool is_zero() const {
    switch (kind_) {
      case ObservableKind::table:
        return std::all_of(table_.begin(), table_.end(), [&](double v) { return v - offset_ == 0.0; });
      case ObservableKind::affine:
        return slope_ == 0.0 && intercept_ - offset_ == 0.0;
      case ObservableKind::custom:
        return false;
    }
    return false;
  }

  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
      case ObservableKind::table:
        out << "table(";
        for (std::size_t i = 0; i < table_.size(); ++i) out << (i ? "," : "") << table_[i];
        out << ')';
        break;
      case ObservableKind::affine:
        out << "affine(" << slope_ << ',' << intercept_ << ')';
        break;
      case ObservableKind::custom:
        out << "custom(" << name_ << ')';
        break;
    }
    out << "-" << offset_;
    return out.str();
  }

 private:
  Observable() = default;

  ObservableKind kind_ = ObservableKind::affine;
  std::vector<double> table_;
  double slope_ = 0.0;
  double intercept_ = 0.0;
  std::shared_ptr<const std::function<double(double)>> custom_;
  std::string name_;
  double lipschitz_ = 0.0;
  double offset_ = 0.0;
};

/// Largest |psi(x) - psi(y)| / rho(x, y) over randomly probed distinct pairs.
/// Scalar spaces are probed uniformly on the interval, or with a unit-scale
/// Gaussian spread around x0 on the line.
inline double estimate_lipschitz(const Observable& psi, const StateSpace& space, std::size_t probe_pairs,
                                 std::uint64_t seed) {
  if (probe_pairs == 0) throw ValidationError("probe_pairs must be at least 1");
  RandomStream rng(seed, 0, StreamPurpose::probe);
  auto draw = [&]() -> double {
    switch (space.kind()) {
      case SpaceKind::finite:
        return std::min(std::floor(rng.uniform() * static_cast<double>(space.size())),
                        static_cast<double>(space.size() - 1));
      case SpaceKind::interval:
        return space.lo() + (space.hi() - space.lo()) * rng.uniform();
      case SpaceKind::line:
        return space.reference() + 4.0 * rng.normal();
    }
    return 0.0;
  };
  double best = 0.0;
  std::size_t usable = 0;
  for (std::size_t k = 0; k < probe_pairs; ++k) {
    const double x = draw();
    const double y = draw();
    const double dist = space.distance(x, y);
    if (!(dist > 0.0)) continue;
    ++usable;
    best = std::max(best, std::abs(psi(x) - psi(y)) / dist);
  }
  if (usable == 0) throw Error("every probed pair had zero distance; Lipschitz estimate unavailable");
  return best;
}

}  // namespace lilmc
