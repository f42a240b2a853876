#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lilmc/error.hpp"
#include "lilmc/random.hpp"
#include "lilmc/state_space.hpp"

namespace lilmc {

/// 64-bit FNV-1a; used for kernel and config fingerprints.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return out;
}

/// Row-stochastic matrix over m states.
struct FiniteKernel {
  Eigen::MatrixXd matrix;
};

/// x -> slope * x + intercept.
struct AffineMap {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
};

/// Random composition of affine contractions chosen with fixed probabilities.
struct IfsKernel {
  std::vector<AffineMap> maps;
  std::vector<double> probabilities;
};

enum class NoiseKind { gaussian, uniform, laplace, student_t };

/// Additive innovation of an autoregressive kernel.
/// gaussian(location, scale=sd); uniform(location=lo, scale=hi); laplace(location, scale=b);
/// student_t(location, scale, dof) with integer dof.
struct Noise {
  NoiseKind kind = NoiseKind::gaussian;
  double location = 0.0;
  double scale = 1.0;
  int dof = 0;

  double mean() const {
    switch (kind) {
      case NoiseKind::uniform:
        return 0.5 * (location + scale);
      default:
        return location;
    }
  }

  double variance() const {
    switch (kind) {
      case NoiseKind::gaussian:
        return scale * scale;
      case NoiseKind::uniform:
        return (scale - location) * (scale - location) / 12.0;
      case NoiseKind::laplace:
        return 2.0 * scale * scale;
      case NoiseKind::student_t:
        return dof > 2 ? scale * scale * dof / (dof - 2.0) : std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  /// Whether E|noise|^p is finite.
  bool has_moment(double p) const {
    return kind != NoiseKind::student_t || static_cast<double>(dof) > p;
  }

  double sample(RandomStream& rng) const {
    switch (kind) {
      case NoiseKind::gaussian:
        return location + scale * rng.normal();
      case NoiseKind::uniform:
        return location + (scale - location) * rng.uniform();
      case NoiseKind::laplace: {
        const double u = rng.uniform() - 0.5;
        return location - scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
      }
      case NoiseKind::student_t: {
        const double z = rng.normal();
        double chi2 = 0.0;
        for (int i = 0; i < dof; ++i) {
          const double g = rng.normal();
          chi2 += g * g;
        }
        return location + scale * z / std::sqrt(chi2 / dof);
      }
    }
    return 0.0;
  }

  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
      case NoiseKind::gaussian:
        out << "gaussian(" << location << ',' << scale << ')';
        break;
      case NoiseKind::uniform:
        out << "uniform(" << location << ',' << scale << ')';
        break;
      case NoiseKind::laplace:
        out << "laplace(" << location << ',' << scale << ')';
        break;
      case NoiseKind::student_t:
        out << "student_t(" << location << ',' << scale << ',' << dof << ')';
        break;
    }
    return out.str();
  }
};

/// X_{n+1} = coefficient * X_n + noise.
struct ArKernel {
  double coefficient = 0.0;
  Noise noise;
};

/// A samplable Markov transition together with its state space.
///
/// Kernels are immutable after construction and may be shared across workers.
class TransitionKernel {
 public:
  using Model = std::variant<FiniteKernel, IfsKernel, ArKernel>;

  static TransitionKernel finite(Eigen::MatrixXd matrix,
                                 std::optional<Eigen::MatrixXd> metric = std::nullopt) {
    const Eigen::Index m = matrix.rows();
    if (m == 0 || matrix.cols() != m) throw ValidationError("transition matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < m; ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (!(matrix(i, j) >= 0.0)) throw ValidationError("transition matrix has a negative entry");
        row += matrix(i, j);
      }
      if (std::abs(row - 1.0) > 1e-12)
        throw ValidationError("row " + std::to_string(i) + " of the transition matrix does not sum to 1");
    }
    return TransitionKernel(StateSpace::finite(static_cast<std::size_t>(m), std::move(metric)),
                            FiniteKernel{std::move(matrix)});
  }

  /// Affine IFS. When [lo, hi] is given it must be invariant under every map.
  static TransitionKernel ifs(std::vector<AffineMap> maps, std::vector<double> probabilities,
                              std::optional<std::pair<double, double>> interval = std::pair{0.0, 1.0},
                              double reference = std::numeric_limits<double>::quiet_NaN()) {
    if (maps.empty() || maps.size() != probabilities.size())
      throw ValidationError("IFS needs one probability per map");
    double total = 0.0;
    for (std::size_t k = 0; k < maps.size(); ++k) {
      if (!(probabilities[k] >= 0.0)) throw ValidationError("IFS probabilities must be nonnegative");
      if (!(std::abs(maps[k].slope) < 1.0)) throw ValidationError("IFS map " + std::to_string(k) + " is not a contraction");
      total += probabilities[k];
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("IFS probabilities must sum to 1");
    StateSpace space = StateSpace::line(std::isnan(reference) ? 0.0 : reference);
    if (interval) {
      const auto [lo, hi] = *interval;
      for (const auto& f : maps) {
        const double a = f(lo);
        const double b = f(hi);
        if (std::min(a, b) < lo - 1e-15 || std::max(a, b) > hi + 1e-15)
          throw ValidationError("IFS map does not leave the interval invariant");
      }
      space = StateSpace::interval(lo, hi, std::isnan(reference) ? lo : reference);
    }
    return TransitionKernel(std::move(space), IfsKernel{std::move(maps), std::move(probabilities)});
  }

  /// AR(1) kernel; `delta` is the moment margin required of the noise.
  static TransitionKernel ar(double coefficient, Noise noise, double delta = 1.0, double reference = 0.0) {
    if (!(std::abs(coefficient) < 1.0)) throw ValidationError("AR coefficient must satisfy |a| < 1");
    if (!(noise.scale > 0.0) && noise.kind != NoiseKind::uniform) throw ValidationError("noise scale must be positive");
    if (noise.kind == NoiseKind::uniform && !(noise.scale > noise.location))
      throw ValidationError("uniform noise needs lo < hi");
    if (noise.kind == NoiseKind::student_t && noise.dof < 1) throw ValidationError("student_t needs dof >= 1");
    if (!(delta > 0.0)) throw ValidationError("delta must be positive");
    if (!noise.has_moment(2.0 + delta))
      throw ValidationError("noise lacks a finite (2+delta)-moment: " + noise.describe());
    return TransitionKernel(StateSpace::line(reference), ArKernel{coefficient, noise});
  }

  const StateSpace& space() const { return space_; }
  const Model& model() const { return model_; }
  bool is_finite() const { return std::holds_alternative<FiniteKernel>(model_); }
  const FiniteKernel& as_finite() const {
    if (const auto* f = std::get_if<FiniteKernel>(&model_)) return *f;
    throw DomainError("kernel is not a finite-state kernel");
  }
  const IfsKernel* as_ifs() const { return std::get_if<IfsKernel>(&model_); }
  const ArKernel* as_ar() const { return std::get_if<ArKernel>(&model_); }

  /// One transition. Draws per call: finite 1, IFS 1, AR by noise kind
  /// (gaussian 2, uniform 1, laplace 1, student_t 2 + 2*dof).
  double step(double x, RandomStream& rng) const {
    if (!space_.contains(x)) throw DomainError("state " + std::to_string(x) + " is outside " + space_.describe());
    return step_unchecked(x, rng);
  }

  double step_unchecked(double x, RandomStream& rng) const {
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, FiniteKernel>) {
            const auto row = static_cast<Eigen::Index>(x);
            const double u = rng.uniform();
            double acc = 0.0;
            const Eigen::Index m = k.matrix.cols();
            Eigen::Index last_positive = 0;
            for (Eigen::Index j = 0; j < m; ++j) {
              const double p = k.matrix(row, j);
              if (p <= 0.0) continue;
              last_positive = j;
              acc += p;
              if (u < acc) return static_cast<double>(j);
            }
            return static_cast<double>(last_positive);
          } else if constexpr (std::is_same_v<K, IfsKernel>) {
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t chosen = k.maps.size() - 1;
            for (std::size_t j = 0; j < k.maps.size(); ++j) {
              acc += k.probabilities[j];
              if (u < acc) {
                chosen = j;
                break;
              }
            }
            return k.maps[chosen](x);
          } else {
            return k.coefficient * x + k.noise.sample(rng);
          }
        },
        model_);
  }

  /// Canonical text form; the kernel hash is computed from it.
  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, FiniteKernel>) {
            out << "finite[";
            for (Eigen::Index i = 0; i < k.matrix.rows(); ++i) {
              if (i) out << ';';
              for (Eigen::Index j = 0; j < k.matrix.cols(); ++j) out << (j ? "," : "") << k.matrix(i, j);
            }
            out << ']';
          } else if constexpr (std::is_same_v<K, IfsKernel>) {
            out << "ifs[";
            for (std::size_t j = 0; j < k.maps.size(); ++j)
              out << (j ? ";" : "") << k.maps[j].slope << ',' << k.maps[j].intercept << ',' << k.probabilities[j];
            out << ']';
          } else {
            out << "ar[" << k.coefficient << ',' << k.noise.describe() << ']';
          }
        },
        model_);
    out << '@' << space_.describe();
    return out.str();
  }

  std::uint64_t hash() const { return fnv1a64(describe()); }

 private:
  TransitionKernel(StateSpace space, Model model) : space_(std::move(space)), model_(std::move(model)) {}

  StateSpace space_;
  Model model_;
};

/// Exact P f for a finite kernel.
inline Eigen::VectorXd apply_P(const FiniteKernel& kernel, const Eigen::VectorXd& f) {
  if (f.size() != kernel.matrix.cols())
    throw ValidationError("function has " + std::to_string(f.size()) + " values, kernel has " +
                          std::to_string(kernel.matrix.cols()) + " states");
  return kernel.matrix * f;
}

/// Exact mu P for a finite kernel (mu as a row of weights).
inline Eigen::VectorXd transfer(const FiniteKernel& kernel, const Eigen::VectorXd& mu) {
  if (mu.size() != kernel.matrix.rows()) throw ValidationError("measure length does not match kernel");
  return kernel.matrix.transpose() * mu;
}

}  // namespace lilmc
