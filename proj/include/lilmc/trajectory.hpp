#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/random.hpp"

namespace lilmc {

enum class InitialKind { dirac, discrete, uniform, gaussian };

/// Law of X0.
struct InitialDistribution {
  InitialKind kind = InitialKind::dirac;
  double a = 0.0;  // dirac point, uniform lo, gaussian mean
  double b = 0.0;  // uniform hi, gaussian sd
  std::vector<double> weights;  // discrete, over finite states

  static InitialDistribution dirac(double x) { return {InitialKind::dirac, x, 0.0, {}}; }
  static InitialDistribution discrete(std::vector<double> w) { return {InitialKind::discrete, 0.0, 0.0, std::move(w)}; }
  static InitialDistribution uniform(double lo, double hi) { return {InitialKind::uniform, lo, hi, {}}; }
  static InitialDistribution gaussian(double mean, double sd) { return {InitialKind::gaussian, mean, sd, {}}; }

  void validate_for(const StateSpace& space) const {
    switch (kind) {
      case InitialKind::dirac:
        if (!space.contains(a)) throw DomainError("initial point is outside the state space");
        break;
      case InitialKind::discrete: {
        if (!space.is_finite() || weights.size() != space.size())
          throw DomainError("discrete initial law needs one weight per finite state");
        double total = 0.0;
        for (double w : weights) {
          if (!(w >= 0.0)) throw DomainError("initial weights must be nonnegative");
          total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw DomainError("initial weights must sum to 1");
        break;
      }
      case InitialKind::uniform:
        if (space.is_finite() || !(a < b) || !space.contains(a) || !space.contains(b))
          throw DomainError("uniform initial law must be a subinterval of a scalar space");
        break;
      case InitialKind::gaussian:
        if (space.kind() != SpaceKind::line || !(b > 0.0))
          throw DomainError("gaussian initial law needs the real line and sd > 0");
        break;
    }
  }

  /// Draws: dirac 0, discrete 1, uniform 1, gaussian 2.
  double sample(RandomStream& rng) const {
    switch (kind) {
      case InitialKind::dirac:
        return a;
      case InitialKind::discrete: {
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t last = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
          if (weights[i] <= 0.0) continue;
          last = i;
          acc += weights[i];
          if (u < acc) return static_cast<double>(i);
        }
        return static_cast<double>(last);
      }
      case InitialKind::uniform:
        return a + (b - a) * rng.uniform();
      case InitialKind::gaussian:
        return a + b * rng.normal();
    }
    return a;
  }

  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
      case InitialKind::dirac:
        out << "dirac(" << a << ')';
        break;
      case InitialKind::discrete:
        out << "discrete(";
        for (std::size_t i = 0; i < weights.size(); ++i) out << (i ? "," : "") << weights[i];
        out << ')';
        break;
      case InitialKind::uniform:
        out << "uniform(" << a << ',' << b << ')';
        break;
      case InitialKind::gaussian:
        out << "gaussian(" << a << ',' << b << ')';
        break;
    }
    return out.str();
  }
};

/// X_0, ..., X_N with the provenance needed to regenerate it.
struct Trajectory {
  std::vector<double> states;
  std::uint64_t seed = 0;
  std::uint32_t replica = 0;
  std::uint64_t kernel_hash = 0;
  std::string initial;

  std::size_t horizon() const { return states.empty() ? 0 : states.size() - 1; }
};

/// Simulates n steps. The stream is (seed, replica, simulate); X0 is drawn
/// from it first, then one step per transition.
inline Trajectory simulate(const TransitionKernel& kernel, const InitialDistribution& initial, std::size_t n,
                           std::uint64_t seed, std::uint32_t replica = 0) {
  initial.validate_for(kernel.space());
  RandomStream rng(seed, replica, StreamPurpose::simulate);
  Trajectory t;
  t.seed = seed;
  t.replica = replica;
  t.kernel_hash = kernel.hash();
  t.initial = initial.describe();
  t.states.resize(n + 1);
  double x = initial.sample(rng);
  t.states[0] = x;
  for (std::size_t k = 1; k <= n; ++k) {
    x = kernel.step_unchecked(x, rng);
    t.states[k] = x;
  }
  return t;
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "# seed=" << t.seed << " replica=" << t.replica << " kernel=" << hex64(t.kernel_hash)
      << " initial=" << t.initial << '\n';
  out << "step,state\n";
  out.precision(17);
  for (std::size_t k = 0; k < t.states.size(); ++k) out << k << ',' << t.states[k] << '\n';
}

}  // namespace lilmc
