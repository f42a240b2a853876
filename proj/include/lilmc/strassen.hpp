#pragma once

// Distance to the Strassen set K = {x : x(0) = 0, int x'^2 <= 1}, cluster
// tracking of path functionals, and the LIL ratio series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lilmc/error.hpp"
#include "lilmc/parallel.hpp"
#include "lilmc/path.hpp"
#include "lilmc/taut_string.hpp"

namespace lilmc {

/// Minimal-energy path within sup distance eps of p.
inline CorridorPath project_to_corridor(const PolygonalPath& p, double eps, bool record = true,
                                        double stop_above = std::numeric_limits<double>::infinity()) {
  if (!(eps > 0.0)) throw ValidationError("corridor half-width must be positive");
  std::vector<double> lo(p.size());
  std::vector<double> hi(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    lo[i] = p.v[i] - eps;
    hi[i] = p.v[i] + eps;
  }
  return taut_string(p.t, lo, hi, stop_above, record);
}

inline bool corridor_feasible(const PolygonalPath& p, double eps) {
  return project_to_corridor(p, eps, false, 1.0).energy <= 1.0;
}

/// inf over x in K of sup_t |p(t) - x(t)|, within +-tol, by bisection on the
/// corridor half-width.
inline double dist_to_K(const PolygonalPath& p, double tol = 1e-7) {
  if (!(tol > 0.0)) throw ValidationError("dist_to_K needs tol > 0");
  if (path_energy(p) <= 1.0) return 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (double x : p.v) hi = std::max(hi, std::abs(x));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (corridor_feasible(p, mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// A point of K within dist_to_K(p) + tol of p.
inline PolygonalPath project_to_K(const PolygonalPath& p, double tol = 1e-7) {
  if (path_energy(p) <= 1.0) return p;
  const double d = dist_to_K(p, tol);
  const CorridorPath c = project_to_corridor(p, d + tol);
  PolygonalPath out;
  out.t = c.t;
  out.v = c.v;
  out.n = p.n;
  return out;
}

/// n_j = ceil(n_min * ratio^j) for n_j <= n_max, deduplicated.
inline std::vector<std::size_t> geometric_subsequence(std::size_t n_max, double ratio = 1.5, std::size_t n_min = 16) {
  if (!(ratio > 1.0)) throw ValidationError("subsequence ratio must exceed 1");
  std::vector<std::size_t> out;
  for (int j = 0;; ++j) {
    const double v = std::ceil(static_cast<double>(n_min) * std::pow(ratio, j) - 1e-9);
    if (v > static_cast<double>(n_max)) break;
    const auto n = static_cast<std::size_t>(v);
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

struct StrassenTargets {
  double endpoint = 1.0;
  double supremum = 1.0;
  double integral = 1.0 / std::sqrt(3.0);
  double band_lo = 0.5;
  double band_hi = 1.25;
  double dist_threshold = 0.35;
  std::size_t dist_window = 10;
  double tol = 1e-5;
};

struct StrassenRecord {
  std::size_t n = 0;
  double endpoint = 0.0;
  double supremum = 0.0;
  double integral = 0.0;
  double energy = 0.0;
  double dist = 0.0;
  double max_endpoint = 0.0;
  double max_supremum = 0.0;
  double max_integral = 0.0;
  double window_min_dist = 0.0;
};

struct StrassenReport {
  StrassenTargets targets;
  std::vector<StrassenRecord> records;

  const StrassenRecord& last() const { return records.back(); }

  bool endpoint_in_band() const { return in_band(last().max_endpoint, targets.endpoint); }
  bool supremum_in_band() const { return in_band(last().max_supremum, targets.supremum); }
  bool integral_in_band() const { return in_band(last().max_integral, targets.integral); }
  bool dist_ok() const { return last().window_min_dist <= targets.dist_threshold; }

 private:
  bool in_band(double v, double target) const {
    return v >= targets.band_lo * target && v <= targets.band_hi * target;
  }
};

/// Ordered fold over paths along a strictly increasing subsequence.
class ClusterTracker {
 public:
  explicit ClusterTracker(StrassenTargets targets = {}) { report_.targets = targets; }

  /// `dist` may be supplied when computed elsewhere (e.g. in parallel).
  void add(const PolygonalPath& p, double dist = -1.0) {
    if (!report_.records.empty() && p.n <= report_.records.back().n)
      throw ValidationError("subsequence indices must be strictly increasing");
    StrassenRecord r;
    r.n = p.n;
    r.endpoint = functional_eval(p, Functional::endpoint);
    r.supremum = functional_eval(p, Functional::supremum);
    r.integral = functional_eval(p, Functional::integral);
    r.energy = path_energy(p);
    r.dist = dist >= 0.0 ? dist : dist_to_K(p, report_.targets.tol);
    if (report_.records.empty()) {
      r.max_endpoint = r.endpoint;
      r.max_supremum = r.supremum;
      r.max_integral = r.integral;
    } else {
      const auto& prev = report_.records.back();
      r.max_endpoint = std::max(prev.max_endpoint, r.endpoint);
      r.max_supremum = std::max(prev.max_supremum, r.supremum);
      r.max_integral = std::max(prev.max_integral, r.integral);
    }
    report_.records.push_back(r);
    const std::size_t w = std::min(report_.targets.dist_window, report_.records.size());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = report_.records.size() - w; i < report_.records.size(); ++i)
      m = std::min(m, report_.records[i].dist);
    report_.records.back().window_min_dist = m;
  }

  const StrassenReport& report() const {
    if (report_.records.empty()) throw ValidationError("cluster tracker received no paths");
    return report_;
  }

 private:
  StrassenReport report_;
};

/// theta_n along the subsequence from one partial-sum sequence W.
inline StrassenReport strassen_theta(std::span<const double> W, double sigma, const std::vector<std::size_t>& ns,
                                     StrassenTargets targets = {}, unsigned threads = 1) {
  if (ns.empty()) throw ValidationError("empty subsequence");
  std::vector<double> dist(ns.size());
  // Distances are independent per path; each slot is written by one worker.
  parallel_for(ns.size(), threads, [&](std::size_t j) { dist[j] = dist_to_K(build_theta(W, sigma, ns[j]), targets.tol); });
  ClusterTracker tracker(targets);
  for (std::size_t j = 0; j < ns.size(); ++j) tracker.add(build_theta(W, sigma, ns[j]), dist[j]);
  return tracker.report();
}

/// Running max of |W_n| / (sigma sqrt(2 n log log n)) over [n_min, n_max],
/// with checkpoints at powers of ten (and n_max).
struct LilRatioSeries {
  std::size_t n_min = 0;
  std::size_t n_max = 0;
  double sigma = 0.0;
  double running_max = 0.0;
  std::size_t argmax = 0;
  std::vector<std::size_t> checkpoints;
  std::vector<double> ratio_at;
  std::vector<double> running_max_at;

  bool in_band(double lo = 0.6, double hi = 1.4) const { return running_max >= lo && running_max <= hi; }
};

inline LilRatioSeries lil_ratio_series(std::span<const double> W, double sigma, std::size_t n_min, std::size_t n_max) {
  if (!(sigma > 0.0)) throw DegenerateVariance("LIL ratio needs sigma > 0");
  if (n_min < 3 || n_max < n_min || W.size() < n_max + 1) throw ValidationError("invalid LIL ratio range");
  LilRatioSeries s;
  s.n_min = n_min;
  s.n_max = n_max;
  s.sigma = sigma;
  std::size_t next = 1;
  while (next < n_min) next *= 10;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    const double r = std::abs(W[n]) / (sigma * std::sqrt(2.0 * nn * loglog(nn)));
    if (r > s.running_max) {
      s.running_max = r;
      s.argmax = n;
    }
    if (n == next || n == n_max) {
      s.checkpoints.push_back(n);
      s.ratio_at.push_back(r);
      s.running_max_at.push_back(s.running_max);
      if (n == next) next *= 10;
    }
  }
  return s;
}

}  // namespace lilmc
