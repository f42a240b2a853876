#pragma once

// Minimal-energy path through vertical gates [lo_i, hi_i] at times t_i,
// pinned at (0, 0) with a free right end. The free end is handled by
// reflecting the corridor about t = 1 and pinning (2, 0); the reflected
// problem has a unique symmetric optimum whose energy is twice the answer.
// The taut string through the gates is found with a funnel sweep.

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "lilmc/error.hpp"

namespace lilmc {

struct CorridorPath {
  std::vector<double> t;
  std::vector<double> v;
  double energy = 0.0;
  /// False when the sweep stopped early because energy exceeded the cap.
  bool complete = true;
};

namespace detail {

struct Pt {
  double t;
  double y;
};

/// > 0 when c lies above the line a -> b (a.t < b.t, a.t < c.t).
inline double cross(const Pt& a, const Pt& b, const Pt& c) {
  return (b.t - a.t) * (c.y - a.y) - (b.y - a.y) * (c.t - a.t);
}

class Funnel {
 public:
  explicit Funnel(double cap, bool record) : cap_(cap), record_(record) {
    upper_.push_back({0.0, 0.0});
    lower_.push_back({0.0, 0.0});
    if (record_) out_.push_back({0.0, 0.0});
  }

  bool exceeded() const { return energy_ > cap_; }

  void add_upper(Pt u) {
    while (upper_.size() >= 2 && cross(upper_[upper_.size() - 2], upper_.back(), u) <= 0.0) upper_.pop_back();
    if (upper_.size() == 1) {
      while (lower_.size() >= 2 && cross(lower_[0], lower_[1], u) <= 0.0) {
        commit(lower_[0], lower_[1]);
        lower_.pop_front();
      }
      upper_.assign(1, lower_.front());
    }
    upper_.push_back(u);
  }

  void add_lower(Pt l) {
    while (lower_.size() >= 2 && cross(lower_[lower_.size() - 2], lower_.back(), l) >= 0.0) lower_.pop_back();
    if (lower_.size() == 1) {
      while (upper_.size() >= 2 && cross(upper_[0], upper_[1], l) >= 0.0) {
        commit(upper_[0], upper_[1]);
        upper_.pop_front();
      }
      lower_.assign(1, upper_.front());
    }
    lower_.push_back(l);
  }

  /// Pins the end point and flushes the remaining upper chain.
  void finish(Pt end) {
    add_upper(end);
    for (std::size_t i = 1; i < upper_.size(); ++i) commit(upper_[i - 1], upper_[i]);
  }

  double energy() const { return energy_; }
  const std::vector<Pt>& points() const { return out_; }

 private:
  void commit(const Pt& a, const Pt& b) {
    const double dy = b.y - a.y;
    energy_ += dy * dy / (b.t - a.t);
    if (record_) out_.push_back(b);
  }

  double cap_;
  bool record_;
  double energy_ = 0.0;
  std::deque<Pt> upper_;
  std::deque<Pt> lower_;
  std::vector<Pt> out_;
};

}  // namespace detail

/// Gates are given at t[0] = 0 < t[1] < ... < t[m] = 1; the gate at 0 must
/// contain 0 and is replaced by the pin. The sweep stops once the (free-end)
/// energy exceeds `stop_above`; `record` keeps the vertices of the optimum.
inline CorridorPath taut_string(std::span<const double> t, std::span<const double> lo, std::span<const double> hi,
                                double stop_above = std::numeric_limits<double>::infinity(), bool record = true) {
  const std::size_t m = t.size();
  if (m < 2 || lo.size() != m || hi.size() != m) throw ValidationError("taut_string needs matching gate arrays");
  if (t[0] != 0.0 || t[m - 1] != 1.0) throw ValidationError("taut_string gates must span [0,1]");
  if (!(lo[0] <= 0.0 && hi[0] >= 0.0)) throw ValidationError("gate at t = 0 must contain the pin");
  for (std::size_t i = 0; i < m; ++i)
    if (!(lo[i] < hi[i])) throw ValidationError("taut_string gates must have positive width");

  detail::Funnel f(2.0 * stop_above, record);
  CorridorPath out;
  for (std::size_t i = 1; i < m && !f.exceeded(); ++i) {
    f.add_upper({t[i], hi[i]});
    f.add_lower({t[i], lo[i]});
  }
  for (std::size_t i = m - 1; i-- > 1 && !f.exceeded();) {
    f.add_upper({2.0 - t[i], hi[i]});
    f.add_lower({2.0 - t[i], lo[i]});
  }
  if (f.exceeded()) {
    out.energy = f.energy() / 2.0;
    out.complete = false;
    return out;
  }
  f.finish({2.0, 0.0});
  out.energy = f.energy() / 2.0;
  if (record) {
    const auto& pts = f.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].t >= 1.0) {
        const auto& a = pts[i - 1];
        const auto& b = pts[i];
        out.t.push_back(1.0);
        out.v.push_back(b.t == 1.0 ? b.y : a.y + (b.y - a.y) * (1.0 - a.t) / (b.t - a.t));
        break;
      }
      out.t.push_back(pts[i].t);
      out.v.push_back(pts[i].y);
    }
  }
  return out;
}

}  // namespace lilmc
