#pragma once

// Checks of the martingale LIL hypotheses on simulated or exact data:
// (e1)/(e2) moment series, (e3) quadratic variation, SLLN, the Lipschitz
// propagation bound for H_{n,k}, and Borel-Cantelli decay of P(A_n).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lilmc/contraction.hpp"
#include "lilmc/corrector.hpp"
#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/parallel.hpp"
#include "lilmc/path.hpp"
#include "lilmc/trajectory.hpp"
#include "lilmc/variance.hpp"

namespace lilmc {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct Diagnostic {
  std::string label;
  double n = 0.0;
  double value = 0.0;
  /// Threshold or analytic bound; NaN when the row is informational.
  double bound = std::numeric_limits<double>::quiet_NaN();
};

struct ConditionReport {
  std::string id;
  std::map<std::string, double> params;
  std::vector<Diagnostic> diagnostics;
  Verdict verdict = Verdict::inconclusive;
  std::string note;

  bool passed() const { return verdict == Verdict::pass; }
};

/// Geometric checkpoints first, 2 first, 4 first, ... and n.
inline std::vector<std::size_t> doubling_checkpoints(std::size_t first, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t c = first; c < n; c *= 2) out.push_back(c);
  out.push_back(n);
  return out;
}

struct E12Reports {
  ConditionReport e1;
  ConditionReport e2;
  bool passed() const { return e1.passed() && e2.passed(); }
};

/// sum_{n>N} n^{-p} <= N^{1-p} / (p - 1).
inline double power_tail(std::size_t N, double p) { return std::pow(static_cast<double>(N), 1.0 - p) / (p - 1.0); }

/// Partial sums of the (e1) and (e2) series from an ensemble, plus the tail
/// majorant C * sup_n E|Z_n|^{2+delta} * sum_{n>N} (sigma^2 n)^{-1-delta/2}
/// with C = gamma^{2-delta} for (e1) and eps^{-1-delta} for (e2).
/// A series passes when the tail is below 10% of the partial sum (or below
/// 0.01 when the partial sum vanishes) and late summands do not exceed early
/// ones. Growing late summands or non-finite sums fail; a tail that is still
/// too large at this horizon is inconclusive.
inline E12Reports check_e1_e2(const ZEnsemble& e, std::span<const double> s2, double sigma2, double delta,
                               double gamma_thresh = 1.0, std::vector<double> eps_grid = {0.5, 1.0, 2.0}) {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  if (!(gamma_thresh > 0.0)) throw ValidationError("gamma threshold must be positive");
  if (e.replicas < 32) throw ValidationError("(e1)/(e2) need at least 32 replicas");
  if (s2.size() < e.n + 1) throw ValidationError("s2 curve shorter than the ensemble");
  const std::size_t N = e.n;
  const double R = static_cast<double>(e.replicas);
  const double p = 2.0 + delta;

  std::vector<double> a(N + 1, 0.0);
  std::vector<std::vector<double>> b(eps_grid.size(), std::vector<double>(N + 1, 0.0));
  double moment_sup = 0.0;
  std::vector<double> col(e.replicas);
  std::vector<double> tmp(e.replicas);
  for (std::size_t n = 1; n <= N; ++n) {
    const double sn = std::sqrt(s2[n]);
    for (std::size_t r = 0; r < e.replicas; ++r) col[r] = e.z(r, n);
    for (std::size_t r = 0; r < e.replicas; ++r) tmp[r] = std::pow(std::abs(col[r]), p);
    moment_sup = std::max(moment_sup, pairwise_sum(tmp) / R);
    if (!(sn > 0.0)) continue;
    for (std::size_t r = 0; r < e.replicas; ++r) {
      const double z = col[r];
      tmp[r] = std::abs(z) < gamma_thresh * sn ? z * z * z * z : 0.0;
    }
    a[n] = pairwise_sum(tmp) / R / (s2[n] * s2[n]);
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
      for (std::size_t r = 0; r < e.replicas; ++r)
        tmp[r] = std::abs(col[r]) >= eps_grid[k] * sn ? std::abs(col[r]) : 0.0;
      b[k][n] = pairwise_sum(tmp) / R / sn;
    }
  }

  const double series_tail =
      sigma2 > 0.0 ? power_tail(N, 1.0 + delta / 2.0) * std::pow(sigma2, -1.0 - delta / 2.0) : 0.0;
  auto judge = [&](ConditionReport& rep, const std::vector<double>& terms, double factor, const std::string& tag) {
    const double partial = pairwise_sum(std::span<const double>(terms).subspan(1));
    const double tail = factor * moment_sup * series_tail;
    const double allowed = std::max(0.1 * partial, 0.01);
    double early = 0.0;
    double late = 0.0;
    for (std::size_t n = 1; n <= N / 2; ++n) early = std::max(early, terms[n]);
    for (std::size_t n = N / 2 + 1; n <= N; ++n) late = std::max(late, terms[n]);
    rep.diagnostics.push_back({tag + "partial_sum", static_cast<double>(N), partial});
    rep.diagnostics.push_back({tag + "tail_majorant", static_cast<double>(N), tail, allowed});
    rep.diagnostics.push_back({tag + "max_late_summand", static_cast<double>(N), late, early});
    if (!std::isfinite(partial) || !std::isfinite(tail) || late > early) return Verdict::fail;
    return tail < allowed ? Verdict::pass : Verdict::inconclusive;
  };
  auto worse = [](Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
  };

  E12Reports out;
  for (ConditionReport* rep : {&out.e1, &out.e2}) {
    rep->params = {{"delta", delta}, {"gamma", gamma_thresh}, {"horizon", static_cast<double>(N)},
                   {"replicas", R}, {"sigma2", sigma2}, {"moment_sup", moment_sup}};
  }
  out.e1.id = "e1";
  out.e2.id = "e2";
  out.e1.verdict = judge(out.e1, a, std::pow(gamma_thresh, 2.0 - delta), "");
  Verdict v2 = Verdict::pass;
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    out.e2.params["eps" + std::to_string(k)] = eps_grid[k];
    const std::string tag = "eps=" + std::to_string(eps_grid[k]) + ":";
    v2 = worse(v2, judge(out.e2, b[k], std::pow(eps_grid[k], -1.0 - delta), tag));
  }
  out.e2.verdict = v2;
  return out;
}

/// (1/n) sum_{k<=n} Z_k^2 against sigma^2 at doubling checkpoints, with the
/// n0-spaced sub-averages (1/L) sum_{l=1}^L Z_{i + l n0}^2 for i = 1..n0.
/// Z is indexed from 1 (Z[0] ignored).
inline ConditionReport check_e3(std::span<const double> Z, double sigma2, int n0 = 2, double tol = 0.02,
                                double sub_tol = 0.03) {
  if (!(sigma2 > 0.0)) throw DegenerateVariance("(e3) needs sigma^2 > 0");
  if (Z.size() < 10001) throw ValidationError("(e3) needs at least 10^4 differences");
  if (n0 < 1) throw ValidationError("n0 must be positive");
  const std::size_t n = Z.size() - 1;
  ConditionReport rep;
  rep.id = "e3";
  rep.params = {{"sigma2", sigma2}, {"n", static_cast<double>(n)}, {"n0", n0}, {"tol", tol}, {"sub_tol", sub_tol}};
  const auto cps = doubling_checkpoints(1000, n);
  std::vector<double> dev;
  double acc = 0.0;
  std::size_t at = 0;
  for (std::size_t c : cps) {
    for (; at < c; ++at) acc += Z[at + 1] * Z[at + 1];
    const double avg = acc / static_cast<double>(c);
    dev.push_back(std::abs(avg / sigma2 - 1.0));
    rep.diagnostics.push_back({"mean_z2", static_cast<double>(c), avg, sigma2});
  }
  const std::size_t third = std::max<std::size_t>(1, dev.size() / 3);
  const double early = *std::max_element(dev.begin(), dev.begin() + static_cast<std::ptrdiff_t>(third));
  const double late = *std::max_element(dev.end() - static_cast<std::ptrdiff_t>(third), dev.end());
  const bool final_ok = dev.back() <= tol;
  const bool shrink = late <= early;
  rep.diagnostics.push_back({"final_relative_deviation", static_cast<double>(n), dev.back(), tol});
  rep.diagnostics.push_back({"late_vs_early_deviation", static_cast<double>(n), late, early});
  bool sub_ok = true;
  const auto step = static_cast<std::size_t>(n0);
  for (std::size_t i = 1; i <= step; ++i) {
    double s = 0.0;
    std::size_t L = 0;
    for (std::size_t idx = i + step; idx <= n; idx += step, ++L) s += Z[idx] * Z[idx];
    const double avg = L ? s / static_cast<double>(L) : 0.0;
    const double d = std::abs(avg / sigma2 - 1.0);
    sub_ok = sub_ok && d <= sub_tol;
    rep.diagnostics.push_back({"sub_average_i=" + std::to_string(i), static_cast<double>(L), avg, sigma2});
    rep.diagnostics.push_back({"sub_deviation_i=" + std::to_string(i), static_cast<double>(L), d, sub_tol});
  }
  if (!final_ok || !sub_ok)
    rep.verdict = Verdict::fail;
  else
    rep.verdict = shrink ? Verdict::pass : Verdict::inconclusive;
  if (final_ok && !shrink) rep.note = "final deviation within tolerance but deviations did not shrink";
  return rep;
}

/// W_n / n at doubling checkpoints; W indexed from 0 (W[0] = 0).
inline ConditionReport check_slln(std::span<const double> W, double sigma) {
  if (W.size() < 10001) throw ValidationError("SLLN check needs at least 10^4 steps");
  const std::size_t n = W.size() - 1;
  ConditionReport rep;
  rep.id = "SLLN";
  rep.params = {{"sigma", sigma}, {"n", static_cast<double>(n)}};
  auto threshold = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return std::max(3.0 * sigma * std::sqrt(2.0 * loglog(kk) / kk), 0.01);
  };
  for (std::size_t c : doubling_checkpoints(1000, n))
    rep.diagnostics.push_back({"mean", static_cast<double>(c), W[c] / static_cast<double>(c), threshold(c)});
  const double final = std::abs(W[n] / static_cast<double>(n));
  rep.verdict = final <= threshold(n) ? Verdict::pass : Verdict::fail;
  if (rep.verdict == Verdict::fail) rep.note = "ergodic average does not vanish; is psi centered?";
  return rep;
}

struct LipschitzAudit {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t states = 0;
  std::vector<int> step_exponents;
  double lip_chi = 0.0;
  double lip_psi = 0.0;
  double sigma2 = 0.0;
  double L = 0.0;
  double measured_h = 0.0;
  double measured_g = 0.0;
  double bound = 0.0;
  /// Propagated constant of H; the lemma only asserts it exists.
  double l_tilde = 0.0;
  double tolerance = 1e-9;

  bool passed() const { return measured_h <= bound + tolerance; }
  bool h_within_g() const { return measured_h <= measured_g + tolerance; }
};

/// Exact Lipschitz audit of H_{n,k}(x) = E_x g_{n,k}(Y_1, ..., Y_{2(n+k)}), where
/// Y_l is reached from Y_{l-1} in k_l steps (k_l = 1 for odd l, n0 - 1 for
/// even l) and g_{n,k} is the truncated running-minimum integrand
/// |min_{p=n..n+k} (1/p)(sum_{l<=p} z_l^2 ^ p(1+sigma^2)) - sigma^2| ^ 1 with
/// z_l = chi(y_{2l}) - chi(y_{2l-1}) + psi(y_{2l}).
inline LipschitzAudit audit_h_lipschitz(const TransitionKernel& kernel, const Corrector& chi, double sigma2,
                                        std::size_t n, std::size_t k, const ContractionCertificate& cert) {
  cert.validate();
  if (!kernel.is_finite()) throw InstanceTooLarge("Lipschitz audit needs a finite kernel");
  const FiniteKernel& fk = kernel.as_finite();
  const StateSpace& space = kernel.space();
  const std::size_t m = space.size();
  if (n < 1 || k < 1) throw ValidationError("audit needs n, k >= 1");
  if (m > 8 || n + k > 3) throw InstanceTooLarge("audit limited to <= 8 states and n + k <= 3");
  const std::size_t len = 2 * (n + k);

  LipschitzAudit out;
  out.n = n;
  out.k = k;
  out.states = m;
  out.sigma2 = sigma2;
  for (std::size_t l = 1; l <= len; ++l) out.step_exponents.push_back(l % 2 ? 1 : cert.n0 - 1);

  const Eigen::VectorXd chi_v = chi.chi_table();
  Eigen::VectorXd psi_v(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) psi_v(static_cast<Eigen::Index>(i)) = chi.psi(static_cast<double>(i));
  auto lip_of = [&](const Eigen::VectorXd& f) {
    double l = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        l = std::max(l, std::abs(f(static_cast<Eigen::Index>(i)) - f(static_cast<Eigen::Index>(j))) /
                            space.distance(static_cast<double>(i), static_cast<double>(j)));
    return l;
  };
  out.lip_chi = lip_of(chi_v);
  out.lip_psi = lip_of(psi_v);
  out.L = 2.0 * (out.lip_chi + out.lip_psi) * (1.0 + sigma2);
  out.bound = out.L * (cert.c * cert.gamma + 1.0) / (1.0 - cert.gamma0);
  out.l_tilde = out.bound;

  auto g = [&](const std::vector<std::size_t>& y) {
    double acc = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 1; l <= n + k; ++l) {
      const auto a = static_cast<Eigen::Index>(y[2 * l - 2]);
      const auto b = static_cast<Eigen::Index>(y[2 * l - 1]);
      const double z = chi_v(b) - chi_v(a) + psi_v(b);
      acc += z * z;
      if (l >= n) {
        const double p = static_cast<double>(l);
        best = std::min(best, std::min(acc, p * (1.0 + sigma2)) / p - sigma2);
      }
    }
    return std::min(std::abs(best), 1.0);
  };

  std::vector<Eigen::MatrixXd> powers;
  for (int e : out.step_exponents) {
    Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (int s = 0; s < e; ++s) Pk = Pk * fk.matrix;
    powers.push_back(std::move(Pk));
  }

  std::size_t tuples = 1;
  for (std::size_t l = 0; l < len; ++l) tuples *= m;
  std::vector<double> gv(tuples);
  std::vector<std::size_t> y(len);
  for (std::size_t code = 0; code < tuples; ++code) {
    std::size_t c = code;
    for (std::size_t l = len; l-- > 0;) {
      y[l] = c % m;
      c /= m;
    }
    gv[code] = g(y);
  }
  // Per-variable Lipschitz constant of g.
  std::size_t stride = 1;
  for (std::size_t l = len; l-- > 0;) {
    for (std::size_t code = 0; code < tuples; ++code) {
      const std::size_t digit = (code / stride) % m;
      for (std::size_t alt = digit + 1; alt < m; ++alt) {
        const double d = space.distance(static_cast<double>(digit), static_cast<double>(alt));
        const double diff = std::abs(gv[code] - gv[code + (alt - digit) * stride]);
        out.measured_g = std::max(out.measured_g, diff / d);
      }
    }
    stride *= m;
  }

  // H(x) by backward integration: layer l holds E[g | y_1..y_l].
  std::vector<double> layer = gv;
  std::size_t width = tuples;
  for (std::size_t l = len; l-- > 1;) {
    const std::size_t prefix = width / m;
    std::vector<double> next(prefix);
    for (std::size_t pre = 0; pre < prefix; ++pre) {
      const auto from = static_cast<Eigen::Index>(pre % m);
      double s = 0.0;
      for (std::size_t to = 0; to < m; ++to) s += powers[l](from, static_cast<Eigen::Index>(to)) * layer[pre * m + to];
      next[pre] = s;
    }
    layer = std::move(next);
    width = prefix;
  }
  Eigen::VectorXd H = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t to = 0; to < m; ++to)
      H(static_cast<Eigen::Index>(x)) +=
          powers[0](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(to)) * layer[to];
  out.measured_h = lip_of(H);
  return out;
}

/// Monte Carlo P(A_n) with A_n = {|chi(X_n) - chi(X_0)| >= eps sqrt(n)/2} u
/// {|chi(X_n) - chi(X_{n-1})| >= eps sqrt(n)/2}. When chi has finite
/// oscillation, both terms vanish for n > (2 osc / eps)^2, and the check
/// requires exactly zero observed frequency there. Otherwise it fits the
/// log-log decay slope over grid points with positive frequency.
inline ConditionReport check_borel_cantelli(const TransitionKernel& kernel, const InitialDistribution& initial,
                                            const Corrector& chi, double eps, std::vector<std::size_t> n_grid,
                                            std::size_t replicas, std::uint64_t seed, double delta = 1.0,
                                            unsigned threads = 1) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (n_grid.empty() || replicas < 1) throw ValidationError("Borel-Cantelli check needs a grid and replicas");
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  if (n_grid.front() == 0) throw ValidationError("grid entries must be >= 1");
  initial.validate_for(kernel.space());
  const std::size_t G = n_grid.size();
  std::vector<unsigned char> hit(replicas * G, 0);
  parallel_for(replicas, threads, [&](std::size_t r) {
    RandomStream rng(seed, static_cast<std::uint32_t>(r), StreamPurpose::borel_cantelli);
    const double x0 = initial.sample(rng);
    const double c0 = chi.chi(x0);
    double x = x0;
    double cprev = c0;
    std::size_t at = 0;
    for (std::size_t g = 0; g < G; ++g) {
      double cx = cprev;
      for (; at < n_grid[g]; ++at) {
        cprev = cx;
        x = kernel.step_unchecked(x, rng);
        cx = chi.chi(x);
      }
      const double lim = eps * std::sqrt(static_cast<double>(n_grid[g])) / 2.0;
      hit[r * G + g] = (std::abs(cx - c0) >= lim || std::abs(cx - cprev) >= lim) ? 1 : 0;
      cprev = cx;
    }
  });

  ConditionReport rep;
  rep.id = "BC";
  const double osc = chi.oscillation(kernel.space());
  rep.params = {{"eps", eps}, {"replicas", static_cast<double>(replicas)}, {"delta", delta}, {"oscillation", osc}};
  std::vector<double> freq(G);
  for (std::size_t g = 0; g < G; ++g) {
    std::size_t count = 0;
    for (std::size_t r = 0; r < replicas; ++r) count += hit[r * G + g];
    freq[g] = static_cast<double>(count) / static_cast<double>(replicas);
    rep.diagnostics.push_back({"P(A_n)", static_cast<double>(n_grid[g]), freq[g]});
  }
  if (std::isfinite(osc)) {
    // Relative slack so that an oscillation computed as 6.999... still lands on
    // the exact-arithmetic cutoff rather than one step early.
    const double cutoff = std::floor(std::pow(2.0 * osc / eps, 2.0) * (1.0 + 1e-9)) + 1.0;
    rep.params["cutoff"] = cutoff;
    bool zero = true;
    std::size_t beyond = 0;
    for (std::size_t g = 0; g < G; ++g)
      if (static_cast<double>(n_grid[g]) >= cutoff) {
        ++beyond;
        zero = zero && freq[g] == 0.0;
      }
    rep.params["grid_points_beyond_cutoff"] = static_cast<double>(beyond);
    if (beyond == 0) {
      rep.verdict = Verdict::inconclusive;
      rep.note = "grid does not reach the oscillation cutoff";
    } else {
      rep.verdict = zero ? Verdict::pass : Verdict::fail;
    }
    return rep;
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t g = 0; g < G; ++g)
    if (freq[g] > 0.0) {
      lx.push_back(std::log(static_cast<double>(n_grid[g])));
      ly.push_back(std::log(freq[g]));
    }
  const double threshold = -(1.0 + delta / 2.0) + 0.3;
  rep.params["slope_threshold"] = threshold;
  const bool trailing_zero = freq.back() == 0.0;
  if (lx.size() < 3) {
    rep.verdict = trailing_zero && !lx.empty() ? Verdict::pass : Verdict::inconclusive;
    rep.note = "fewer than three grid points with positive frequency";
    return rep;
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / k;
    my += ly[i] / k;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  rep.params["fitted_slope"] = slope;
  rep.verdict = slope <= threshold ? Verdict::pass : Verdict::fail;
  return rep;
}

/// Moment report as a condition report: pass iff the estimates are trend-bounded.
inline ConditionReport h3_report(const MomentReport& m) {
  ConditionReport rep;
  rep.id = "H3";
  rep.params = {{"delta", m.delta}, {"median", m.median}, {"max", m.max_estimate}};
  for (std::size_t g = 0; g < m.grid.size(); ++g)
    rep.diagnostics.push_back({"E rho^{2+delta}", static_cast<double>(m.grid[g]), m.estimates[g], 2.0 * m.median});
  rep.verdict = m.trend_bounded ? Verdict::pass : Verdict::fail;
  return rep;
}

}  // namespace lilmc
