#pragma once

// Seeded end-to-end pipeline: certify -> stationary law -> corrector ->
// variance -> martingale decomposition -> paths -> audits, plus replay and
// assembly of partial artifacts.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lilmc/audit.hpp"
#include "lilmc/config.hpp"
#include "lilmc/contraction.hpp"
#include "lilmc/corrector.hpp"
#include "lilmc/json_io.hpp"
#include "lilmc/martingale.hpp"
#include "lilmc/stationary.hpp"
#include "lilmc/strassen.hpp"
#include "lilmc/variance.hpp"

namespace lilmc {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kReportFormat = "lilmc-report";

inline std::uint64_t hash_doubles(std::span<const double> xs) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double x : xs) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &x, sizeof x);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  unsigned threads = 1;
  std::optional<ContractionCertificate> certificate;
  double sigma2 = 0.0;
  std::vector<VarianceEstimate> variance;
  std::vector<ConditionReport> conditions;
  std::optional<StrassenReport> strassen;
  std::optional<LilRatioSeries> lil;
  std::optional<VarianceCurve> curve;
  std::string error;
  int exit_code = 0;
  /// Full JSON document; "results" holds every numeric field.
  Json json;
};

inline int exit_code_for(const std::vector<ConditionReport>& conditions) {
  bool inconclusive = false;
  for (const auto& c : conditions) {
    if (c.verdict == Verdict::fail) return 2;
    if (c.verdict == Verdict::inconclusive) inconclusive = true;
  }
  return inconclusive ? 3 : 0;
}

namespace detail {

inline std::vector<std::pair<double, double>> certify_pairs(const TransitionKernel& kernel) {
  const StateSpace& s = kernel.space();
  if (s.is_finite()) return all_state_pairs(s.size());
  if (s.kind() == SpaceKind::interval) return {{s.lo(), s.hi()}};
  return {{s.reference() - 1.0, s.reference() + 1.0}};
}

inline ConditionReport band_report(const std::string& id, double value, double lo, double hi) {
  ConditionReport r;
  r.id = id;
  r.params = {{"lo", lo}, {"hi", hi}};
  r.diagnostics.push_back({"running_max", 0.0, value, hi});
  // A statistical band miss is evidence, not a refutation of an a.s. limit.
  r.verdict = value >= lo && value <= hi ? Verdict::pass : Verdict::inconclusive;
  return r;
}

inline ConditionReport strassen_condition(const StrassenReport& s) {
  ConditionReport r;
  r.id = "Strassen";
  const auto& last = s.last();
  r.diagnostics.push_back({"max_endpoint", static_cast<double>(last.n), last.max_endpoint, s.targets.endpoint});
  r.diagnostics.push_back({"max_integral", static_cast<double>(last.n), last.max_integral, s.targets.integral});
  r.diagnostics.push_back({"max_sup", static_cast<double>(last.n), last.max_supremum, s.targets.supremum});
  r.diagnostics.push_back({"window_min_dist", static_cast<double>(last.n), last.window_min_dist,
                           s.targets.dist_threshold});
  const bool ok = s.endpoint_in_band() && s.integral_in_band() && s.dist_ok();
  r.verdict = ok ? Verdict::pass : Verdict::inconclusive;
  return r;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

}  // namespace detail

struct PreparedModel {
  TransitionKernel kernel;
  InitialDistribution initial;
  CertificationOutcome outcome;
  ContractionCertificate cert;
  Observable psi;
  StationaryMeasure mu;
  std::optional<Corrector> chi;
};

/// Kernel, certificate (NoGapCertified unless overridden), centered
/// observable, stationary law and corrector. Summaries go into `results`.
inline PreparedModel prepare_model(const ExperimentConfig& config, unsigned threads, Json& results) {
  const std::uint64_t seed = config.seed;
  TransitionKernel kernel = build_kernel(config.kernel, config.delta);
  InitialDistribution initial = build_initial(config.initial);
  initial.validate_for(kernel.space());
  const Observable raw = build_observable(config.observable, kernel.space());
  results["kernel"] = {{"description", kernel.describe()}, {"hash", hex64(kernel.hash())}};

  CertifyOptions copt;
  copt.replicas = config.certify_replicas;
  copt.seed = seed;
  copt.threads = threads;
  copt.gap_tolerance = config.gap_tolerance;
  CertificationOutcome outcome =
      certify_contraction(kernel, detail::certify_pairs(kernel), config.certify_horizons, copt);
  results["contraction"] = to_json(outcome);
  ContractionCertificate cert;
  if (outcome.certified()) {
    cert = *outcome.certificate;
  } else if (config.override_gap) {
    cert.gamma = std::clamp(outcome.fitted_gamma, copt.gamma_floor, 0.999);
    cert.c = std::max(outcome.fitted_c, 1.0);
    const N0Result n0 = compute_n0(cert.c, cert.gamma);
    cert.n0 = n0.n0;
    cert.gamma0 = n0.gamma0;
    cert.provenance = outcome.provenance;
    results["contraction"]["override"] = to_json(cert);
  } else {
    outcome.require();
  }

  std::optional<Corrector> chi;
  Observable psi = raw;
  StationaryMeasure mu;
  if (kernel.is_finite()) {
    mu = stationary_finite(kernel);
    const double mean = mu.weights.dot(raw.values(kernel.space().size()));
    if (config.observable.center) psi = raw.centered(mean);
    results["stationary"] = {{"provenance", "exact"},
                             {"weights", std::vector<double>(mu.weights.data(), mu.weights.data() + mu.weights.size())},
                             {"psi_mean", num(mean)}};
    chi = corrector_finite(kernel.as_finite(), psi, mu, cert);
    results["corrector"] = {{"form", "table"},
                            {"convention", to_string(chi->convention())},
                            {"h", std::vector<double>(chi->h_table().data(), chi->h_table().data() + chi->h_table().size())},
                            {"oscillation", num(chi->oscillation(kernel.space()))},
                            {"lipschitz_bound", num(chi->lipschitz_bound())}};
  } else {
    const double m = affine_stationary_mean(kernel);
    if (raw.kind() != ObservableKind::affine) throw DomainError("continuous-state pipelines need an affine observable");
    const double mean = raw.raw(m);
    if (config.observable.center) psi = raw.centered(mean);
    results["stationary"] = {{"provenance", "exact-mean"}, {"mean", num(m)}, {"psi_mean", num(mean)}};
    chi = corrector_affine(kernel, psi, cert);
    results["corrector"] = {{"form", "affine"},
                            {"convention", to_string(chi->convention())},
                            {"h_slope", num(chi->h_slope())},
                            {"h_intercept", num(chi->h_intercept())},
                            {"oscillation", num(chi->oscillation(kernel.space()))},
                            {"lipschitz_bound", num(chi->lipschitz_bound())}};
  }
  results["observable"] = {{"description", psi.describe()}, {"offset", num(psi.offset())}};
  return {std::move(kernel), std::move(initial), std::move(outcome), cert, std::move(psi), std::move(mu), std::move(chi)};
}

struct RunOptions {
  /// Overrides config.threads when set.
  std::optional<unsigned> threads;
  /// Overrides config.seed when set.
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Runs the whole pipeline. NoGapCertified (without override) and
/// DegenerateVariance end the run with exit code 2 and an "error" field;
/// other errors propagate.
inline ExperimentReport run_experiment(ExperimentConfig config, const RunOptions& opt = {}) {
  if (opt.seed) config.seed = *opt.seed;
  if (opt.out_dir) config.out_dir = *opt.out_dir;
  config.validate();
  ExperimentReport rep;
  rep.config = config;
  rep.config_hash = config_hash(config);
  rep.threads = opt.threads ? *opt.threads : (config.threads ? config.threads : default_threads());
  const unsigned threads = std::max(1u, rep.threads);
  const std::uint64_t seed = config.seed;

  Json results;
  results["seed"] = seed;
  Json conditions = Json::array();
  try {
    const PreparedModel pm = prepare_model(config, threads, results);
    const TransitionKernel& kernel = pm.kernel;
    const InitialDistribution& initial = pm.initial;
    const ContractionCertificate& cert = pm.cert;
    const Observable& psi = pm.psi;
    const StationaryMeasure& mu = pm.mu;
    const std::optional<Corrector>& chi = pm.chi;
    rep.certificate = cert;

    // Asymptotic variance by independent routes.
    if (kernel.is_finite()) {
      rep.variance.push_back(sigma2_corrector(kernel.as_finite(), *chi, mu));
      rep.variance.push_back(sigma2_green_kubo(kernel.as_finite(), psi, mu, cert, kernel.space()));
    } else {
      rep.variance.push_back(sigma2_affine(kernel, psi));
    }
    rep.sigma2 = rep.variance.front().sigma2;
    rep.variance.front().require_nondegenerate();
    McVarianceOptions mopt;
    mopt.samples = config.variance_samples;
    mopt.seed = seed;
    mopt.threads = threads;
    mopt.burn_in = 200;
    rep.variance.push_back(sigma2_corrector_mc(kernel, *chi, mu, mopt));
    if (!kernel.is_finite()) {
      GreenKuboMcOptions gopt;
      gopt.samples = config.variance_samples;
      gopt.seed = seed;
      gopt.tol = config.gk_tol;
      rep.variance.push_back(sigma2_green_kubo_mc(kernel, psi, cert, gopt));
    }
    Json var = Json::array();
    for (const auto& v : rep.variance) var.push_back(to_json(v));
    results["variance"] = var;
    results["sigma2"] = num(rep.sigma2);
    const double sigma = std::sqrt(rep.sigma2);

    // One long trajectory: (e3), SLLN, LIL ratio and Strassen functionals.
    const MartingaleSeries ms = simulate_martingale(kernel, initial, *chi, config.n_max, seed, 0);
    results["martingale"] = {{"n", ms.length()},
                             {"z_hash", hex64(hash_doubles(ms.Z))},
                             {"w_hash", hex64(hash_doubles(ms.W))},
                             {"s_hash", hex64(hash_doubles(ms.S))},
                             {"final_S", num(ms.S.back())},
                             {"final_W", num(ms.W.back())}};
    if (config.enabled("e3")) rep.conditions.push_back(check_e3(ms.Z, rep.sigma2, cert.n0, config.e3_tol, config.e3_sub_tol));
    if (config.enabled("slln")) rep.conditions.push_back(check_slln(ms.W, sigma));
    if (config.enabled("lil")) {
      rep.lil = lil_ratio_series(ms.W, sigma, config.lil_n_min, config.n_max);
      results["lil"] = to_json(*rep.lil);
      rep.conditions.push_back(
          detail::band_report("LIL", rep.lil->running_max, config.lil_band_lo, config.lil_band_hi));
    }
    if (config.enabled("strassen")) {
      StrassenTargets targets;
      targets.tol = config.dist_tol;
      const auto ns = geometric_subsequence(config.n_max, config.subsequence_ratio);
      rep.strassen = strassen_theta(ms.W, sigma, ns, targets, threads);
      results["strassen"] = to_json(*rep.strassen);
      rep.conditions.push_back(detail::strassen_condition(*rep.strassen));
    }

    // Ensemble checks.
    if (config.enabled("e1") || config.enabled("e2")) {
      const ZEnsemble ens = martingale_ensemble(kernel, initial, *chi, config.ensemble_horizon,
                                                config.ensemble_replicas, seed, threads);
      const VarianceCurve curve = variance_curve(ens);
      results["variance_curve"] = {{"replicas", curve.replicas},
                                   {"final_s2", num(curve.s2.back())},
                                   {"final_s2_over_n", num(curve.ratio(ens.n))},
                                   {"final_s2_direct", num(curve.s2_direct.back())}};
      const E12Reports e12 = check_e1_e2(ens, curve.s2, rep.sigma2, config.delta, 1.0, config.eps_grid);
      if (config.enabled("e1")) rep.conditions.push_back(e12.e1);
      if (config.enabled("e2")) rep.conditions.push_back(e12.e2);
      rep.curve = curve;
    }
    if (config.enabled("H3")) {
      const MomentReport m = moment_check_h3(kernel, initial, config.delta, config.moment_grid,
                                             config.moment_replicas, seed, threads);
      rep.conditions.push_back(h3_report(m));
    }
    if (config.enabled("bc")) {
      rep.conditions.push_back(check_borel_cantelli(kernel, initial, *chi, config.bc_eps, config.bc_grid,
                                                    config.bc_replicas, seed, config.delta, threads));
    }
    if (config.enabled("lemma1") && kernel.is_finite() && kernel.space().size() <= 8) {
      const LipschitzAudit a = audit_h_lipschitz(kernel, *chi, rep.sigma2, config.lemma_n, config.lemma_k, cert);
      results["lemma1"] = to_json(a);
      ConditionReport r;
      r.id = "lemma1";
      r.params = {{"n", static_cast<double>(a.n)}, {"k", static_cast<double>(a.k)}};
      r.diagnostics.push_back({"measured_lipschitz_H", 0.0, a.measured_h, a.bound});
      r.diagnostics.push_back({"measured_lipschitz_g", 0.0, a.measured_g});
      r.verdict = a.passed() ? Verdict::pass : Verdict::fail;
      rep.conditions.push_back(r);
    }
    if (config.enabled("control")) {
      const MartingaleSeries g = gaussian_control_series(config.n_max, seed);
      ConditionReport e3 = check_e3(g.Z, 1.0, 1, config.e3_tol, config.e3_sub_tol);
      e3.id = "control:e3";
      ConditionReport sl = check_slln(g.W, 1.0);
      sl.id = "control:SLLN";
      const LilRatioSeries lil = lil_ratio_series(g.W, 1.0, config.lil_n_min, config.n_max);
      results["control_lil"] = to_json(lil);
      rep.conditions.push_back(e3);
      rep.conditions.push_back(sl);
      rep.conditions.push_back(detail::band_report("control:LIL", lil.running_max, config.lil_band_lo,
                                                   config.lil_band_hi));
    }
    rep.exit_code = exit_code_for(rep.conditions);
  } catch (const NoGapCertified& e) {
    rep.error = std::string("NoGapCertified: ") + e.what();
    rep.exit_code = 2;
  } catch (const DegenerateVariance& e) {
    rep.error = std::string("DegenerateVariance: ") + e.what();
    rep.exit_code = 2;
  }
  for (const auto& c : rep.conditions) conditions.push_back(to_json(c));
  results["conditions"] = conditions;
  if (!rep.error.empty()) results["error"] = rep.error;
  results["exit_code"] = rep.exit_code;

  rep.json = {{"format", kReportFormat},
              {"version", kVersion},
              {"config_hash", hex64(rep.config_hash)},
              {"config", serialize_config(config)},
              {"environment", {{"threads", rep.threads}}},
              {"results", results}};
  return rep;
}

/// Writes report.json and CSV series into config.out_dir. Every file carries
/// the config hash.
inline void write_report_files(const ExperimentReport& rep) {
  namespace fs = std::filesystem;
  const fs::path dir(rep.config.out_dir);
  fs::create_directories(dir);
  const std::string tag = "# config_hash=" + hex64(rep.config_hash) + "\n";
  detail::write_text(dir / "report.json", rep.json.dump(2) + "\n");
  if (rep.lil) {
    std::ostringstream o;
    o.precision(17);
    o << tag << "n,ratio,running_max\n";
    for (std::size_t i = 0; i < rep.lil->checkpoints.size(); ++i)
      o << rep.lil->checkpoints[i] << ',' << rep.lil->ratio_at[i] << ',' << rep.lil->running_max_at[i] << '\n';
    detail::write_text(dir / "lil.csv", o.str());
  }
  if (rep.strassen) {
    std::ostringstream o;
    o.precision(17);
    o << tag << "n,endpoint,sup,integral,energy,dist_to_K,max_endpoint,max_sup,max_integral,window_min_dist\n";
    for (const auto& r : rep.strassen->records)
      o << r.n << ',' << r.endpoint << ',' << r.supremum << ',' << r.integral << ',' << r.energy << ',' << r.dist
        << ',' << r.max_endpoint << ',' << r.max_supremum << ',' << r.max_integral << ',' << r.window_min_dist
        << '\n';
    detail::write_text(dir / "strassen.csv", o.str());
  }
  if (rep.curve) {
    std::ostringstream o;
    o.precision(17);
    o << tag << "n,s2,s2_direct,s2_over_n\n";
    for (std::size_t n = 1; n < rep.curve->s2.size(); ++n)
      o << n << ',' << rep.curve->s2[n] << ',' << rep.curve->s2_direct[n] << ',' << rep.curve->ratio(n) << '\n';
    detail::write_text(dir / "variance_curve.csv", o.str());
  }
  {
    std::ostringstream o;
    o << tag << "id,verdict\n";
    for (const auto& c : rep.conditions) o << c.id << ',' << to_string(c.verdict) << '\n';
    detail::write_text(dir / "verdicts.csv", o.str());
  }
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

struct ReplayResult {
  bool identical = false;
  std::vector<std::string> mismatches;
  ExperimentReport regenerated;
};

/// Re-runs the embedded config and compares every field under "results".
/// Refuses reports from another version or whose embedded config does not
/// hash to the recorded value.
inline ReplayResult replay(const Json& report, std::optional<unsigned> threads = std::nullopt) {
  if (report.value("format", "") != kReportFormat) throw ValidationError("not a report document");
  const std::string version = report.value("version", "");
  if (version != kVersion)
    throw ValidationError("version mismatch: report was produced by " + version + ", this build is " + kVersion);
  const ExperimentConfig config = parse_config(report.at("config").get<std::string>());
  ReplayResult out;
  const std::string recorded_hash = report.value("config_hash", "");
  if (hex64(config_hash(config)) != recorded_hash)
    out.mismatches.push_back("config_hash: embedded config hashes to " + hex64(config_hash(config)) +
                             ", report records " + recorded_hash);
  RunOptions opt;
  opt.threads = threads;
  out.regenerated = run_experiment(config, opt);
  const Json& a = report.at("results");
  const Json& b = out.regenerated.json.at("results");
  const Json diff = Json::diff(a, b);
  for (const auto& d : diff) out.mismatches.push_back("results" + d.at("path").get<std::string>());
  out.identical = out.mismatches.empty();
  return out;
}

/// Merges artifacts produced by separate subcommands into one document.
/// All inputs must carry the same config hash.
inline Json assemble_reports(const std::vector<Json>& parts) {
  if (parts.empty()) throw ValidationError("nothing to assemble");
  const std::string hash = parts.front().value("config_hash", "");
  if (hash.empty()) throw ValidationError("artifact without a config hash");
  Json out = {{"format", kReportFormat}, {"version", kVersion}, {"config_hash", hash}};
  Json results = Json::object();
  for (const auto& p : parts) {
    if (p.value("config_hash", "") != hash)
      throw ValidationError("mixed configurations: " + hash + " vs " + p.value("config_hash", "<none>"));
    if (p.contains("config")) out["config"] = p["config"];
    if (p.contains("results"))
      for (const auto& [k, v] : p["results"].items()) results[k] = v;
  }
  out["results"] = results;
  return out;
}

}  // namespace lilmc
