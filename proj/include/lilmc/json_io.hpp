#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "lilmc/audit.hpp"
#include "lilmc/contraction.hpp"
#include "lilmc/corrector.hpp"
#include "lilmc/strassen.hpp"
#include "lilmc/variance.hpp"

namespace lilmc {

using Json = nlohmann::ordered_json;

/// NaN and infinities become null.
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const RatioRow& r) {
  return {{"n", r.n}, {"x", num(r.x)}, {"y", num(r.y)}, {"initial", num(r.initial)},
          {"lhs", num(r.lhs)}, {"bound", num(r.bound)}};
}

inline Json to_json(const ContractionCertificate& c) {
  Json rows = Json::array();
  for (const auto& r : c.ratios) rows.push_back(to_json(r));
  return {{"c", num(c.c)},         {"gamma", num(c.gamma)},
          {"n0", c.n0},            {"gamma0", num(c.gamma0)},
          {"provenance", to_string(c.provenance)}, {"ratios", rows}};
}

inline Json to_json(const CertificationOutcome& o) {
  Json j;
  j["certified"] = o.certified();
  j["provenance"] = to_string(o.provenance);
  j["fitted_gamma"] = num(o.fitted_gamma);
  j["fitted_c"] = num(o.fitted_c);
  if (o.certified()) {
    j["certificate"] = to_json(*o.certificate);
  } else {
    Json rows = Json::array();
    for (const auto& r : o.ratios) rows.push_back(to_json(r));
    j["ratios"] = rows;
    j["reason"] = o.reason;
  }
  return j;
}

inline ContractionCertificate certificate_from_json(const Json& j) {
  ContractionCertificate c;
  c.c = j.at("c").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.n0 = j.at("n0").get<int>();
  c.gamma0 = j.at("gamma0").get<double>();
  c.provenance = j.at("provenance").get<std::string>() == "exact" ? Provenance::exact : Provenance::empirical;
  c.validate();
  return c;
}

inline Json to_json(const VarianceEstimate& v) {
  return {{"method", to_string(v.method)},
          {"sigma2", num(v.sigma2)},
          {"standard_error", num(v.standard_error)},
          {"sample_size", v.sample_size},
          {"lag_cutoff", v.lag_cutoff}};
}

inline Json to_json(const ConditionReport& r) {
  Json params = Json::object();
  for (const auto& [k, v] : r.params) params[k] = num(v);
  Json diags = Json::array();
  for (const auto& d : r.diagnostics)
    diags.push_back({{"label", d.label}, {"n", num(d.n)}, {"value", num(d.value)}, {"bound", num(d.bound)}});
  Json j = {{"id", r.id}, {"params", params}, {"diagnostics", diags}, {"verdict", to_string(r.verdict)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json to_json(const LipschitzAudit& a) {
  return {{"n", a.n},
          {"k", a.k},
          {"states", a.states},
          {"step_exponents", a.step_exponents},
          {"lip_chi", num(a.lip_chi)},
          {"lip_psi", num(a.lip_psi)},
          {"sigma2", num(a.sigma2)},
          {"L", num(a.L)},
          {"measured_h", num(a.measured_h)},
          {"measured_g", num(a.measured_g)},
          {"bound", num(a.bound)},
          {"l_tilde", num(a.l_tilde)},
          {"passed", a.passed()}};
}

inline Json to_json(const StrassenReport& s) {
  Json n_list = Json::array(), endpoint = Json::array(), sup = Json::array(), integral = Json::array();
  Json max_e = Json::array(), max_s = Json::array(), max_i = Json::array(), dist = Json::array(),
       window = Json::array(), energy = Json::array();
  for (const auto& r : s.records) {
    n_list.push_back(r.n);
    endpoint.push_back(num(r.endpoint));
    sup.push_back(num(r.supremum));
    integral.push_back(num(r.integral));
    energy.push_back(num(r.energy));
    max_e.push_back(num(r.max_endpoint));
    max_s.push_back(num(r.max_supremum));
    max_i.push_back(num(r.max_integral));
    dist.push_back(num(r.dist));
    window.push_back(num(r.window_min_dist));
  }
  return {{"n_list", n_list},
          {"functionals", {{"endpoint", endpoint}, {"sup", sup}, {"integral", integral}}},
          {"energy", energy},
          {"running_max", {{"endpoint", max_e}, {"sup", max_s}, {"integral", max_i}}},
          {"dist_to_K_series", dist},
          {"window_min_dist", window},
          {"targets",
           {{"endpoint", num(s.targets.endpoint)},
            {"sup", num(s.targets.supremum)},
            {"integral", num(s.targets.integral)},
            {"band", {num(s.targets.band_lo), num(s.targets.band_hi)}},
            {"dist_threshold", num(s.targets.dist_threshold)},
            {"dist_window", s.targets.dist_window},
            {"tol", num(s.targets.tol)}}}};
}

inline Json to_json(const LilRatioSeries& s) {
  Json ratio = Json::array(), running = Json::array();
  for (double v : s.ratio_at) ratio.push_back(num(v));
  for (double v : s.running_max_at) running.push_back(num(v));
  return {{"n_min", s.n_min},           {"n_max", s.n_max},   {"sigma", num(s.sigma)},
          {"running_max", num(s.running_max)}, {"argmax", s.argmax}, {"checkpoints", s.checkpoints},
          {"ratio", ratio},             {"running_max_at", running}};
}

}  // namespace lilmc
