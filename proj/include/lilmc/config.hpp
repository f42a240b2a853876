#pragma once

// Experiment configuration: sectioned key = value text (INI grammar).
//
//   [experiment]  name, seed, threads, out_dir, delta, override_gap, checks
//   [kernel]      type = finite | ifs | ar, reference,
//                 finite: matrix = "0.9 0.1; 0.2 0.8", optional metric (same shape)
//                 ifs:    maps = "slope intercept; ...", probabilities, interval = "lo hi"
//                 ar:     coefficient, noise = gaussian | uniform | laplace | student_t,
//                         noise_location, noise_scale, noise_dof
//   [observable]  type = table | affine | zero, values, slope, intercept, center
//   [initial]     type = dirac | uniform | gaussian | discrete, a, b, weights
//   [horizons]    n_max, lil_n_min, subsequence_ratio, certify, ensemble, bc_grid, moment_grid
//   [replicas]    certify, ensemble, variance, bc, moments
//   [tolerances]  gap, dist, e3, e3_sub, lil_band_lo, lil_band_hi, gk
//   [audit]       eps, bc_eps, lemma_n, lemma_k
//
// Lists are whitespace separated; matrix rows are separated by ';'.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lilmc/error.hpp"
#include "lilmc/kernel.hpp"
#include "lilmc/observable.hpp"
#include "lilmc/trajectory.hpp"

namespace lilmc {

struct KernelSpec {
  std::string type = "finite";
  double reference = 0.0;
  std::vector<std::vector<double>> matrix;
  std::vector<std::vector<double>> metric;
  std::vector<std::vector<double>> maps;
  std::vector<double> probabilities;
  std::vector<double> interval{0.0, 1.0};
  double coefficient = 0.0;
  std::string noise = "gaussian";
  double noise_location = 0.0;
  double noise_scale = 1.0;
  int noise_dof = 0;

  bool operator==(const KernelSpec&) const = default;
};

struct ObservableSpec {
  std::string type = "table";
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  bool center = false;

  bool operator==(const ObservableSpec&) const = default;
};

struct InitialSpec {
  std::string type = "dirac";
  double a = 0.0;
  double b = 0.0;
  std::vector<double> weights;

  bool operator==(const InitialSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_dir = "out";
  double delta = 1.0;
  bool override_gap = false;
  std::vector<std::string> checks{"e1", "e2", "e3", "H3", "slln", "bc", "lemma1", "lil", "strassen"};

  KernelSpec kernel;
  ObservableSpec observable;
  InitialSpec initial;

  std::size_t n_max = 1000000;
  std::size_t lil_n_min = 10000;
  double subsequence_ratio = 1.5;
  std::vector<std::size_t> certify_horizons{1, 2, 4, 8, 16};
  std::size_t ensemble_horizon = 10000;
  std::vector<std::size_t> bc_grid{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::vector<std::size_t> moment_grid{1, 10, 100, 1000};

  std::size_t certify_replicas = 100000;
  std::size_t ensemble_replicas = 1000;
  std::size_t variance_samples = 1000000;
  std::size_t bc_replicas = 10000;
  std::size_t moment_replicas = 10000;

  double gap_tolerance = 1e-6;
  double dist_tol = 1e-5;
  double e3_tol = 0.02;
  double e3_sub_tol = 0.03;
  double lil_band_lo = 0.6;
  double lil_band_hi = 1.4;
  double gk_tol = 1e-4;

  std::vector<double> eps_grid{0.5, 1.0, 2.0};
  double bc_eps = 1.0;
  std::size_t lemma_n = 1;
  std::size_t lemma_k = 1;

  bool operator==(const ExperimentConfig&) const = default;

  bool enabled(const std::string& check) const {
    return std::find(checks.begin(), checks.end(), check) != checks.end();
  }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0)) throw ValidationError(std::string(what) + " must be positive");
    };
    positive(delta, "delta");
    positive(static_cast<double>(n_max), "n_max");
    positive(static_cast<double>(lil_n_min), "lil_n_min");
    positive(static_cast<double>(ensemble_horizon), "ensemble horizon");
    positive(static_cast<double>(certify_replicas), "certify replicas");
    positive(static_cast<double>(ensemble_replicas), "ensemble replicas");
    positive(static_cast<double>(variance_samples), "variance samples");
    positive(static_cast<double>(bc_replicas), "bc replicas");
    positive(static_cast<double>(moment_replicas), "moment replicas");
    positive(gap_tolerance, "gap tolerance");
    positive(dist_tol, "dist tolerance");
    positive(e3_tol, "e3 tolerance");
    positive(e3_sub_tol, "e3 sub tolerance");
    positive(gk_tol, "Green-Kubo tolerance");
    positive(bc_eps, "bc eps");
    if (!(subsequence_ratio > 1.0)) throw ValidationError("subsequence ratio must exceed 1");
    if (!(lil_band_lo < lil_band_hi)) throw ValidationError("LIL band is empty");
    if (lil_n_min < 3 || lil_n_min > n_max) throw ValidationError("lil_n_min must lie in [3, n_max]");
    for (double e : eps_grid) positive(e, "eps grid entry");
    for (auto h : certify_horizons) positive(static_cast<double>(h), "certify horizon");
    for (auto h : bc_grid) positive(static_cast<double>(h), "bc grid entry");
    if (certify_horizons.empty() || bc_grid.empty() || moment_grid.empty() || eps_grid.empty())
      throw ValidationError("grids must be nonempty");
    if (kernel.type != "finite" && kernel.type != "ifs" && kernel.type != "ar")
      throw ValidationError("unknown kernel type '" + kernel.type + "'");
    if (observable.type != "table" && observable.type != "affine" && observable.type != "zero")
      throw ValidationError("unknown observable type '" + observable.type + "'");
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(xs[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      out += xs[i];
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

inline std::string join_rows(const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += "; ";
    out += join(rows[i]);
  }
  return out;
}

inline std::vector<double> parse_doubles(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ValidationError("not a number: '" + tok + "'");
    }
    if (used != tok.size()) throw ValidationError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_doubles(text)) {
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ValidationError("expected a nonnegative integer, got " + fmt(v));
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline std::vector<std::vector<double>> parse_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string row;
  while (std::getline(in, row, ';')) {
    auto r = parse_doubles(row);
    if (!r.empty()) rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<std::string> parse_words(const std::string& text) {
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), ',', ' ');
  std::istringstream in(norm);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("not a boolean: '" + text + "'");
}

}  // namespace detail

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c) {
  using detail::fmt;
  using detail::join;
  std::ostringstream o;
  o << "[experiment]\n"
    << "name = " << c.name << '\n'
    << "seed = " << c.seed << '\n'
    << "threads = " << c.threads << '\n'
    << "out_dir = " << c.out_dir << '\n'
    << "delta = " << fmt(c.delta) << '\n'
    << "override_gap = " << (c.override_gap ? "true" : "false") << '\n'
    << "checks = " << join(c.checks) << "\n\n";
  o << "[kernel]\n"
    << "type = " << c.kernel.type << '\n'
    << "reference = " << fmt(c.kernel.reference) << '\n';
  if (!c.kernel.matrix.empty()) o << "matrix = " << detail::join_rows(c.kernel.matrix) << '\n';
  if (!c.kernel.metric.empty()) o << "metric = " << detail::join_rows(c.kernel.metric) << '\n';
  if (!c.kernel.maps.empty()) o << "maps = " << detail::join_rows(c.kernel.maps) << '\n';
  if (!c.kernel.probabilities.empty()) o << "probabilities = " << join(c.kernel.probabilities) << '\n';
  o << "interval = " << join(c.kernel.interval) << '\n'
    << "coefficient = " << fmt(c.kernel.coefficient) << '\n'
    << "noise = " << c.kernel.noise << '\n'
    << "noise_location = " << fmt(c.kernel.noise_location) << '\n'
    << "noise_scale = " << fmt(c.kernel.noise_scale) << '\n'
    << "noise_dof = " << c.kernel.noise_dof << "\n\n";
  o << "[observable]\n"
    << "type = " << c.observable.type << '\n';
  if (!c.observable.values.empty()) o << "values = " << join(c.observable.values) << '\n';
  o << "slope = " << fmt(c.observable.slope) << '\n'
    << "intercept = " << fmt(c.observable.intercept) << '\n'
    << "center = " << (c.observable.center ? "true" : "false") << "\n\n";
  o << "[initial]\n"
    << "type = " << c.initial.type << '\n'
    << "a = " << fmt(c.initial.a) << '\n'
    << "b = " << fmt(c.initial.b) << '\n';
  if (!c.initial.weights.empty()) o << "weights = " << join(c.initial.weights) << '\n';
  o << '\n';
  o << "[horizons]\n"
    << "n_max = " << c.n_max << '\n'
    << "lil_n_min = " << c.lil_n_min << '\n'
    << "subsequence_ratio = " << fmt(c.subsequence_ratio) << '\n'
    << "certify = " << join(c.certify_horizons) << '\n'
    << "ensemble = " << c.ensemble_horizon << '\n'
    << "bc_grid = " << join(c.bc_grid) << '\n'
    << "moment_grid = " << join(c.moment_grid) << "\n\n";
  o << "[replicas]\n"
    << "certify = " << c.certify_replicas << '\n'
    << "ensemble = " << c.ensemble_replicas << '\n'
    << "variance = " << c.variance_samples << '\n'
    << "bc = " << c.bc_replicas << '\n'
    << "moments = " << c.moment_replicas << "\n\n";
  o << "[tolerances]\n"
    << "gap = " << fmt(c.gap_tolerance) << '\n'
    << "dist = " << fmt(c.dist_tol) << '\n'
    << "e3 = " << fmt(c.e3_tol) << '\n'
    << "e3_sub = " << fmt(c.e3_sub_tol) << '\n'
    << "lil_band_lo = " << fmt(c.lil_band_lo) << '\n'
    << "lil_band_hi = " << fmt(c.lil_band_hi) << '\n'
    << "gk = " << fmt(c.gk_tol) << "\n\n";
  o << "[audit]\n"
    << "eps = " << join(c.eps_grid) << '\n'
    << "bc_eps = " << fmt(c.bc_eps) << '\n'
    << "lemma_n = " << c.lemma_n << '\n'
    << "lemma_k = " << c.lemma_k << '\n';
  return o.str();
}

inline ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig c;
  auto str = [&](const char* key, std::string& dst) {
    if (auto v = pt.get_optional<std::string>(key)) dst = *v;
  };
  auto num = [&](const char* key, double& dst) {
    if (auto v = pt.get_optional<std::string>(key)) {
      const auto xs = detail::parse_doubles(*v);
      if (xs.size() != 1) throw ValidationError(std::string(key) + " expects one number");
      dst = xs[0];
    }
  };
  auto count = [&](const char* key, auto& dst) {
    if (auto v = pt.get_optional<std::string>(key)) {
      const auto xs = detail::parse_counts(*v);
      if (xs.size() != 1) throw ValidationError(std::string(key) + " expects one integer");
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(xs[0]);
    }
  };
  auto flag = [&](const char* key, bool& dst) {
    if (auto v = pt.get_optional<std::string>(key)) dst = detail::parse_bool(*v);
  };
  auto list = [&](const char* key, std::vector<double>& dst) {
    if (auto v = pt.get_optional<std::string>(key)) dst = detail::parse_doubles(*v);
  };
  auto counts = [&](const char* key, std::vector<std::size_t>& dst) {
    if (auto v = pt.get_optional<std::string>(key)) dst = detail::parse_counts(*v);
  };
  auto rows = [&](const char* key, std::vector<std::vector<double>>& dst) {
    if (auto v = pt.get_optional<std::string>(key)) dst = detail::parse_rows(*v);
  };

  str("experiment.name", c.name);
  if (auto v = pt.get_optional<std::string>("experiment.seed")) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(*v, &used);
      if (used != v->size()) throw ValidationError("");
    } catch (const std::exception&) {
      throw ValidationError("seed must be an unsigned 64-bit integer");
    }
  }
  count("experiment.threads", c.threads);
  str("experiment.out_dir", c.out_dir);
  num("experiment.delta", c.delta);
  flag("experiment.override_gap", c.override_gap);
  if (auto v = pt.get_optional<std::string>("experiment.checks")) c.checks = detail::parse_words(*v);

  str("kernel.type", c.kernel.type);
  num("kernel.reference", c.kernel.reference);
  rows("kernel.matrix", c.kernel.matrix);
  rows("kernel.metric", c.kernel.metric);
  rows("kernel.maps", c.kernel.maps);
  list("kernel.probabilities", c.kernel.probabilities);
  list("kernel.interval", c.kernel.interval);
  num("kernel.coefficient", c.kernel.coefficient);
  str("kernel.noise", c.kernel.noise);
  num("kernel.noise_location", c.kernel.noise_location);
  num("kernel.noise_scale", c.kernel.noise_scale);
  count("kernel.noise_dof", c.kernel.noise_dof);

  str("observable.type", c.observable.type);
  list("observable.values", c.observable.values);
  num("observable.slope", c.observable.slope);
  num("observable.intercept", c.observable.intercept);
  flag("observable.center", c.observable.center);

  str("initial.type", c.initial.type);
  num("initial.a", c.initial.a);
  num("initial.b", c.initial.b);
  list("initial.weights", c.initial.weights);

  count("horizons.n_max", c.n_max);
  count("horizons.lil_n_min", c.lil_n_min);
  num("horizons.subsequence_ratio", c.subsequence_ratio);
  counts("horizons.certify", c.certify_horizons);
  count("horizons.ensemble", c.ensemble_horizon);
  counts("horizons.bc_grid", c.bc_grid);
  counts("horizons.moment_grid", c.moment_grid);

  count("replicas.certify", c.certify_replicas);
  count("replicas.ensemble", c.ensemble_replicas);
  count("replicas.variance", c.variance_samples);
  count("replicas.bc", c.bc_replicas);
  count("replicas.moments", c.moment_replicas);

  num("tolerances.gap", c.gap_tolerance);
  num("tolerances.dist", c.dist_tol);
  num("tolerances.e3", c.e3_tol);
  num("tolerances.e3_sub", c.e3_sub_tol);
  num("tolerances.lil_band_lo", c.lil_band_lo);
  num("tolerances.lil_band_hi", c.lil_band_hi);
  num("tolerances.gk", c.gk_tol);

  list("audit.eps", c.eps_grid);
  num("audit.bc_eps", c.bc_eps);
  count("audit.lemma_n", c.lemma_n);
  count("audit.lemma_k", c.lemma_k);

  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

/// Hash of the canonical text with the execution-only fields (threads,
/// out_dir) blanked, so results and hashes do not depend on where or how
/// wide a run was executed.
inline std::uint64_t config_hash(ExperimentConfig c) {
  c.threads = 0;
  c.out_dir.clear();
  return fnv1a64(serialize_config(c));
}

namespace detail {

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd M(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (rows[static_cast<std::size_t>(i)].size() != rows.size()) throw ValidationError("matrix must be square");
    for (Eigen::Index j = 0; j < m; ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return M;
}

}  // namespace detail

inline TransitionKernel build_kernel(const KernelSpec& k, double delta) {
  if (k.type == "finite") {
    if (k.matrix.empty()) throw ValidationError("finite kernel needs a matrix");
    std::optional<Eigen::MatrixXd> metric;
    if (!k.metric.empty()) metric = detail::to_matrix(k.metric);
    return TransitionKernel::finite(detail::to_matrix(k.matrix), metric);
  }
  if (k.type == "ifs") {
    std::vector<AffineMap> maps;
    for (const auto& row : k.maps) {
      if (row.size() != 2) throw ValidationError("each IFS map needs 'slope intercept'");
      maps.push_back({row[0], row[1]});
    }
    if (k.interval.size() != 2) throw ValidationError("interval needs 'lo hi'");
    return TransitionKernel::ifs(std::move(maps), k.probabilities, std::pair{k.interval[0], k.interval[1]},
                                 k.reference);
  }
  if (k.type == "ar") {
    Noise n;
    if (k.noise == "gaussian")
      n.kind = NoiseKind::gaussian;
    else if (k.noise == "uniform")
      n.kind = NoiseKind::uniform;
    else if (k.noise == "laplace")
      n.kind = NoiseKind::laplace;
    else if (k.noise == "student_t")
      n.kind = NoiseKind::student_t;
    else
      throw ValidationError("unknown noise '" + k.noise + "'");
    n.location = k.noise_location;
    n.scale = k.noise_scale;
    n.dof = k.noise_dof;
    return TransitionKernel::ar(k.coefficient, n, delta, k.reference);
  }
  throw ValidationError("unknown kernel type '" + k.type + "'");
}

/// The raw (uncentered) observable.
inline Observable build_observable(const ObservableSpec& o, const StateSpace& space) {
  if (o.type == "table") return Observable::table(o.values, space);
  if (o.type == "affine") return Observable::affine(o.slope, o.intercept);
  if (o.type == "zero") {
    if (space.is_finite()) return Observable::table(std::vector<double>(space.size(), 0.0), space);
    return Observable::affine(0.0, 0.0);
  }
  throw ValidationError("unknown observable type '" + o.type + "'");
}

inline InitialDistribution build_initial(const InitialSpec& s) {
  if (s.type == "dirac") return InitialDistribution::dirac(s.a);
  if (s.type == "uniform") return InitialDistribution::uniform(s.a, s.b);
  if (s.type == "gaussian") return InitialDistribution::gaussian(s.a, s.b);
  if (s.type == "discrete") return InitialDistribution::discrete(s.weights);
  throw ValidationError("unknown initial distribution '" + s.type + "'");
}

}  // namespace lilmc
