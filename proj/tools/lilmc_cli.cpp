#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lilmc.hpp"

namespace fs = std::filesystem;
using namespace lilmc;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
};

ExperimentConfig load(const std::string& path, const Globals& g) {
  ExperimentConfig c = load_config(path);
  if (g.seed) c.seed = *g.seed;
  if (g.threads) c.threads = *g.threads;
  if (g.out) c.out_dir = *g.out;
  return c;
}

unsigned threads_of(const ExperimentConfig& c) { return c.threads ? c.threads : default_threads(); }

Json envelope(const ExperimentConfig& c, Json results) {
  return {{"format", kReportFormat},
          {"version", kVersion},
          {"config_hash", hex64(config_hash(c))},
          {"config", serialize_config(c)},
          {"results", std::move(results)}};
}

void write_json(const ExperimentConfig& c, const std::string& name, const Json& doc) {
  fs::create_directories(c.out_dir);
  const fs::path p = fs::path(c.out_dir) / name;
  std::ofstream out(p);
  out << doc.dump(2) << '\n';
  if (!out) throw Error("cannot write '" + p.string() + "'");
  std::cout << "wrote " << p.string() << '\n';
}

/// Exact sigma^2 for the prepared model.
double exact_sigma2(const PreparedModel& p) {
  if (p.kernel.is_finite()) return sigma2_corrector(p.kernel.as_finite(), *p.chi, p.mu).sigma2;
  return sigma2_affine(p.kernel, p.psi).sigma2;
}

std::vector<double> read_column(const std::string& path, const std::string& column, std::string& header_comment) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      header_comment += line.substr(1) + ' ';
      continue;
    }
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) names.push_back(name);
    break;
  }
  const auto it = std::find(names.begin(), names.end(), column);
  if (it == names.end()) throw ValidationError("column '" + column + "' not found in '" + path + "'");
  const auto idx = static_cast<std::size_t>(it - names.begin());
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; std::getline(ss, cell, ','); ++i)
      if (i == idx) out.push_back(std::stod(cell));
  }
  return out;
}

double header_value(const std::string& header, const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(header.substr(pos + key.size() + 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein-gap Markov chain LIL laboratory"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker count (default: LILMC_THREADS or hardware concurrency)");
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides the config)");

  std::string config_path;
  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "Experiment config")->required(); };

  auto* run = app.add_subcommand("run", "Full pipeline; exit 0 all pass, 2 any fail, 3 inconclusive only");
  add_config(run);

  auto* sim = app.add_subcommand("simulate", "Simulate one trajectory and its martingale decomposition");
  add_config(sim);
  std::size_t sim_n = 0;
  std::uint32_t sim_replica = 0;
  sim->add_option("--n", sim_n, "Horizon (default: n_max of the config)");
  sim->add_option("--replica", sim_replica, "Replica id");

  auto* con = app.add_subcommand("contraction", "Certify the Wasserstein contraction");
  add_config(con);

  auto* cor = app.add_subcommand("corrector", "Corrector and Monte Carlo probes");
  add_config(cor);
  std::vector<double> probes;
  std::size_t probe_replicas = 10000;
  cor->add_option("--probe", probes, "States at which to estimate h by Monte Carlo");
  cor->add_option("--replicas", probe_replicas, "Replicas per probe");

  auto* var = app.add_subcommand("variance", "Asymptotic variance by every available route");
  add_config(var);

  auto* lil = app.add_subcommand("lil", "Running max of |W_n| / (sigma sqrt(2 n log log n))");
  add_config(lil);

  auto* str = app.add_subcommand("strassen", "Path functionals and distance to K along a subsequence");
  std::string input;
  std::string subsequence = "geometric:1.5";
  double nmax = 0.0;
  double sigma_in = 0.0;
  double dist_tol = 1e-5;
  str->add_option("--input", input, "Martingale CSV written by 'simulate'")->required();
  str->add_option("--subsequence", subsequence, "geometric:<ratio>");
  str->add_option("--nmax", nmax, "Largest n (default: series length)");
  str->add_option("--sigma", sigma_in, "sigma (default: from the CSV header)");
  str->add_option("--tol", dist_tol, "dist_to_K tolerance");

  auto* aud = app.add_subcommand("audit", "Run selected checks");
  add_config(aud);
  std::string checks;
  aud->add_option("--check", checks, "Comma list of e1,e2,e3,H3,slln,bc,lemma1,lil,strassen,control")->required();

  auto* rpt = app.add_subcommand("report", "Assemble artifacts sharing one config hash");
  std::vector<std::string> inputs;
  rpt->add_option("inputs", inputs, "Artifact JSON files")->required();

  auto* rep = app.add_subcommand("replay", "Regenerate a report and compare numeric fields");
  std::string report_path;
  rep->add_option("--report", report_path, "report.json to replay")->required();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;
  if (*out_opt) g.out = out;

  try {
    if (*run || *aud) {
      ExperimentConfig c = load(config_path, g);
      if (*aud) c.checks = detail::parse_words(checks);
      RunOptions opt;
      opt.threads = threads_of(c);
      ExperimentReport r = run_experiment(c, opt);
      write_report_files(r);
      for (const auto& cond : r.conditions) std::cout << cond.id << ": " << to_string(cond.verdict) << '\n';
      if (!r.error.empty()) std::cout << "error: " << r.error << '\n';
      std::cout << "report: " << (fs::path(c.out_dir) / "report.json").string() << '\n';
      return r.exit_code;
    }
    if (*sim) {
      const ExperimentConfig c = load(config_path, g);
      Json scratch;
      const PreparedModel p = prepare_model(c, threads_of(c), scratch);
      const std::size_t n = sim_n ? sim_n : c.n_max;
      const Trajectory t = simulate(p.kernel, p.initial, n, c.seed, sim_replica);
      const MartingaleSeries ms = decompose(t, *p.chi, p.kernel.hash());
      fs::create_directories(c.out_dir);
      const std::string tag = "# config_hash=" + hex64(config_hash(c)) + "\n";
      {
        std::ofstream o(fs::path(c.out_dir) / "trajectory.csv");
        o << tag;
        write_trajectory_csv(o, t);
      }
      {
        std::ofstream o(fs::path(c.out_dir) / "martingale.csv");
        o.precision(17);
        o << tag << "# sigma2=" << exact_sigma2(p) << " seed=" << c.seed << " replica=" << sim_replica << '\n';
        o << "n,Z,S,W\n";
        for (std::size_t k = 0; k <= n; ++k) o << k << ',' << ms.Z[k] << ',' << ms.S[k] << ',' << ms.W[k] << '\n';
      }
      std::cout << "wrote " << (fs::path(c.out_dir) / "trajectory.csv").string() << " and martingale.csv\n";
      return 0;
    }
    if (*con) {
      const ExperimentConfig c = load(config_path, g);
      const TransitionKernel kernel = build_kernel(c.kernel, c.delta);
      CertifyOptions copt;
      copt.replicas = c.certify_replicas;
      copt.seed = c.seed;
      copt.threads = threads_of(c);
      copt.gap_tolerance = c.gap_tolerance;
      const CertificationOutcome o = certify_contraction(kernel, detail::certify_pairs(kernel), c.certify_horizons, copt);
      write_json(c, "certificate.json", envelope(c, {{"contraction", to_json(o)}}));
      if (!o.certified()) {
        std::cout << "no certificate: " << o.reason << '\n';
        return 2;
      }
      const auto& cert = *o.certificate;
      std::cout << "c=" << cert.c << " gamma=" << cert.gamma << " n0=" << cert.n0 << " gamma0=" << cert.gamma0
                << " (" << to_string(cert.provenance) << ")\n";
      return 0;
    }
    if (*cor) {
      const ExperimentConfig c = load(config_path, g);
      Json scratch;
      const PreparedModel p = prepare_model(c, threads_of(c), scratch);
      Json res;
      res["convention"] = to_string(p.chi->convention());
      Json probe_rows = Json::array();
      const double diam = p.kernel.space().diameter();
      for (double x : probes) {
        const double d = std::isfinite(diam) ? diam : 10.0;
        const std::size_t N = default_truncation(p.psi.lipschitz(), p.cert, d, 1e-3);
        StationaryMeasure emp = p.kernel.is_finite() ? p.mu : stationary_empirical(p.kernel, 200, 20000, c.seed);
        const double dist = distance_to_stationary(p.kernel.space(), x, emp);
        const McCorrectorEstimate e =
            corrector_mc(p.kernel, p.psi, x, N, probe_replicas, c.seed, p.cert, dist, threads_of(c));
        probe_rows.push_back({{"x", x},
                              {"h_exact", num(p.chi->h(x))},
                              {"h_mc", num(e.estimate)},
                              {"error_bound", num(e.error_bound)},
                              {"truncation", e.truncation}});
        std::cout << "h(" << x << ") exact=" << p.chi->h(x) << " mc=" << e.estimate << " +- " << e.error_bound << '\n';
      }
      res["probes"] = probe_rows;
      write_json(c, "corrector.json", envelope(c, {{"corrector_probes", res}}));
      return 0;
    }
    if (*var) {
      ExperimentConfig c = load(config_path, g);
      c.checks.clear();
      c.n_max = c.lil_n_min;
      RunOptions opt;
      opt.threads = threads_of(c);
      const ExperimentReport r = run_experiment(c, opt);
      if (!r.error.empty()) {
        std::cout << "error: " << r.error << '\n';
        return 2;
      }
      for (const auto& v : r.variance)
        std::cout << to_string(v.method) << ": " << v.sigma2 << " (se " << v.standard_error << ")\n";
      write_json(c, "variance.json", envelope(c, {{"variance", r.json["results"]["variance"]}, {"sigma2", r.sigma2}}));
      return 0;
    }
    if (*lil) {
      ExperimentConfig c = load(config_path, g);
      c.checks = {"lil", "control"};
      RunOptions opt;
      opt.threads = threads_of(c);
      const ExperimentReport r = run_experiment(c, opt);
      write_report_files(r);
      for (const auto& cond : r.conditions) std::cout << cond.id << ": " << to_string(cond.verdict) << '\n';
      return r.exit_code;
    }
    if (*str) {
      std::string header;
      const std::vector<double> W = read_column(input, "W", header);
      double sigma = sigma_in;
      if (!(sigma > 0.0)) sigma = std::sqrt(header_value(header, "sigma2"));
      if (subsequence.rfind("geometric:", 0) != 0) throw ValidationError("subsequence must be geometric:<ratio>");
      const double ratio = std::stod(subsequence.substr(10));
      const std::size_t n_max =
          nmax > 0.0 ? std::min(static_cast<std::size_t>(nmax), W.size() - 1) : W.size() - 1;
      StrassenTargets targets;
      targets.tol = dist_tol;
      const StrassenReport s =
          strassen_theta(W, sigma, geometric_subsequence(n_max, ratio), targets, g.threads ? *g.threads : default_threads());
      const std::string out_dir = g.out ? *g.out : "out";
      fs::create_directories(out_dir);
      Json doc = to_json(s);
      const auto hpos = header.find("config_hash=");
      if (hpos != std::string::npos) doc["config_hash"] = header.substr(hpos + 12, 16);
      std::ofstream(fs::path(out_dir) / "strassen.json") << doc.dump(2) << '\n';
      const auto& last = s.last();
      std::cout << "n=" << last.n << " max theta(1)=" << last.max_endpoint << " max int=" << last.max_integral
                << " window min dist=" << last.window_min_dist << '\n';
      return 0;
    }
    if (*rpt) {
      std::vector<Json> parts;
      for (const auto& p : inputs) parts.push_back(read_json(p));
      const Json doc = assemble_reports(parts);
      const std::string out_dir = g.out ? *g.out : "out";
      fs::create_directories(out_dir);
      std::ofstream(fs::path(out_dir) / "assembled.json") << doc.dump(2) << '\n';
      std::cout << "assembled " << parts.size() << " artifacts (config " << doc["config_hash"].get<std::string>()
                << ")\n";
      return 0;
    }
    if (*rep) {
      const ReplayResult r = replay(read_json(report_path), g.threads);
      if (r.identical) {
        std::cout << "replay identical\n";
        return 0;
      }
      std::cout << "replay mismatch:\n";
      for (const auto& m : r.mismatches) std::cout << "  " << m << '\n';
      return 4;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
