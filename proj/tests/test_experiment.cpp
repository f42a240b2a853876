#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using namespace lilmc;

namespace {

const char* kSmallTwoState = R"([experiment]
name = small
seed = 7
checks = e1 e2 e3 H3 slln bc lemma1 lil strassen

[kernel]
type = finite
matrix = 0.9 0.1; 0.2 0.8

[observable]
type = table
values = 1 -2

[initial]
type = dirac
a = 0

[horizons]
n_max = 20000
lil_n_min = 1000
certify = 1 2 4 8
ensemble = 500
bc_grid = 1 4 16 64 256

[replicas]
certify = 1000
ensemble = 64
variance = 20000
bc = 500
moments = 200
)";

ExperimentConfig small_config() { return parse_config(kSmallTwoState); }

}  // namespace

TEST(Config, ParsesAndRoundTrips) {
  const auto c = small_config();
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.kernel.matrix, (std::vector<std::vector<double>>{{0.9, 0.1}, {0.2, 0.8}}));
  EXPECT_EQ(c.observable.values, (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(c.n_max, 20000u);
  EXPECT_EQ(c.e3_tol, 0.02);
  const auto again = parse_config(serialize_config(c));
  EXPECT_EQ(again, c);
  EXPECT_EQ(serialize_config(again), serialize_config(c));
}

TEST(Config, LargeSeedSurvives) {
  auto c = small_config();
  c.seed = 18446744073709551557ULL;
  EXPECT_EQ(parse_config(serialize_config(c)).seed, c.seed);
}

TEST(Config, HashIgnoresThreadsAndOutputDirectory) {
  auto a = small_config();
  auto b = a;
  b.threads = 16;
  b.out_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 8;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("[kernel]\ntype = markov\n"), ValidationError);
  EXPECT_THROW(parse_config("[experiment]\ndelta = -1\n"), ValidationError);
  EXPECT_THROW(parse_config("[kernel]\nmatrix = 0.9 x; 0.2 0.8\n"), ValidationError);
}

TEST(Config, BuildsModels) {
  const auto c = small_config();
  const auto k = build_kernel(c.kernel, c.delta);
  EXPECT_EQ(k.hash(), oracle::two_state().hash());
  const auto psi = build_observable(c.observable, k.space());
  EXPECT_EQ(psi(1.0), -2.0);
  KernelSpec ifs;
  ifs.type = "ifs";
  ifs.maps = {{0.5, 0.0}, {0.5, 0.5}};
  ifs.probabilities = {0.5, 0.5};
  EXPECT_EQ(build_kernel(ifs, 1.0).hash(), oracle::dyadic_ifs().hash());
  KernelSpec ar;
  ar.type = "ar";
  ar.coefficient = 0.5;
  EXPECT_EQ(build_kernel(ar, 1.0).hash(), oracle::ar_half().hash());
  ar.noise = "student_t";
  ar.noise_dof = 3;
  EXPECT_THROW(build_kernel(ar, 1.0), ValidationError);
}

TEST(Experiment, SmallTwoStateRun) {
  RunOptions opt;
  opt.threads = 2;
  const auto rep = run_experiment(small_config(), opt);
  ASSERT_TRUE(rep.error.empty()) << rep.error;
  EXPECT_NEAR(rep.sigma2, oracle::kSigma2, 1e-12);
  ASSERT_TRUE(rep.certificate.has_value());
  EXPECT_NEAR(rep.certificate->gamma, 0.7, 1e-12);
  const auto& results = rep.json.at("results");
  EXPECT_TRUE(results.contains("variance"));
  EXPECT_TRUE(results.contains("conditions"));
  EXPECT_EQ(rep.json.at("format"), kReportFormat);
  EXPECT_EQ(rep.json.at("config_hash"), hex64(config_hash(small_config())));
  for (const auto& c : rep.conditions) EXPECT_NE(c.verdict, Verdict::fail) << c.id << ": " << c.note;
  EXPECT_EQ(rep.exit_code, exit_code_for(rep.conditions));
}

TEST(Experiment, ZeroObservableExitsWithDegenerateVariance) {
  auto c = small_config();
  c.observable.type = "zero";
  c.observable.values.clear();
  const auto rep = run_experiment(c, {});
  EXPECT_EQ(rep.exit_code, 2);
  EXPECT_NE(rep.error.find("sigma"), std::string::npos) << rep.error;
}

TEST(Experiment, NoGapWithoutOverride) {
  auto c = small_config();
  c.kernel.matrix = {{1.0, 0.0}, {0.0, 1.0}};
  const auto rep = run_experiment(c, {});
  EXPECT_EQ(rep.exit_code, 2);
  EXPECT_FALSE(rep.error.empty());
}

TEST(Experiment, ReplayIsIdenticalAcrossThreadCounts) {
  RunOptions opt;
  opt.threads = 1;
  const auto rep = run_experiment(small_config(), opt);
  for (unsigned t : {4u, 16u}) {
    const auto r = replay(rep.json, t);
    EXPECT_TRUE(r.identical) << (r.mismatches.empty() ? "" : r.mismatches.front());
    EXPECT_EQ(r.regenerated.json.at("results").dump(), rep.json.at("results").dump());
  }
}

TEST(Experiment, ReplayDetectsTamperedSeed) {
  const auto rep = run_experiment(small_config(), {});
  Json tampered = rep.json;
  auto c = small_config();
  c.seed = 8;
  tampered["config"] = serialize_config(c);
  const auto r = replay(tampered, 1);
  EXPECT_FALSE(r.identical);
  ASSERT_FALSE(r.mismatches.empty());
  EXPECT_NE(r.mismatches.front().find("config_hash"), std::string::npos);
}

TEST(Experiment, ReplayRejectsOtherVersion) {
  Json j = {{"format", kReportFormat}, {"version", "0.0.1"}, {"config", serialize_config(small_config())}};
  EXPECT_THROW(replay(j), ValidationError);
}

TEST(Experiment, AssembleRejectsMixedConfigurations) {
  const Json a = {{"config_hash", "aaaa"}, {"results", {{"x", 1}}}};
  const Json b = {{"config_hash", "bbbb"}, {"results", {{"y", 2}}}};
  const Json c = {{"config_hash", "aaaa"}, {"results", {{"y", 2}}}};
  EXPECT_THROW(assemble_reports({a, b}), ValidationError);
  const Json merged = assemble_reports({a, c});
  EXPECT_EQ(merged.at("results").at("x"), 1);
  EXPECT_EQ(merged.at("results").at("y"), 2);
}

TEST(Experiment, WritesReportFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "lilmc_test_report";
  std::filesystem::remove_all(dir);
  RunOptions opt;
  opt.out_dir = dir.string();
  const auto rep = run_experiment(small_config(), opt);
  write_report_files(rep);
  for (const char* f : {"report.json", "lil.csv", "strassen.csv", "variance_curve.csv", "verdicts.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const Json back = read_json((dir / "report.json").string());
  EXPECT_EQ(back.at("results").dump(), rep.json.at("results").dump());
  std::ifstream in(dir / "verdicts.csv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# config_hash=" + hex64(rep.config_hash));
  std::filesystem::remove_all(dir);
}
