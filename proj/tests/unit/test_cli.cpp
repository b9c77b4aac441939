#include <doctest.h>

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "fixtures.hpp"
#include "mvjl/errors.hpp"
#include "mvjl/io.hpp"

using namespace mvjl;
using namespace mvjl::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FitArgs quick_fit(const fs::path& data, const fs::path& out) {
  FitArgs f;
  f.data = data;
  f.out = out;
  f.quiet = true;
  f.model.n_iter = 200;
  f.model.n_burnin = 100;
  f.model.thin = 1;
  return f;
}

fs::path simulate_tiny(const std::string& name, int reps = 1, std::uint64_t seed = 7) {
  const auto root = fixtures::scratch_dir(name);
  SimulateArgs s;
  s.scenario = "desk-tiny";
  s.seed = seed;
  s.replications = reps;
  s.out = root / "data";
  std::ostringstream log;
  REQUIRE(cmd_simulate(s, log) == kOk);
  return root;
}

}  // namespace

TEST_CASE("flags override the config file, which overrides defaults") {
  ModelOverrides flags;
  flags.rank = 3;
  flags.seed = 99;
  const nlohmann::json file = {{"rank", 4}, {"omega", 3.0}, {"n_iter", 100}};
  const auto r = resolve_model(flags, file, ModelConfig{});
  CHECK(r.config.rank == 3);
  CHECK(r.config.omega == 3.0);
  CHECK(r.config.n_iter == 100);
  CHECK(r.config.n_burnin == 1000);
  CHECK(r.config.seed == 99);
  CHECK(r.sources.at("rank") == "flag");
  CHECK(r.sources.at("omega") == "config");
  CHECK(r.sources.at("thin") == "default");
  CHECK_FALSE(r.config.nu.has_value());
  CHECK_THROWS_AS(resolve_model({}, {{"rank", "five"}}, ModelConfig{}), ConfigError);
}

TEST_CASE("default schedule is 5000 / 1000 / 2") {
  const auto r = resolve_model({}, nlohmann::json::object(), ModelConfig{});
  CHECK(r.config.n_iter == 5000);
  CHECK(r.config.n_burnin == 1000);
  CHECK(r.config.thin == 2);
}

TEST_CASE("simulate writes the registered design deterministically") {
  const auto root = fixtures::scratch_dir("cli_sim");
  SimulateArgs s;
  s.scenario = "table1-1";
  s.seed = 7;
  s.out = root / "a";
  std::ostringstream log;
  REQUIRE(cmd_simulate(s, log) == kOk);
  const auto manifest = nlohmann::json::parse(slurp(root / "a" / "manifest.json"));
  CHECK(manifest.at("K") == 40);
  CHECK(manifest.at("n") == 150);
  CHECK(fs::exists(root / "a" / "truth.json"));
  CHECK(fs::exists(root / "a" / "run_meta.json"));
  s.out = root / "b";
  REQUIRE(cmd_simulate(s, log) == kOk);
  for (const char* f : {"edges.csv", "predictors.csv", "manifest.json", "truth.json", "run_meta.json"})
    CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));

  s.scenario = "desk-small";
  s.out = root / "c";
  REQUIRE(cmd_simulate(s, log) == kOk);
  CHECK(nlohmann::json::parse(slurp(root / "c" / "manifest.json")).at("K") == 20);

  s.scenario = "no-such-design";
  CHECK_THROWS_AS(cmd_simulate(s, log), ConfigError);
}

TEST_CASE("fit with two chains gives matching shapes and different draws") {
  const auto root = simulate_tiny("cli_chains");
  auto f = quick_fit(root / "data", root / "fit");
  f.chains = 2;
  f.save_draws = true;
  std::ostringstream log;
  REQUIRE(cmd_fit(f, log) == kOk);
  const auto a = read_chain_draws(root / "fit" / "chain_1");
  const auto b = read_chain_draws(root / "fit" / "chain_2");
  CHECK(a.coefficients.rows() == b.coefficients.rows());
  CHECK(a.coefficients.cols() == b.coefficients.cols());
  CHECK(a.coefficients != b.coefficients);
  const auto meta = nlohmann::json::parse(slurp(root / "fit" / "run_meta.json"));
  CHECK(meta.at("resolved").at("chains") == 2);
  CHECK(meta.at("resolved").at("sources").at("n_iter") == "flag");
}

TEST_CASE("independent mode fits each view separately") {
  const auto root = simulate_tiny("cli_il");
  auto f = quick_fit(root / "data", root / "fit");
  f.mode = FitMode::kIndependent;
  std::ostringstream log;
  REQUIRE(cmd_fit(f, log) == kOk);
  for (const char* v : {"view_1", "view_2"}) {
    const auto s = read_chain_summary(root / "fit" / v);
    CHECK(s.num_views == 1);
    CHECK(s.has_inclusion());
  }
  const auto merged = read_chain_summary(root / "fit");
  CHECK(merged.num_views == 2);
  CHECK_FALSE(merged.has_inclusion());
}

TEST_CASE("fit rejects binary views") {
  const auto root = simulate_tiny("cli_binary");
  auto d = read_dataset(DatasetBundle::in_directory(root / "data"));
  d.view_kinds[1] = ViewKind::kBinary;
  for (Eigen::Index i = 0; i < d.edges[1].size(); ++i) d.edges[1].data()[i] = d.edges[1].data()[i] > 0 ? 1.0 : 0.0;
  write_dataset(d, DatasetBundle::in_directory(root / "binary"));
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_fit(quick_fit(root / "binary", root / "fit"), log), UnsupportedFeatureError);
}

TEST_CASE("evaluate with truth only has no predictive columns") {
  const auto root = simulate_tiny("cli_eval_truth");
  std::ostringstream log;
  REQUIRE(cmd_fit(quick_fit(root / "data", root / "fit"), log) == kOk);
  EvaluateArgs e;
  e.fit = root / "fit";
  REQUIRE(cmd_evaluate(e, log) == kOk);
  const std::string report = slurp(root / "fit" / "evaluation" / kReportFile);
  CHECK(report.find("mse") != std::string::npos);
  CHECK(report.find("auc") != std::string::npos);
  CHECK(report.find("mspe") == std::string::npos);
  // The fit's own run metadata is untouched.
  CHECK(nlohmann::json::parse(slurp(root / "fit" / "run_meta.json")).at("command") == "fit");
}

TEST_CASE("evaluate with held-out data adds predictive columns") {
  const auto root = simulate_tiny("cli_eval_heldout");
  auto f = quick_fit(root / "data", root / "fit");
  f.holdout = 0.2;
  std::ostringstream log;
  REQUIRE(cmd_fit(f, log) == kOk);
  CHECK(fs::exists(root / "fit" / "heldout" / "edges.csv"));
  EvaluateArgs e;
  e.fit = root / "fit";
  e.out = root / "eval";
  REQUIRE(cmd_evaluate(e, log) == kOk);
  const auto report = read_report(root / "eval" / kReportFile);
  REQUIRE(report.rows.size() == 2u);
  CHECK(report.rows[0].mspe.has_value());
  CHECK(report.rows[0].pi_coverage.has_value());
  CHECK(report.rows[0].mse.has_value());
}

TEST_CASE("evaluate aggregates replications with mean and SE columns") {
  const auto root = simulate_tiny("cli_eval_reps", 3);
  std::ostringstream log;
  REQUIRE(cmd_fit(quick_fit(root / "data", root / "fit"), log) == kOk);
  EvaluateArgs e;
  e.fit = root / "fit";
  REQUIRE(cmd_evaluate(e, log) == kOk);
  const std::string text = slurp(root / "fit" / "evaluation" / kReportFile);
  const std::string header = text.substr(0, text.find('\n'));
  CHECK(header.rfind("predictor,view,replications,mse_mean,mse_se", 0) == 0);
  CHECK(text.find(",3,") != std::string::npos);
  for (const char* rep : {"rep_001", "rep_002", "rep_003"})
    CHECK(fs::exists(root / "fit" / "evaluation" / rep / kReportFile));

  ReportArgs r;
  r.in = root / "fit";
  std::ostringstream table;
  REQUIRE(cmd_report(r, table) == kOk);
  CHECK(table.str().find("mse_mean_x100") != std::string::npos);
}

TEST_CASE("evaluate without truth or held-out data is a usage error") {
  const auto root = simulate_tiny("cli_eval_none");
  std::ostringstream log;
  REQUIRE(cmd_fit(quick_fit(root / "data", root / "fit"), log) == kOk);
  fs::remove(root / "fit" / kTruthFile);
  EvaluateArgs e;
  e.fit = root / "fit";
  CHECK_THROWS_AS(cmd_evaluate(e, log), ConfigError);
}

TEST_CASE("near-noiseless data is recovered with MSE below 1e-3") {
  const auto root = fixtures::scratch_dir("cli_noiseless");
  Scenario s = *find_scenario("desk-tiny");
  s.noise_variance = {1e-4, 1e-4};
  Rng rng(21);
  const auto truth = generate_truth(s, rng);
  write_dataset(generate_dataset(truth, s, rng), DatasetBundle::in_directory(root / "data"));
  write_truth(truth, root / "data" / kTruthFile);
  auto f = quick_fit(root / "data", root / "fit");
  f.model.n_iter = 1000;
  f.model.n_burnin = 500;
  std::ostringstream log;
  REQUIRE(cmd_fit(f, log) == kOk);
  EvaluateArgs e;
  e.fit = root / "fit";
  REQUIRE(cmd_evaluate(e, log) == kOk);
  const auto report = read_report(root / "fit" / "evaluation" / kReportFile);
  for (const auto& row : report.rows) CHECK(*row.mse < 1e-3);
}

TEST_CASE("check prior reports the rank-sign probability and passes") {
  CheckArgs c;
  c.kind = "prior";
  c.rank = 2;
  c.omega = 2.0;
  c.draws = 200000;
  std::ostringstream out;
  CHECK(cmd_check(c, out) == kOk);
  CHECK(out.str().find("exact 0.0555556") != std::string::npos);
  CHECK(out.str().find("lower bound 0.0277778") != std::string::npos);
  c.kind = "bogus";
  CHECK_THROWS_AS(cmd_check(c, out), ConfigError);
}

TEST_CASE("exception mapping") {
  std::ostringstream err;
  auto code = [&](auto&& thrower) {
    try {
      thrower();
    } catch (...) {
      return report_exception(err);
    }
    return -1;
  };
  CHECK(code([] { throw ConfigError("x"); }) == kUsage);
  CHECK(code([] { throw ParseError(ParseErrorKind::kSelfLoop, "f", 2, "x"); }) == kBadInput);
  CHECK(code([] { throw IoError("x"); }) == kBadInput);
  CHECK(code([] { throw UnsupportedFeatureError("x"); }) == kUnsupported);
  CHECK(code([] { throw NumericalError("x"); }) == kRuntime);
}
