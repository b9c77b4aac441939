#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "mvjl/chain.hpp"
#include "mvjl/errors.hpp"
#include "mvjl/io.hpp"

using namespace mvjl;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& path) {
  const std::string s = slurp(path);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// K = 3, M = 2, n = 2 bundle; `edges` holds the data rows only.
fs::path tiny_bundle(const std::string& name, const std::string& edges) {
  const auto dir = fixtures::scratch_dir(name);
  write(dir / "manifest.json", R"({"n": 2, "K": 3, "M": 2, "P": 1, "P_aux": 1})");
  write(dir / "predictors.csv", "subject_id,key_1,aux_1\nA,0.5,1\nB,-1,2\n");
  write(dir / "edges.csv", "subject_id,view,node_a,node_b,weight\n" + edges);
  return dir;
}

std::string full_edges() {
  std::string e;
  for (const char* s : {"A", "B"})
    for (int m = 1; m <= 2; ++m)
      for (auto [a, b] : {std::pair{1, 2}, {1, 3}, {2, 3}})
        e += std::string(s) + "," + std::to_string(m) + "," + std::to_string(a) + "," + std::to_string(b) + "," +
             std::to_string(m * 10 + a + b) + "\n";
  return e;
}

ParseError read_error(const fs::path& dir) {
  try {
    read_dataset(DatasetBundle::in_directory(dir));
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError(ParseErrorKind::kMalformed, "", 0, "");
}

}  // namespace

TEST_CASE("shortest round-trip number formatting") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 0.0}) {
    const std::string s = format_double(v);
    CHECK(parse_double(s, "x", 1) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK_THROWS_AS(parse_double("1.5x", "f", 3), ParseError);
  CHECK_THROWS_AS(parse_double("nan", "f", 3), ParseError);
  CHECK_THROWS_AS(parse_integer("", "f", 3), ParseError);
}

TEST_CASE("hand-written bundle parses with pair normalization") {
  std::string edges = full_edges();
  // Reverse one pair: (2,3) written as (3,2).
  const auto pos = edges.find("A,1,2,3,");
  edges.replace(pos, 8, "A,1,3,2,");
  const auto dir = tiny_bundle("parse_ok", edges);
  const auto d = read_dataset(DatasetBundle::in_directory(dir));
  CHECK(d.num_subjects() == 2);
  CHECK(d.num_nodes == 3);
  CHECK(d.subject_ids == std::vector<std::string>{"A", "B"});
  CHECK(d.key(1, 0) == -1.0);
  CHECK(d.auxiliary(1, 0) == 2.0);
  CHECK(d.edges[0](0, 2) == 15.0);  // view 1, pair (2,3)
  CHECK(d.edges[1](1, 0) == 23.0);  // view 2, pair (1,2)
}

TEST_CASE("malformed bundles raise distinct parse errors with line numbers") {
  SUBCASE("self loop") {
    const auto e = read_error(tiny_bundle("self_loop", full_edges() + "A,1,2,2,1\n"));
    CHECK(e.kind() == ParseErrorKind::kSelfLoop);
    CHECK(e.line() == 14);
  }
  SUBCASE("node out of range") {
    std::string edges = full_edges();
    edges.replace(edges.find("B,2,1,3,"), 8, "B,2,1,4,");
    const auto e = read_error(tiny_bundle("out_of_range", edges));
    CHECK(e.kind() == ParseErrorKind::kNodeOutOfRange);
    CHECK(e.line() == 12);
  }
  SUBCASE("non-finite weight") {
    std::string edges = full_edges();
    const auto start = edges.find("A,2,1,3,");
    edges.replace(start, edges.find('\n', start) - start, "A,2,1,3,nan");
    const auto e = read_error(tiny_bundle("nan", edges));
    CHECK(e.kind() == ParseErrorKind::kNonFinite);
    CHECK(e.line() == 6);
  }
  SUBCASE("duplicate row") {
    const auto e = read_error(tiny_bundle("dup", full_edges() + "B,1,2,1,0.5\n"));
    CHECK(e.kind() == ParseErrorKind::kDuplicateRow);
    CHECK(e.line() == 14);
  }
  SUBCASE("empty cell") {
    std::string edges = full_edges();
    const auto start = edges.find("A,1,1,2,");
    edges.replace(start, edges.find('\n', start) - start, "A,1,1,2,");
    const auto e = read_error(tiny_bundle("empty_cell", edges));
    CHECK(e.kind() == ParseErrorKind::kMissingCell);
    CHECK(e.line() == 2);
  }
  SUBCASE("missing edge row names subject, view and pair") {
    std::string edges = full_edges();
    const auto start = edges.find("B,2,1,3,");
    edges.erase(start, edges.find('\n', start) - start + 1);
    const auto e = read_error(tiny_bundle("missing_row", edges));
    CHECK(e.kind() == ParseErrorKind::kMissingCell);
    const std::string what = e.what();
    CHECK(what.find("'B'") != std::string::npos);
    CHECK(what.find("view 2") != std::string::npos);
    CHECK(what.find("(1,3)") != std::string::npos);
  }
  SUBCASE("unknown subject") {
    const auto e = read_error(tiny_bundle("unknown", full_edges() + "C,1,1,2,0\n"));
    CHECK(e.kind() == ParseErrorKind::kUnknownSubject);
  }
  SUBCASE("bad header") {
    const auto dir = tiny_bundle("header", full_edges());
    write(dir / "edges.csv", "subject,view,node_a,node_b,weight\n" + full_edges());
    CHECK(read_error(dir).kind() == ParseErrorKind::kMalformed);
  }
}

TEST_CASE("write then read a random dataset is the identity") {
  Rng rng(1);
  auto d = fixtures::random_dataset(7, 6, 3, 2, 2, rng);
  d.view_kinds[2] = ViewKind::kBinary;
  for (Eigen::Index i = 0; i < d.edges[2].size(); ++i) d.edges[2].data()[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  const auto dir = fixtures::scratch_dir("roundtrip");
  write_dataset(d, DatasetBundle::in_directory(dir));
  const auto back = read_dataset(DatasetBundle::in_directory(dir));
  CHECK(back.num_nodes == d.num_nodes);
  CHECK(back.subject_ids == d.subject_ids);
  CHECK(back.key == d.key);
  CHECK(back.auxiliary == d.auxiliary);
  CHECK(back.view_kinds == d.view_kinds);
  for (int m = 0; m < 3; ++m) CHECK(back.edges[static_cast<std::size_t>(m)] == d.edges[static_cast<std::size_t>(m)]);
  CHECK(line_count(dir / "edges.csv") == 1u + 7u * 3u * 15u);

  // Byte-identical on rewrite.
  const auto again = fixtures::scratch_dir("roundtrip2");
  write_dataset(back, DatasetBundle::in_directory(again));
  CHECK(slurp(dir / "edges.csv") == slurp(again / "edges.csv"));
  CHECK(slurp(dir / "predictors.csv") == slurp(again / "predictors.csv"));
}

TEST_CASE("chain summaries: row counts, exact re-reads, deterministic bytes") {
  Rng rng(2);
  const auto d = fixtures::random_dataset(6, 5, 2, 2, 1, rng);
  ModelConfig c;
  c.rank = 2;
  c.n_iter = 140;
  c.n_burnin = 40;
  c.thin = 2;
  Rng chain_rng(9);
  const auto chain = run_chain(d, c, chain_rng);
  REQUIRE(chain.draws() == 50);
  const auto dir = fixtures::scratch_dir("chain");
  write_chain_summary(chain, dir, true);

  CHECK(line_count(dir / kEdgeSummaryFile) == 1u + 2u * 2u * 10u);
  CHECK(line_count(dir / kScalarsFile) == 1u + 50u);
  CHECK(line_count(dir / kNodeInclusionFile) == 1u + 2u * 5u);
  CHECK(line_count(dir / kEdgeDrawsFile) == 1u + 50u);
  CHECK(slurp(dir / kEdgeSummaryFile).rfind("predictor,view,node_a,node_b,mean,sd,q025,q975\n", 0) == 0);
  CHECK(slurp(dir / kNodeInclusionFile).rfind("predictor,node,pip,selected\n", 0) == 0);

  const auto mem = summarize_chain(chain);
  const auto disk = read_chain_summary(dir);
  REQUIRE(disk.edges.size() == mem.edges.size());
  for (std::size_t i = 0; i < mem.edges.size(); ++i) {
    CHECK(disk.edges[i].mean == mem.edges[i].mean);
    CHECK(disk.edges[i].sd == mem.edges[i].sd);
    CHECK(disk.edges[i].q025 == mem.edges[i].q025);
    CHECK(disk.edges[i].q975 == mem.edges[i].q975);
  }
  CHECK(disk.inclusion_probability == mem.inclusion_probability);

  const auto draws = read_chain_draws(dir);
  CHECK(draws.coefficients == chain.coefficients);
  CHECK(draws.intercept == chain.intercept);
  CHECK(draws.noise_variance == chain.noise_variance);
  CHECK(draws.aux_coef == chain.aux_coef);
  CHECK(draws.node_density == chain.node_density);

  const auto scalars = read_scalars(dir / kScalarsFile);
  CHECK(scalars.values.rows() == 50);
  CHECK(scalars.columns.front() == "draw");

  const auto dir2 = fixtures::scratch_dir("chain2");
  write_chain_summary(chain, dir2, true);
  for (const char* f : {kEdgeSummaryFile, kScalarsFile, kNodeInclusionFile, kEdgeDrawsFile, kChainMetaFile})
    CHECK(slurp(dir / f) == slurp(dir2 / f));
}

TEST_CASE("reports and truth files round-trip") {
  EvaluationReport r;
  EvaluationRow a;
  a.predictor = 0;
  a.view = 0;
  a.mse = 0.001;
  a.ci_coverage = 0.95;
  EvaluationRow b = a;
  b.view = 1;
  b.mse = 1.0 / 3.0;
  r.rows = {a, b};
  const auto dir = fixtures::scratch_dir("report");
  write_report(r, dir / kReportFile);
  const std::string text = slurp(dir / kReportFile);
  CHECK(text.rfind("predictor,view,mse,ci_coverage\n", 0) == 0);
  CHECK(text.find("mspe") == std::string::npos);
  const auto back = read_report(dir / kReportFile);
  REQUIRE(back.rows.size() == 2u);
  CHECK(*back.rows[1].mse == 1.0 / 3.0);
  CHECK_FALSE(back.rows[1].mspe.has_value());

  const Scenario s = *find_scenario("desk-tiny");
  Rng rng(3);
  const auto truth = generate_truth(s, rng);
  write_truth(truth, dir / kTruthFile);
  const auto t2 = read_truth(dir / kTruthFile);
  CHECK(t2.inclusion == truth.inclusion);
  CHECK(t2.latent == truth.latent);
  CHECK(t2.coefficient(0, 1) == truth.coefficient(0, 1));
  CHECK(t2.noise_variance == truth.noise_variance);
}

TEST_CASE("unwritable paths raise IoError") {
  const auto dir = fixtures::scratch_dir("unwritable");
  write(dir / "file", "x");
  CHECK_THROWS_AS(write_text_file(dir / "file" / "child.txt", "y"), IoError);
  CHECK_THROWS_AS(read_text_file(dir / "absent.txt"), IoError);
  CHECK_THROWS_AS(read_chain_draws(dir), std::exception);
}
