#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mvjl/errors.hpp"
#include "mvjl/simulate.hpp"

using namespace mvjl;

TEST_CASE("scenario registry") {
  const auto table = scenario_table();
  REQUIRE(table.size() == 6u);
  for (const auto& s : table) {
    CHECK(s.n == 150);
    CHECK(s.num_nodes == 40);
    CHECK(s.fitted_rank >= s.true_rank);
    CHECK_NOTHROW(s.validate());
  }
  CHECK(table[0].node_density == 0.7);
  CHECK(table[2].node_density == 0.3);
  CHECK(table[0].true_rank == 4);
  CHECK(table[5].true_rank == 3);
  const auto small = find_scenario("desk-small");
  REQUIRE(small.has_value());
  CHECK(small->num_nodes == 20);
  CHECK(small->n == 150);
  CHECK(small->node_density == 0.5);
  CHECK(small->true_rank == 3);
  CHECK(small->fitted_rank == 5);
  CHECK(small->noise_variance == std::vector<double>{1.0, 0.5});
  CHECK(small->n_iter == 3000);
  CHECK(small->n_burnin == 600);
  CHECK(small->thin == 2);
  CHECK(find_scenario("desk-tiny")->num_nodes == 10);
  CHECK_FALSE(find_scenario("table1-9").has_value());

  const auto mc = small->model_config();
  CHECK(mc.rank == 5);
  CHECK(mc.n_iter == 3000);
}

TEST_CASE("scenario validation") {
  Scenario s = *find_scenario("desk-tiny");
  SUBCASE("density") {
    s.node_density = 1.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("true rank above fitted rank") {
    s.true_rank = s.fitted_rank + 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("per-view vector length") {
    s.intercept = {0.1};
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("noise variance") {
    s.noise_variance = {1.0, 0.0};
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
}

TEST_CASE("true coefficients are half the inner products of active latent vectors") {
  const Scenario s = *find_scenario("desk-small");
  Rng rng(4);
  const auto truth = generate_truth(s, rng);
  const int k = s.num_nodes, r = s.true_rank;
  REQUIRE(truth.latent.rows() == k);
  REQUIRE(truth.latent.cols() == s.num_views * r);
  for (int m = 0; m < s.num_views; ++m) {
    const auto& g = truth.coefficient(0, m);
    int q = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b, ++q) {
        double expected = 0.0;
        for (int j = 0; j < r; ++j) expected += truth.latent(a, m * r + j) * truth.latent(b, m * r + j);
        CHECK(g[q] == doctest::Approx(0.5 * expected));
        if (!truth.inclusion(0, a) || !truth.inclusion(0, b)) CHECK(g[q] == 0.0);
      }
  }
  for (int a = 0; a < k; ++a)
    if (!truth.inclusion(0, a)) CHECK(truth.latent.row(a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("node activity and latent draws follow the design") {
  Scenario s = *find_scenario("desk-small");
  s.num_nodes = 400;
  s.latent_correlation = 0.5;
  Rng rng(6);
  const auto truth = generate_truth(s, rng);
  const double rate = truth.inclusion.cast<double>().mean();
  CHECK(std::abs(rate - 0.5) < 4.0 * std::sqrt(0.25 / 400));
  // Centered active latent vectors have unit variance and correlation 0.5.
  const int cols = static_cast<int>(truth.latent.cols());
  Eigen::MatrixXd centred(truth.inclusion.sum(), cols);
  for (int a = 0, row = 0; a < s.num_nodes; ++a)
    if (truth.inclusion(0, a)) centred.row(row++) = truth.latent.row(a) - truth.latent_mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(centred.rows());
  for (int i = 0; i < cols; ++i) {
    CHECK(cov(i, i) == doctest::Approx(1.0).epsilon(0.25));
    for (int j = 0; j < i; ++j) CHECK(cov(i, j) == doctest::Approx(0.5).epsilon(0.4));
  }
}

TEST_CASE("generated data has the requested shape and noise level") {
  Scenario s = *find_scenario("desk-tiny");
  s.n = 4000;
  Rng rng(1);
  const auto truth = generate_truth(s, rng);
  const auto data = generate_dataset(truth, s, rng);
  CHECK_NOTHROW(data.validate());
  CHECK(data.num_subjects() == 4000);
  CHECK(data.num_views() == 2);
  CHECK(data.num_key() == 1);
  CHECK(data.num_auxiliary() == 1);
  for (int m = 0; m < 2; ++m) {
    double ssr = 0.0;
    for (int i = 0; i < data.num_subjects(); ++i)
      for (int q = 0; q < data.num_edges(); ++q) {
        const double u = truth.intercept[m] + data.key(i, 0) * truth.coefficient(0, m)[q] + data.auxiliary(i, 0) * truth.aux_coef(0, m);
        const double e = data.edges[static_cast<std::size_t>(m)](i, q) - u;
        ssr += e * e;
      }
    const double var = ssr / (data.num_subjects() * data.num_edges());
    CHECK(var == doctest::Approx(s.noise_variance[static_cast<std::size_t>(m)]).epsilon(0.02));
  }
}

TEST_CASE("simulation is deterministic per seed") {
  const Scenario s = *find_scenario("desk-tiny");
  Rng a(10), b(10), c(11);
  const auto ta = generate_truth(s, a), tb = generate_truth(s, b), tc = generate_truth(s, c);
  CHECK(ta.latent == tb.latent);
  CHECK(generate_dataset(ta, s, a).edges[0] == generate_dataset(tb, s, b).edges[0]);
  CHECK(ta.latent != tc.latent);
}

TEST_CASE("subject split") {
  Rng rng(1);
  const auto d = fixtures::random_dataset(10, 4, 2, 1, 1, rng);
  const auto [train, test] = split_subjects(d, 0.2);
  CHECK(train.num_subjects() == 8);
  CHECK(test.num_subjects() == 2);
  CHECK(test.subject_ids.front() == "s9");
  CHECK(test.edges[1].row(1) == d.edges[1].row(9));
  const auto [t2, h2] = split_subjects(d, 0.25);
  CHECK(t2.num_subjects() == 8);
  CHECK(h2.num_subjects() == 2);
  CHECK_THROWS_AS(split_subjects(d, 0.0), ConfigError);
  CHECK_THROWS_AS(split_subjects(d, 1.0), ConfigError);
}
