#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "mvjl/errors.hpp"
#include "mvjl/model.hpp"

using namespace mvjl;

TEST_CASE("edge index enumerates the upper triangle row-major") {
  EdgeIndex idx(5);
  CHECK(idx.num_edges() == 10);
  CHECK(num_pairs(40) == 780);
  int q = 0;
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b, ++q) {
      CHECK(idx.index(a, b) == q);
      CHECK(idx.index(b, a) == q);
      CHECK(idx.pair(q) == std::make_pair(a, b));
    }
  for (int k = 0; k < 5; ++k) {
    const auto& inc = idx.incident(k);
    REQUIRE(inc.size() == 4u);
    int prev = -1;
    for (const auto& [other, edge] : inc) {
      CHECK(other != k);
      CHECK(other > prev);
      CHECK(edge == idx.index(k, other));
      prev = other;
    }
  }
}

TEST_CASE("model config validation") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate(2));
  CHECK(c.resolved_nu(2) == 12.0);
  CHECK(c.retained_draws() == 2000);
  SUBCASE("omega must exceed one") {
    c.omega = 1.0;
    CHECK_THROWS_AS(c.validate(2), ConfigError);
  }
  SUBCASE("burn-in shorter than the run") {
    c.n_burnin = c.n_iter;
    CHECK_THROWS_AS(c.validate(2), ConfigError);
  }
  SUBCASE("thin at least one") {
    c.thin = 0;
    CHECK_THROWS_AS(c.validate(2), ConfigError);
  }
  SUBCASE("inverse-Wishart dof above RM - 1") {
    c.nu = 9.0;
    CHECK_THROWS_AS(c.validate(2), ConfigError);
  }
  SUBCASE("positive prior parameters") {
    c.b_sigma = 0.0;
    CHECK_THROWS_AS(c.validate(2), ConfigError);
  }
}

TEST_CASE("coefficient matrix equals the signed low-rank sum") {
  Rng rng(3);
  ModelConfig c;
  c.rank = 3;
  const auto s = fixtures::random_state(c, 6, 2, 2, 1, rng);
  for (int p = 0; p < 2; ++p)
    for (int m = 0; m < 2; ++m) {
      const Eigen::VectorXd expected = fixtures::naive_coefficient(s, p, m);
      const Eigen::VectorXd got = coefficient(s, p, m);
      CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-14);
      const Eigen::VectorXi signs = s.rank_sign[static_cast<std::size_t>(p)].col(m);
      CHECK((build_coefficient_matrix(s.latent_block(p, m), signs) - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("zero signs or excluded nodes give zero coefficients") {
  Eigen::MatrixXd b(3, 2);
  b << 1, 2, 3, 4, 0, 0;
  const Eigen::VectorXd g = build_coefficient_matrix(b, Eigen::Vector2i(0, 0));
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd h = build_coefficient_matrix(b, Eigen::Vector2i(1, -1));
  // (0,1): 1*3 - 2*4, (0,2) and (1,2) touch the zero row.
  CHECK(h[0] == doctest::Approx(-5.0));
  CHECK(h[1] == 0.0);
  CHECK(h[2] == 0.0);
}

TEST_CASE("linear predictor and log likelihood match the element-wise model") {
  Rng rng(11);
  ModelConfig c;
  c.rank = 2;
  const auto d = fixtures::random_dataset(4, 5, 2, 2, 2, rng);
  const auto s = fixtures::random_state(c, 5, 2, 2, 2, rng);
  for (int i = 0; i < 4; ++i)
    for (int m = 0; m < 2; ++m) {
      const Eigen::VectorXd u = linear_predictor(s, d, i, m);
      for (int q = 0; q < d.num_edges(); ++q) CHECK(u[q] == doctest::Approx(fixtures::naive_mean(s, d, i, m, q)));
    }
  CHECK(log_likelihood(s, d) == doctest::Approx(fixtures::naive_log_likelihood(s, d)).epsilon(1e-12));
}

TEST_CASE("parameter state invariants") {
  Rng rng(5);
  ModelConfig c;
  c.rank = 2;
  auto s = fixtures::random_state(c, 4, 2, 1, 1, rng);
  CHECK_NOTHROW(s.validate());
  SUBCASE("excluded node with nonzero latent vector") {
    s.latent[0](1, 0) = 0.3;
    CHECK_THROWS_AS(s.validate(), InvalidStateError);
  }
  SUBCASE("non-positive noise variance") {
    s.noise_variance[1] = 0.0;
    CHECK_THROWS_AS(s.validate(), InvalidStateError);
  }
  SUBCASE("rank probabilities off the simplex") {
    s.rank_probability[0](0, 0) += 0.2;
    CHECK_THROWS_AS(s.validate(), InvalidStateError);
  }
  SUBCASE("indefinite slab covariance") {
    s.slab_covariance[0](0, 0) = -1.0;
    CHECK_THROWS_AS(s.validate(), InvalidStateError);
  }
  SUBCASE("node density at the boundary") {
    s.node_density[0] = 1.0;
    CHECK_THROWS_AS(s.validate(), InvalidStateError);
  }
}

TEST_CASE("dataset shape checks and views") {
  Rng rng(2);
  auto d = fixtures::random_dataset(5, 4, 3, 1, 1, rng);
  CHECK_NOTHROW(d.validate());
  CHECK(d.all_continuous());
  const auto v = d.view(2);
  CHECK(v.num_views() == 1);
  CHECK(v.edges[0] == d.edges[2]);
  const auto sub = d.subset(1, 3);
  CHECK(sub.num_subjects() == 3);
  CHECK(sub.subject_ids.front() == "s2");
  CHECK(sub.edges[1].row(0) == d.edges[1].row(1));
  d.edges[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(d.validate(), ConfigError);
}
