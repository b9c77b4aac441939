#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "mvjl/distributions.hpp"
#include "mvjl/errors.hpp"

using namespace mvjl;

namespace {

Eigen::VectorXd draws(int n, auto&& fn) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = fn();
  return x;
}

// Mean within 4 standard errors.
void check_mean(const Eigen::VectorXd& x, double mean, double var) {
  CHECK(std::abs(x.mean() - mean) < 4.0 * std::sqrt(var / static_cast<double>(x.size())));
}

}  // namespace

TEST_CASE("rng streams are reproducible and split by seed offset") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  Rng c = Rng(40).split(2), d(42);
  for (int i = 0; i < 10; ++i) CHECK(c.normal() == d.normal());
  Rng u(3);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("scalar samplers match their moments") {
  Rng rng(1);
  constexpr int n = 200000;
  check_mean(draws(n, [&] { return sample_normal(1.5, 2.0, rng); }), 1.5, 4.0);
  for (double shape : {0.3, 1.0, 4.5}) {
    const auto g = draws(n, [&] { return sample_gamma(shape, 2.0, rng); });
    check_mean(g, shape / 2.0, shape / 4.0);
    CHECK(fixtures::sample_var(g) == doctest::Approx(shape / 4.0).epsilon(0.03));
  }
  // Mean b/(a-1), variance b^2/((a-1)^2 (a-2)).
  const auto ig = draws(n, [&] { return sample_inverse_gamma(6.0, 10.0, rng); });
  check_mean(ig, 2.0, 100.0 / (25.0 * 4.0));
  const auto be = draws(n, [&] { return sample_beta(2.0, 5.0, rng); });
  check_mean(be, 2.0 / 7.0, 10.0 / (49.0 * 8.0));
  const auto bern = draws(n, [&] { return sample_bernoulli(0.3, rng) ? 1.0 : 0.0; });
  check_mean(bern, 0.3, 0.21);
}

TEST_CASE("invalid distribution parameters throw") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_inverse_gamma(0.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(sample_inverse_gamma(1.0, -1.0, rng), DomainError);
  CHECK_THROWS_AS(sample_gamma(-1.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(sample_beta(0.0, 1.0, rng), DomainError);
}

TEST_CASE("log categorical follows normalized weights and skips -inf") {
  Rng rng(5);
  const std::vector<double> w = {std::log(1.0), std::log(3.0), -std::numeric_limits<double>::infinity(), std::log(6.0)};
  std::vector<int> count(4, 0);
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) ++count[static_cast<std::size_t>(sample_log_categorical(w, rng))];
  CHECK(count[2] == 0);
  CHECK(count[0] / double(n) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(count[1] / double(n) == doctest::Approx(0.3).epsilon(0.02));
  CHECK(count[3] / double(n) == doctest::Approx(0.6).epsilon(0.02));
  // Huge offsets must not overflow.
  const std::vector<double> big = {1000.0, 1000.0 + std::log(3.0)};
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sample_log_categorical(big, rng);
  CHECK(ones / double(n) == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("log_sum_exp") {
  const std::vector<double> v = {-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
  const std::vector<double> w = {0.0, std::log(2.0), std::log(5.0)};
  CHECK(log_sum_exp(w) == doctest::Approx(std::log(8.0)));
}

TEST_CASE("densities") {
  CHECK(log_normal_pdf(1.0, 0.0, 4.0) == doctest::Approx(-0.5 * std::log(8.0 * M_PI) - 0.125));
  // IG(a, b) density b^a / Gamma(a) x^{-a-1} exp(-b/x) at a=3, b=2, x=0.5.
  CHECK(log_inverse_gamma_pdf(0.5, 3.0, 2.0) == doctest::Approx(3 * std::log(2.0) - std::log(2.0) + 4 * std::log(2.0) - 4.0));
  // Beta(2, 3) at 0.25: 12 * 0.25 * 0.75^2.
  CHECK(log_beta_pdf(0.25, 2.0, 3.0) == doctest::Approx(std::log(12.0 * 0.25 * 0.5625)));
}

TEST_CASE("multivariate normal draws have the requested covariance") {
  Rng rng(9);
  Eigen::Vector3d mean(1.0, -2.0, 0.5);
  Eigen::Matrix3d cov;
  cov << 2.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 0.5;
  constexpr int n = 200000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d x = sample_mvn(mean, cov, rng);
    sum += x;
    outer += x * x.transpose();
  }
  const Eigen::Vector3d m = sum / n;
  const Eigen::Matrix3d c = outer / n - m * m.transpose();
  CHECK((m - mean).cwiseAbs().maxCoeff() < 0.02);
  CHECK((c - cov).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("inverse Wishart mean is scale / (nu - p - 1)") {
  Rng rng(17);
  Eigen::Matrix2d scale;
  scale << 3.0, 1.0, 1.0, 2.0;
  const double nu = 8.0;
  constexpr int n = 100000;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) sum += sample_inverse_wishart(nu, scale, rng);
  const Eigen::Matrix2d expected = scale / (nu - 2.0 - 1.0);
  CHECK(((sum / n) - expected).cwiseAbs().maxCoeff() < 0.02);
  CHECK_THROWS_AS(sample_inverse_wishart(0.5, scale, rng), DomainError);
}

TEST_CASE("Dirichlet draws lie on the simplex with the right mean") {
  Rng rng(21);
  Eigen::Vector3d alpha(4.0, 1.0, 1.0);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = sample_dirichlet(alpha, rng);
    REQUIRE(x.sum() == doctest::Approx(1.0));
    REQUIRE(x.minCoeff() >= 0.0);
    sum += x;
  }
  CHECK(((sum / n) - alpha / 6.0).cwiseAbs().maxCoeff() < 0.005);
}

TEST_CASE("jittered Cholesky rescues near-singular input and reports failures") {
  Eigen::Matrix2d singular;
  singular << 1.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd l = jittered_cholesky(singular);
  CHECK(((l * l.transpose()) - singular).cwiseAbs().maxCoeff() < 1e-6);

  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 0.0, 0.0, -1.0;
  try {
    (void)jittered_cholesky(indefinite);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.min_eigenvalue() == doctest::Approx(-1.0));
  }
}

TEST_CASE("low-rank Gaussian log density equals the dense computation") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3 + static_cast<int>(rng.below(8));
    const int q = 1 + static_cast<int>(rng.below(4));
    Eigen::VectorXd z(d), a(d);
    Eigen::MatrixXd u(d, q);
    for (int i = 0; i < d; ++i) {
      z[i] = rng.normal();
      a[i] = 0.2 + rng.uniform();
      for (int j = 0; j < q; ++j) u(i, j) = rng.normal();
    }
    Eigen::MatrixXd g(q, q);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
    const Eigen::MatrixXd j = g * g.transpose() + 0.5 * Eigen::MatrixXd::Identity(q, q);

    const Eigen::MatrixXd cov = Eigen::MatrixXd(a.asDiagonal()) + u * j * u.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const double quad = z.dot(llt.solve(z));
    const double dense = -0.5 * (d * std::log(2.0 * M_PI) + logdet + quad);
    CHECK(log_mvn_lowrank(z, a, u, j) == doctest::Approx(dense).epsilon(1e-12));
  }
}
