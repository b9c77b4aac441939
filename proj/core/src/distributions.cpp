#include "mvjl/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mvjl/errors.hpp"

namespace mvjl {

double sample_normal(double mean, double sd, Rng& rng) { return mean + sd * rng.normal(); }

double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(rate > 0.0)) throw DomainError("gamma rate must be positive");
  return rng.gamma(shape) / rate;
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta parameters must be positive");
  const double x = rng.gamma(a);
  const double y = rng.gamma(b);
  return x / (x + y);
}

bool sample_bernoulli(double p, Rng& rng) { return rng.uniform() < p; }

double sample_inverse_gamma(double a, double b, Rng& rng) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("inverse-gamma parameters must be positive");
  return b / rng.gamma(a);
}

double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

int sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) throw DomainError("categorical weights are all zero or non-finite");
  double u = rng.uniform();
  const int last = static_cast<int>(log_weights.size()) - 1;
  for (int j = 0; j < last; ++j) {
    u -= std::exp(log_weights[static_cast<std::size_t>(j)] - norm);
    if (u < 0.0) return j;
  }
  // Rounding leftovers go to the last branch with positive weight.
  for (int j = last; j >= 0; --j)
    if (log_weights[static_cast<std::size_t>(j)] > -std::numeric_limits<double>::infinity()) return j;
  return last;
}

Eigen::MatrixXd jittered_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  const auto d = cov.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  double jitter = 1e-10 * cov.trace() / static_cast<double>(d);
  if (!(jitter > 0.0)) jitter = 1e-10;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd bumped = cov;
    bumped.diagonal().array() += jitter;
    llt.compute(bumped);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter *= 10.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double min_eig = eig.info() == Eigen::Success ? eig.eigenvalues().minCoeff()
                                                       : std::numeric_limits<double>::quiet_NaN();
  throw NumericalError("Cholesky factorization failed after jitter escalation (min eigenvalue " +
                           std::to_string(min_eig) + ")",
                       min_eig);
}

Eigen::VectorXd sample_mvn(const Eigen::Ref<const Eigen::VectorXd>& mean,
                           const Eigen::Ref<const Eigen::MatrixXd>& cov, Rng& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw ConfigError("mvn covariance shape mismatch");
  const Eigen::MatrixXd l = jittered_cholesky(cov);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
  return mean + l.triangularView<Eigen::Lower>() * z;
}

Eigen::MatrixXd sample_inverse_wishart(double nu, const Eigen::Ref<const Eigen::MatrixXd>& scale, Rng& rng) {
  const auto p = scale.rows();
  if (scale.cols() != p) throw ConfigError("inverse-Wishart scale must be square");
  if (!(nu > static_cast<double>(p) - 1.0))
    throw DomainError("inverse-Wishart dof " + std::to_string(nu) + " must exceed p - 1 = " + std::to_string(p - 1));
  // Bartlett factor A of Wishart(nu, I): A_ii^2 ~ chi^2(nu - i), A_ij ~ N(0,1) below the diagonal.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(2.0 * rng.gamma(0.5 * (nu - static_cast<double>(i))));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  // W = M A A^T M^T with M M^T = scale^-1; taking M = L^-T for scale = L L^T
  // gives W^-1 = L (A A^T)^-1 L^T = (L A^-T)(L A^-T)^T.
  const Eigen::MatrixXd l = jittered_cholesky(scale);
  const Eigen::MatrixXd a_inv_t =
      a.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(p, p)).transpose();
  const Eigen::MatrixXd f = l.triangularView<Eigen::Lower>() * a_inv_t;
  Eigen::MatrixXd out = f * f.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& alpha, Rng& rng) {
  if (alpha.size() == 0 || (alpha.array() <= 0.0).any()) throw DomainError("Dirichlet parameters must be positive");
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index j = 0; j < alpha.size(); ++j) g[j] = rng.gamma(alpha[j]);
  return g / g.sum();
}

double log_normal_pdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + r * r / variance);
}

double log_inverse_gamma_pdf(double x, double a, double b) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

double log_beta_pdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return -std::numeric_limits<double>::infinity();
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double log_mvn_lowrank(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& noise_diag,
                       const Eigen::Ref<const Eigen::MatrixXd>& u, const Eigen::Ref<const Eigen::MatrixXd>& j) {
  const auto d = z.size();
  const auto q = u.cols();
  if (noise_diag.size() != d || u.rows() != d || j.rows() != q || j.cols() != q)
    throw ConfigError("log_mvn_lowrank dimension mismatch");
  if ((noise_diag.array() <= 0.0).any()) throw DomainError("noise diagonal must be strictly positive");

  const Eigen::ArrayXd inv_a = noise_diag.array().inverse();
  double log_det = noise_diag.array().log().sum();
  double quad = (z.array().square() * inv_a).sum();
  if (q == 0) return -0.5 * (static_cast<double>(d) * kLog2Pi + log_det + quad);

  Eigen::LLT<Eigen::MatrixXd> j_llt(j);
  if (j_llt.info() != Eigen::Success) throw NumericalError("slab covariance J is not positive definite");
  const Eigen::MatrixXd j_inv = j_llt.solve(Eigen::MatrixXd::Identity(q, q));
  const Eigen::MatrixXd scaled_u = inv_a.matrix().asDiagonal() * u;
  Eigen::MatrixXd capacitance = j_inv + u.transpose() * scaled_u;
  capacitance = 0.5 * (capacitance + capacitance.transpose());
  Eigen::LLT<Eigen::MatrixXd> c_llt(capacitance);
  if (c_llt.info() != Eigen::Success) throw NumericalError("capacitance matrix J^-1 + U^T A^-1 U is singular");
  const Eigen::VectorXd b = scaled_u.transpose() * z;

  const Eigen::MatrixXd lj = j_llt.matrixL();
  const Eigen::MatrixXd lc = c_llt.matrixL();
  log_det += 2.0 * lj.diagonal().array().log().sum() + 2.0 * lc.diagonal().array().log().sum();
  quad -= b.dot(c_llt.solve(b));
  return -0.5 * (static_cast<double>(d) * kLog2Pi + log_det + quad);
}

}  // namespace mvjl
