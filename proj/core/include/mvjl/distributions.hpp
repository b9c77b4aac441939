#pragma once

#include <span>

#include <Eigen/Dense>

#include "mvjl/rng.hpp"

namespace mvjl {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// ---- scalar draws -----------------------------------------------------------

double sample_normal(double mean, double sd, Rng& rng);
/// Gamma with shape a and rate b (mean a / b).
double sample_gamma(double shape, double rate, Rng& rng);
double sample_beta(double a, double b, Rng& rng);
bool sample_bernoulli(double p, Rng& rng);

/// Inverse gamma parameterized so that 1/X ~ Gamma(shape = a, rate = b);
/// mean b / (a - 1) for a > 1. Throws DomainError unless a, b > 0.
double sample_inverse_gamma(double a, double b, Rng& rng);

/// Index drawn with probability proportional to exp(log_weights[j]).
/// Normalized with log-sum-exp; -inf weights are never drawn.
int sample_log_categorical(std::span<const double> log_weights, Rng& rng);

// ---- vector and matrix draws --------------------------------------------------

/// Lower Cholesky factor of `cov`. On failure adds 1e-10 * trace/d to the
/// diagonal, escalating by x10 up to three times; then throws NumericalError
/// carrying the smallest eigenvalue of `cov`.
Eigen::MatrixXd jittered_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& cov);

/// N(mean, cov) via Cholesky of cov.
Eigen::VectorXd sample_mvn(const Eigen::Ref<const Eigen::VectorXd>& mean,
                           const Eigen::Ref<const Eigen::MatrixXd>& cov, Rng& rng);

/// Inverse Wishart IW(nu, scale) with mean scale / (nu - p - 1). Drawn as the
/// inverse of a Bartlett-decomposed Wishart(nu, scale^-1). Requires nu > p - 1.
Eigen::MatrixXd sample_inverse_wishart(double nu, const Eigen::Ref<const Eigen::MatrixXd>& scale, Rng& rng);

/// Normalized independent Gamma(alpha_j, 1) draws.
Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& alpha, Rng& rng);

// ---- densities --------------------------------------------------------------

double log_normal_pdf(double x, double mean, double variance);
double log_inverse_gamma_pdf(double x, double a, double b);
double log_beta_pdf(double x, double a, double b);

/// log N(z | 0, diag(noise_diag) + U J U^T) through the Woodbury identity and
/// the matrix-determinant lemma; O(d q^2 + q^3) and never forms the d x d
/// covariance. Throws NumericalError if J or the capacitance matrix
/// J^-1 + U^T A^-1 U is not positive definite.
double log_mvn_lowrank(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& noise_diag,
                       const Eigen::Ref<const Eigen::MatrixXd>& u, const Eigen::Ref<const Eigen::MatrixXd>& j);

double log_sum_exp(std::span<const double> values);

}  // namespace mvjl
