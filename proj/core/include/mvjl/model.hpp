#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "mvjl/dataset.hpp"

namespace mvjl {

/// Fitted rank, hyperparameters and MCMC schedule.
struct ModelConfig {
  int rank = 5;              // R
  double omega = 2.0;        // Dirichlet decay exponent, > 1
  double a_eta = 1.0;        // Beta prior on node density
  double b_eta = 1.0;
  double a_sigma = 1.0;      // inverse-gamma prior on noise variances
  double b_sigma = 1.0;
  std::optional<double> nu;  // inverse-Wishart dof; unset means R*M + 2
  int n_iter = 5000;
  int n_burnin = 1000;
  int thin = 2;
  std::uint64_t seed = 1;

  double resolved_nu(int num_views) const { return nu.value_or(rank * num_views + 2.0); }
  int retained_draws() const { return (n_iter - n_burnin) / thin; }

  /// Throws ConfigError unless omega > 1, nu > RM - 1, n_burnin < n_iter,
  /// thin >= 1 and all prior parameters are positive.
  void validate(int num_views) const;
};

/// One draw of every model unknown.
///
/// Latent vectors are stored per key predictor p as a K x (R*M) matrix whose
/// row k is the stacked vector (beta_{p,1,k}, ..., beta_{p,M,k}); the view-m
/// block is columns [m*R, (m+1)*R). Rank-sign probabilities for (p, m, r) sit
/// in column m*R + r of rank_probability[p] as (P[0], P[+1], P[-1]).
struct ParameterState {
  Eigen::VectorXd intercept;                       // M
  Eigen::VectorXd noise_variance;                  // M
  Eigen::MatrixXd aux_coef;                        // P_aux x M
  std::vector<Eigen::MatrixXd> latent;             // P x [K x RM]
  Eigen::MatrixXi inclusion;                       // P x K, entries 0/1
  std::vector<Eigen::MatrixXi> rank_sign;          // P x [R x M], entries -1/0/1
  std::vector<Eigen::MatrixXd> rank_probability;   // P x [3 x RM]
  std::vector<Eigen::MatrixXd> slab_covariance;    // P x [RM x RM]
  Eigen::VectorXd node_density;                    // P

  static ParameterState zeros(int num_nodes, int num_views, int num_key, int num_auxiliary, int rank);

  int num_views() const noexcept { return static_cast<int>(intercept.size()); }
  int num_key() const noexcept { return static_cast<int>(latent.size()); }
  int num_auxiliary() const noexcept { return static_cast<int>(aux_coef.rows()); }
  int num_nodes() const noexcept { return static_cast<int>(inclusion.cols()); }
  int rank() const noexcept { return rank_sign.empty() ? 0 : static_cast<int>(rank_sign.front().rows()); }

  /// K x R latent block for key predictor p and view m.
  auto latent_block(int p, int m) const { return latent[static_cast<std::size_t>(p)].middleCols(m * rank(), rank()); }

  /// Throws InvalidStateError on any broken invariant: spike consistency,
  /// simplex rank probabilities, SPD slab covariances, positive noise
  /// variances, node densities in (0, 1).
  void validate() const;

  /// Throws ConfigError when this state does not fit `data`.
  void check_compatible(const MultiviewDataset& data) const;
};

/// Upper triangle of B diag(signs) B^T, i.e. for every pair (k1, k2)
/// gamma = sum_r signs[r] * B(k1, r) * B(k2, r).
Eigen::VectorXd build_coefficient_matrix(const Eigen::Ref<const Eigen::MatrixXd>& latent_block,
                                         const Eigen::Ref<const Eigen::VectorXi>& signs);

/// Edge coefficients of key predictor p on view m.
Eigen::VectorXd coefficient(const ParameterState& state, int p, int m);

/// Mean edge weights u_{i,m,.} under the identity link.
Eigen::VectorXd linear_predictor(const ParameterState& state, const MultiviewDataset& data, int subject, int view);

/// Sum over subjects, views and edges of log N(y | u, sigma^2_m).
double log_likelihood(const ParameterState& state, const MultiviewDataset& data);

}  // namespace mvjl
