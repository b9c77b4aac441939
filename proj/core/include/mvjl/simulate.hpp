#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvjl/dataset.hpp"
#include "mvjl/model.hpp"
#include "mvjl/rng.hpp"

namespace mvjl {

/// Synthetic-data design: one key and one auxiliary predictor, M continuous
/// views, node activity ~ Bernoulli(node_density) and true latent rank
/// `true_rank`. Also carries the fitted rank and MCMC schedule used to fit it.
struct Scenario {
  std::string name;
  int n = 150;
  int num_nodes = 40;
  int num_views = 2;
  double node_density = 0.5;
  int true_rank = 3;
  int fitted_rank = 5;
  std::vector<double> noise_variance = {1.0, 0.5};
  std::vector<double> intercept = {0.2, 0.8};
  std::vector<double> aux_coef = {0.4, -0.1};
  double latent_correlation = 0.5;  // off-diagonal of the true latent covariance
  int replications = 1;
  std::uint64_t seed = 1;
  int n_iter = 5000;
  int n_burnin = 1000;
  int thin = 2;

  /// Throws ConfigError on node_density outside [0, 1], true_rank > fitted_rank,
  /// non-positive noise variance or per-view vectors of the wrong length.
  void validate() const;

  /// Default hyperparameters with this scenario's fitted rank and schedule.
  ModelConfig model_config() const;
};

/// Simulation truth. Indexed like the fitted model with P = 1.
struct SyntheticTruth {
  int num_nodes = 0;
  int num_views = 0;
  int true_rank = 0;
  Eigen::MatrixXi inclusion;                  // P x K
  Eigen::MatrixXd latent;                     // K x (M * true_rank), view-major blocks
  Eigen::VectorXd latent_mean;                // M * true_rank
  std::vector<Eigen::VectorXd> coefficients;  // P * M entries of length Q, index p * M + m
  Eigen::VectorXd intercept;                  // M
  Eigen::VectorXd noise_variance;             // M
  Eigen::MatrixXd aux_coef;                   // P_aux x M

  int num_key() const noexcept { return static_cast<int>(inclusion.rows()); }
  const Eigen::VectorXd& coefficient(int p, int m) const {
    return coefficients[static_cast<std::size_t>(p * num_views + m)];
  }
};

/// Draw node activity, latent mean (entries N(0, 1), redrawn per call) and
/// latent vectors N(latent_mean, Sigma) for active nodes, with Sigma having unit
/// diagonal and `latent_correlation` off the diagonal. The true coefficient of
/// pair (a, b) on view m is beta_{m,a}^T beta_{m,b} / 2.
SyntheticTruth generate_truth(const Scenario& scenario, Rng& rng);

/// Predictors i.i.d. N(0, 1); edges from the identity-link Gaussian model.
MultiviewDataset generate_dataset(const SyntheticTruth& truth, const Scenario& scenario, Rng& rng);

/// The six simulation designs of the published study (n = 150, K = 40).
std::vector<Scenario> scenario_table();

/// table1-1 .. table1-6 plus the scaled desk-small (K = 20) and desk-tiny (K = 10) variants.
std::vector<Scenario> scenario_registry();
std::optional<Scenario> find_scenario(const std::string& name);

/// First ceil((1 - heldout_fraction) * n) subjects for training, the rest held out.
std::pair<MultiviewDataset, MultiviewDataset> split_subjects(const MultiviewDataset& data, double heldout_fraction);

}  // namespace mvjl
