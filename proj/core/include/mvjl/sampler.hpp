#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "mvjl/dataset.hpp"
#include "mvjl/model.hpp"
#include "mvjl/rng.hpp"

namespace mvjl {

struct NormalConditional {
  double mean = 0.0;
  double variance = 1.0;
};

/// 1/X ~ Gamma(shape, rate).
struct InverseGammaConditional {
  double shape = 1.0;
  double rate = 1.0;
};

struct BetaConditional {
  double a = 1.0;
  double b = 1.0;
};

struct InverseWishartConditional {
  double dof = 0.0;
  Eigen::MatrixXd scale;
};

/// Collapsed spike-and-slab conditional of one node's stacked latent vector.
/// `log_odds` is log P(xi = 1 | -) - log P(xi = 0 | -) with the latent vector
/// integrated out; mean/covariance describe the slab given xi = 1.
struct NodeBlockConditional {
  double log_odds = 0.0;
  double inclusion_probability = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Deliberate sampler corruptions used to show that the Geweke harness has power.
enum class Fault {
  kNone,
  kHalvedInterceptVariance,
};

struct SamplerOptions {
  Fault fault = Fault::kNone;
};

/// Gibbs sampler for the multiview graph regression model.
///
/// Holds the current ParameterState together with cached edge coefficients
/// and residuals y - mu - sum_p x_p gamma_p - sum x_aux alpha for every view,
/// so each full-conditional update costs time proportional to the data it
/// touches. The dataset must outlive the sampler.
///
/// Each `*_conditional` accessor returns the parameters of the full
/// conditional at the current state without drawing; the matching `update_*`
/// draws from it, writes the result into the state and refreshes the caches.
class GibbsSampler {
 public:
  GibbsSampler(const MultiviewDataset& data, const ModelConfig& config, SamplerOptions options = {});

  /// Overdispersed start: per-view edge mean/variance for mu/sigma^2, alpha = 0,
  /// eta = 0.5, all nodes included with latent ~ N(0, 0.1 I), all rank signs
  /// +1, rank probabilities at their prior mean, J = I.
  void initialize(Rng& rng);

  void set_state(ParameterState state);
  /// Point the sampler at new data of the same shape (Geweke harness).
  void rebind(const MultiviewDataset& data);

  const ParameterState& state() const noexcept { return state_; }
  const ModelConfig& config() const noexcept { return config_; }
  const MultiviewDataset& data() const noexcept { return *data_; }

  /// Cached gamma_{p,m,.}.
  const Eigen::VectorXd& coefficient(int p, int m) const { return gamma_[slot(p, m)]; }
  /// Cached residual matrix (n x Q) of view m.
  const Eigen::MatrixXd& residual(int m) const { return resid_[static_cast<std::size_t>(m)]; }

  double log_likelihood() const;
  int active_count() const;

  NormalConditional intercept_conditional(int m) const;
  double update_intercept(int m, Rng& rng);

  InverseGammaConditional noise_variance_conditional(int m) const;
  double update_noise_variance(int m, Rng& rng);

  NormalConditional auxiliary_conditional(int m, int aux) const;
  double update_auxiliary(int m, int aux, Rng& rng);

  NodeBlockConditional node_block_conditional(int p, int k) const;
  void update_node_block(int p, int k, Rng& rng);

  /// Unnormalized log probabilities of rank sign (0, +1, -1) for (p, m, r):
  /// log prior weight plus the log-likelihood change relative to the current
  /// sign, so only differences between entries are meaningful.
  std::array<double, 3> rank_sign_log_weights(int p, int m, int r) const;
  int update_rank_sign(int p, int m, int r, Rng& rng);

  InverseWishartConditional latent_covariance_conditional(int p) const;
  const Eigen::MatrixXd& update_latent_covariance(int p, Rng& rng);

  /// Dirichlet parameters for the (0, +1, -1) probabilities of (p, m, r).
  Eigen::Vector3d rank_probability_conditional(int p, int m, int r) const;
  Eigen::Vector3d update_rank_probabilities(int p, int m, int r, Rng& rng);

  BetaConditional node_density_conditional(int p) const;
  double update_node_density(int p, Rng& rng);

  /// One full scan in the fixed order: intercepts, noise variances,
  /// auxiliary coefficients, node blocks (p outer, k inner), rank signs,
  /// slab covariances, rank probabilities, node densities.
  void sweep(Rng& rng);

 private:
  std::size_t slot(int p, int m) const noexcept { return static_cast<std::size_t>(p * num_views_ + m); }
  void rebuild_caches();
  void refresh_slab_inverse(int p);
  // sum_i x_{i,p} * (partial residual) on the edges incident to k, per view:
  // (K-1) x M, rows in EdgeIndex::incident(k) order.
  Eigen::MatrixXd node_scores(int p, int k) const;
  Eigen::MatrixXd other_nodes(int p, int k, int m) const;

  const MultiviewDataset* data_;
  ModelConfig config_;
  SamplerOptions options_;
  EdgeIndex index_;
  int num_views_ = 0;
  int rank_ = 0;
  double nu_ = 0.0;

  ParameterState state_;
  std::vector<Eigen::VectorXd> gamma_;        // P*M entries of length Q
  std::vector<Eigen::MatrixXd> resid_;        // M entries, n x Q
  Eigen::VectorXd key_sq_;                    // sum_i x_{i,p}^2
  Eigen::VectorXd aux_sq_;                    // sum_i xaux_{i,p}^2
  std::vector<Eigen::MatrixXd> slab_inverse_;  // J_p^-1
  std::vector<double> slab_log_det_;
};

/// Prior draw of the (0, +1, -1) probabilities of rank r (1-based):
/// Dirichlet(r^omega, 1, 1).
Eigen::Vector3d sample_rank_probabilities(int r, double omega, Rng& rng);

/// Sign in {0, +1, -1} drawn with probabilities `prob` (same order).
int sample_rank_sign(const Eigen::Vector3d& prob, Rng& rng);

/// Draw every unknown from the prior: eta ~ Beta(a_eta, b_eta), xi ~ Bern(eta),
/// J ~ IW(nu, I), latent ~ N(0, J) for included nodes, rank probabilities
/// ~ Dirichlet(r^omega, 1, 1), signs from them, mu, alpha ~ N(0, 1),
/// sigma^2 ~ IG(a_sigma, b_sigma).
ParameterState sample_from_prior(const ModelConfig& config, int num_nodes, int num_views, int num_key,
                                 int num_auxiliary, Rng& rng);

/// Replace every edge weight of `data` by a draw from the Gaussian model at `state`.
void redraw_edges(const ParameterState& state, MultiviewDataset& data, Rng& rng);

}  // namespace mvjl
