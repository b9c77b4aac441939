#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "mvjl/dataset.hpp"
#include "mvjl/model.hpp"
#include "mvjl/rng.hpp"
#include "mvjl/sampler.hpp"

namespace mvjl {

/// Retained post-burn-in, thinned draws. Every matrix has one row per draw.
struct ChainOutput {
  int num_nodes = 0;
  int num_views = 0;
  int num_key = 0;
  int num_auxiliary = 0;
  int rank = 0;
  int n_iter = 0;
  int n_burnin = 0;
  int thin = 1;
  std::uint64_t seed = 0;

  Eigen::MatrixXd intercept;       // draws x M
  Eigen::MatrixXd noise_variance;  // draws x M
  Eigen::MatrixXd aux_coef;        // draws x (M * P_aux), column aux_column(m, a)
  Eigen::MatrixXd node_density;    // draws x P
  Eigen::MatrixXi rank_sign;       // draws x (P * M * R), column sign_column(p, m, r)
  Eigen::MatrixXi inclusion;       // draws x (P * K), column p * K + k
  Eigen::MatrixXd coefficients;    // draws x (P * M * Q), column coefficient_column(p, m, q)
  Eigen::VectorXd log_likelihood;  // draws

  int draws() const noexcept { return static_cast<int>(intercept.rows()); }
  int num_edges() const noexcept { return num_pairs(num_nodes); }

  int aux_column(int m, int a) const noexcept { return m * num_auxiliary + a; }
  int sign_column(int p, int m, int r) const noexcept { return (p * num_views + m) * rank + r; }
  int inclusion_column(int p, int k) const noexcept { return p * num_nodes + k; }
  int coefficient_column(int p, int m, int q) const noexcept { return (p * num_views + m) * num_edges() + q; }

  /// Draws of gamma_{p,m,.} as a draws x Q block.
  auto coefficient_draws(int p, int m) const {
    return coefficients.middleCols(coefficient_column(p, m, 0), num_edges());
  }

  /// Allocate storage for `draws` rows with the given shape.
  void resize(int draws);
};

/// Called once every `progress_every` sweeps with (iteration, log-likelihood, active nodes).
using ProgressFn = std::function<void(int, double, int)>;

struct RunOptions {
  SamplerOptions sampler;
  ProgressFn progress;
  int progress_every = 100;
};

/// Run a chain of config.n_iter sweeps from the default initialization and
/// keep every thin-th sweep after burn-in: floor((n_iter - n_burnin) / thin)
/// draws. Deterministic given `rng`. Numerical failures are rethrown with the
/// iteration index attached.
ChainOutput run_chain(const MultiviewDataset& data, const ModelConfig& config, Rng& rng, const RunOptions& options = {});

/// Independent-learning fit: one M = 1 chain per view, all sharing `config`
/// and seeded from `rng` in view order. The per-view outputs are returned in
/// view order.
std::vector<ChainOutput> run_independent_chains(const MultiviewDataset& data, const ModelConfig& config, Rng& rng,
                                                const RunOptions& options = {});

/// Stack per-view single-view outputs into one M-view output (coefficients,
/// intercepts, noise variances, auxiliary coefficients). Inclusion, rank
/// signs and node densities are view specific and are left empty.
ChainOutput merge_view_chains(const std::vector<ChainOutput>& per_view);

}  // namespace mvjl
