#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvjl/dataset.hpp"
#include "mvjl/model.hpp"
#include "mvjl/sampler.hpp"

namespace mvjl {

// ---- prior diagnostics -------------------------------------------------------

struct PriorDiagnosticsOptions {
  int rank = 2;
  double omega = 2.0;
  long long draws = 1'000'000;
  int moment_ranks = 5;  // E|lambda^(r)| is estimated for r = 1..moment_ranks
  std::uint64_t seed = 7;
};

struct RankMoment {
  int r = 0;
  double estimate = 0.0;
  double se = 0.0;
  double expected = 0.0;  // 2 / (2 + r^omega)
  bool pass = false;      // within 3 standard errors
};

struct PriorDiagnostics {
  double all_positive_estimate = 0.0;  // Monte Carlo P(lambda^(1) = ... = lambda^(R) = 1)
  double all_positive_se = 0.0;
  double all_positive_exact = 0.0;  // prod_r 1 / (2 + r^omega)
  double all_positive_bound = 0.0;  // 1 / (2 + R^omega)^R
  bool within_3se = false;
  bool above_bound = false;
  std::vector<RankMoment> moments;

  bool pass() const;
};

/// Draws rank probabilities ~ Dirichlet(r^omega, 1, 1) and signs from them
/// through the same primitives the sampler's prior uses.
PriorDiagnostics prior_diagnostics(const PriorDiagnosticsOptions& options);

// ---- conjugacy oracles -------------------------------------------------------

struct ConjugacyOptions {
  int draws = 100'000;
  int grid_points = 2001;
  double span_sd = 8.0;
  std::uint64_t seed = 11;
  Fault fault = Fault::kNone;
};

struct ConjugacyResult {
  std::string name;
  double ks = 0.0;  // sup |empirical CDF - grid CDF|
  double grid_mean = 0.0;
  double grid_sd = 0.0;
  double sample_mean = 0.0;
};

/// On a fixed tiny instance (n = 2, K = 3, M = 2, R = 1, P = P_aux = 1) compare
/// the sampler's draws of mu_m, sigma^2_m, alpha_m and eta against the
/// normalized product of prior and likelihood evaluated on a grid spanning
/// span_sd posterior standard deviations around the posterior mean. The grid
/// density uses only the model log-likelihood and the prior densities.
std::vector<ConjugacyResult> conjugacy_check(const ConjugacyOptions& options);

// ---- collapsed node update ---------------------------------------------------

/// Node-block conditional computed the slow way: stacks the n * M * (K - 1)
/// partial residuals of the edges incident to k, forms the dense marginal
/// covariance A + U J U^T and evaluates both Gaussian densities directly.
NodeBlockConditional dense_node_block(const ParameterState& state, const MultiviewDataset& data, int p, int k);

struct CollapsedOptions {
  int instances = 50;
  std::uint64_t seed = 13;
};

struct CollapsedResult {
  int comparisons = 0;
  double max_probability_gap = 0.0;
  double max_log_odds_gap = 0.0;  // relative to max(1, |log odds|)
  double max_mean_gap = 0.0;
  double max_covariance_gap = 0.0;
};

/// Random tiny instances (K in 3..5, n in 2..4, M in 1..3, R in 1..3); every
/// node of each instance is compared against dense_node_block.
CollapsedResult collapsed_check(const CollapsedOptions& options);

}  // namespace mvjl
