#include "mvjl/chain.hpp"

#include <string>

#include "mvjl/errors.hpp"

namespace mvjl {

void ChainOutput::resize(int draws) {
  const int q = num_edges();
  intercept.resize(draws, num_views);
  noise_variance.resize(draws, num_views);
  aux_coef.resize(draws, num_views * num_auxiliary);
  node_density.resize(draws, num_key);
  rank_sign.resize(draws, num_key * num_views * rank);
  inclusion.resize(draws, num_key * num_nodes);
  coefficients.resize(draws, num_key * num_views * q);
  log_likelihood.resize(draws);
}

namespace {

void record(const GibbsSampler& sampler, ChainOutput& out, int row) {
  const auto& s = sampler.state();
  const int q = out.num_edges();
  out.intercept.row(row) = s.intercept.transpose();
  out.noise_variance.row(row) = s.noise_variance.transpose();
  for (int m = 0; m < out.num_views; ++m)
    for (int a = 0; a < out.num_auxiliary; ++a) out.aux_coef(row, out.aux_column(m, a)) = s.aux_coef(a, m);
  out.node_density.row(row) = s.node_density.transpose();
  for (int p = 0; p < out.num_key; ++p) {
    for (int m = 0; m < out.num_views; ++m) {
      for (int r = 0; r < out.rank; ++r)
        out.rank_sign(row, out.sign_column(p, m, r)) = s.rank_sign[static_cast<std::size_t>(p)](r, m);
      out.coefficients.row(row).segment(out.coefficient_column(p, m, 0), q) = sampler.coefficient(p, m).transpose();
    }
    for (int k = 0; k < out.num_nodes; ++k) out.inclusion(row, out.inclusion_column(p, k)) = s.inclusion(p, k);
  }
  out.log_likelihood[row] = sampler.log_likelihood();
}

}  // namespace

ChainOutput run_chain(const MultiviewDataset& data, const ModelConfig& config, Rng& rng, const RunOptions& options) {
  GibbsSampler sampler(data, config, options.sampler);
  ChainOutput out;
  out.num_nodes = data.num_nodes;
  out.num_views = data.num_views();
  out.num_key = data.num_key();
  out.num_auxiliary = data.num_auxiliary();
  out.rank = config.rank;
  out.n_iter = config.n_iter;
  out.n_burnin = config.n_burnin;
  out.thin = config.thin;
  out.seed = rng.seed();
  out.resize(config.retained_draws());

  sampler.initialize(rng);
  int row = 0;
  for (int iter = 1; iter <= config.n_iter; ++iter) {
    try {
      sampler.sweep(rng);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(iter) + ": " + e.what(), e.min_eigenvalue());
    }
    if (iter > config.n_burnin && (iter - config.n_burnin) % config.thin == 0) record(sampler, out, row++);
    if (options.progress && options.progress_every > 0 && iter % options.progress_every == 0)
      options.progress(iter, sampler.log_likelihood(), sampler.active_count());
  }
  return out;
}

std::vector<ChainOutput> run_independent_chains(const MultiviewDataset& data, const ModelConfig& config, Rng& rng,
                                                const RunOptions& options) {
  std::vector<ChainOutput> out;
  for (int m = 0; m < data.num_views(); ++m) {
    const MultiviewDataset single = data.view(m);
    out.push_back(run_chain(single, config, rng, options));
  }
  return out;
}

ChainOutput merge_view_chains(const std::vector<ChainOutput>& per_view) {
  if (per_view.empty()) throw ConfigError("no view chains to merge");
  const auto& first = per_view.front();
  ChainOutput out;
  out.num_nodes = first.num_nodes;
  out.num_views = static_cast<int>(per_view.size());
  out.num_key = first.num_key;
  out.num_auxiliary = first.num_auxiliary;
  out.rank = first.rank;
  out.n_iter = first.n_iter;
  out.n_burnin = first.n_burnin;
  out.thin = first.thin;
  out.seed = first.seed;
  const int draws = first.draws();
  const int q = first.num_edges();
  out.intercept.resize(draws, out.num_views);
  out.noise_variance.resize(draws, out.num_views);
  out.aux_coef.resize(draws, out.num_views * out.num_auxiliary);
  out.coefficients.resize(draws, out.num_key * out.num_views * q);
  out.log_likelihood = Eigen::VectorXd::Zero(draws);
  for (int m = 0; m < out.num_views; ++m) {
    const auto& c = per_view[static_cast<std::size_t>(m)];
    if (c.num_views != 1 || c.draws() != draws || c.num_nodes != first.num_nodes || c.num_key != first.num_key ||
        c.num_auxiliary != first.num_auxiliary)
      throw ConfigError("view chains have inconsistent shapes");
    out.intercept.col(m) = c.intercept.col(0);
    out.noise_variance.col(m) = c.noise_variance.col(0);
    for (int a = 0; a < out.num_auxiliary; ++a) out.aux_coef.col(out.aux_column(m, a)) = c.aux_coef.col(a);
    for (int p = 0; p < out.num_key; ++p)
      out.coefficients.middleCols(out.coefficient_column(p, m, 0), q) = c.coefficient_draws(p, 0);
    out.log_likelihood += c.log_likelihood;
  }
  return out;
}

}  // namespace mvjl
