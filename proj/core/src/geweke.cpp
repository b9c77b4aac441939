#include "mvjl/geweke.hpp"

#include <cmath>

#include "mvjl/errors.hpp"

namespace mvjl {
namespace {

Eigen::VectorXd statistics(const ParameterState& s, const MultiviewDataset& d) {
  const int views = s.num_views();
  std::vector<double> out;
  for (int m = 0; m < views; ++m) {
    const double mu = s.intercept[m];
    const double ybar = d.edges[static_cast<std::size_t>(m)].mean();
    out.push_back(mu);
    out.push_back(mu * mu);
    out.push_back(s.noise_variance[m]);
    out.push_back(s.aux_coef(0, m));
    out.push_back(ybar);
    out.push_back(mu * ybar);
  }
  out.push_back(s.node_density[0]);
  out.push_back(s.inclusion.row(0).sum());
  out.push_back(s.rank_sign[0].cwiseAbs().sum());
  double abs_gamma = 0.0;
  Eigen::Index count = 0;
  for (int m = 0; m < views; ++m) {
    const Eigen::VectorXd g = coefficient(s, 0, m);
    abs_gamma += g.cwiseAbs().sum();
    count += g.size();
  }
  out.push_back(abs_gamma / static_cast<double>(count));
  out.push_back(s.slab_covariance[0].trace());
  return Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace

ModelConfig GewekeOptions::default_config() {
  ModelConfig c;
  c.rank = 2;
  c.a_sigma = 5.0;
  c.b_sigma = 40.0;
  c.nu = 2.0 * 2 + 6.0;
  return c;
}

std::vector<std::string> geweke_statistic_names(int num_views) {
  std::vector<std::string> names;
  for (int m = 1; m <= num_views; ++m) {
    const std::string v = std::to_string(m);
    for (const char* base : {"mu_", "mu2_", "sigma2_", "alpha_", "ybar_", "mu_ybar_"}) names.push_back(base + v);
  }
  for (const char* name : {"eta", "active_nodes", "nonzero_ranks", "mean_abs_gamma", "trace_J"}) names.emplace_back(name);
  return names;
}

GewekeResult geweke_joint_test(const GewekeOptions& o) {
  if (o.samples < 2 * o.batches || o.batches < 2) throw ConfigError("geweke: need samples >= 2 * batches and batches >= 2");
  const ModelConfig& config = o.config;
  config.validate(o.num_views);
  const auto names = geweke_statistic_names(o.num_views);
  const auto dim = static_cast<Eigen::Index>(names.size());

  Rng design_rng(o.seed);
  MultiviewDataset data = make_empty_dataset(o.num_subjects, o.num_nodes, o.num_views, 1, 1);
  for (int i = 0; i < o.num_subjects; ++i) {
    data.key(i, 0) = design_rng.normal();
    data.auxiliary(i, 0) = design_rng.normal();
  }

  // Marginal-conditional simulator.
  Rng marginal_rng = Rng(o.seed).split(1);
  Eigen::VectorXd m_sum = Eigen::VectorXd::Zero(dim), m_sq = Eigen::VectorXd::Zero(dim);
  MultiviewDataset scratch = data;
  for (int s = 0; s < o.samples; ++s) {
    const ParameterState theta = sample_from_prior(config, o.num_nodes, o.num_views, 1, 1, marginal_rng);
    redraw_edges(theta, scratch, marginal_rng);
    const Eigen::VectorXd g = statistics(theta, scratch);
    m_sum += g;
    m_sq += g.cwiseProduct(g);
  }

  // Successive-conditional simulator.
  Rng successive_rng = Rng(o.seed).split(2);
  ParameterState theta = sample_from_prior(config, o.num_nodes, o.num_views, 1, 1, successive_rng);
  redraw_edges(theta, data, successive_rng);
  GibbsSampler sampler(data, config, SamplerOptions{o.fault});
  sampler.set_state(theta);
  const int batch_len = o.samples / o.batches;
  const int used = batch_len * o.batches;
  Eigen::MatrixXd batch_means = Eigen::MatrixXd::Zero(o.batches, dim);
  for (int s = 0; s < used; ++s) {
    sampler.sweep(successive_rng);
    redraw_edges(sampler.state(), data, successive_rng);
    sampler.rebind(data);
    batch_means.row(s / batch_len) += statistics(sampler.state(), data).transpose();
  }
  batch_means /= static_cast<double>(batch_len);

  GewekeResult result;
  const double n = o.samples;
  for (Eigen::Index j = 0; j < dim; ++j) {
    GewekeStatistic st;
    st.name = names[static_cast<std::size_t>(j)];
    st.marginal_mean = m_sum[j] / n;
    const double var = std::max(0.0, (m_sq[j] - n * st.marginal_mean * st.marginal_mean) / (n - 1.0));
    st.marginal_se = std::sqrt(var / n);
    const auto col = batch_means.col(j);
    st.successive_mean = col.mean();
    const double bvar = (col.array() - st.successive_mean).square().sum() / (o.batches - 1.0);
    st.successive_se = std::sqrt(bvar / o.batches);
    const double se = std::hypot(st.marginal_se, st.successive_se);
    st.z = se > 0.0 ? (st.marginal_mean - st.successive_mean) / se : 0.0;
    result.max_abs_z = std::max(result.max_abs_z, std::abs(st.z));
    result.statistics.push_back(st);
  }
  return result;
}

}  // namespace mvjl
