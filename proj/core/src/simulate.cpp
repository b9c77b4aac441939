#include "mvjl/simulate.hpp"

#include <cmath>

#include "mvjl/distributions.hpp"
#include "mvjl/errors.hpp"

namespace mvjl {

void Scenario::validate() const {
  if (n < 1 || num_nodes < 2 || num_views < 1) throw ConfigError("scenario " + name + ": bad dimensions");
  if (!(node_density >= 0.0 && node_density <= 1.0)) throw ConfigError("scenario " + name + ": node density outside [0,1]");
  if (true_rank < 1 || true_rank > fitted_rank) throw ConfigError("scenario " + name + ": need 1 <= true rank <= fitted rank");
  const auto views = static_cast<std::size_t>(num_views);
  if (noise_variance.size() != views || intercept.size() != views || aux_coef.size() != views)
    throw ConfigError("scenario " + name + ": per-view settings must have one entry per view");
  for (double s2 : noise_variance)
    if (!(s2 > 0.0)) throw ConfigError("scenario " + name + ": noise variance must be positive");
  if (!(latent_correlation > -1.0 / std::max(1, num_views * true_rank - 1) && latent_correlation < 1.0))
    throw ConfigError("scenario " + name + ": latent correlation gives a non-SPD covariance");
  if (replications < 1) throw ConfigError("scenario " + name + ": replications must be positive");
}

ModelConfig Scenario::model_config() const {
  ModelConfig c;
  c.rank = fitted_rank;
  c.n_iter = n_iter;
  c.n_burnin = n_burnin;
  c.thin = thin;
  c.seed = seed;
  return c;
}

SyntheticTruth generate_truth(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  const int k_nodes = scenario.num_nodes;
  const int views = scenario.num_views;
  const int r0 = scenario.true_rank;
  const int dim = views * r0;

  SyntheticTruth t;
  t.num_nodes = k_nodes;
  t.num_views = views;
  t.true_rank = r0;
  t.latent_mean.resize(dim);
  for (int j = 0; j < dim; ++j) t.latent_mean[j] = rng.normal();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(dim, dim, scenario.latent_correlation);
  cov.diagonal().setOnes();

  t.inclusion.resize(1, k_nodes);
  for (int k = 0; k < k_nodes; ++k) t.inclusion(0, k) = sample_bernoulli(scenario.node_density, rng) ? 1 : 0;
  t.latent = Eigen::MatrixXd::Zero(k_nodes, dim);
  for (int k = 0; k < k_nodes; ++k)
    if (t.inclusion(0, k) == 1) t.latent.row(k) = sample_mvn(t.latent_mean, cov, rng).transpose();

  const EdgeIndex index(k_nodes);
  for (int m = 0; m < views; ++m) {
    const auto block = t.latent.middleCols(m * r0, r0);
    Eigen::VectorXd gamma(index.num_edges());
    for (int q = 0; q < index.num_edges(); ++q) {
      const auto [a, b] = index.pair(q);
      gamma[q] = block.row(a).dot(block.row(b)) / 2.0;
    }
    t.coefficients.push_back(std::move(gamma));
  }
  t.intercept = Eigen::Map<const Eigen::VectorXd>(scenario.intercept.data(), views);
  t.noise_variance = Eigen::Map<const Eigen::VectorXd>(scenario.noise_variance.data(), views);
  t.aux_coef = Eigen::Map<const Eigen::RowVectorXd>(scenario.aux_coef.data(), views);
  return t;
}

MultiviewDataset generate_dataset(const SyntheticTruth& truth, const Scenario& scenario, Rng& rng) {
  const int n = scenario.n;
  MultiviewDataset d = make_empty_dataset(n, truth.num_nodes, truth.num_views, truth.num_key(),
                                          static_cast<int>(truth.aux_coef.rows()));
  for (int i = 0; i < n; ++i) d.key(i, 0) = rng.normal();
  for (int i = 0; i < n; ++i) d.auxiliary(i, 0) = rng.normal();
  for (int m = 0; m < truth.num_views; ++m) {
    auto& y = d.edges[static_cast<std::size_t>(m)];
    y.setConstant(truth.intercept[m]);
    for (int p = 0; p < truth.num_key(); ++p) y.noalias() += d.key.col(p) * truth.coefficient(p, m).transpose();
    y.colwise() += d.auxiliary * truth.aux_coef.col(m);
    const double sd = std::sqrt(truth.noise_variance[m]);
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, c) += sd * rng.normal();
  }
  return d;
}

std::vector<Scenario> scenario_table() {
  struct Design {
    double density;
    int true_rank;
    int fitted_rank;
  };
  constexpr Design designs[] = {{0.7, 4, 5}, {0.5, 4, 8}, {0.3, 4, 8}, {0.7, 3, 5}, {0.5, 3, 8}, {0.3, 3, 8}};
  std::vector<Scenario> out;
  int idx = 1;
  for (const auto& d : designs) {
    Scenario s;
    s.name = "table1-" + std::to_string(idx++);
    s.n = 150;
    s.num_nodes = 40;
    s.node_density = d.density;
    s.true_rank = d.true_rank;
    s.fitted_rank = d.fitted_rank;
    out.push_back(s);
  }
  return out;
}

std::vector<Scenario> scenario_registry() {
  auto out = scenario_table();
  Scenario small;
  small.name = "desk-small";
  small.num_nodes = 20;
  small.node_density = 0.5;
  small.true_rank = 3;
  small.fitted_rank = 5;
  small.replications = 10;
  small.n_iter = 3000;
  small.n_burnin = 600;
  small.thin = 2;
  out.push_back(small);

  Scenario tiny = small;
  tiny.name = "desk-tiny";
  tiny.num_nodes = 10;
  tiny.n = 100;
  tiny.true_rank = 2;
  tiny.fitted_rank = 3;
  tiny.replications = 3;
  tiny.n_iter = 1000;
  tiny.n_burnin = 200;
  out.push_back(tiny);
  return out;
}

std::optional<Scenario> find_scenario(const std::string& name) {
  for (auto& s : scenario_registry())
    if (s.name == name) return s;
  return std::nullopt;
}

std::pair<MultiviewDataset, MultiviewDataset> split_subjects(const MultiviewDataset& data, double heldout_fraction) {
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) throw ConfigError("held-out fraction must lie in (0,1)");
  const int n = data.num_subjects();
  const int train = static_cast<int>(std::ceil((1.0 - heldout_fraction) * n - 1e-9));
  if (train < 1 || train >= n) throw ConfigError("held-out split leaves an empty side");
  return {data.subset(0, train), data.subset(train, n - train)};
}

}  // namespace mvjl
