#include "mvjl/model.hpp"

#include <cmath>
#include <string>

#include "mvjl/errors.hpp"

namespace mvjl {

void ModelConfig::validate(int num_views) const {
  if (rank < 1) throw ConfigError("rank must be a positive integer");
  if (!(omega > 1.0)) throw ConfigError("omega must exceed 1");
  if (!(a_eta > 0 && b_eta > 0)) throw ConfigError("node-density Beta parameters must be positive");
  if (!(a_sigma > 0 && b_sigma > 0)) throw ConfigError("noise-variance inverse-gamma parameters must be positive");
  const int q = rank * num_views;
  if (!(resolved_nu(num_views) > q - 1))
    throw ConfigError("inverse-Wishart dof nu must exceed R*M - 1 = " + std::to_string(q - 1));
  if (n_iter < 1) throw ConfigError("n_iter must be positive");
  if (n_burnin < 0 || n_burnin >= n_iter) throw ConfigError("n_burnin must lie in [0, n_iter)");
  if (thin < 1) throw ConfigError("thin must be at least 1");
}

ParameterState ParameterState::zeros(int num_nodes, int num_views, int num_key, int num_auxiliary, int rank) {
  const int q = rank * num_views;
  ParameterState s;
  s.intercept = Eigen::VectorXd::Zero(num_views);
  s.noise_variance = Eigen::VectorXd::Ones(num_views);
  s.aux_coef = Eigen::MatrixXd::Zero(num_auxiliary, num_views);
  s.latent.assign(static_cast<std::size_t>(num_key), Eigen::MatrixXd::Zero(num_nodes, q));
  s.inclusion = Eigen::MatrixXi::Zero(num_key, num_nodes);
  s.rank_sign.assign(static_cast<std::size_t>(num_key), Eigen::MatrixXi::Zero(rank, num_views));
  Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(3, q, 1.0 / 3.0);
  s.rank_probability.assign(static_cast<std::size_t>(num_key), uniform);
  s.slab_covariance.assign(static_cast<std::size_t>(num_key), Eigen::MatrixXd::Identity(q, q));
  s.node_density = Eigen::VectorXd::Constant(num_key, 0.5);
  return s;
}

void ParameterState::validate() const {
  const int m_views = num_views();
  const int k_nodes = num_nodes();
  const int r = rank();
  if (noise_variance.size() != m_views) throw InvalidStateError("noise variance length differs from view count");
  for (int m = 0; m < m_views; ++m)
    if (!(noise_variance[m] > 0.0)) throw InvalidStateError("noise variance of view " + std::to_string(m + 1) + " is not positive");
  for (int p = 0; p < num_key(); ++p) {
    const auto pu = static_cast<std::size_t>(p);
    if (latent[pu].rows() != k_nodes || latent[pu].cols() != r * m_views)
      throw InvalidStateError("latent block has wrong shape");
    for (int k = 0; k < k_nodes; ++k) {
      const int xi = inclusion(p, k);
      if (xi != 0 && xi != 1) throw InvalidStateError("inclusion indicator not binary");
      if (xi == 0 && !latent[pu].row(k).isZero(0.0))
        throw InvalidStateError("excluded node " + std::to_string(k + 1) + " has nonzero latent vector");
    }
    if ((rank_sign[pu].array().abs() > 1).any()) throw InvalidStateError("rank sign outside {-1,0,1}");
    const auto& prob = rank_probability[pu];
    for (int c = 0; c < prob.cols(); ++c) {
      if ((prob.col(c).array() < 0.0).any() || std::abs(prob.col(c).sum() - 1.0) > 1e-9)
        throw InvalidStateError("rank probabilities are not on the simplex");
    }
    const auto& cov = slab_covariance[pu];
    if (!cov.isApprox(cov.transpose(), 1e-10)) throw InvalidStateError("slab covariance is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw InvalidStateError("slab covariance is not positive definite");
    if (!(node_density[p] > 0.0 && node_density[p] < 1.0)) throw InvalidStateError("node density outside (0,1)");
  }
}

void ParameterState::check_compatible(const MultiviewDataset& data) const {
  if (num_views() != data.num_views() || num_key() != data.num_key() || num_auxiliary() != data.num_auxiliary() ||
      num_nodes() != data.num_nodes)
    throw ConfigError("parameter state dimensions do not match the dataset");
}

Eigen::VectorXd build_coefficient_matrix(const Eigen::Ref<const Eigen::MatrixXd>& latent_block,
                                         const Eigen::Ref<const Eigen::VectorXi>& signs) {
  if (latent_block.cols() != signs.size())
    throw ConfigError("latent block has " + std::to_string(latent_block.cols()) + " columns but " +
                      std::to_string(signs.size()) + " rank signs");
  if ((signs.array().abs() > 1).any()) throw ConfigError("rank signs must lie in {-1,0,1}");
  const int k_nodes = static_cast<int>(latent_block.rows());
  const Eigen::MatrixXd scaled = latent_block * signs.cast<double>().asDiagonal();
  const Eigen::MatrixXd full = scaled * latent_block.transpose();
  Eigen::VectorXd gamma(num_pairs(k_nodes));
  int q = 0;
  for (int a = 0; a < k_nodes; ++a)
    for (int b = a + 1; b < k_nodes; ++b) gamma[q++] = full(a, b);
  return gamma;
}

Eigen::VectorXd coefficient(const ParameterState& state, int p, int m) {
  return build_coefficient_matrix(state.latent_block(p, m), state.rank_sign[static_cast<std::size_t>(p)].col(m));
}

Eigen::VectorXd linear_predictor(const ParameterState& state, const MultiviewDataset& data, int subject, int view) {
  state.check_compatible(data);
  const int q = data.num_edges();
  Eigen::VectorXd u = Eigen::VectorXd::Constant(q, state.intercept[view]);
  for (int p = 0; p < data.num_key(); ++p) u += data.key(subject, p) * coefficient(state, p, view);
  u.array() += data.auxiliary.row(subject).dot(state.aux_coef.col(view));
  return u;
}

double log_likelihood(const ParameterState& state, const MultiviewDataset& data) {
  state.check_compatible(data);
  if (!data.all_continuous()) throw UnsupportedFeatureError("log-likelihood is defined for continuous views only");
  constexpr double kLog2Pi = 1.8378770664093454836;
  double total = 0.0;
  for (int m = 0; m < data.num_views(); ++m) {
    const double s2 = state.noise_variance[m];
    if (!(s2 > 0.0)) throw InvalidStateError("noise variance of view " + std::to_string(m + 1) + " is not positive");
    Eigen::MatrixXd mean = Eigen::MatrixXd::Constant(data.num_subjects(), data.num_edges(), state.intercept[m]);
    for (int p = 0; p < data.num_key(); ++p) mean += data.key.col(p) * coefficient(state, p, m).transpose();
    mean.colwise() += data.auxiliary * state.aux_coef.col(m);
    const double ss = (data.edges[static_cast<std::size_t>(m)] - mean).squaredNorm();
    const double cells = static_cast<double>(mean.size());
    total += -0.5 * cells * (kLog2Pi + std::log(s2)) - 0.5 * ss / s2;
  }
  return total;
}

}  // namespace mvjl
