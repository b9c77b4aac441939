#include "mvjl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mvjl/distributions.hpp"
#include "mvjl/errors.hpp"

namespace mvjl {
namespace {

constexpr std::array<int, 3> kSignOfBranch = {0, 1, -1};

int branch_of_sign(int sign) { return sign == 0 ? 0 : (sign == 1 ? 1 : 2); }

double clamp_open_unit(double x) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(x, lo, hi);
}

double logistic(double log_odds) {
  if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return e / (1.0 + e);
}

Eigen::VectorXd rank_one_upper(const Eigen::Ref<const Eigen::VectorXd>& column, const EdgeIndex& index) {
  Eigen::VectorXd delta(index.num_edges());
  for (int q = 0; q < index.num_edges(); ++q) {
    const auto [a, b] = index.pair(q);
    delta[q] = column[a] * column[b];
  }
  return delta;
}

}  // namespace

GibbsSampler::GibbsSampler(const MultiviewDataset& data, const ModelConfig& config, SamplerOptions options)
    : data_(&data), config_(config), options_(options) {
  data.validate();
  if (!data.all_continuous())
    throw UnsupportedFeatureError("binary (logit-link) views are not supported by the Gibbs sampler");
  if (data.num_key() < 1) throw ConfigError("at least one key predictor is required");
  config.validate(data.num_views());
  index_ = EdgeIndex(data.num_nodes);
  num_views_ = data.num_views();
  rank_ = config.rank;
  nu_ = config.resolved_nu(num_views_);
  key_sq_ = data.key.colwise().squaredNorm().transpose();
  aux_sq_ = data.auxiliary.colwise().squaredNorm().transpose();
  state_ = ParameterState::zeros(data.num_nodes, num_views_, data.num_key(), data.num_auxiliary(), rank_);
  rebuild_caches();
}

void GibbsSampler::initialize(Rng& rng) {
  const auto& d = *data_;
  const int q = rank_ * num_views_;
  ParameterState s = ParameterState::zeros(d.num_nodes, num_views_, d.num_key(), d.num_auxiliary(), rank_);
  for (int m = 0; m < num_views_; ++m) {
    const auto& y = d.edges[static_cast<std::size_t>(m)];
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / std::max<double>(1.0, static_cast<double>(y.size()) - 1.0);
    s.intercept[m] = mean;
    s.noise_variance[m] = var > 1e-8 ? var : 1.0;
  }
  const double init_sd = std::sqrt(0.1);
  for (int p = 0; p < d.num_key(); ++p) {
    const auto pu = static_cast<std::size_t>(p);
    s.inclusion.row(p).setOnes();
    for (int k = 0; k < d.num_nodes; ++k)
      for (int c = 0; c < q; ++c) s.latent[pu](k, c) = init_sd * rng.normal();
    s.rank_sign[pu].setOnes();
    for (int m = 0; m < num_views_; ++m)
      for (int r = 0; r < rank_; ++r) {
        const double w = std::pow(static_cast<double>(r + 1), config_.omega);
        s.rank_probability[pu].col(m * rank_ + r) = Eigen::Vector3d(w, 1.0, 1.0) / (w + 2.0);
      }
    s.slab_covariance[pu] = Eigen::MatrixXd::Identity(q, q);
    s.node_density[p] = 0.5;
  }
  set_state(std::move(s));
}

void GibbsSampler::set_state(ParameterState state) {
  state.check_compatible(*data_);
  if (state.rank() != rank_) throw ConfigError("state rank differs from the configured rank");
  state_ = std::move(state);
  rebuild_caches();
}

void GibbsSampler::rebind(const MultiviewDataset& data) {
  if (data.num_nodes != data_->num_nodes || data.num_views() != num_views_ || data.num_key() != data_->num_key() ||
      data.num_auxiliary() != data_->num_auxiliary() || data.num_subjects() != data_->num_subjects())
    throw ConfigError("rebind requires data of identical shape");
  data_ = &data;
  key_sq_ = data.key.colwise().squaredNorm().transpose();
  aux_sq_ = data.auxiliary.colwise().squaredNorm().transpose();
  rebuild_caches();
}

void GibbsSampler::rebuild_caches() {
  const auto& d = *data_;
  const int num_key = d.num_key();
  gamma_.assign(static_cast<std::size_t>(num_key * num_views_), Eigen::VectorXd());
  resid_.assign(static_cast<std::size_t>(num_views_), Eigen::MatrixXd());
  for (int m = 0; m < num_views_; ++m) {
    auto& e = resid_[static_cast<std::size_t>(m)];
    e = d.edges[static_cast<std::size_t>(m)].array() - state_.intercept[m];
    for (int p = 0; p < num_key; ++p) {
      gamma_[slot(p, m)] = mvjl::coefficient(state_, p, m);
      e.noalias() -= d.key.col(p) * gamma_[slot(p, m)].transpose();
    }
    e.colwise() -= d.auxiliary * state_.aux_coef.col(m);
  }
  slab_inverse_.assign(static_cast<std::size_t>(num_key), Eigen::MatrixXd());
  slab_log_det_.assign(static_cast<std::size_t>(num_key), 0.0);
  for (int p = 0; p < num_key; ++p) refresh_slab_inverse(p);
}

void GibbsSampler::refresh_slab_inverse(int p) {
  const auto pu = static_cast<std::size_t>(p);
  const auto& j = state_.slab_covariance[pu];
  Eigen::LLT<Eigen::MatrixXd> llt(j);
  if (llt.info() != Eigen::Success)
    throw NumericalError("slab covariance of key predictor " + std::to_string(p + 1) + " is not positive definite");
  slab_inverse_[pu] = llt.solve(Eigen::MatrixXd::Identity(j.rows(), j.cols()));
  slab_inverse_[pu] = 0.5 * (slab_inverse_[pu] + slab_inverse_[pu].transpose()).eval();
  const Eigen::MatrixXd l = llt.matrixL();
  slab_log_det_[pu] = 2.0 * l.diagonal().array().log().sum();
}

double GibbsSampler::log_likelihood() const {
  double total = 0.0;
  for (int m = 0; m < num_views_; ++m) {
    const auto& e = resid_[static_cast<std::size_t>(m)];
    const double s2 = state_.noise_variance[m];
    total += -0.5 * (static_cast<double>(e.size()) * (kLog2Pi + std::log(s2)) + e.squaredNorm() / s2);
  }
  return total;
}

int GibbsSampler::active_count() const { return state_.inclusion.sum(); }

// ---- intercept --------------------------------------------------------------

NormalConditional GibbsSampler::intercept_conditional(int m) const {
  const auto& e = resid_[static_cast<std::size_t>(m)];
  const double cells = static_cast<double>(e.size());
  const double s2 = state_.noise_variance[m];
  const double sum = e.sum() + cells * state_.intercept[m];
  return {sum / (s2 + cells), s2 / (s2 + cells)};
}

double GibbsSampler::update_intercept(int m, Rng& rng) {
  NormalConditional c = intercept_conditional(m);
  if (options_.fault == Fault::kHalvedInterceptVariance) c.variance *= 0.5;
  const double drawn = sample_normal(c.mean, std::sqrt(c.variance), rng);
  resid_[static_cast<std::size_t>(m)].array() -= drawn - state_.intercept[m];
  state_.intercept[m] = drawn;
  return drawn;
}

// ---- noise variance ---------------------------------------------------------

InverseGammaConditional GibbsSampler::noise_variance_conditional(int m) const {
  const auto& e = resid_[static_cast<std::size_t>(m)];
  return {config_.a_sigma + 0.5 * static_cast<double>(e.size()), config_.b_sigma + 0.5 * e.squaredNorm()};
}

double GibbsSampler::update_noise_variance(int m, Rng& rng) {
  const auto c = noise_variance_conditional(m);
  const double drawn = sample_inverse_gamma(c.shape, c.rate, rng);
  state_.noise_variance[m] = drawn;
  return drawn;
}

// ---- auxiliary coefficients -------------------------------------------------

NormalConditional GibbsSampler::auxiliary_conditional(int m, int aux) const {
  const auto& e = resid_[static_cast<std::size_t>(m)];
  const auto x = data_->auxiliary.col(aux);
  const double q = static_cast<double>(index_.num_edges());
  const double s2 = state_.noise_variance[m];
  const double xx = aux_sq_[aux];
  const double xz = x.dot(e.rowwise().sum()) + q * xx * state_.aux_coef(aux, m);
  const double denom = s2 + q * xx;
  return {xz / denom, s2 / denom};
}

double GibbsSampler::update_auxiliary(int m, int aux, Rng& rng) {
  const auto c = auxiliary_conditional(m, aux);
  const double drawn = sample_normal(c.mean, std::sqrt(c.variance), rng);
  resid_[static_cast<std::size_t>(m)].colwise() -= data_->auxiliary.col(aux) * (drawn - state_.aux_coef(aux, m));
  state_.aux_coef(aux, m) = drawn;
  return drawn;
}

// ---- node blocks ------------------------------------------------------------

Eigen::MatrixXd GibbsSampler::node_scores(int p, int k) const {
  const auto& incident = index_.incident(k);
  const auto x = data_->key.col(p);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(incident.size()), num_views_);
  for (int m = 0; m < num_views_; ++m) {
    const auto& e = resid_[static_cast<std::size_t>(m)];
    const auto& g = gamma_[slot(p, m)];
    for (std::size_t jj = 0; jj < incident.size(); ++jj) {
      const int q = incident[jj].second;
      w(static_cast<Eigen::Index>(jj), m) = x.dot(e.col(q)) + key_sq_[p] * g[q];
    }
  }
  return w;
}

Eigen::MatrixXd GibbsSampler::other_nodes(int p, int k, int m) const {
  const auto& incident = index_.incident(k);
  const auto& lat = state_.latent[static_cast<std::size_t>(p)];
  const Eigen::VectorXd signs = state_.rank_sign[static_cast<std::size_t>(p)].col(m).cast<double>();
  Eigen::MatrixXd g(static_cast<Eigen::Index>(incident.size()), rank_);
  for (std::size_t jj = 0; jj < incident.size(); ++jj)
    g.row(static_cast<Eigen::Index>(jj)) =
        lat.row(incident[jj].first).segment(m * rank_, rank_).cwiseProduct(signs.transpose());
  return g;
}

NodeBlockConditional GibbsSampler::node_block_conditional(int p, int k) const {
  const auto pu = static_cast<std::size_t>(p);
  const int q = rank_ * num_views_;
  const Eigen::MatrixXd w = node_scores(p, k);
  Eigen::MatrixXd capacitance = slab_inverse_[pu];
  Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
  for (int m = 0; m < num_views_; ++m) {
    const Eigen::MatrixXd g = other_nodes(p, k, m);
    const double s2 = state_.noise_variance[m];
    capacitance.block(m * rank_, m * rank_, rank_, rank_).noalias() += (key_sq_[p] / s2) * (g.transpose() * g);
    b.segment(m * rank_, rank_).noalias() = g.transpose() * w.col(m) / s2;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(capacitance);
  if (llt.info() != Eigen::Success)
    throw NumericalError("singular capacitance matrix in node block (predictor " + std::to_string(p + 1) + ", node " +
                         std::to_string(k + 1) + ")");
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det_c = 2.0 * l.diagonal().array().log().sum();

  NodeBlockConditional out;
  out.mean = llt.solve(b);
  out.covariance = llt.solve(Eigen::MatrixXd::Identity(q, q));
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  const double eta = state_.node_density[p];
  out.log_odds = std::log(eta) - std::log1p(-eta) - 0.5 * slab_log_det_[pu] - 0.5 * log_det_c + 0.5 * b.dot(out.mean);
  out.inclusion_probability = logistic(out.log_odds);
  return out;
}

void GibbsSampler::update_node_block(int p, int k, Rng& rng) {
  const auto pu = static_cast<std::size_t>(p);
  const auto cond = node_block_conditional(p, k);
  const bool include = sample_bernoulli(cond.inclusion_probability, rng);
  auto& lat = state_.latent[pu];
  if (include) {
    lat.row(k) = sample_mvn(cond.mean, cond.covariance, rng).transpose();
  } else {
    lat.row(k).setZero();
  }
  state_.inclusion(p, k) = include ? 1 : 0;

  const auto& incident = index_.incident(k);
  const auto x = data_->key.col(p);
  for (int m = 0; m < num_views_; ++m) {
    const Eigen::MatrixXd g = other_nodes(p, k, m);
    const Eigen::VectorXd fresh = g * lat.row(k).segment(m * rank_, rank_).transpose();
    auto& gamma = gamma_[slot(p, m)];
    auto& e = resid_[static_cast<std::size_t>(m)];
    for (std::size_t jj = 0; jj < incident.size(); ++jj) {
      const int q = incident[jj].second;
      const double delta = fresh[static_cast<Eigen::Index>(jj)] - gamma[q];
      if (delta != 0.0) e.col(q) -= delta * x;
      gamma[q] = fresh[static_cast<Eigen::Index>(jj)];
    }
  }
}

// ---- rank signs -------------------------------------------------------------

std::array<double, 3> GibbsSampler::rank_sign_log_weights(int p, int m, int r) const {
  const auto pu = static_cast<std::size_t>(p);
  const Eigen::VectorXd delta =
      rank_one_upper(state_.latent[pu].col(m * rank_ + r), index_);
  const auto& e = resid_[static_cast<std::size_t>(m)];
  const double cross = (e.transpose() * data_->key.col(p)).dot(delta);
  const double energy = key_sq_[p] * delta.squaredNorm();
  const double s2 = state_.noise_variance[m];
  const int current = state_.rank_sign[pu](r, m);
  const auto prob = state_.rank_probability[pu].col(m * rank_ + r);
  std::array<double, 3> out{};
  for (int branch = 0; branch < 3; ++branch) {
    const double shift = static_cast<double>(kSignOfBranch[static_cast<std::size_t>(branch)] - current);
    const double loglik_change = -(shift * shift * energy - 2.0 * shift * cross) / (2.0 * s2);
    out[static_cast<std::size_t>(branch)] = std::log(prob[branch]) + loglik_change;
  }
  return out;
}

int GibbsSampler::update_rank_sign(int p, int m, int r, Rng& rng) {
  const auto pu = static_cast<std::size_t>(p);
  const auto weights = rank_sign_log_weights(p, m, r);
  const int drawn = kSignOfBranch[static_cast<std::size_t>(sample_log_categorical(weights, rng))];
  const int current = state_.rank_sign[pu](r, m);
  if (drawn != current) {
    const Eigen::VectorXd delta = rank_one_upper(state_.latent[pu].col(m * rank_ + r), index_);
    const double shift = static_cast<double>(drawn - current);
    gamma_[slot(p, m)] += shift * delta;
    resid_[static_cast<std::size_t>(m)].noalias() -= (shift * data_->key.col(p)) * delta.transpose();
    state_.rank_sign[pu](r, m) = drawn;
  }
  return drawn;
}

// ---- slab covariance, rank probabilities, node density ----------------------

InverseWishartConditional GibbsSampler::latent_covariance_conditional(int p) const {
  const auto& lat = state_.latent[static_cast<std::size_t>(p)];
  const int q = rank_ * num_views_;
  InverseWishartConditional c;
  c.scale = Eigen::MatrixXd::Identity(q, q);
  int active = 0;
  for (int k = 0; k < lat.rows(); ++k) {
    if (state_.inclusion(p, k) == 0) continue;
    ++active;
    c.scale.noalias() += lat.row(k).transpose() * lat.row(k);
  }
  c.dof = nu_ + active;
  return c;
}

const Eigen::MatrixXd& GibbsSampler::update_latent_covariance(int p, Rng& rng) {
  const auto c = latent_covariance_conditional(p);
  state_.slab_covariance[static_cast<std::size_t>(p)] = sample_inverse_wishart(c.dof, c.scale, rng);
  refresh_slab_inverse(p);
  return state_.slab_covariance[static_cast<std::size_t>(p)];
}

Eigen::Vector3d GibbsSampler::rank_probability_conditional(int p, int m, int r) const {
  const int sign = state_.rank_sign[static_cast<std::size_t>(p)](r, m);
  Eigen::Vector3d alpha(std::pow(static_cast<double>(r + 1), config_.omega), 1.0, 1.0);
  alpha[branch_of_sign(sign)] += 1.0;
  return alpha;
}

Eigen::Vector3d GibbsSampler::update_rank_probabilities(int p, int m, int r, Rng& rng) {
  const Eigen::Vector3d drawn = sample_dirichlet(rank_probability_conditional(p, m, r), rng);
  state_.rank_probability[static_cast<std::size_t>(p)].col(m * rank_ + r) = drawn;
  return drawn;
}

BetaConditional GibbsSampler::node_density_conditional(int p) const {
  const double active = state_.inclusion.row(p).sum();
  const double k_nodes = static_cast<double>(state_.num_nodes());
  return {config_.a_eta + active, config_.b_eta + k_nodes - active};
}

double GibbsSampler::update_node_density(int p, Rng& rng) {
  const auto c = node_density_conditional(p);
  const double drawn = clamp_open_unit(sample_beta(c.a, c.b, rng));
  state_.node_density[p] = drawn;
  return drawn;
}

void GibbsSampler::sweep(Rng& rng) {
  const int num_key = data_->num_key();
  for (int m = 0; m < num_views_; ++m) update_intercept(m, rng);
  for (int m = 0; m < num_views_; ++m) update_noise_variance(m, rng);
  for (int m = 0; m < num_views_; ++m)
    for (int a = 0; a < data_->num_auxiliary(); ++a) update_auxiliary(m, a, rng);
  for (int p = 0; p < num_key; ++p)
    for (int k = 0; k < data_->num_nodes; ++k) update_node_block(p, k, rng);
  for (int p = 0; p < num_key; ++p)
    for (int m = 0; m < num_views_; ++m)
      for (int r = 0; r < rank_; ++r) update_rank_sign(p, m, r, rng);
  for (int p = 0; p < num_key; ++p) update_latent_covariance(p, rng);
  for (int p = 0; p < num_key; ++p)
    for (int m = 0; m < num_views_; ++m)
      for (int r = 0; r < rank_; ++r) update_rank_probabilities(p, m, r, rng);
  for (int p = 0; p < num_key; ++p) update_node_density(p, rng);
}

// ---- prior and data simulation ----------------------------------------------

Eigen::Vector3d sample_rank_probabilities(int r, double omega, Rng& rng) {
  const Eigen::Vector3d alpha(std::pow(static_cast<double>(r), omega), 1.0, 1.0);
  return sample_dirichlet(alpha, rng);
}

int sample_rank_sign(const Eigen::Vector3d& prob, Rng& rng) {
  const std::array<double, 3> logw = {std::log(prob[0]), std::log(prob[1]), std::log(prob[2])};
  return kSignOfBranch[static_cast<std::size_t>(sample_log_categorical(logw, rng))];
}

ParameterState sample_from_prior(const ModelConfig& config, int num_nodes, int num_views, int num_key,
                                 int num_auxiliary, Rng& rng) {
  config.validate(num_views);
  const int rank = config.rank;
  const int q = rank * num_views;
  const double nu = config.resolved_nu(num_views);
  ParameterState s = ParameterState::zeros(num_nodes, num_views, num_key, num_auxiliary, rank);
  for (int m = 0; m < num_views; ++m) {
    s.intercept[m] = rng.normal();
    s.noise_variance[m] = sample_inverse_gamma(config.a_sigma, config.b_sigma, rng);
    for (int a = 0; a < num_auxiliary; ++a) s.aux_coef(a, m) = rng.normal();
  }
  for (int p = 0; p < num_key; ++p) {
    const auto pu = static_cast<std::size_t>(p);
    s.node_density[p] = clamp_open_unit(sample_beta(config.a_eta, config.b_eta, rng));
    s.slab_covariance[pu] = sample_inverse_wishart(nu, Eigen::MatrixXd::Identity(q, q), rng);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(q);
    for (int k = 0; k < num_nodes; ++k) {
      const bool include = sample_bernoulli(s.node_density[p], rng);
      s.inclusion(p, k) = include ? 1 : 0;
      if (include) s.latent[pu].row(k) = sample_mvn(zero, s.slab_covariance[pu], rng).transpose();
    }
    for (int m = 0; m < num_views; ++m)
      for (int r = 0; r < rank; ++r) {
        const Eigen::Vector3d prob = sample_rank_probabilities(r + 1, config.omega, rng);
        s.rank_probability[pu].col(m * rank + r) = prob;
        s.rank_sign[pu](r, m) = sample_rank_sign(prob, rng);
      }
  }
  return s;
}

void redraw_edges(const ParameterState& state, MultiviewDataset& data, Rng& rng) {
  state.check_compatible(data);
  for (int m = 0; m < data.num_views(); ++m) {
    auto& y = data.edges[static_cast<std::size_t>(m)];
    y.setConstant(state.intercept[m]);
    for (int p = 0; p < data.num_key(); ++p) y.noalias() += data.key.col(p) * coefficient(state, p, m).transpose();
    y.colwise() += data.auxiliary * state.aux_coef.col(m);
    const double sd = std::sqrt(state.noise_variance[m]);
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, c) += sd * rng.normal();
  }
}

}  // namespace mvjl
