#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "mvjl/dataset.hpp"
#include "mvjl/model.hpp"
#include "mvjl/rng.hpp"
#include "mvjl/sampler.hpp"

namespace fixtures {

/// Random tiny dataset with standard-normal predictors and edges.
inline mvjl::MultiviewDataset random_dataset(int n, int k, int m, int p, int paux, mvjl::Rng& rng) {
  auto d = mvjl::make_empty_dataset(n, k, m, p, paux);
  for (auto& e : d.edges)
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < d.key.size(); ++i) d.key.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < d.auxiliary.size(); ++i) d.auxiliary.data()[i] = rng.normal();
  return d;
}

/// A valid, generic parameter state: some nodes excluded, mixed rank signs.
inline mvjl::ParameterState random_state(const mvjl::ModelConfig& c, int k, int m, int p, int paux, mvjl::Rng& rng) {
  auto s = mvjl::ParameterState::zeros(k, m, p, paux, c.rank);
  for (int v = 0; v < m; ++v) {
    s.intercept[v] = rng.normal();
    s.noise_variance[v] = 0.5 + rng.uniform();
    for (int a = 0; a < paux; ++a) s.aux_coef(a, v) = rng.normal();
  }
  for (int q = 0; q < p; ++q) {
    const auto qu = static_cast<std::size_t>(q);
    s.node_density[q] = 0.2 + 0.6 * rng.uniform();
    for (int node = 0; node < k; ++node) {
      s.inclusion(q, node) = node % 3 == 1 ? 0 : 1;
      if (s.inclusion(q, node))
        for (int j = 0; j < c.rank * m; ++j) s.latent[qu](node, j) = rng.normal();
    }
    for (int v = 0; v < m; ++v)
      for (int r = 0; r < c.rank; ++r) {
        s.rank_sign[qu](r, v) = static_cast<int>(rng.below(3)) - 1;
        Eigen::Vector3d pr(1.0 + rng.uniform(), 1.0 + rng.uniform(), 1.0 + rng.uniform());
        s.rank_probability[qu].col(v * c.rank + r) = pr / pr.sum();
      }
    const int dim = c.rank * m;
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(dim, dim);
    s.slab_covariance[qu] = a * a.transpose() + Eigen::MatrixXd::Identity(dim, dim);
  }
  return s;
}

/// gamma_{p,m}(a,b) by the defining sum, pairs enumerated a < b row-major.
inline Eigen::VectorXd naive_coefficient(const mvjl::ParameterState& s, int p, int m) {
  const int k = s.num_nodes(), r = s.rank();
  Eigen::VectorXd g(k * (k - 1) / 2);
  int q = 0;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b, ++q) {
      double v = 0.0;
      for (int j = 0; j < r; ++j)
        v += s.rank_sign[static_cast<std::size_t>(p)](j, m) * s.latent[static_cast<std::size_t>(p)](a, m * r + j) *
             s.latent[static_cast<std::size_t>(p)](b, m * r + j);
      g[q] = v;
    }
  return g;
}

/// Mean of edge q of subject i on view m.
inline double naive_mean(const mvjl::ParameterState& s, const mvjl::MultiviewDataset& d, int i, int m, int q) {
  double u = s.intercept[m];
  for (int p = 0; p < d.num_key(); ++p) u += d.key(i, p) * naive_coefficient(s, p, m)[q];
  for (int a = 0; a < d.num_auxiliary(); ++a) u += d.auxiliary(i, a) * s.aux_coef(a, m);
  return u;
}

inline double naive_log_likelihood(const mvjl::ParameterState& s, const mvjl::MultiviewDataset& d) {
  double ll = 0.0;
  for (int m = 0; m < d.num_views(); ++m)
    for (int i = 0; i < d.num_subjects(); ++i)
      for (int q = 0; q < d.num_edges(); ++q) {
        const double r = d.edges[static_cast<std::size_t>(m)](i, q) - naive_mean(s, d, i, m, q);
        ll += -0.5 * std::log(2.0 * M_PI * s.noise_variance[m]) - 0.5 * r * r / s.noise_variance[m];
      }
  return ll;
}

/// Fresh, empty scratch directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mvjl_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double sample_mean(const Eigen::VectorXd& x) { return x.mean(); }
inline double sample_var(const Eigen::VectorXd& x) {
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace fixtures
