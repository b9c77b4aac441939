#include "mvjl/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mvjl/distributions.hpp"
#include "mvjl/errors.hpp"

namespace mvjl {

// ---- prior diagnostics -------------------------------------------------------

bool PriorDiagnostics::pass() const {
  if (!within_3se || !above_bound) return false;
  return std::all_of(moments.begin(), moments.end(), [](const RankMoment& m) { return m.pass; });
}

PriorDiagnostics prior_diagnostics(const PriorDiagnosticsOptions& o) {
  if (o.rank < 1 || o.moment_ranks < 1 || o.draws < 2 || !(o.omega > 1.0))
    throw ConfigError("prior diagnostics: need rank >= 1, moment ranks >= 1, draws >= 2 and omega > 1");
  Rng rng(o.seed);
  const int ranks = std::max(o.rank, o.moment_ranks);
  long long all_positive = 0;
  std::vector<long long> nonzero(static_cast<std::size_t>(ranks), 0);
  for (long long s = 0; s < o.draws; ++s) {
    bool all = true;
    for (int r = 1; r <= ranks; ++r) {
      const int sign = sample_rank_sign(sample_rank_probabilities(r, o.omega, rng), rng);
      if (r <= o.rank && sign != 1) all = false;
      if (sign != 0) ++nonzero[static_cast<std::size_t>(r - 1)];
    }
    if (all) ++all_positive;
  }
  const double n = static_cast<double>(o.draws);
  PriorDiagnostics d;
  d.all_positive_estimate = static_cast<double>(all_positive) / n;
  d.all_positive_se = std::sqrt(d.all_positive_estimate * (1.0 - d.all_positive_estimate) / n);
  d.all_positive_exact = 1.0;
  for (int r = 1; r <= o.rank; ++r) d.all_positive_exact /= 2.0 + std::pow(static_cast<double>(r), o.omega);
  d.all_positive_bound = std::pow(2.0 + std::pow(static_cast<double>(o.rank), o.omega), -o.rank);
  d.within_3se = std::abs(d.all_positive_estimate - d.all_positive_exact) <= 3.0 * d.all_positive_se;
  d.above_bound = d.all_positive_estimate >= d.all_positive_bound;
  for (int r = 1; r <= o.moment_ranks; ++r) {
    RankMoment m;
    m.r = r;
    m.estimate = static_cast<double>(nonzero[static_cast<std::size_t>(r - 1)]) / n;
    m.se = std::sqrt(m.estimate * (1.0 - m.estimate) / n);
    m.expected = 2.0 / (2.0 + std::pow(static_cast<double>(r), o.omega));
    m.pass = std::abs(m.estimate - m.expected) <= 3.0 * m.se;
    d.moments.push_back(m);
  }
  return d;
}

// ---- conjugacy oracles -------------------------------------------------------

namespace {

enum class Support { kReal, kPositive, kUnit };

struct Target {
  std::string name;
  Support support;
  std::function<void(ParameterState&, double)> set;
  std::function<double(const ParameterState&, double)> log_prior;
  bool uses_likelihood;
  std::function<double(GibbsSampler&, Rng&)> draw;
};

double log_target(const Target& t, const ParameterState& base, const MultiviewDataset& data, double v) {
  if (t.support == Support::kPositive && !(v > 0.0)) return -INFINITY;
  if (t.support == Support::kUnit && !(v > 0.0 && v < 1.0)) return -INFINITY;
  ParameterState s = base;
  t.set(s, v);
  double out = t.log_prior(s, v);
  if (t.uses_likelihood) out += log_likelihood(s, data);
  return std::isnan(out) ? -INFINITY : out;
}

struct Grid {
  std::vector<double> x;
  std::vector<double> cdf;
  double mean = 0.0;
  double sd = 0.0;
};

Grid build_grid(const Target& t, const ParameterState& base, const MultiviewDataset& data, int points, double span) {
  // Coarse pass on a transformed axis to locate the posterior mass.
  constexpr int kCoarse = 20001;
  std::vector<double> v(kCoarse), logw(kCoarse);
  for (int i = 0; i < kCoarse; ++i) {
    const double u = -1.0 + 2.0 * i / (kCoarse - 1.0);
    switch (t.support) {
      case Support::kReal: v[i] = 50.0 * u; break;
      case Support::kPositive: v[i] = std::exp(25.0 * u); break;
      case Support::kUnit: v[i] = 1.0 / (1.0 + std::exp(-35.0 * u)); break;
    }
    double jac = 0.0;
    if (t.support == Support::kPositive) jac = std::log(v[i]);
    if (t.support == Support::kUnit) jac = std::log(v[i]) + std::log1p(-v[i]);
    logw[i] = log_target(t, base, data, v[i]) + jac;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double w_sum = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < kCoarse; ++i) {
    const double w = std::isfinite(logw[i]) ? std::exp(logw[i] - top) : 0.0;
    w_sum += w;
    m1 += w * v[i];
    m2 += w * v[i] * v[i];
  }
  Grid g;
  const double mean = m1 / w_sum;
  const double sd = std::sqrt(std::max(0.0, m2 / w_sum - mean * mean));
  double lo = mean - span * sd, hi = mean + span * sd;
  if (t.support != Support::kReal) lo = std::max(lo, 0.0);
  if (t.support == Support::kUnit) hi = std::min(hi, 1.0);

  g.x.resize(static_cast<std::size_t>(points));
  std::vector<double> lf(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    g.x[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1.0);
    lf[static_cast<std::size_t>(i)] = log_target(t, base, data, g.x[static_cast<std::size_t>(i)]);
  }
  const double fine_top = *std::max_element(lf.begin(), lf.end());
  std::vector<double> f(lf.size());
  for (std::size_t i = 0; i < lf.size(); ++i) f[i] = std::isfinite(lf[i]) ? std::exp(lf[i] - fine_top) : 0.0;
  g.cdf.assign(f.size(), 0.0);
  double gm1 = 0.0, gm2 = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double dx = g.x[i] - g.x[i - 1];
    g.cdf[i] = g.cdf[i - 1] + 0.5 * (f[i] + f[i - 1]) * dx;
    gm1 += 0.5 * (f[i] * g.x[i] + f[i - 1] * g.x[i - 1]) * dx;
    gm2 += 0.5 * (f[i] * g.x[i] * g.x[i] + f[i - 1] * g.x[i - 1] * g.x[i - 1]) * dx;
  }
  const double total = g.cdf.back();
  for (double& c : g.cdf) c /= total;
  g.mean = gm1 / total;
  g.sd = std::sqrt(std::max(0.0, gm2 / total - g.mean * g.mean));
  return g;
}

double grid_cdf(const Grid& g, double x) {
  if (x <= g.x.front()) return 0.0;
  if (x >= g.x.back()) return 1.0;
  const auto it = std::upper_bound(g.x.begin(), g.x.end(), x);
  const auto i = static_cast<std::size_t>(it - g.x.begin());
  const double t = (x - g.x[i - 1]) / (g.x[i] - g.x[i - 1]);
  return g.cdf[i - 1] + t * (g.cdf[i] - g.cdf[i - 1]);
}

double ks_distance(std::vector<double> draws, const Grid& g) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = grid_cdf(g, draws[i]);
    d = std::max({d, std::abs((static_cast<double>(i) + 1.0) / n - f), std::abs(static_cast<double>(i) / n - f)});
  }
  return d;
}

}  // namespace

std::vector<ConjugacyResult> conjugacy_check(const ConjugacyOptions& o) {
  if (o.draws < 100 || o.grid_points < 3 || !(o.span_sd > 0.0)) throw ConfigError("conjugacy check: bad options");
  constexpr int kSubjects = 2, kNodes = 3, kViews = 2;
  ModelConfig config;
  config.rank = 1;
  Rng rng(o.seed);
  MultiviewDataset data = make_empty_dataset(kSubjects, kNodes, kViews, 1, 1);
  for (int i = 0; i < kSubjects; ++i) {
    data.key(i, 0) = rng.normal();
    data.auxiliary(i, 0) = rng.normal();
  }
  ParameterState base = sample_from_prior(config, kNodes, kViews, 1, 1, rng);
  // A state with active nodes exercises the coefficient terms of every residual.
  base.inclusion.setOnes();
  for (int k = 0; k < kNodes; ++k) base.latent[0].row(k) = Eigen::RowVector2d(rng.normal(), rng.normal());
  base.rank_sign[0].setOnes();
  redraw_edges(base, data, rng);

  std::vector<Target> targets;
  for (int m = 0; m < kViews; ++m) {
    const std::string v = std::to_string(m + 1);
    targets.push_back({"mu_" + v, Support::kReal, [m](ParameterState& s, double x) { s.intercept[m] = x; },
                       [](const ParameterState&, double x) { return log_normal_pdf(x, 0.0, 1.0); }, true,
                       [m](GibbsSampler& g, Rng& r) { return g.update_intercept(m, r); }});
  }
  for (int m = 0; m < kViews; ++m) {
    const std::string v = std::to_string(m + 1);
    targets.push_back({"sigma2_" + v, Support::kPositive, [m](ParameterState& s, double x) { s.noise_variance[m] = x; },
                       [config](const ParameterState&, double x) {
                         return log_inverse_gamma_pdf(x, config.a_sigma, config.b_sigma);
                       },
                       true, [m](GibbsSampler& g, Rng& r) { return g.update_noise_variance(m, r); }});
  }
  for (int m = 0; m < kViews; ++m) {
    const std::string v = std::to_string(m + 1);
    targets.push_back({"alpha_" + v, Support::kReal, [m](ParameterState& s, double x) { s.aux_coef(0, m) = x; },
                       [](const ParameterState&, double x) { return log_normal_pdf(x, 0.0, 1.0); }, true,
                       [m](GibbsSampler& g, Rng& r) { return g.update_auxiliary(m, 0, r); }});
  }
  targets.push_back({"eta", Support::kUnit, [](ParameterState& s, double x) { s.node_density[0] = x; },
                     [config](const ParameterState& s, double x) {
                       const double active = s.inclusion.row(0).sum();
                       const double inactive = s.num_nodes() - active;
                       double lp = log_beta_pdf(x, config.a_eta, config.b_eta);
                       if (active > 0) lp += active * std::log(x);
                       if (inactive > 0) lp += inactive * std::log1p(-x);
                       return lp;
                     },
                     false, [](GibbsSampler& g, Rng& r) { return g.update_node_density(0, r); }});

  GibbsSampler sampler(data, config, SamplerOptions{o.fault});
  std::vector<ConjugacyResult> results;
  Rng draw_rng = Rng(o.seed).split(1);
  for (const auto& t : targets) {
    const Grid grid = build_grid(t, base, data, o.grid_points, o.span_sd);
    std::vector<double> draws(static_cast<std::size_t>(o.draws));
    for (auto& d : draws) {
      sampler.set_state(base);
      d = t.draw(sampler, draw_rng);
    }
    ConjugacyResult r;
    r.name = t.name;
    r.ks = ks_distance(draws, grid);
    r.grid_mean = grid.mean;
    r.grid_sd = grid.sd;
    double sum = 0.0;
    for (double d : draws) sum += d;
    r.sample_mean = sum / static_cast<double>(draws.size());
    results.push_back(r);
  }
  return results;
}

// ---- collapsed node update ---------------------------------------------------

namespace {

double dense_log_mvn_zero_mean(const Eigen::VectorXd& z, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("dense covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(z);
  return -0.5 * (static_cast<double>(z.size()) * std::log(2.0 * M_PI) + 2.0 * l.diagonal().array().log().sum() +
                 w.squaredNorm());
}

}  // namespace

NodeBlockConditional dense_node_block(const ParameterState& state, const MultiviewDataset& data, int p, int k) {
  state.check_compatible(data);
  const int n = data.num_subjects();
  const int views = data.num_views();
  const int rank = state.rank();
  const int kk = data.num_nodes;
  const int dim = views * rank;
  const int rows = n * views * (kk - 1);
  const auto pu = static_cast<std::size_t>(p);
  const EdgeIndex index(kk);

  // Coefficients of the other predictors, and of p with node k switched off.
  ParameterState off = state;
  off.latent[pu].row(k).setZero();
  std::vector<Eigen::VectorXd> gamma;
  for (int pp = 0; pp < data.num_key(); ++pp)
    for (int m = 0; m < views; ++m) gamma.push_back(coefficient(off, pp, m));

  Eigen::VectorXd z(rows);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(rows, dim);
  Eigen::VectorXd a(rows);
  int row = 0;
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < views; ++m)
      for (int j = 0; j < kk; ++j) {
        if (j == k) continue;
        const int q = index.index(k, j);
        double resid = data.edges[static_cast<std::size_t>(m)](i, q) - state.intercept[m];
        for (int c = 0; c < data.num_auxiliary(); ++c) resid -= data.auxiliary(i, c) * state.aux_coef(c, m);
        for (int pp = 0; pp < data.num_key(); ++pp)
          resid -= data.key(i, pp) * gamma[static_cast<std::size_t>(pp * views + m)][q];
        z[row] = resid;
        for (int r = 0; r < rank; ++r)
          u(row, m * rank + r) =
              data.key(i, p) * state.rank_sign[pu](r, m) * state.latent[pu](j, m * rank + r);
        a[row] = state.noise_variance[m];
        ++row;
      }

  const Eigen::MatrixXd& slab = state.slab_covariance[pu];
  const Eigen::MatrixXd a_mat = a.asDiagonal();
  const Eigen::MatrixXd marginal = a_mat + u * slab * u.transpose();
  const double eta = state.node_density[p];

  NodeBlockConditional out;
  out.log_odds = std::log(eta) - std::log(1.0 - eta) + dense_log_mvn_zero_mean(z, marginal) -
                 dense_log_mvn_zero_mean(z, a_mat);
  out.inclusion_probability = 1.0 / (1.0 + std::exp(-out.log_odds));
  const Eigen::MatrixXd precision = slab.inverse() + u.transpose() * a.cwiseInverse().asDiagonal() * u;
  out.covariance = precision.inverse();
  out.mean = out.covariance * (u.transpose() * a.cwiseInverse().asDiagonal() * z);
  return out;
}

CollapsedResult collapsed_check(const CollapsedOptions& o) {
  if (o.instances < 1) throw ConfigError("collapsed check: need at least one instance");
  Rng rng(o.seed);
  CollapsedResult result;
  for (int inst = 0; inst < o.instances; ++inst) {
    const int kk = 3 + static_cast<int>(rng.below(3));
    const int n = 2 + static_cast<int>(rng.below(3));
    const int views = 1 + static_cast<int>(rng.below(3));
    ModelConfig config;
    config.rank = 1 + static_cast<int>(rng.below(3));
    config.a_sigma = 3.0;
    config.b_sigma = 2.0;
    MultiviewDataset data = make_empty_dataset(n, kk, views, 1, 1);
    for (int i = 0; i < n; ++i) {
      data.key(i, 0) = rng.normal();
      data.auxiliary(i, 0) = rng.normal();
    }
    // Data from one prior draw, evaluated at another, keeps inclusion odds moderate.
    const ParameterState truth = sample_from_prior(config, kk, views, 1, 1, rng);
    redraw_edges(truth, data, rng);
    ParameterState state = sample_from_prior(config, kk, views, 1, 1, rng);
    state.node_density[0] = 0.2 + 0.6 * rng.uniform();
    GibbsSampler sampler(data, config);
    sampler.set_state(state);
    for (int k = 0; k < kk; ++k) {
      const auto fast = sampler.node_block_conditional(0, k);
      const auto slow = dense_node_block(state, data, 0, k);
      ++result.comparisons;
      result.max_probability_gap =
          std::max(result.max_probability_gap, std::abs(fast.inclusion_probability - slow.inclusion_probability));
      result.max_log_odds_gap = std::max(result.max_log_odds_gap,
                                         std::abs(fast.log_odds - slow.log_odds) / std::max(1.0, std::abs(slow.log_odds)));
      result.max_mean_gap = std::max(result.max_mean_gap, (fast.mean - slow.mean).cwiseAbs().maxCoeff());
      result.max_covariance_gap =
          std::max(result.max_covariance_gap, (fast.covariance - slow.covariance).cwiseAbs().maxCoeff());
    }
  }
  return result;
}

}  // namespace mvjl
