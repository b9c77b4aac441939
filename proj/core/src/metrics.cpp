#include "mvjl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mvjl/errors.hpp"

namespace mvjl {
namespace {

constexpr int kMinIntervalDraws = 40;

template <class Chain>
void check_view(const Chain& chain, int p, int m, Eigen::Index truth_size) {
  if (p < 0 || p >= chain.num_key || m < 0 || m >= chain.num_views)
    throw ConfigError("predictor or view index outside the chain");
  if (truth_size != chain.num_edges()) throw ConfigError("truth length differs from the chain's edge count");
}

}  // namespace

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InsufficientSamplesError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

DrawSummary summarize_draws(const Eigen::Ref<const Eigen::VectorXd>& draws) {
  DrawSummary s;
  const auto n = draws.size();
  if (n == 0) throw InsufficientSamplesError("no draws to summarize");
  s.mean = draws.mean();
  s.sd = n > 1 ? std::sqrt((draws.array() - s.mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
  std::vector<double> v(draws.data(), draws.data() + n);
  std::sort(v.begin(), v.end());
  auto q = [&](double prob) {
    const double h = (static_cast<double>(n) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.q025 = q(0.025);
  s.q975 = q(0.975);
  return s;
}

ChainSummary summarize_chain(const ChainOutput& chain) {
  ChainSummary s;
  s.num_nodes = chain.num_nodes;
  s.num_views = chain.num_views;
  s.num_key = chain.num_key;
  s.draws = chain.draws();
  if (s.draws == 0) throw InsufficientSamplesError("chain has no retained draws");
  s.edges.reserve(static_cast<std::size_t>(chain.coefficients.cols()));
  for (Eigen::Index c = 0; c < chain.coefficients.cols(); ++c) s.edges.push_back(summarize_draws(chain.coefficients.col(c)));
  if (chain.inclusion.size() > 0) {
    s.inclusion_probability.resize(chain.num_key, chain.num_nodes);
    for (int p = 0; p < chain.num_key; ++p) s.inclusion_probability.row(p) = inclusion_probabilities(chain, p).transpose();
  }
  return s;
}

namespace {

ChainSummary summarize_view(const ChainOutput& chain, int p, int m) {
  ChainSummary s;
  s.num_nodes = chain.num_nodes;
  s.num_views = 1;
  s.num_key = 1;
  s.draws = chain.draws();
  if (s.draws == 0) throw InsufficientSamplesError("chain has no retained draws");
  const auto draws = chain.coefficient_draws(p, m);
  for (Eigen::Index q = 0; q < draws.cols(); ++q) s.edges.push_back(summarize_draws(draws.col(q)));
  return s;
}

}  // namespace

double coefficient_mse(const ChainSummary& summary, const Eigen::Ref<const Eigen::VectorXd>& truth, int p, int m) {
  check_view(summary, p, m, truth.size());
  double sum = 0.0;
  for (Eigen::Index q = 0; q < truth.size(); ++q) {
    const double d = summary.edge(p, m, static_cast<int>(q)).mean - truth[q];
    sum += d * d;
  }
  return sum / static_cast<double>(truth.size());
}

double coefficient_mse(const ChainOutput& chain, const Eigen::Ref<const Eigen::VectorXd>& truth, int p, int m) {
  check_view(chain, p, m, truth.size());
  return coefficient_mse(summarize_view(chain, p, m), truth, 0, 0);
}

double coefficient_mse(const ChainOutput& chain, const SyntheticTruth& truth, int p, int m) {
  return coefficient_mse(chain, truth.coefficient(p, m), p, m);
}

IntervalScores interval_coverage_length(const ChainSummary& summary, const Eigen::Ref<const Eigen::VectorXd>& truth, int p,
                                        int m) {
  check_view(summary, p, m, truth.size());
  if (summary.draws < kMinIntervalDraws)
    throw InsufficientSamplesError("credible intervals need at least 40 retained draws, chain has " +
                                   std::to_string(summary.draws));
  IntervalScores out;
  for (Eigen::Index q = 0; q < truth.size(); ++q) {
    const DrawSummary& s = summary.edge(p, m, static_cast<int>(q));
    if (truth[q] >= s.q025 && truth[q] <= s.q975) out.coverage += 1.0;
    out.length += s.q975 - s.q025;
  }
  out.coverage /= static_cast<double>(truth.size());
  out.length /= static_cast<double>(truth.size());
  return out;
}

IntervalScores interval_coverage_length(const ChainOutput& chain, const Eigen::Ref<const Eigen::VectorXd>& truth, int p,
                                        int m) {
  check_view(chain, p, m, truth.size());
  if (chain.draws() < kMinIntervalDraws)
    throw InsufficientSamplesError("credible intervals need at least 40 retained draws, chain has " +
                                   std::to_string(chain.draws()));
  return interval_coverage_length(summarize_view(chain, p, m), truth, 0, 0);
}

IntervalScores interval_coverage_length(const ChainOutput& chain, const SyntheticTruth& truth, int p, int m) {
  return interval_coverage_length(chain, truth.coefficient(p, m), p, m);
}

std::optional<double> auc_mann_whitney(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                       const Eigen::Ref<const Eigen::VectorXi>& labels) {
  if (scores.size() != labels.size()) throw ConfigError("scores and labels differ in length");
  double wins = 0.0;
  long positives = 0, negatives = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels[i] != 0 ? positives : negatives)++;
  if (positives == 0 || negatives == 0) return std::nullopt;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    for (Eigen::Index j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

Eigen::VectorXd inclusion_probabilities(const ChainOutput& chain, int p) {
  if (chain.inclusion.rows() == 0 || chain.inclusion.cols() == 0)
    throw ConfigError("chain carries no inclusion draws");
  return chain.inclusion.middleCols(chain.inclusion_column(p, 0), chain.num_nodes).cast<double>().colwise().mean().transpose();
}

NodeSelectionScores node_selection_scores(const ChainOutput& chain, const Eigen::Ref<const Eigen::VectorXi>& truth_inclusion,
                                          int p) {
  if (truth_inclusion.size() != chain.num_nodes) throw ConfigError("truth inclusion length differs from node count");
  NodeSelectionScores out;
  out.inclusion_probability = inclusion_probabilities(chain, p);
  out.auc = auc_mann_whitney(out.inclusion_probability, truth_inclusion);
  for (int k = 0; k < chain.num_nodes; ++k)
    if (out.inclusion_probability[k] > 0.5) out.selected.push_back(k);
  return out;
}

NodeSelectionScores node_selection_scores(const ChainSummary& summary,
                                          const Eigen::Ref<const Eigen::VectorXi>& truth_inclusion, int p) {
  if (!summary.has_inclusion()) throw ConfigError("chain carries no inclusion probabilities");
  if (p < 0 || p >= summary.num_key) throw ConfigError("predictor index outside the chain");
  if (truth_inclusion.size() != summary.num_nodes) throw ConfigError("truth inclusion length differs from node count");
  NodeSelectionScores out;
  out.inclusion_probability = summary.inclusion_probability.row(p).transpose();
  out.auc = auc_mann_whitney(out.inclusion_probability, truth_inclusion);
  for (int k = 0; k < summary.num_nodes; ++k)
    if (out.inclusion_probability[k] > 0.5) out.selected.push_back(k);
  return out;
}

std::vector<PredictiveScores> predictive_evaluate(const ChainOutput& chain, const MultiviewDataset& heldout, Rng& rng) {
  if (heldout.num_key() != chain.num_key || heldout.num_auxiliary() != chain.num_auxiliary ||
      heldout.num_views() != chain.num_views || heldout.num_nodes != chain.num_nodes)
    throw ConfigError("held-out data dimensions differ from the fitted model");
  const int draws = chain.draws();
  if (draws < kMinIntervalDraws) throw InsufficientSamplesError("predictive intervals need at least 40 retained draws");
  const int q_edges = chain.num_edges();
  std::vector<PredictiveScores> out(static_cast<std::size_t>(chain.num_views));
  Eigen::VectorXd lin(draws);
  std::vector<double> noisy(static_cast<std::size_t>(draws));
  for (int m = 0; m < chain.num_views; ++m) {
    auto& score = out[static_cast<std::size_t>(m)];
    const Eigen::VectorXd sd = chain.noise_variance.col(m).array().sqrt();
    const auto& y = heldout.edges[static_cast<std::size_t>(m)];
    for (int i = 0; i < heldout.num_subjects(); ++i) {
      Eigen::VectorXd base = chain.intercept.col(m);
      for (int a = 0; a < chain.num_auxiliary; ++a)
        base += heldout.auxiliary(i, a) * chain.aux_coef.col(chain.aux_column(m, a));
      for (int q = 0; q < q_edges; ++q) {
        lin = base;
        for (int p = 0; p < chain.num_key; ++p)
          lin += heldout.key(i, p) * chain.coefficients.col(chain.coefficient_column(p, m, q));
        for (int s = 0; s < draws; ++s) noisy[static_cast<std::size_t>(s)] = lin[s] + sd[s] * rng.normal();
        const double err = lin.mean() - y(i, q);
        score.mspe += err * err;
        std::sort(noisy.begin(), noisy.end());
        const double h_lo = (draws - 1.0) * 0.025, h_hi = (draws - 1.0) * 0.975;
        auto at = [&](double h) {
          const auto lo = static_cast<std::size_t>(std::floor(h));
          const auto hi = std::min(lo + 1, noisy.size() - 1);
          return noisy[lo] + (h - static_cast<double>(lo)) * (noisy[hi] - noisy[lo]);
        };
        const double lo = at(h_lo), hi = at(h_hi);
        if (y(i, q) >= lo && y(i, q) <= hi) score.coverage += 1.0;
        score.length += hi - lo;
      }
    }
    const double cells = static_cast<double>(heldout.num_subjects()) * q_edges;
    score.mspe /= cells;
    score.coverage /= cells;
    score.length /= cells;
  }
  return out;
}

std::vector<std::pair<std::string, std::optional<double>>> EvaluationRow::values() const {
  return {{"mse", mse},   {"ci_coverage", ci_coverage}, {"ci_length", ci_length}, {"auc", auc},
          {"mspe", mspe}, {"pi_coverage", pi_coverage}, {"pi_length", pi_length}};
}

EvaluationReport evaluate_against_truth(const ChainSummary& summary, const SyntheticTruth& truth) {
  if (truth.num_key() != summary.num_key || truth.num_views != summary.num_views || truth.num_nodes != summary.num_nodes)
    throw ConfigError("truth dimensions differ from the chain");
  EvaluationReport report;
  for (int p = 0; p < summary.num_key; ++p) {
    std::optional<double> auc;
    if (summary.has_inclusion()) {
      report.node_selection.push_back(node_selection_scores(summary, truth.inclusion.row(p).transpose(), p));
      auc = report.node_selection.back().auc;
    }
    for (int m = 0; m < summary.num_views; ++m) {
      EvaluationRow row;
      row.predictor = p;
      row.view = m;
      row.mse = coefficient_mse(summary, truth.coefficient(p, m), p, m);
      const auto ci = interval_coverage_length(summary, truth.coefficient(p, m), p, m);
      row.ci_coverage = ci.coverage;
      row.ci_length = ci.length;
      row.auc = auc;
      report.rows.push_back(row);
    }
  }
  return report;
}

EvaluationReport evaluate_against_truth(const ChainOutput& chain, const SyntheticTruth& truth) {
  return evaluate_against_truth(summarize_chain(chain), truth);
}

void add_predictive(EvaluationReport& report, int num_key, const std::vector<PredictiveScores>& scores) {
  if (report.rows.empty()) {
    for (int p = 0; p < num_key; ++p)
      for (int m = 0; m < static_cast<int>(scores.size()); ++m)
      {
        EvaluationRow row;
        row.predictor = p;
        row.view = m;
        report.rows.push_back(row);
      }
  }
  for (auto& row : report.rows) {
    if (row.view < 0 || row.view >= static_cast<int>(scores.size())) throw ConfigError("report row names an unknown view");
    const auto& s = scores[static_cast<std::size_t>(row.view)];
    row.mspe = s.mspe;
    row.pi_coverage = s.coverage;
    row.pi_length = s.length;
  }
}

void add_predictive(EvaluationReport& report, const ChainOutput& chain, const MultiviewDataset& heldout, Rng& rng) {
  add_predictive(report, chain.num_key, predictive_evaluate(chain, heldout, rng));
}

std::vector<AggregateRow> aggregate_reports(const std::vector<EvaluationReport>& reports) {
  std::map<std::pair<int, int>, std::map<std::string, std::vector<double>>> pooled;
  std::vector<std::string> order;
  for (const auto& report : reports) {
    for (const auto& row : report.rows) {
      auto& cell = pooled[{row.predictor, row.view}];
      for (const auto& [name, value] : row.values()) {
        if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
        if (value) cell[name].push_back(*value);
      }
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, metrics] : pooled) {
    AggregateRow row{key.first, key.second, {}};
    for (const auto& name : order) {
      auto it = metrics.find(name);
      if (it == metrics.end() || it->second.empty()) continue;
      const auto& v = it->second;
      const double n = static_cast<double>(v.size());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= n;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double se = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
      row.metrics.push_back({name, mean, se, static_cast<int>(v.size())});
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace mvjl
