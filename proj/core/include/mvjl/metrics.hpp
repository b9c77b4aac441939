#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvjl/chain.hpp"
#include "mvjl/dataset.hpp"
#include "mvjl/rng.hpp"
#include "mvjl/simulate.hpp"

namespace mvjl {

/// Type-7 (linear interpolation between order statistics) sample quantile.
/// `values` need not be sorted.
double quantile(std::vector<double> values, double prob);

struct DrawSummary {
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator
  double q025 = 0.0;
  double q975 = 0.0;
};

DrawSummary summarize_draws(const Eigen::Ref<const Eigen::VectorXd>& draws);

/// Per-edge marginal summaries and inclusion probabilities of a chain. Enough
/// to score coefficients and node selection without the raw draws.
struct ChainSummary {
  int num_nodes = 0;
  int num_views = 0;
  int num_key = 0;
  int draws = 0;
  std::vector<DrawSummary> edges;         // index (p * M + m) * Q + q
  Eigen::MatrixXd inclusion_probability;  // P x K; empty for independent fits

  int num_edges() const noexcept { return num_pairs(num_nodes); }
  const DrawSummary& edge(int p, int m, int q) const {
    return edges[static_cast<std::size_t>((p * num_views + m) * num_edges() + q)];
  }
  bool has_inclusion() const noexcept { return inclusion_probability.size() > 0; }
};

ChainSummary summarize_chain(const ChainOutput& chain);

/// 2/(K(K-1)) * sum over pairs of (posterior mean - truth)^2.
double coefficient_mse(const ChainOutput& chain, const Eigen::Ref<const Eigen::VectorXd>& truth, int p, int m);
double coefficient_mse(const ChainOutput& chain, const SyntheticTruth& truth, int p, int m);
double coefficient_mse(const ChainSummary& summary, const Eigen::Ref<const Eigen::VectorXd>& truth, int p, int m);

struct IntervalScores {
  double coverage = 0.0;  // fraction of edges whose truth lies in its central 95% interval
  double length = 0.0;    // mean interval width
};

/// Central 95% credible intervals from the 2.5% / 97.5% quantiles of the
/// retained draws of each edge. Throws InsufficientSamplesError below 40 draws.
IntervalScores interval_coverage_length(const ChainOutput& chain, const Eigen::Ref<const Eigen::VectorXd>& truth, int p,
                                        int m);
IntervalScores interval_coverage_length(const ChainOutput& chain, const SyntheticTruth& truth, int p, int m);
IntervalScores interval_coverage_length(const ChainSummary& summary, const Eigen::Ref<const Eigen::VectorXd>& truth, int p,
                                        int m);

/// Area under the ROC curve of `scores` against binary `labels` by the
/// Mann-Whitney statistic (ties count one half). Empty when all labels agree.
std::optional<double> auc_mann_whitney(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                       const Eigen::Ref<const Eigen::VectorXi>& labels);

struct NodeSelectionScores {
  std::optional<double> auc;
  Eigen::VectorXd inclusion_probability;  // K
  std::vector<int> selected;              // 0-based nodes with probability > 0.5
};

/// Posterior inclusion probabilities of key predictor p scored against the
/// true activity labels; the selected set follows the median-probability rule.
NodeSelectionScores node_selection_scores(const ChainOutput& chain, const Eigen::Ref<const Eigen::VectorXi>& truth_inclusion,
                                          int p);
NodeSelectionScores node_selection_scores(const ChainSummary& summary,
                                          const Eigen::Ref<const Eigen::VectorXi>& truth_inclusion, int p);

/// Posterior inclusion probability of every node for key predictor p.
Eigen::VectorXd inclusion_probabilities(const ChainOutput& chain, int p);

struct PredictiveScores {
  double mspe = 0.0;      // squared error of the posterior predictive mean
  double coverage = 0.0;  // central 95% posterior predictive interval
  double length = 0.0;
};

/// Per-view posterior predictive scores on held-out subjects. Each retained
/// state contributes one draw mu + x^T gamma + xaux^T alpha + eps with
/// eps ~ N(0, sigma^2_m). Throws ConfigError on predictor dimension mismatch.
std::vector<PredictiveScores> predictive_evaluate(const ChainOutput& chain, const MultiviewDataset& heldout, Rng& rng);

struct EvaluationRow {
  int predictor = 0;
  int view = 0;
  std::optional<double> mse;
  std::optional<double> ci_coverage;
  std::optional<double> ci_length;
  std::optional<double> auc;
  std::optional<double> mspe;
  std::optional<double> pi_coverage;
  std::optional<double> pi_length;

  /// (column name, value) for the fixed column order; absent metrics are empty.
  std::vector<std::pair<std::string, std::optional<double>>> values() const;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;                    // one per (predictor, view)
  std::vector<NodeSelectionScores> node_selection;    // one per predictor, when inclusion draws exist
};

/// Coefficient and node-selection scores against a known truth. Node scores
/// are skipped when the chain carries no inclusion draws (independent fits).
EvaluationReport evaluate_against_truth(const ChainSummary& summary, const SyntheticTruth& truth);
EvaluationReport evaluate_against_truth(const ChainOutput& chain, const SyntheticTruth& truth);

/// Fill predictive columns of `report` (creating rows if it is empty).
void add_predictive(EvaluationReport& report, const ChainOutput& chain, const MultiviewDataset& heldout, Rng& rng);
void add_predictive(EvaluationReport& report, int num_key, const std::vector<PredictiveScores>& scores);

struct AggregateMetric {
  std::string name;
  double mean = 0.0;
  double se = 0.0;
  int count = 0;
};

struct AggregateRow {
  int predictor = 0;
  int view = 0;
  std::vector<AggregateMetric> metrics;
};

/// Mean and standard error (sd / sqrt(count)) of each metric across replications.
std::vector<AggregateRow> aggregate_reports(const std::vector<EvaluationReport>& reports);

}  // namespace mvjl
