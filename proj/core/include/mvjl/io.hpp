#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mvjl/chain.hpp"
#include "mvjl/dataset.hpp"
#include "mvjl/metrics.hpp"
#include "mvjl/simulate.hpp"

namespace mvjl {

/// The three files describing a dataset on disk.
///
///   edges.csv       subject_id,view,node_a,node_b,weight   (1-based view and nodes)
///   predictors.csv  subject_id,key_1..key_P,aux_1..aux_Paux
///   manifest.json   {"n", "K", "M", "P", "P_aux"[, "view_types"]}
struct DatasetBundle {
  std::filesystem::path edges;
  std::filesystem::path predictors;
  std::filesystem::path manifest;

  static DatasetBundle in_directory(const std::filesystem::path& dir);
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a whole cell; throws ParseError (kMalformed or kNonFinite).
double parse_double(std::string_view cell, const std::string& file, std::size_t line);
long long parse_integer(std::string_view cell, const std::string& file, std::size_t line);

/// Split one CSV line on commas. No quoting is recognised.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Reads and validates a bundle. Subject order follows predictors.csv. Pairs
/// with node_a > node_b are stored as (node_b, node_a). Every malformed input
/// raises a ParseError carrying its kind, file and 1-based line; a missing
/// (subject, view, pair) is reported against line 0 of the edges file.
MultiviewDataset read_dataset(const DatasetBundle& bundle);

/// Writes all three files, creating parent directories. Throws IoError when a
/// path cannot be written.
void write_dataset(const MultiviewDataset& data, const DatasetBundle& bundle);

/// Fit output directory contents.
inline constexpr const char* kEdgeSummaryFile = "edge_coef_summary.csv";
inline constexpr const char* kNodeInclusionFile = "node_inclusion.csv";
inline constexpr const char* kScalarsFile = "scalars.csv";
inline constexpr const char* kEdgeDrawsFile = "edge_draws.csv";
inline constexpr const char* kChainMetaFile = "chain.json";
inline constexpr const char* kReportFile = "report.csv";
inline constexpr const char* kTruthFile = "truth.json";

/// Writes edge_coef_summary.csv, scalars.csv, chain.json and, when the chain
/// carries inclusion draws, node_inclusion.csv into `dir`. With `save_draws`
/// the per-draw coefficients go to edge_draws.csv as well.
void write_chain_summary(const ChainOutput& chain, const std::filesystem::path& dir, bool save_draws = false);

/// Reads the summaries written by write_chain_summary back into a ChainSummary.
ChainSummary read_chain_summary(const std::filesystem::path& dir);

/// Rebuilds a draw-level chain from scalars.csv and edge_draws.csv. Inclusion
/// and rank-sign draws are not stored and come back empty.
ChainOutput read_chain_draws(const std::filesystem::path& dir);

/// Header and values of scalars.csv (first column is the 1-based draw index).
struct ScalarTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};
ScalarTable read_scalars(const std::filesystem::path& path);

/// report.csv: predictor,view then every metric present in at least one row.
/// Predictor and view are 1-based; absent metrics are empty cells.
void write_report(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport read_report(const std::filesystem::path& path);

/// Aggregated report: predictor,view,replications then <metric>_mean,<metric>_se.
void write_aggregate_report(const std::vector<AggregateRow>& rows, const std::filesystem::path& path);

void write_truth(const SyntheticTruth& truth, const std::filesystem::path& path);
SyntheticTruth read_truth(const std::filesystem::path& path);

/// Write `contents` to `path`, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mvjl
