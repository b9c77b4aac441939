#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mvjl {

/// Canonical ordering of the upper-triangular node pairs (k1 < k2) of a
/// K-node undirected graph without self loops. Pairs are numbered row-major:
/// (0,1), (0,2), ..., (0,K-1), (1,2), ... All node indices here are 0-based.
class EdgeIndex {
 public:
  EdgeIndex() = default;
  explicit EdgeIndex(int num_nodes);

  int num_nodes() const noexcept { return num_nodes_; }
  int num_edges() const noexcept { return static_cast<int>(pairs_.size()); }

  /// Position of pair {a, b} (either order). Requires a != b.
  int index(int a, int b) const noexcept {
    if (a > b) std::swap(a, b);
    return a * num_nodes_ - a * (a + 1) / 2 + (b - a - 1);
  }
  const std::pair<int, int>& pair(int q) const noexcept { return pairs_[static_cast<std::size_t>(q)]; }
  const std::vector<std::pair<int, int>>& pairs() const noexcept { return pairs_; }

  /// For node k: the K-1 (other node, edge index) pairs incident to k, in
  /// increasing order of the other node.
  const std::vector<std::pair<int, int>>& incident(int k) const noexcept {
    return incident_[static_cast<std::size_t>(k)];
  }

 private:
  int num_nodes_ = 0;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<std::vector<std::pair<int, int>>> incident_;
};

inline constexpr int num_pairs(int num_nodes) noexcept { return num_nodes * (num_nodes - 1) / 2; }

enum class ViewKind { kContinuous, kBinary };

/// n subjects, each observed as M undirected K-node graphs on a shared node
/// set, with P key and P_aux auxiliary scalar predictors.
///
/// edges[m] is n x Q: row i holds subject i's upper-triangular edge weights
/// for view m in EdgeIndex order. The diagonal is implicitly zero.
struct MultiviewDataset {
  int num_nodes = 0;
  std::vector<Eigen::MatrixXd> edges;
  Eigen::MatrixXd key;        // n x P
  Eigen::MatrixXd auxiliary;  // n x P_aux
  std::vector<ViewKind> view_kinds;
  std::vector<std::string> subject_ids;

  int num_subjects() const noexcept { return static_cast<int>(key.rows()); }
  int num_views() const noexcept { return static_cast<int>(edges.size()); }
  int num_key() const noexcept { return static_cast<int>(key.cols()); }
  int num_auxiliary() const noexcept { return static_cast<int>(auxiliary.cols()); }
  int num_edges() const noexcept { return num_pairs(num_nodes); }

  bool all_continuous() const noexcept;

  /// Throws ConfigError when shapes disagree or any value is non-finite.
  void validate() const;

  /// Rows [first, first + count) as a new dataset.
  MultiviewDataset subset(int first, int count) const;
  /// The single view `m` as an M = 1 dataset.
  MultiviewDataset view(int m) const;
};

/// Zero-filled dataset of the given shape; subject ids are "s1".."sn".
MultiviewDataset make_empty_dataset(int n, int num_nodes, int num_views, int num_key, int num_auxiliary);

}  // namespace mvjl
