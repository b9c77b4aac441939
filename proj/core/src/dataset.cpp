#include "mvjl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvjl/errors.hpp"

namespace mvjl {

EdgeIndex::EdgeIndex(int num_nodes) : num_nodes_(num_nodes) {
  if (num_nodes < 2) throw ConfigError("graphs need at least two nodes, got " + std::to_string(num_nodes));
  pairs_.reserve(static_cast<std::size_t>(num_pairs(num_nodes)));
  for (int a = 0; a < num_nodes; ++a)
    for (int b = a + 1; b < num_nodes; ++b) pairs_.emplace_back(a, b);
  incident_.resize(static_cast<std::size_t>(num_nodes));
  for (int k = 0; k < num_nodes; ++k) {
    auto& list = incident_[static_cast<std::size_t>(k)];
    list.reserve(static_cast<std::size_t>(num_nodes - 1));
    for (int j = 0; j < num_nodes; ++j)
      if (j != k) list.emplace_back(j, index(k, j));
  }
}

bool MultiviewDataset::all_continuous() const noexcept {
  return std::all_of(view_kinds.begin(), view_kinds.end(),
                     [](ViewKind v) { return v == ViewKind::kContinuous; });
}

void MultiviewDataset::validate() const {
  const int n = num_subjects();
  if (num_nodes < 2) throw ConfigError("dataset needs K >= 2 nodes");
  if (edges.empty()) throw ConfigError("dataset has no views");
  if (auxiliary.rows() != n) throw ConfigError("auxiliary predictor rows differ from subject count");
  if (static_cast<int>(view_kinds.size()) != num_views()) throw ConfigError("view kind count differs from view count");
  if (static_cast<int>(subject_ids.size()) != n) throw ConfigError("subject id count differs from subject count");
  for (int m = 0; m < num_views(); ++m) {
    const auto& y = edges[static_cast<std::size_t>(m)];
    if (y.rows() != n || y.cols() != num_edges())
      throw ConfigError("view " + std::to_string(m + 1) + " edge matrix is not n x K(K-1)/2");
    if (!y.allFinite()) throw ConfigError("view " + std::to_string(m + 1) + " has non-finite edge weights");
    if (view_kinds[static_cast<std::size_t>(m)] == ViewKind::kBinary &&
        !(y.array() == 0.0 || y.array() == 1.0).all())
      throw ConfigError("binary view " + std::to_string(m + 1) + " has weights other than 0/1");
  }
  if (!key.allFinite() || !auxiliary.allFinite()) throw ConfigError("non-finite predictor values");
}

MultiviewDataset MultiviewDataset::subset(int first, int count) const {
  if (first < 0 || count < 0 || first + count > num_subjects()) throw ConfigError("subject subset out of range");
  MultiviewDataset out;
  out.num_nodes = num_nodes;
  out.view_kinds = view_kinds;
  for (const auto& y : edges) out.edges.push_back(y.middleRows(first, count));
  out.key = key.middleRows(first, count);
  out.auxiliary = auxiliary.middleRows(first, count);
  out.subject_ids.assign(subject_ids.begin() + first, subject_ids.begin() + first + count);
  return out;
}

MultiviewDataset MultiviewDataset::view(int m) const {
  if (m < 0 || m >= num_views()) throw ConfigError("view index out of range");
  MultiviewDataset out;
  out.num_nodes = num_nodes;
  out.edges = {edges[static_cast<std::size_t>(m)]};
  out.view_kinds = {view_kinds[static_cast<std::size_t>(m)]};
  out.key = key;
  out.auxiliary = auxiliary;
  out.subject_ids = subject_ids;
  return out;
}

MultiviewDataset make_empty_dataset(int n, int num_nodes, int num_views, int num_key, int num_auxiliary) {
  MultiviewDataset d;
  d.num_nodes = num_nodes;
  d.edges.assign(static_cast<std::size_t>(num_views), Eigen::MatrixXd::Zero(n, num_pairs(num_nodes)));
  d.view_kinds.assign(static_cast<std::size_t>(num_views), ViewKind::kContinuous);
  d.key = Eigen::MatrixXd::Zero(n, num_key);
  d.auxiliary = Eigen::MatrixXd::Zero(n, num_auxiliary);
  for (int i = 0; i < n; ++i) d.subject_ids.push_back("s" + std::to_string(i + 1));
  return d;
}

}  // namespace mvjl
