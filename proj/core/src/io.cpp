#include "mvjl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mvjl/errors.hpp"

namespace mvjl {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// File split into lines; a single trailing newline does not add a line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += cells[i];
  }
  return out;
}

void check_header(std::string_view got, const std::vector<std::string>& expected, const std::string& file) {
  const auto cells = split_csv_line(got);
  if (cells.size() != expected.size())
    throw ParseError(ParseErrorKind::kDimensionMismatch, file, 1,
                     "header has " + std::to_string(cells.size()) + " columns, expected " + std::to_string(expected.size()));
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (cells[c] != expected[c])
      throw ParseError(ParseErrorKind::kMalformed, file, 1,
                       "column " + std::to_string(c + 1) + " is '" + std::string(cells[c]) + "', expected '" + expected[c] + "'");
}

/// Split a data line and require exactly `expected` cells.
std::vector<std::string_view> data_cells(std::string_view line, std::size_t expected, const std::string& file,
                                         std::size_t lineno) {
  auto cells = split_csv_line(line);
  if (cells.size() < expected)
    throw ParseError(ParseErrorKind::kMissingCell, file, lineno,
                     std::to_string(cells.size()) + " cells, expected " + std::to_string(expected));
  if (cells.size() > expected)
    throw ParseError(ParseErrorKind::kMalformed, file, lineno,
                     std::to_string(cells.size()) + " cells, expected " + std::to_string(expected));
  return cells;
}

std::vector<std::string_view> body_lines(const std::vector<std::string_view>& lines, const std::string& file) {
  if (lines.empty()) throw ParseError(ParseErrorKind::kMalformed, file, 1, "empty file");
  for (std::size_t i = 1; i < lines.size(); ++i)
    if (lines[i].empty()) throw ParseError(ParseErrorKind::kMalformed, file, i + 1, "blank line");
  return {lines.begin() + 1, lines.end()};
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseErrorKind::kMalformed, path.string(), 0, e.what());
  }
}

template <class T>
T required(const json& j, const char* key, const std::string& file) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(ParseErrorKind::kMalformed, file, 0, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(ParseErrorKind::kMalformed, file, 0, std::string("key '") + key + "': " + e.what());
  }
}

int required_count(const json& j, const char* key, const std::string& file, int minimum) {
  const auto& v = j.contains(key) ? j.at(key) : json();
  if (!v.is_number_integer())
    throw ParseError(ParseErrorKind::kMalformed, file, 0, std::string("key '") + key + "' must be an integer");
  const auto value = v.get<long long>();
  if (value < minimum || value > 1'000'000'000)
    throw ParseError(ParseErrorKind::kDimensionMismatch, file, 0,
                     std::string("key '") + key + "' must be at least " + std::to_string(minimum));
  return static_cast<int>(value);
}

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& file, const char* key) {
  if (!j.is_array()) throw ParseError(ParseErrorKind::kMalformed, file, 0, std::string(key) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(ParseErrorKind::kDimensionMismatch, file, 0, std::string(key) + " rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& file, const char* key) {
  if (!j.is_array()) throw ParseError(ParseErrorKind::kMalformed, file, 0, std::string(key) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

struct ChainMeta {
  int num_nodes = 0, num_views = 0, num_key = 0, num_auxiliary = 0, rank = 0;
  int n_iter = 0, n_burnin = 0, thin = 1, draws = 0;
  std::uint64_t seed = 0;
  bool has_inclusion = false;
  bool has_node_density = false;
};

ChainMeta read_chain_meta(const fs::path& dir) {
  const fs::path path = dir / kChainMetaFile;
  const json j = parse_json_file(path);
  const std::string file = path.string();
  ChainMeta m;
  m.num_nodes = required_count(j, "num_nodes", file, 2);
  m.num_views = required_count(j, "num_views", file, 1);
  m.num_key = required_count(j, "num_key", file, 1);
  m.num_auxiliary = required_count(j, "num_auxiliary", file, 0);
  m.rank = required_count(j, "rank", file, 1);
  m.n_iter = required_count(j, "n_iter", file, 1);
  m.n_burnin = required_count(j, "n_burnin", file, 0);
  m.thin = required_count(j, "thin", file, 1);
  m.draws = required_count(j, "draws", file, 0);
  m.seed = required<std::uint64_t>(j, "seed", file);
  m.has_inclusion = required<bool>(j, "has_inclusion", file);
  m.has_node_density = required<bool>(j, "has_node_density", file);
  return m;
}

std::vector<std::string> scalar_columns(const ChainOutput& chain, bool with_density) {
  std::vector<std::string> cols{"draw"};
  for (int m = 1; m <= chain.num_views; ++m) cols.push_back("mu_" + std::to_string(m));
  for (int m = 1; m <= chain.num_views; ++m) cols.push_back("sigma2_" + std::to_string(m));
  for (int m = 1; m <= chain.num_views; ++m)
    for (int a = 1; a <= chain.num_auxiliary; ++a) cols.push_back("alpha_" + std::to_string(m) + "_" + std::to_string(a));
  if (with_density)
    for (int p = 1; p <= chain.num_key; ++p) cols.push_back("eta_" + std::to_string(p));
  cols.push_back("loglik");
  return cols;
}

std::vector<std::string> edge_draw_columns(int num_key, int num_views, const EdgeIndex& index) {
  std::vector<std::string> cols{"draw"};
  for (int p = 1; p <= num_key; ++p)
    for (int m = 1; m <= num_views; ++m)
      for (const auto& [a, b] : index.pairs())
        cols.push_back("g_" + std::to_string(p) + "_" + std::to_string(m) + "_" + std::to_string(a + 1) + "_" +
                       std::to_string(b + 1));
  return cols;
}

const std::vector<std::string> kEdgeSummaryHeader{"predictor", "view", "node_a", "node_b", "mean", "sd", "q025", "q975"};
const std::vector<std::string> kNodeInclusionHeader{"predictor", "node", "pip", "selected"};

}  // namespace

DatasetBundle DatasetBundle::in_directory(const fs::path& dir) {
  return {dir / "edges.csv", dir / "predictors.csv", dir / "manifest.json"};
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view cell, const std::string& file, std::size_t line) {
  if (cell.empty()) throw ParseError(ParseErrorKind::kMissingCell, file, line, "empty numeric cell");
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw ParseError(ParseErrorKind::kMalformed, file, line, "not a number: '" + std::string(cell) + "'");
  if (!std::isfinite(value)) throw ParseError(ParseErrorKind::kNonFinite, file, line, std::string(cell));
  return value;
}

long long parse_integer(std::string_view cell, const std::string& file, std::size_t line) {
  if (cell.empty()) throw ParseError(ParseErrorKind::kMissingCell, file, line, "empty integer cell");
  long long value = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw ParseError(ParseErrorKind::kMalformed, file, line, "not an integer: '" + std::string(cell) + "'");
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

MultiviewDataset read_dataset(const DatasetBundle& bundle) {
  const std::string manifest_file = bundle.manifest.string();
  const json manifest = parse_json_file(bundle.manifest);
  if (!manifest.is_object()) throw ParseError(ParseErrorKind::kMalformed, manifest_file, 0, "manifest must be an object");
  const int n = required_count(manifest, "n", manifest_file, 1);
  const int k_nodes = required_count(manifest, "K", manifest_file, 2);
  const int views = required_count(manifest, "M", manifest_file, 1);
  const int p_key = required_count(manifest, "P", manifest_file, 1);
  const int p_aux = required_count(manifest, "P_aux", manifest_file, 0);

  MultiviewDataset d = make_empty_dataset(n, k_nodes, views, p_key, p_aux);
  if (manifest.contains("view_types")) {
    const auto& types = manifest.at("view_types");
    if (!types.is_array() || static_cast<int>(types.size()) != views)
      throw ParseError(ParseErrorKind::kDimensionMismatch, manifest_file, 0, "view_types must list one type per view");
    for (int m = 0; m < views; ++m) {
      const auto& t = types[static_cast<std::size_t>(m)];
      if (t == "continuous") d.view_kinds[static_cast<std::size_t>(m)] = ViewKind::kContinuous;
      else if (t == "binary") d.view_kinds[static_cast<std::size_t>(m)] = ViewKind::kBinary;
      else throw ParseError(ParseErrorKind::kMalformed, manifest_file, 0, "unknown view type " + t.dump());
    }
  }

  // Predictors define subject order.
  const std::string pred_file = bundle.predictors.string();
  const std::string pred_text = read_text_file(bundle.predictors);
  const auto pred_lines = split_lines(pred_text);
  std::vector<std::string> pred_header{"subject_id"};
  for (int p = 1; p <= p_key; ++p) pred_header.push_back("key_" + std::to_string(p));
  for (int a = 1; a <= p_aux; ++a) pred_header.push_back("aux_" + std::to_string(a));
  if (pred_lines.empty()) throw ParseError(ParseErrorKind::kMalformed, pred_file, 1, "empty file");
  check_header(pred_lines[0], pred_header, pred_file);
  const auto pred_body = body_lines(pred_lines, pred_file);
  if (static_cast<int>(pred_body.size()) != n)
    throw ParseError(ParseErrorKind::kDimensionMismatch, pred_file, 0,
                     std::to_string(pred_body.size()) + " subjects, manifest says " + std::to_string(n));
  std::unordered_map<std::string, int> subject_row;
  for (int i = 0; i < n; ++i) {
    const std::size_t lineno = static_cast<std::size_t>(i) + 2;
    const auto cells = data_cells(pred_body[static_cast<std::size_t>(i)], pred_header.size(), pred_file, lineno);
    if (cells[0].empty()) throw ParseError(ParseErrorKind::kMissingCell, pred_file, lineno, "empty subject_id");
    std::string id(cells[0]);
    if (!subject_row.emplace(id, i).second)
      throw ParseError(ParseErrorKind::kDuplicateRow, pred_file, lineno, "subject '" + id + "' repeated");
    d.subject_ids[static_cast<std::size_t>(i)] = std::move(id);
    for (int p = 0; p < p_key; ++p) d.key(i, p) = parse_double(cells[static_cast<std::size_t>(1 + p)], pred_file, lineno);
    for (int a = 0; a < p_aux; ++a)
      d.auxiliary(i, a) = parse_double(cells[static_cast<std::size_t>(1 + p_key + a)], pred_file, lineno);
  }

  const std::string edge_file = bundle.edges.string();
  const std::string edge_text = read_text_file(bundle.edges);
  const auto edge_lines = split_lines(edge_text);
  const std::vector<std::string> edge_header{"subject_id", "view", "node_a", "node_b", "weight"};
  if (edge_lines.empty()) throw ParseError(ParseErrorKind::kMalformed, edge_file, 1, "empty file");
  check_header(edge_lines[0], edge_header, edge_file);
  const auto edge_body = body_lines(edge_lines, edge_file);
  const EdgeIndex index(k_nodes);
  const int q_edges = index.num_edges();
  std::vector<char> seen(static_cast<std::size_t>(n) * views * q_edges, 0);
  for (std::size_t l = 0; l < edge_body.size(); ++l) {
    const std::size_t lineno = l + 2;
    const auto cells = data_cells(edge_body[l], edge_header.size(), edge_file, lineno);
    const auto it = subject_row.find(std::string(cells[0]));
    if (it == subject_row.end())
      throw ParseError(ParseErrorKind::kUnknownSubject, edge_file, lineno, "subject '" + std::string(cells[0]) + "'");
    const int i = it->second;
    const long long view = parse_integer(cells[1], edge_file, lineno);
    if (view < 1 || view > views)
      throw ParseError(ParseErrorKind::kDimensionMismatch, edge_file, lineno,
                       "view " + std::to_string(view) + " outside 1.." + std::to_string(views));
    const long long a = parse_integer(cells[2], edge_file, lineno);
    const long long b = parse_integer(cells[3], edge_file, lineno);
    for (long long node : {a, b})
      if (node < 1 || node > k_nodes)
        throw ParseError(ParseErrorKind::kNodeOutOfRange, edge_file, lineno,
                         "node " + std::to_string(node) + " outside 1.." + std::to_string(k_nodes));
    if (a == b) throw ParseError(ParseErrorKind::kSelfLoop, edge_file, lineno, "node " + std::to_string(a));
    const double weight = parse_double(cells[4], edge_file, lineno);
    const int m = static_cast<int>(view) - 1;
    if (d.view_kinds[static_cast<std::size_t>(m)] == ViewKind::kBinary && weight != 0.0 && weight != 1.0)
      throw ParseError(ParseErrorKind::kMalformed, edge_file, lineno, "binary view weight must be 0 or 1");
    const int q = index.index(static_cast<int>(a) - 1, static_cast<int>(b) - 1);
    auto& flag = seen[(static_cast<std::size_t>(i) * views + m) * q_edges + q];
    if (flag) throw ParseError(ParseErrorKind::kDuplicateRow, edge_file, lineno, "edge repeated for this subject and view");
    flag = 1;
    d.edges[static_cast<std::size_t>(m)](i, q) = weight;
  }
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < views; ++m)
      for (int q = 0; q < q_edges; ++q)
        if (!seen[(static_cast<std::size_t>(i) * views + m) * q_edges + q]) {
          const auto [a, b] = index.pair(q);
          throw ParseError(ParseErrorKind::kMissingCell, edge_file, 0,
                           "no weight for subject '" + d.subject_ids[static_cast<std::size_t>(i)] + "', view " +
                               std::to_string(m + 1) + ", pair (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
        }
  d.validate();
  return d;
}

void write_dataset(const MultiviewDataset& data, const DatasetBundle& bundle) {
  data.validate();
  json manifest = {{"n", data.num_subjects()},  {"K", data.num_nodes},        {"M", data.num_views()},
                   {"P", data.num_key()},       {"P_aux", data.num_auxiliary()}};
  json types = json::array();
  for (auto kind : data.view_kinds) types.push_back(kind == ViewKind::kBinary ? "binary" : "continuous");
  manifest["view_types"] = types;
  write_text_file(bundle.manifest, manifest.dump(2) + "\n");

  std::vector<std::string> header{"subject_id"};
  for (int p = 1; p <= data.num_key(); ++p) header.push_back("key_" + std::to_string(p));
  for (int a = 1; a <= data.num_auxiliary(); ++a) header.push_back("aux_" + std::to_string(a));
  std::string pred = join(header) + "\n";
  for (int i = 0; i < data.num_subjects(); ++i) {
    pred += data.subject_ids[static_cast<std::size_t>(i)];
    for (int p = 0; p < data.num_key(); ++p) pred += "," + format_double(data.key(i, p));
    for (int a = 0; a < data.num_auxiliary(); ++a) pred += "," + format_double(data.auxiliary(i, a));
    pred += '\n';
  }
  write_text_file(bundle.predictors, pred);

  const EdgeIndex index(data.num_nodes);
  std::string edges = "subject_id,view,node_a,node_b,weight\n";
  for (int i = 0; i < data.num_subjects(); ++i) {
    const std::string prefix = data.subject_ids[static_cast<std::size_t>(i)] + ",";
    for (int m = 0; m < data.num_views(); ++m) {
      const std::string view_prefix = prefix + std::to_string(m + 1) + ",";
      for (int q = 0; q < index.num_edges(); ++q) {
        const auto [a, b] = index.pair(q);
        edges += view_prefix;
        edges += std::to_string(a + 1);
        edges += ',';
        edges += std::to_string(b + 1);
        edges += ',';
        edges += format_double(data.edges[static_cast<std::size_t>(m)](i, q));
        edges += '\n';
      }
    }
  }
  write_text_file(bundle.edges, edges);
}

void write_chain_summary(const ChainOutput& chain, const fs::path& dir, bool save_draws) {
  const int draws = chain.draws();
  if (draws == 0) throw InsufficientSamplesError("chain has no retained draws to summarize");
  const EdgeIndex index(chain.num_nodes);
  const bool has_inclusion = chain.inclusion.size() > 0;
  const bool has_density = chain.node_density.size() > 0;

  std::string summary = join(kEdgeSummaryHeader) + "\n";
  for (int p = 0; p < chain.num_key; ++p)
    for (int m = 0; m < chain.num_views; ++m)
      for (int q = 0; q < index.num_edges(); ++q) {
        const auto s = summarize_draws(chain.coefficients.col(chain.coefficient_column(p, m, q)));
        const auto [a, b] = index.pair(q);
        summary += std::to_string(p + 1) + "," + std::to_string(m + 1) + "," + std::to_string(a + 1) + "," +
                   std::to_string(b + 1) + "," + format_double(s.mean) + "," + format_double(s.sd) + "," +
                   format_double(s.q025) + "," + format_double(s.q975) + "\n";
      }
  write_text_file(dir / kEdgeSummaryFile, summary);

  if (has_inclusion) {
    std::string nodes = join(kNodeInclusionHeader) + "\n";
    for (int p = 0; p < chain.num_key; ++p) {
      const Eigen::VectorXd pip = inclusion_probabilities(chain, p);
      for (int k = 0; k < chain.num_nodes; ++k)
        nodes += std::to_string(p + 1) + "," + std::to_string(k + 1) + "," + format_double(pip[k]) + "," +
                 (pip[k] > 0.5 ? "1" : "0") + "\n";
    }
    write_text_file(dir / kNodeInclusionFile, nodes);
  }

  std::string scalars = join(scalar_columns(chain, has_density)) + "\n";
  for (int s = 0; s < draws; ++s) {
    scalars += std::to_string(s + 1);
    for (int m = 0; m < chain.num_views; ++m) scalars += "," + format_double(chain.intercept(s, m));
    for (int m = 0; m < chain.num_views; ++m) scalars += "," + format_double(chain.noise_variance(s, m));
    for (int m = 0; m < chain.num_views; ++m)
      for (int a = 0; a < chain.num_auxiliary; ++a) scalars += "," + format_double(chain.aux_coef(s, chain.aux_column(m, a)));
    if (has_density)
      for (int p = 0; p < chain.num_key; ++p) scalars += "," + format_double(chain.node_density(s, p));
    scalars += "," + format_double(chain.log_likelihood[s]) + "\n";
  }
  write_text_file(dir / kScalarsFile, scalars);

  if (save_draws) {
    std::string out = join(edge_draw_columns(chain.num_key, chain.num_views, index)) + "\n";
    for (int s = 0; s < draws; ++s) {
      out += std::to_string(s + 1);
      for (Eigen::Index c = 0; c < chain.coefficients.cols(); ++c) {
        out += ',';
        out += format_double(chain.coefficients(s, c));
      }
      out += '\n';
    }
    write_text_file(dir / kEdgeDrawsFile, out);
  }

  const json meta = {{"num_nodes", chain.num_nodes},
                     {"num_views", chain.num_views},
                     {"num_key", chain.num_key},
                     {"num_auxiliary", chain.num_auxiliary},
                     {"rank", chain.rank},
                     {"n_iter", chain.n_iter},
                     {"n_burnin", chain.n_burnin},
                     {"thin", chain.thin},
                     {"draws", draws},
                     {"seed", chain.seed},
                     {"has_inclusion", has_inclusion},
                     {"has_node_density", has_density},
                     {"has_draws", save_draws}};
  write_text_file(dir / kChainMetaFile, meta.dump(2) + "\n");
}

ChainSummary read_chain_summary(const fs::path& dir) {
  const ChainMeta meta = read_chain_meta(dir);
  ChainSummary s;
  s.num_nodes = meta.num_nodes;
  s.num_views = meta.num_views;
  s.num_key = meta.num_key;
  s.draws = meta.draws;
  const EdgeIndex index(meta.num_nodes);
  const int q_edges = index.num_edges();
  const std::size_t total = static_cast<std::size_t>(meta.num_key) * meta.num_views * q_edges;
  s.edges.resize(total);

  const fs::path summary_path = dir / kEdgeSummaryFile;
  const std::string file = summary_path.string();
  const std::string text = read_text_file(summary_path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(ParseErrorKind::kMalformed, file, 1, "empty file");
  check_header(lines[0], kEdgeSummaryHeader, file);
  const auto body = body_lines(lines, file);
  if (body.size() != total)
    throw ParseError(ParseErrorKind::kDimensionMismatch, file, 0,
                     std::to_string(body.size()) + " rows, expected " + std::to_string(total));
  std::vector<char> seen(total, 0);
  for (std::size_t l = 0; l < body.size(); ++l) {
    const std::size_t lineno = l + 2;
    const auto cells = data_cells(body[l], kEdgeSummaryHeader.size(), file, lineno);
    const long long p = parse_integer(cells[0], file, lineno);
    const long long m = parse_integer(cells[1], file, lineno);
    const long long a = parse_integer(cells[2], file, lineno);
    const long long b = parse_integer(cells[3], file, lineno);
    if (p < 1 || p > meta.num_key || m < 1 || m > meta.num_views)
      throw ParseError(ParseErrorKind::kDimensionMismatch, file, lineno, "predictor or view out of range");
    if (a < 1 || a > meta.num_nodes || b < 1 || b > meta.num_nodes)
      throw ParseError(ParseErrorKind::kNodeOutOfRange, file, lineno, "node out of range");
    if (a == b) throw ParseError(ParseErrorKind::kSelfLoop, file, lineno, "node " + std::to_string(a));
    const std::size_t pos = static_cast<std::size_t>(((p - 1) * meta.num_views + (m - 1)) * q_edges +
                                                     index.index(static_cast<int>(a) - 1, static_cast<int>(b) - 1));
    if (seen[pos]) throw ParseError(ParseErrorKind::kDuplicateRow, file, lineno, "edge repeated");
    seen[pos] = 1;
    auto& e = s.edges[pos];
    e.mean = parse_double(cells[4], file, lineno);
    e.sd = parse_double(cells[5], file, lineno);
    e.q025 = parse_double(cells[6], file, lineno);
    e.q975 = parse_double(cells[7], file, lineno);
  }

  if (meta.has_inclusion) {
    const fs::path node_path = dir / kNodeInclusionFile;
    const std::string nfile = node_path.string();
    const std::string ntext = read_text_file(node_path);
    const auto nlines = split_lines(ntext);
    if (nlines.empty()) throw ParseError(ParseErrorKind::kMalformed, nfile, 1, "empty file");
    check_header(nlines[0], kNodeInclusionHeader, nfile);
    const auto nbody = body_lines(nlines, nfile);
    if (nbody.size() != static_cast<std::size_t>(meta.num_key) * meta.num_nodes)
      throw ParseError(ParseErrorKind::kDimensionMismatch, nfile, 0, "row count differs from P * K");
    s.inclusion_probability = Eigen::MatrixXd::Constant(meta.num_key, meta.num_nodes, std::nan(""));
    for (std::size_t l = 0; l < nbody.size(); ++l) {
      const std::size_t lineno = l + 2;
      const auto cells = data_cells(nbody[l], kNodeInclusionHeader.size(), nfile, lineno);
      const long long p = parse_integer(cells[0], nfile, lineno);
      const long long k = parse_integer(cells[1], nfile, lineno);
      if (p < 1 || p > meta.num_key) throw ParseError(ParseErrorKind::kDimensionMismatch, nfile, lineno, "predictor out of range");
      if (k < 1 || k > meta.num_nodes) throw ParseError(ParseErrorKind::kNodeOutOfRange, nfile, lineno, "node out of range");
      double& slot = s.inclusion_probability(p - 1, k - 1);
      if (!std::isnan(slot)) throw ParseError(ParseErrorKind::kDuplicateRow, nfile, lineno, "node repeated");
      slot = parse_double(cells[2], nfile, lineno);
    }
  }
  return s;
}

ScalarTable read_scalars(const fs::path& path) {
  const std::string file = path.string();
  const std::string text = read_text_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(ParseErrorKind::kMalformed, file, 1, "empty file");
  ScalarTable t;
  for (auto c : split_csv_line(lines[0])) t.columns.emplace_back(c);
  const auto body = body_lines(lines, file);
  t.values.resize(static_cast<Eigen::Index>(body.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t l = 0; l < body.size(); ++l) {
    const auto cells = data_cells(body[l], t.columns.size(), file, l + 2);
    for (std::size_t c = 0; c < cells.size(); ++c)
      t.values(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)) = parse_double(cells[c], file, l + 2);
  }
  return t;
}

ChainOutput read_chain_draws(const fs::path& dir) {
  const ChainMeta meta = read_chain_meta(dir);
  if (!fs::exists(dir / kEdgeDrawsFile))
    throw IoError((dir / kEdgeDrawsFile).string() + " not found; refit with draw storage enabled");
  ChainOutput c;
  c.num_nodes = meta.num_nodes;
  c.num_views = meta.num_views;
  c.num_key = meta.num_key;
  c.num_auxiliary = meta.num_auxiliary;
  c.rank = meta.rank;
  c.n_iter = meta.n_iter;
  c.n_burnin = meta.n_burnin;
  c.thin = meta.thin;
  c.seed = meta.seed;

  const fs::path scalars_path = dir / kScalarsFile;
  const ScalarTable scalars = read_scalars(scalars_path);
  const auto expected = scalar_columns(c, meta.has_node_density);
  if (scalars.columns != expected)
    throw ParseError(ParseErrorKind::kDimensionMismatch, scalars_path.string(), 1, "unexpected columns");
  if (scalars.values.rows() != meta.draws)
    throw ParseError(ParseErrorKind::kDimensionMismatch, scalars_path.string(), 0, "row count differs from chain draws");
  const Eigen::Index draws = meta.draws;
  const int views = meta.num_views;
  Eigen::Index col = 1;
  c.intercept = scalars.values.middleCols(col, views);
  col += views;
  c.noise_variance = scalars.values.middleCols(col, views);
  col += views;
  c.aux_coef = scalars.values.middleCols(col, views * meta.num_auxiliary);
  col += views * meta.num_auxiliary;
  if (meta.has_node_density) {
    c.node_density = scalars.values.middleCols(col, meta.num_key);
    col += meta.num_key;
  }
  c.log_likelihood = scalars.values.col(col);

  const fs::path draws_path = dir / kEdgeDrawsFile;
  const std::string file = draws_path.string();
  const std::string text = read_text_file(draws_path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(ParseErrorKind::kMalformed, file, 1, "empty file");
  const auto header = edge_draw_columns(meta.num_key, views, EdgeIndex(meta.num_nodes));
  check_header(lines[0], header, file);
  const auto body = body_lines(lines, file);
  if (static_cast<Eigen::Index>(body.size()) != draws)
    throw ParseError(ParseErrorKind::kDimensionMismatch, file, 0, "row count differs from chain draws");
  c.coefficients.resize(draws, static_cast<Eigen::Index>(header.size()) - 1);
  for (std::size_t l = 0; l < body.size(); ++l) {
    const auto cells = data_cells(body[l], header.size(), file, l + 2);
    for (std::size_t k = 1; k < cells.size(); ++k)
      c.coefficients(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k) - 1) = parse_double(cells[k], file, l + 2);
  }
  return c;
}

void write_report(const EvaluationReport& report, const fs::path& path) {
  std::vector<std::string> names;
  std::vector<bool> present;
  if (!report.rows.empty()) {
    const auto first = report.rows.front().values();
    present.assign(first.size(), false);
    for (const auto& [name, value] : first) names.push_back(name);
    for (const auto& row : report.rows) {
      const auto vals = row.values();
      for (std::size_t j = 0; j < vals.size(); ++j)
        if (vals[j].second) present[j] = true;
    }
  }
  std::vector<std::string> header{"predictor", "view"};
  for (std::size_t j = 0; j < names.size(); ++j)
    if (present[j]) header.push_back(names[j]);
  std::string out = join(header) + "\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.predictor + 1) + "," + std::to_string(row.view + 1);
    const auto vals = row.values();
    for (std::size_t j = 0; j < vals.size(); ++j)
      if (present[j]) out += "," + cell(vals[j].second);
    out += '\n';
  }
  write_text_file(path, out);
}

EvaluationReport read_report(const fs::path& path) {
  const std::string file = path.string();
  const std::string text = read_text_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(ParseErrorKind::kMalformed, file, 1, "empty file");
  const auto header = split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "predictor" || header[1] != "view")
    throw ParseError(ParseErrorKind::kMalformed, file, 1, "report must start with predictor,view");
  const EvaluationRow probe;
  const auto known = probe.values();
  std::vector<std::size_t> slot;
  for (std::size_t c = 2; c < header.size(); ++c) {
    std::size_t j = 0;
    while (j < known.size() && known[j].first != header[c]) ++j;
    if (j == known.size()) throw ParseError(ParseErrorKind::kMalformed, file, 1, "unknown metric '" + std::string(header[c]) + "'");
    slot.push_back(j);
  }
  EvaluationReport report;
  const auto body = body_lines(lines, file);
  for (std::size_t l = 0; l < body.size(); ++l) {
    const std::size_t lineno = l + 2;
    const auto cells = data_cells(body[l], header.size(), file, lineno);
    EvaluationRow row;
    row.predictor = static_cast<int>(parse_integer(cells[0], file, lineno)) - 1;
    row.view = static_cast<int>(parse_integer(cells[1], file, lineno)) - 1;
    std::optional<double>* fields[] = {&row.mse,  &row.ci_coverage, &row.ci_length, &row.auc,
                                       &row.mspe, &row.pi_coverage, &row.pi_length};
    for (std::size_t c = 2; c < cells.size(); ++c)
      if (!cells[c].empty()) *fields[slot[c - 2]] = parse_double(cells[c], file, lineno);
    report.rows.push_back(row);
  }
  return report;
}

void write_aggregate_report(const std::vector<AggregateRow>& rows, const fs::path& path) {
  std::vector<std::string> names;
  for (const auto& row : rows)
    for (const auto& m : row.metrics)
      if (std::find(names.begin(), names.end(), m.name) == names.end()) names.push_back(m.name);
  // Keep the canonical metric order.
  const auto canonical = EvaluationRow{}.values();
  std::vector<std::string> ordered;
  for (const auto& [name, v] : canonical)
    if (std::find(names.begin(), names.end(), name) != names.end()) ordered.push_back(name);

  std::vector<std::string> header{"predictor", "view", "replications"};
  for (const auto& name : ordered) {
    header.push_back(name + "_mean");
    header.push_back(name + "_se");
  }
  std::string out = join(header) + "\n";
  for (const auto& row : rows) {
    int reps = 0;
    for (const auto& m : row.metrics) reps = std::max(reps, m.count);
    out += std::to_string(row.predictor + 1) + "," + std::to_string(row.view + 1) + "," + std::to_string(reps);
    for (const auto& name : ordered) {
      auto it = std::find_if(row.metrics.begin(), row.metrics.end(), [&](const AggregateMetric& m) { return m.name == name; });
      if (it == row.metrics.end()) out += ",,";
      else out += "," + format_double(it->mean) + "," + format_double(it->se);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_truth(const SyntheticTruth& truth, const fs::path& path) {
  json coefficients = json::array();
  for (const auto& g : truth.coefficients) coefficients.push_back(vector_to_json(g));
  json inclusion = json::array();
  for (Eigen::Index p = 0; p < truth.inclusion.rows(); ++p) {
    json row = json::array();
    for (Eigen::Index k = 0; k < truth.inclusion.cols(); ++k) row.push_back(truth.inclusion(p, k));
    inclusion.push_back(std::move(row));
  }
  const json j = {{"num_nodes", truth.num_nodes},
                  {"num_views", truth.num_views},
                  {"true_rank", truth.true_rank},
                  {"inclusion", inclusion},
                  {"coefficients", coefficients},
                  {"intercept", vector_to_json(truth.intercept)},
                  {"noise_variance", vector_to_json(truth.noise_variance)},
                  {"aux_coef", matrix_to_json(truth.aux_coef)},
                  {"latent_mean", vector_to_json(truth.latent_mean)},
                  {"latent", matrix_to_json(truth.latent)}};
  write_text_file(path, j.dump(1) + "\n");
}

SyntheticTruth read_truth(const fs::path& path) {
  const std::string file = path.string();
  const json j = parse_json_file(path);
  SyntheticTruth t;
  t.num_nodes = required_count(j, "num_nodes", file, 2);
  t.num_views = required_count(j, "num_views", file, 1);
  t.true_rank = required_count(j, "true_rank", file, 1);
  try {
    const auto& inc = j.at("inclusion");
    const Eigen::MatrixXd incd = matrix_from_json(inc, file, "inclusion");
    if (incd.cols() != t.num_nodes) throw ParseError(ParseErrorKind::kDimensionMismatch, file, 0, "inclusion width differs from K");
    t.inclusion = incd.cast<int>();
    const int q = num_pairs(t.num_nodes);
    for (const auto& g : j.at("coefficients")) {
      t.coefficients.push_back(vector_from_json(g, file, "coefficients"));
      if (t.coefficients.back().size() != q)
        throw ParseError(ParseErrorKind::kDimensionMismatch, file, 0, "coefficient vector length differs from K(K-1)/2");
    }
    if (static_cast<int>(t.coefficients.size()) != t.num_key() * t.num_views)
      throw ParseError(ParseErrorKind::kDimensionMismatch, file, 0, "coefficient count differs from P * M");
    t.intercept = vector_from_json(j.at("intercept"), file, "intercept");
    t.noise_variance = vector_from_json(j.at("noise_variance"), file, "noise_variance");
    t.aux_coef = matrix_from_json(j.at("aux_coef"), file, "aux_coef");
    t.latent_mean = vector_from_json(j.at("latent_mean"), file, "latent_mean");
    t.latent = matrix_from_json(j.at("latent"), file, "latent");
  } catch (const json::exception& e) {
    throw ParseError(ParseErrorKind::kMalformed, file, 0, e.what());
  }
  return t;
}

void write_text_file(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mvjl
