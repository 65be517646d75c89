#include "mrgc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mrgc/error.hpp"

namespace mrgc {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const std::string& where) {
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    fail(ErrorKind::parse, where + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

/// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> csv_lines(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

Graph load_csv_triplet(const std::filesystem::path& dir) {
  std::vector<Vector> rows;
  for (const auto& [number, line] : csv_lines(dir / "features.csv")) {
    const std::string where = "features.csv:" + std::to_string(number);
    Vector row;
    for (auto field : split_fields(line)) row.push_back(parse_number<double>(field, where));
    rows.push_back(std::move(row));
  }
  std::vector<Edge> edges;
  for (const auto& [number, line] : csv_lines(dir / "edges.csv")) {
    const std::string where = "edges.csv:" + std::to_string(number);
    auto fields = split_fields(line);
    if (fields.size() != 2) fail(ErrorKind::parse, where + ": expected 'u,v'");
    edges.emplace_back(parse_number<std::size_t>(fields[0], where),
                       parse_number<std::size_t>(fields[1], where));
  }
  std::vector<int> labels;
  for (const auto& [number, line] : csv_lines(dir / "labels.csv")) {
    labels.push_back(parse_number<int>(trim(line), "labels.csv:" + std::to_string(number)));
  }
  if (rows.size() != labels.size()) {
    fail(ErrorKind::parse, "features.csv has " + std::to_string(rows.size()) +
                               " rows but labels.csv has " + std::to_string(labels.size()));
  }
  return Graph(Matrix::from_rows(rows), edges, std::move(labels));
}

std::string matrix_json(const Matrix& m) {
  std::string out = "[";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (r) out += ", ";
    out += '[';
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ", ";
      out += format_double(m(r, c));
    }
    out += ']';
  }
  return out + "]";
}

std::string graph_body_json(std::size_t n, const Matrix& features, const std::vector<Edge>& edges,
                            const std::vector<int>& labels, const std::string& extra) {
  std::string out = "{\"num_nodes\": " + std::to_string(n) + ",\n \"features\": " +
                    matrix_json(features) + ",\n \"edges\": [";
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (e) out += ", ";
    out += "[" + std::to_string(edges[e].first) + ", " + std::to_string(edges[e].second) + "]";
  }
  out += "],\n \"labels\": [";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(labels[i]);
  }
  out += "]";
  if (!extra.empty()) out += ",\n " + extra;
  return out + "}\n";
}

}  // namespace

Graph::Graph(Matrix features, const std::vector<Edge>& edges, std::vector<int> labels,
             std::optional<int> num_classes)
    : features_(std::move(features)), labels_(std::move(labels)) {
  const std::size_t n = labels_.size();
  if (n == 0) fail(ErrorKind::invariant, "graph must have at least one node");
  if (features_.rows() != n) {
    fail(ErrorKind::invariant, "feature matrix has " + std::to_string(features_.rows()) +
                                   " rows for " + std::to_string(n) + " nodes");
  }
  for (std::size_t r = 0; r < features_.rows(); ++r) {
    for (std::size_t c = 0; c < features_.cols(); ++c) {
      if (!std::isfinite(features_(r, c))) {
        fail(ErrorKind::invariant, "non-finite feature at node " + std::to_string(r) +
                                       ", column " + std::to_string(c));
      }
    }
  }
  const int max_label = *std::max_element(labels_.begin(), labels_.end());
  num_classes_ = num_classes.value_or(max_label + 1);
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(num_classes_, 0)), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      fail(ErrorKind::invariant, "label " + std::to_string(labels_[i]) + " of node " +
                                     std::to_string(i) + " outside [0, " +
                                     std::to_string(num_classes_) + ")");
    }
    ++counts[static_cast<std::size_t>(labels_[i])];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) fail(ErrorKind::invariant, "class " + std::to_string(c) + " has no nodes");
  }

  adjacency_.assign(n, {});
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      fail(ErrorKind::invariant, "edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                     ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (u == v) fail(ErrorKind::invariant, "self-loop at node " + std::to_string(u));
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    num_edges_ += list.size();
  }
  num_edges_ /= 2;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  const auto& list = adjacency_.at(i);
  return std::binary_search(list.begin(), list.end(), j);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (std::size_t u = 0; u < adjacency_.size(); ++u)
    for (std::size_t v : adjacency_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

std::vector<int> RepresentationCloud::classes() const {
  std::vector<int> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> RepresentationCloud::members(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

RepresentationCloud RepresentationCloud::subset(std::span<const std::size_t> rows) const {
  RepresentationCloud out{points.select_rows(rows), {}};
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  return out;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Graph parse_graph_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, std::string("malformed JSON: ") + e.what());
  }
  try {
    const auto rows = doc.at("features").get<std::vector<Vector>>();
    const auto labels = doc.at("labels").get<std::vector<int>>();
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail(ErrorKind::parse, "edge entries must be [u, v]");
      const auto u = e[0].get<long long>();
      const auto v = e[1].get<long long>();
      if (u < 0 || v < 0) fail(ErrorKind::invariant, "negative node index in edge list");
      edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    }
    if (doc.contains("num_nodes")) {
      const auto n = doc.at("num_nodes").get<long long>();
      if (n < 0 || static_cast<std::size_t>(n) != labels.size() ||
          static_cast<std::size_t>(n) != rows.size()) {
        fail(ErrorKind::parse, "num_nodes does not match features/labels lengths");
      }
    }
    if (rows.empty()) fail(ErrorKind::parse, "graph has no nodes");
    return Graph(Matrix::from_rows(rows), edges, labels);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("graph JSON schema violation: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::dimension_mismatch) fail(ErrorKind::parse, e.what());
    throw;
  }
}

std::string graph_json(const Graph& graph, const std::string& extra_json) {
  return graph_body_json(graph.num_nodes(), graph.features(), graph.edges(), graph.labels(),
                         extra_json);
}

Graph load_graph(const std::filesystem::path& path, GraphFormat format) {
  if (format == GraphFormat::csv_triplet) return load_csv_triplet(path);
  return parse_graph_json(read_file(path));
}

Graph load_graph(const std::filesystem::path& path) {
  return load_graph(path, std::filesystem::is_directory(path) ? GraphFormat::csv_triplet
                                                              : GraphFormat::json);
}

CondensedGraph to_condensed(const Graph& graph) {
  return CondensedGraph{graph.features(), graph.labels(), graph.edges(), graph.num_classes()};
}

Graph to_graph(const CondensedGraph& condensed) {
  return Graph(condensed.features, condensed.edges, condensed.labels, condensed.num_classes);
}

CondensedGraph load_condensed(const std::filesystem::path& path) {
  return to_condensed(load_graph(path));
}

void save_graph(const Graph& graph, const std::filesystem::path& path, GraphFormat format,
                const std::string& extra_json) {
  if (format == GraphFormat::json) {
    write_file(path, graph_json(graph, extra_json));
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) fail(ErrorKind::io, "cannot create directory " + path.string() + ": " + ec.message());
  std::string features;
  for (std::size_t r = 0; r < graph.num_nodes(); ++r) {
    for (std::size_t c = 0; c < graph.feature_dim(); ++c) {
      if (c) features += ',';
      features += format_double(graph.features()(r, c));
    }
    features += '\n';
  }
  std::string edges;
  for (const auto& [u, v] : graph.edges()) edges += std::to_string(u) + "," + std::to_string(v) + "\n";
  std::string labels;
  for (int y : graph.labels()) labels += std::to_string(y) + "\n";
  write_file(path / "features.csv", features);
  write_file(path / "edges.csv", edges);
  write_file(path / "labels.csv", labels);
}

void save_graph(const CondensedGraph& graph, const std::filesystem::path& path,
                const std::string& extra_json) {
  write_file(path, graph_body_json(graph.num_nodes(), graph.features, graph.edges, graph.labels,
                                   extra_json));
}

Matrix representation(const Matrix& features, const std::vector<Edge>& edges) {
  const std::size_t n = features.rows();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) fail(ErrorKind::dimension_mismatch, "edge outside feature rows");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  // Duplicate entries would double-count an edge in the binary adjacency.
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  auto propagate = [&](const Matrix& x) {
    Matrix out(n, x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = out.row(i);
      for (std::size_t j : adj[i]) {
        auto src = x.row(j);
        for (std::size_t c = 0; c < x.cols(); ++c) dst[c] += src[c];
      }
    }
    return out;
  };
  return propagate(propagate(features));
}

Matrix representation(const Matrix& features, const Graph& structure) {
  if (features.rows() != structure.num_nodes()) {
    fail(ErrorKind::dimension_mismatch,
         "features have " + std::to_string(features.rows()) + " rows, adjacency is " +
             std::to_string(structure.num_nodes()) + "x" + std::to_string(structure.num_nodes()));
  }
  return representation(features, structure.edges());
}

RepresentationCloud graph_cloud(const Graph& graph) {
  return RepresentationCloud{representation(graph.features(), graph), graph.labels()};
}

RepresentationCloud condensed_cloud(const CondensedGraph& condensed) {
  return RepresentationCloud{condensed.features, condensed.labels};
}

std::vector<Neighbor> sorted_neighbors(const Matrix& points, std::size_t query_index) {
  std::vector<Neighbor> out;
  out.reserve(points.rows());
  const auto q = points.row(query_index);
  for (std::size_t j = 0; j < points.rows(); ++j) {
    if (j == query_index) continue;
    out.push_back({j, distance(q, points.row(j))});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  return out;
}

std::vector<Neighbor> knn(const Matrix& points, std::size_t query_index, std::size_t k) {
  if (query_index >= points.rows()) {
    fail(ErrorKind::dimension_mismatch, "query index " + std::to_string(query_index) +
                                            " outside " + std::to_string(points.rows()) + " points");
  }
  if (k >= points.rows()) {
    fail(ErrorKind::k_too_large, "k = " + std::to_string(k) + " needs more than " +
                                     std::to_string(points.rows()) + " points");
  }
  auto all = sorted_neighbors(points, query_index);
  all.resize(k);
  return all;
}

}  // namespace mrgc
