#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mrgc/matrix.hpp"

namespace mrgc {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected, unweighted attributed graph with node labels.
///
/// Construction validates the invariants: symmetric adjacency without
/// self-loops, finite features, labels in [0, C) with every class populated.
/// Instances are immutable afterwards.
class Graph {
 public:
  /// `edges` may list each undirected edge once or twice, in any orientation;
  /// duplicates collapse. `num_classes` defaults to max(label) + 1.
  Graph(Matrix features, const std::vector<Edge>& edges, std::vector<int> labels,
        std::optional<int> num_classes = std::nullopt);

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  std::size_t feature_dim() const noexcept { return features_.cols(); }
  int num_classes() const noexcept { return num_classes_; }

  const Matrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Sorted neighbor list of node `i`.
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
  bool has_edge(std::size_t i, std::size_t j) const;
  std::size_t num_edges() const noexcept { return num_edges_; }

  /// Each undirected edge once as (u, v) with u < v, lexicographically sorted.
  std::vector<Edge> edges() const;

  bool operator==(const Graph& other) const = default;

 private:
  Matrix features_;
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t num_edges_ = 0;
  int num_classes_ = 0;
};

/// The synthesized graph G' = {X', A', Y'}. Labels are fixed at
/// initialization; only the features are optimized.
struct CondensedGraph {
  Matrix features;
  std::vector<int> labels;
  std::vector<Edge> edges;
  int num_classes = 0;

  std::size_t num_nodes() const noexcept { return labels.size(); }
  bool operator==(const CondensedGraph& other) const = default;
};

/// Node representations with their labels; rows are points.
struct RepresentationCloud {
  Matrix points;
  std::vector<int> labels;

  std::size_t size() const noexcept { return points.rows(); }
  std::size_t dim() const noexcept { return points.cols(); }

  /// Distinct labels present, ascending.
  std::vector<int> classes() const;
  /// Row indices carrying `label`, ascending.
  std::vector<std::size_t> members(int label) const;
  RepresentationCloud subset(std::span<const std::size_t> rows) const;
};

enum class GraphFormat { json, csv_triplet };

/// JSON: {"num_nodes", "features", "edges", "labels"}. CSV triplet: `path` is a
/// directory holding features.csv, edges.csv and labels.csv.
Graph load_graph(const std::filesystem::path& path, GraphFormat format);
/// Picks csv_triplet for directories and json otherwise.
Graph load_graph(const std::filesystem::path& path);
CondensedGraph load_condensed(const std::filesystem::path& path);

/// Doubles are written with 17 significant digits so loading reproduces them
/// bit for bit. `extra_json`, when given, must be a JSON object body member
/// list fragment (e.g. "\"manifest\": {...}") appended to the top-level object.
void save_graph(const Graph& graph, const std::filesystem::path& path,
                GraphFormat format = GraphFormat::json,
                const std::string& extra_json = {});
void save_graph(const CondensedGraph& graph, const std::filesystem::path& path,
                const std::string& extra_json = {});

Graph parse_graph_json(const std::string& text);
std::string graph_json(const Graph& graph, const std::string& extra_json = {});

/// Condensed graphs share the wire format; the result carries an optional
/// adjacency and labels whose class count is max(label) + 1.
CondensedGraph to_condensed(const Graph& graph);
Graph to_graph(const CondensedGraph& condensed);

/// Z = A²X with the binary adjacency exactly as stored (no self-loops, no
/// normalization).
Matrix representation(const Matrix& features, const Graph& structure);
Matrix representation(const Matrix& features, const std::vector<Edge>& edges);

/// Cloud of A²X rows labelled with the graph's labels.
RepresentationCloud graph_cloud(const Graph& graph);
/// Structure-free convention: Z' = X'.
RepresentationCloud condensed_cloud(const CondensedGraph& condensed);

struct Neighbor {
  std::size_t index;
  double distance;
  bool operator==(const Neighbor&) const = default;
};

/// The k nearest other rows to `query_index`, ascending by Euclidean
/// distance with ties broken by the lower index. Requires k < rows.
std::vector<Neighbor> knn(const Matrix& points, std::size_t query_index, std::size_t k);

/// Every other row sorted by (distance, index).
std::vector<Neighbor> sorted_neighbors(const Matrix& points, std::size_t query_index);

/// printf-style %.17g; enough digits for an exact double round trip.
std::string format_double(double value);

}  // namespace mrgc
