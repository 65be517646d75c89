#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mrgc/graph.hpp"
#include "mrgc/matrix.hpp"

namespace mrgc {

/// Local frame at a point: neighbor centroid, unit normal (least-variance
/// direction of the centered neighborhood) and d-1 orthonormal tangent
/// directions in descending variance order.
struct TangentFrame {
  Vector center;
  Vector normal;
  std::vector<Vector> basis;
  std::vector<std::size_t> neighbors;  ///< row indices used to build the frame
  /// The centered neighborhood has rank below d-1, so the normal is not
  /// unique; the frame still follows the eigenvector tie convention.
  bool degenerate = false;
};

TangentFrame tangent_frame(const Matrix& points, std::size_t node, std::size_t k);
TangentFrame tangent_frame(const RepresentationCloud& cloud, std::size_t node, std::size_t k);
/// Frame over an explicit neighbor set (rows of `points`).
TangentFrame tangent_frame_from(const Matrix& points, std::vector<std::size_t> neighbors);

struct CurvatureFit {
  Matrix theta;               ///< fitted (d-1)×(d-1) Hessian, symmetrized
  double gaussian_k = 0.0;    ///< det(theta)
  double residual = 0.0;      ///< Σ_j (½ o_jᵀ Θ o_j - t_j)²
  bool ridge_applied = false; ///< the moment matrix was singular
};

/// Least-squares quadratic fit t = ½ oᵀΘo in the frame's tangent
/// coordinates, o_j = (neighbor_j - center)·basis and
/// t_j = (neighbor_j - node_point)·normal.
CurvatureFit fit_gaussian_curvature(const TangentFrame& frame, std::span<const double> node_point,
                                    const Matrix& neighbor_points);

struct RicciConfig {
  double alpha = 0.5;  ///< laziness: mass kept at the node itself
};

/// Hop distance by breadth-first search; SIZE_MAX when unreachable.
std::size_t hop_distance(const Graph& graph, std::size_t from, std::size_t to);

/// Exact W₁ between the lazy random-walk measures of i and j.
double wasserstein_lazy_walk(const Graph& graph, std::size_t i, std::size_t j,
                             const RicciConfig& config = {});

/// Ollivier-Ricci curvature 1 - W₁(m_i, m_j) / D(i, j) of an existing edge.
double ollivier_ricci_edge(const Graph& graph, std::size_t i, std::size_t j,
                           const RicciConfig& config = {});

/// Mean curvature of the edges at i; 0 for isolated nodes.
double node_ricci(const Graph& graph, std::size_t i, const RicciConfig& config = {});

/// node_ricci for every node, each edge solved once.
Vector node_ricci_all(const Graph& graph, const RicciConfig& config = {});

/// Edge (i, j) whenever each is among the other's k nearest rows
/// (k clipped to rows - 1).
Graph mutual_knn_graph(const Matrix& points, const std::vector<int>& labels, std::size_t k,
                       int num_classes);

/// Min-max normalization to [0, 1]; constant inputs map to all ones.
Vector min_max_normalize(std::span<const double> values);

struct NodeCurvature {
  std::size_t node = 0;
  int label = 0;
  double gaussian_k = 0.0;
  double ricci = 0.0;
  double weight = 0.0;  ///< Norm(-κ) within the node's class
  bool fitted = false;  ///< false when the class is too small to fit frames
};

/// Per-node Gaussian curvature on each class manifold and Ricci weights from
/// `node_ricci_values` (one per cloud row). Classes whose size leaves fewer
/// than d neighbors are reported unfitted with K = 0.
std::vector<NodeCurvature> curvature_table(const RepresentationCloud& cloud,
                                           std::span<const double> node_ricci_values,
                                           std::size_t k);

/// Σ_c Σ_{i∈c} Norm(-κ(i)) |K(i)|.
double loss_cur(const RepresentationCloud& cloud, std::span<const double> node_ricci_values,
                std::size_t k);
double loss_cur(const RepresentationCloud& cloud, const Graph& aux_graph, std::size_t k,
                const RicciConfig& config = {});

}  // namespace mrgc
