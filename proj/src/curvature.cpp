#include "mrgc/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "mrgc/error.hpp"
#include "mrgc/numerics.hpp"
#include "mrgc/transport.hpp"

namespace mrgc {

namespace {

struct Fraction {
  std::int64_t num;
  std::int64_t den;
};

/// Best rational approximation with denominator at most 2^20.
Fraction to_fraction(double x) {
  constexpr std::int64_t max_den = std::int64_t{1} << 20;
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const auto a = static_cast<std::int64_t>(std::floor(r));
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    const double frac = r - static_cast<double>(a);
    if (frac < 1e-15 || std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) < 1e-17) break;
    r = 1.0 / frac;
  }
  return {h1, k1};
}

bool share_neighbor(const Graph& graph, std::size_t a, std::size_t b) {
  const auto& na = graph.neighbors(a);
  const auto& nb = graph.neighbors(b);
  std::size_t x = 0, y = 0;
  while (x < na.size() && y < nb.size()) {
    if (na[x] == nb[y]) return true;
    if (na[x] < nb[y]) ++x; else ++y;
  }
  return false;
}

/// Hop distance between a ∈ {i}∪N(i) and b ∈ {j}∪N(j) for an edge (i, j);
/// the path a-i-j-b bounds it by 3.
std::int64_t support_distance(const Graph& graph, std::size_t a, std::size_t b) {
  if (a == b) return 0;
  if (graph.has_edge(a, b)) return 1;
  if (share_neighbor(graph, a, b)) return 2;
  return 3;
}

void check_node(const Graph& graph, std::size_t i) {
  if (i >= graph.num_nodes()) {
    fail(ErrorKind::dimension_mismatch, "node " + std::to_string(i) + " outside graph of " +
                                            std::to_string(graph.num_nodes()) + " nodes");
  }
}

}  // namespace

TangentFrame tangent_frame(const Matrix& points, std::size_t node, std::size_t k) {
  const std::size_t d = points.cols();
  if (d < 2) fail(ErrorKind::dimension, "tangent frames need at least 2 ambient dimensions");
  if (k < d) {
    fail(ErrorKind::k_too_small, "k = " + std::to_string(k) + " cannot span " +
                                     std::to_string(d) + " dimensions");
  }
  std::vector<std::size_t> nbrs;
  for (const auto& nb : knn(points, node, k)) nbrs.push_back(nb.index);
  return tangent_frame_from(points, std::move(nbrs));
}

TangentFrame tangent_frame_from(const Matrix& points, std::vector<std::size_t> neighbors) {
  const std::size_t d = points.cols();
  const std::size_t k = neighbors.size();
  if (d < 2) fail(ErrorKind::dimension, "tangent frames need at least 2 ambient dimensions");
  if (k == 0) fail(ErrorKind::k_too_small, "tangent frame without neighbors");

  TangentFrame frame;
  frame.neighbors = std::move(neighbors);
  frame.center.assign(d, 0.0);
  for (std::size_t idx : frame.neighbors) {
    const auto row = points.row(idx);
    for (std::size_t c = 0; c < d; ++c) frame.center[c] += row[c];
  }
  for (double& c : frame.center) c /= static_cast<double>(k);

  Matrix y(k, d);
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = points.row(frame.neighbors[j]);
    for (std::size_t c = 0; c < d; ++c) y(j, c) = row[c] - frame.center[c];
  }
  const auto eig = sym_eig(gram(y));
  frame.normal = eig.eigenvector(d - 1);
  for (std::size_t a = 0; a + 1 < d; ++a) frame.basis.push_back(eig.eigenvector(a));

  const double top = std::max(eig.eigenvalues.front(), 0.0);
  std::size_t rank = 0;
  for (double l : eig.eigenvalues)
    if (l > 1e-12 * top && l > 0.0) ++rank;
  frame.degenerate = rank + 1 < d;
  return frame;
}

TangentFrame tangent_frame(const RepresentationCloud& cloud, std::size_t node, std::size_t k) {
  return tangent_frame(cloud.points, node, k);
}

CurvatureFit fit_gaussian_curvature(const TangentFrame& frame, std::span<const double> node_point,
                                    const Matrix& neighbor_points) {
  const std::size_t d = frame.center.size();
  const std::size_t m = frame.basis.size();
  if (node_point.size() != d || neighbor_points.cols() != d) {
    fail(ErrorKind::dimension_mismatch, "curvature fit inputs do not match the frame dimension");
  }
  const std::size_t mm = m * m;
  Matrix q(mm, mm);
  Vector p(mm, 0.0);
  std::vector<Vector> coords(neighbor_points.rows(), Vector(m));
  Vector targets(neighbor_points.rows());
  Vector phi(mm);
  for (std::size_t j = 0; j < neighbor_points.rows(); ++j) {
    const auto row = neighbor_points.row(j);
    Vector offset(d);
    for (std::size_t c = 0; c < d; ++c) offset[c] = row[c] - frame.center[c];
    for (std::size_t a = 0; a < m; ++a) coords[j][a] = dot(offset, frame.basis[a]);
    double t = 0.0;
    for (std::size_t c = 0; c < d; ++c) t += (row[c] - node_point[c]) * frame.normal[c];
    targets[j] = t;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) phi[a * m + b] = coords[j][a] * coords[j][b];
    for (std::size_t r = 0; r < mm; ++r) {
      p[r] += t * phi[r];
      if (phi[r] == 0.0) continue;
      for (std::size_t c = r; c < mm; ++c) q(r, c) += phi[r] * phi[c];
    }
  }
  double trace = 0.0;
  double max_diag = 0.0;
  for (std::size_t r = 0; r < mm; ++r) {
    for (std::size_t c = r + 1; c < mm; ++c) q(c, r) = q(r, c);
    trace += q(r, r);
    max_diag = std::max(max_diag, q(r, r));
  }

  CurvatureFit fit;
  fit.theta = Matrix(m, m);
  Vector solution(mm, 0.0);
  bool solved = false;
  // The vec(o oᵀ) features repeat for (a,b) and (b,a), so Q is singular
  // whenever m > 1; a near-zero pivot means the same thing numerically.
  try {
    const Matrix factor = cholesky(q);
    double min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < mm; ++r) min_pivot = std::min(min_pivot, factor(r, r) * factor(r, r));
    if (min_pivot > 1e-10 * max_diag) {
      solution = cholesky_solve(factor, p);
      solved = true;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::not_positive_definite) throw;
  }
  if (!solved) {
    fit.ridge_applied = true;
    const double ridge = 1e-8 * trace / static_cast<double>(mm);
    if (ridge > 0.0) {
      Matrix regularized = q;
      for (std::size_t r = 0; r < mm; ++r) regularized(r, r) += ridge;
      solution = cholesky_solve(cholesky(regularized), p);
    }
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) fit.theta(a, b) = 2.0 * solution[a * m + b];
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double s = 0.5 * (fit.theta(a, b) + fit.theta(b, a));
      fit.theta(a, b) = fit.theta(b, a) = s;
    }
  }
  fit.gaussian_k = determinant(fit.theta);
  for (std::size_t j = 0; j < coords.size(); ++j) {
    double quad = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) quad += coords[j][a] * fit.theta(a, b) * coords[j][b];
    const double err = 0.5 * quad - targets[j];
    fit.residual += err * err;
  }
  return fit;
}

std::size_t hop_distance(const Graph& graph, std::size_t from, std::size_t to) {
  check_node(graph, from);
  check_node(graph, to);
  constexpr auto unreachable = std::numeric_limits<std::size_t>::max();
  if (from == to) return 0;
  std::vector<std::size_t> dist(graph.num_nodes(), unreachable);
  std::queue<std::size_t> frontier;
  dist[from] = 0;
  frontier.push(from);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : graph.neighbors(u)) {
      if (dist[v] != unreachable) continue;
      dist[v] = dist[u] + 1;
      if (v == to) return dist[v];
      frontier.push(v);
    }
  }
  return unreachable;
}

double wasserstein_lazy_walk(const Graph& graph, std::size_t i, std::size_t j,
                             const RicciConfig& config) {
  check_node(graph, i);
  check_node(graph, j);
  if (!graph.has_edge(i, j)) {
    fail(ErrorKind::no_such_edge, "no edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    fail(ErrorKind::config, "Ricci laziness alpha must lie in [0, 1]");
  }
  const Fraction alpha = to_fraction(config.alpha);
  const auto deg_i = static_cast<std::int64_t>(graph.degree(i));
  const auto deg_j = static_cast<std::int64_t>(graph.degree(j));
  const std::int64_t lcm = std::lcm(deg_i, deg_j);
  // Common denominator alpha.den * lcm makes every mass an integer.
  const std::int64_t total = alpha.den * lcm;

  auto measure = [&](std::size_t u, std::int64_t deg, std::vector<std::size_t>& support,
                     std::vector<std::int64_t>& mass) {
    support.push_back(u);
    mass.push_back(alpha.num * lcm);
    const std::int64_t share = (alpha.den - alpha.num) * (lcm / deg);
    for (std::size_t v : graph.neighbors(u)) {
      support.push_back(v);
      mass.push_back(share);
    }
  };
  std::vector<std::size_t> support_i, support_j;
  TransportProblem problem;
  measure(i, deg_i, support_i, problem.supply);
  measure(j, deg_j, support_j, problem.demand);
  problem.cost.reserve(support_i.size() * support_j.size());
  for (std::size_t a : support_i)
    for (std::size_t b : support_j) problem.cost.push_back(support_distance(graph, a, b));

  const TransportPlan plan = solve_transport(problem);
  return static_cast<double>(plan.total_cost) / static_cast<double>(total);
}

double ollivier_ricci_edge(const Graph& graph, std::size_t i, std::size_t j,
                           const RicciConfig& config) {
  const double w1 = wasserstein_lazy_walk(graph, i, j, config);
  const std::size_t hops = hop_distance(graph, i, j);
  if (hops == std::numeric_limits<std::size_t>::max()) {
    fail(ErrorKind::disconnected_supports, "endpoints are disconnected");
  }
  return 1.0 - w1 / static_cast<double>(hops);
}

double node_ricci(const Graph& graph, std::size_t i, const RicciConfig& config) {
  check_node(graph, i);
  const auto& nbrs = graph.neighbors(i);
  if (nbrs.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t j : nbrs) s += ollivier_ricci_edge(graph, i, j, config);
  return s / static_cast<double>(nbrs.size());
}

Vector node_ricci_all(const Graph& graph, const RicciConfig& config) {
  Vector sum(graph.num_nodes(), 0.0);
  for (const auto& [u, v] : graph.edges()) {
    const double kappa = ollivier_ricci_edge(graph, u, v, config);
    sum[u] += kappa;
    sum[v] += kappa;
  }
  for (std::size_t i = 0; i < sum.size(); ++i)
    if (graph.degree(i) > 0) sum[i] /= static_cast<double>(graph.degree(i));
  return sum;
}

Graph mutual_knn_graph(const Matrix& points, const std::vector<int>& labels, std::size_t k,
                       int num_classes) {
  const std::size_t n = points.rows();
  const std::size_t kk = std::min(k, n > 0 ? n - 1 : 0);
  std::vector<std::vector<std::size_t>> near(n);
  for (std::size_t i = 0; i < n && kk > 0; ++i) {
    for (const auto& nb : knn(points, i, kk)) near[i].push_back(nb.index);
    std::sort(near[i].begin(), near[i].end());
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : near[i]) {
      if (j > i && std::binary_search(near[j].begin(), near[j].end(), i)) edges.emplace_back(i, j);
    }
  }
  return Graph(points, edges, labels, num_classes);
}

Vector min_max_normalize(std::span<const double> values) {
  Vector out(values.size(), 1.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

std::vector<NodeCurvature> curvature_table(const RepresentationCloud& cloud,
                                           std::span<const double> node_ricci_values,
                                           std::size_t k) {
  if (node_ricci_values.size() != cloud.size()) {
    fail(ErrorKind::dimension_mismatch, "auxiliary graph does not match the cloud rows");
  }
  const std::size_t d = cloud.dim();
  std::vector<NodeCurvature> table(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    table[i].node = i;
    table[i].label = cloud.labels[i];
    table[i].ricci = node_ricci_values[i];
  }
  for (int c : cloud.classes()) {
    const auto rows = cloud.members(c);
    Vector negated;
    for (std::size_t r : rows) negated.push_back(-node_ricci_values[r]);
    const Vector weights = min_max_normalize(negated);
    for (std::size_t a = 0; a < rows.size(); ++a) table[rows[a]].weight = weights[a];

    const std::size_t kk = std::min(k, rows.size() - 1);
    if (d < 2 || kk < d) continue;
    const Matrix sub = cloud.points.select_rows(rows);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      const TangentFrame frame = tangent_frame(sub, a, kk);
      const CurvatureFit fit = fit_gaussian_curvature(frame, sub.row(a), sub.select_rows(frame.neighbors));
      table[rows[a]].gaussian_k = fit.gaussian_k;
      table[rows[a]].fitted = true;
    }
  }
  return table;
}

double loss_cur(const RepresentationCloud& cloud, std::span<const double> node_ricci_values,
                std::size_t k) {
  double total = 0.0;
  for (const auto& row : curvature_table(cloud, node_ricci_values, k))
    total += row.weight * std::abs(row.gaussian_k);
  return total;
}

double loss_cur(const RepresentationCloud& cloud, const Graph& aux_graph, std::size_t k,
                const RicciConfig& config) {
  if (aux_graph.num_nodes() != cloud.size()) {
    fail(ErrorKind::dimension_mismatch, "auxiliary graph does not match the cloud rows");
  }
  const Vector kappa = node_ricci_all(aux_graph, config);
  return loss_cur(cloud, kappa, k);
}

}  // namespace mrgc
