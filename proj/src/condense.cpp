#include "mrgc/condense.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include <json.hpp>

#include "mrgc/complexity.hpp"
#include "mrgc/error.hpp"
#include "mrgc/numerics.hpp"

namespace mrgc {

namespace {

Matrix class_means(const Matrix& points, const std::vector<int>& labels, int num_classes) {
  Matrix means(static_cast<std::size_t>(num_classes), points.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    for (std::size_t f = 0; f < points.cols(); ++f) means(c, f) += points(i, f);
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t f = 0; f < points.cols(); ++f) means(c, f) /= static_cast<double>(counts[c]);
  }
  return means;
}

void check_condensed(const CondensedGraph& condensed, std::size_t feature_dim, int num_classes) {
  if (condensed.features.rows() != condensed.labels.size()) {
    fail(ErrorKind::dimension_mismatch, "condensed feature rows do not match its labels");
  }
  if (condensed.features.cols() != feature_dim) {
    fail(ErrorKind::dimension_mismatch,
         "condensed features have " + std::to_string(condensed.features.cols()) +
             " columns, the graph has " + std::to_string(feature_dim));
  }
  std::vector<bool> present(static_cast<std::size_t>(num_classes), false);
  for (int y : condensed.labels) {
    if (y < 0 || y >= num_classes) fail(ErrorKind::invariant, "condensed label out of range");
    present[static_cast<std::size_t>(y)] = true;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (!present[static_cast<std::size_t>(c)]) {
      fail(ErrorKind::class_missing, "class " + std::to_string(c) + " has no condensed node");
    }
  }
}

double gc_from_targets(const Matrix& targets, const CondensedGraph& condensed, int num_classes) {
  const Matrix means = class_means(condensed.features, condensed.labels, num_classes);
  double total = 0.0;
  for (std::size_t c = 0; c < targets.rows(); ++c) {
    double s = 0.0;
    for (std::size_t f = 0; f < targets.cols(); ++f) {
      const double gap = means(c, f) - targets(c, f);
      s += gap * gap;
    }
    total += s;
  }
  return total;
}

/// Neighbor structure of the curvature term at one iterate. Finite-difference
/// probes reuse it so that a probe never crosses a kNN or auxiliary-graph
/// switch.
struct Geometry {
  Vector weights;
  std::vector<std::vector<std::size_t>> neighbors;  ///< empty when the class is not fitted
  Vector abs_k;
};

double abs_curvature(const Matrix& points, std::size_t node, const std::vector<std::size_t>& nbrs) {
  const TangentFrame frame = tangent_frame_from(points, nbrs);
  return std::abs(fit_gaussian_curvature(frame, points.row(node), points.select_rows(nbrs)).gaussian_k);
}

Geometry build_geometry(const RepresentationCloud& cloud, const CondenseConfig& config,
                        int num_classes) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  Geometry geo;
  geo.weights.assign(n, 0.0);
  geo.neighbors.assign(n, {});
  geo.abs_k.assign(n, 0.0);
  const Graph aux = mutual_knn_graph(cloud.points, cloud.labels, config.k, num_classes);
  const Vector kappa = node_ricci_all(aux, config.ricci);
  for (int c : cloud.classes()) {
    const auto rows = cloud.members(c);
    Vector negated;
    for (std::size_t r : rows) negated.push_back(-kappa[r]);
    const Vector w = min_max_normalize(negated);
    for (std::size_t a = 0; a < rows.size(); ++a) geo.weights[rows[a]] = w[a];
    const std::size_t kk = std::min(config.k, rows.size() - 1);
    if (d < 2 || kk < d) continue;
    const Matrix sub = cloud.points.select_rows(rows);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (const auto& nb : knn(sub, a, kk)) geo.neighbors[rows[a]].push_back(rows[nb.index]);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!geo.neighbors[i].empty()) geo.abs_k[i] = abs_curvature(cloud.points, i, geo.neighbors[i]);
  return geo;
}

double weighted_curvature(const Geometry& geo) {
  double total = 0.0;
  for (std::size_t i = 0; i < geo.weights.size(); ++i) total += geo.weights[i] * geo.abs_k[i];
  return total;
}

std::vector<std::size_t> sample_sorted(std::vector<std::size_t> pool, std::size_t count,
                                       std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool finite_report(const LossReport& r) { return std::isfinite(r.total); }

}  // namespace

std::string_view to_string(GradMode mode) {
  return mode == GradMode::full_numeric ? "full-numeric" : "analytic-backbone";
}

GradMode parse_grad_mode(std::string_view name) {
  if (name == "analytic-backbone" || name == "analytic") return GradMode::analytic_backbone;
  if (name == "full-numeric" || name == "numeric") return GradMode::full_numeric;
  fail(ErrorKind::config, "unknown gradient mode '" + std::string(name) + "'");
}

void CondenseConfig::validate() const {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorKind::config, "ratio must lie in (0, 1)");
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
    fail(ErrorKind::config, "loss weights alpha, beta, gamma must be non-negative");
  }
  if (k < 2) fail(ErrorKind::config, "k must be at least 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::config, "learning rate must be positive");
  }
  if (pca_dims < 1) fail(ErrorKind::config, "pca_dims must be positive");
  if (epsilon && !(*epsilon > 0.0)) fail(ErrorKind::config, "epsilon must be positive");
  if (!(ricci.alpha >= 0.0 && ricci.alpha <= 1.0)) fail(ErrorKind::config, "ricci alpha must lie in [0, 1]");
  if (threads < 1) fail(ErrorKind::config, "threads must be positive");
}

std::string config_json(const CondenseConfig& config) {
  nlohmann::ordered_json j;
  j["ratio"] = config.ratio;
  j["alpha"] = config.alpha;
  j["beta"] = config.beta;
  j["gamma"] = config.gamma;
  j["k"] = config.k;
  j["epochs"] = config.epochs;
  j["learning_rate"] = config.learning_rate;
  j["pca_dims"] = config.pca_dims;
  if (config.epsilon) {
    j["epsilon_mode"] = {{"fixed", *config.epsilon}};
  } else {
    j["epsilon_mode"] = "median-heuristic";
  }
  j["seed"] = config.seed;
  j["grad_mode"] = std::string(to_string(config.grad_mode));
  j["ricci_alpha"] = config.ricci.alpha;
  return j.dump();
}

CondenseConfig parse_config(const std::string& json_text) {
  CondenseConfig config;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) fail(ErrorKind::parse, "condense config must be a JSON object");
    config.ratio = j.value("ratio", config.ratio);
    config.alpha = j.value("alpha", config.alpha);
    config.beta = j.value("beta", config.beta);
    config.gamma = j.value("gamma", config.gamma);
    config.k = j.value("k", config.k);
    config.epochs = j.value("epochs", config.epochs);
    config.learning_rate = j.value("learning_rate", config.learning_rate);
    config.pca_dims = j.value("pca_dims", config.pca_dims);
    if (j.contains("epsilon_mode")) {
      const auto& mode = j.at("epsilon_mode");
      if (mode.is_string() && mode.get<std::string>() == "median-heuristic") {
        config.epsilon.reset();
      } else if (mode.is_object() && mode.contains("fixed")) {
        config.epsilon = mode.at("fixed").get<double>();
      } else {
        fail(ErrorKind::parse, "epsilon_mode must be \"median-heuristic\" or {\"fixed\": value}");
      }
    }
    config.seed = j.value("seed", config.seed);
    if (j.contains("grad_mode")) config.grad_mode = parse_grad_mode(j.at("grad_mode").get<std::string>());
    config.ricci.alpha = j.value("ricci_alpha", config.ricci.alpha);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("condense config: ") + e.what());
  }
  config.validate();
  return config;
}

std::string report_line(const LossReport& r) {
  return "{\"epoch\": " + std::to_string(r.epoch) + ", \"l_gc\": " + format_double(r.l_gc) +
         ", \"l_dim\": " + format_double(r.l_dim) + ", \"l_cur\": " + format_double(r.l_cur) +
         ", \"l_sep\": " + format_double(r.l_sep) + ", \"total\": " + format_double(r.total) + "}";
}

std::vector<std::size_t> class_quotas(const Graph& graph, double ratio) {
  const double n = static_cast<double>(graph.num_nodes());
  if (ratio * n < static_cast<double>(graph.num_classes())) {
    fail(ErrorKind::config, "per-class quota: ratio * n = " + format_double(ratio * n) +
                                " is below the class count " + std::to_string(graph.num_classes()));
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(graph.num_classes()), 0);
  for (int y : graph.labels()) ++counts[static_cast<std::size_t>(y)];
  std::vector<std::size_t> quotas;
  for (std::size_t c : counts) {
    const auto q = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(c)));
    quotas.push_back(std::min(std::max<std::size_t>(q, 1), c));
  }
  return quotas;
}

std::vector<bool> outlier_mask(const Graph& graph) {
  const std::size_t n = graph.num_nodes();
  std::vector<bool> mask(n, false);
  const Matrix& x = graph.features();
  for (int c = 0; c < graph.num_classes(); ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (graph.labels()[i] == c) rows.push_back(i);
    if (rows.size() < 2) continue;
    Vector mean_dist(rows.size(), 0.0);
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = a + 1; b < rows.size(); ++b) {
        const double dd = distance(x.row(rows[a]), x.row(rows[b]));
        mean_dist[a] += dd;
        mean_dist[b] += dd;
      }
    const double m = static_cast<double>(rows.size());
    double mu = 0.0;
    for (double& v : mean_dist) {
      v /= m - 1.0;
      mu += v;
    }
    mu /= m;
    double var = 0.0;
    for (double v : mean_dist) var += (v - mu) * (v - mu);
    const double threshold = mu + 2.0 * std::sqrt(var / m);
    for (std::size_t a = 0; a < rows.size(); ++a) mask[rows[a]] = mean_dist[a] > threshold;
  }
  return mask;
}

Initialization init_condensed(const Graph& graph, const CondenseConfig& config) {
  config.validate();
  const auto quotas = class_quotas(graph, config.ratio);
  const auto outliers = outlier_mask(graph);
  std::mt19937_64 rng(config.seed);
  Initialization init;
  for (int c = 0; c < graph.num_classes(); ++c) {
    std::vector<std::size_t> members, clean;
    for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
      if (graph.labels()[i] != c) continue;
      members.push_back(i);
      if (!outliers[i]) clean.push_back(i);
    }
    const std::size_t quota = quotas[static_cast<std::size_t>(c)];
    if (quota > clean.size()) {
      init.fallback_classes.push_back(c);
      clean = members;
    }
    for (std::size_t node : sample_sorted(clean, quota, rng)) init.source_nodes.push_back(node);
  }
  init.condensed.features = graph.features().select_rows(init.source_nodes);
  for (std::size_t node : init.source_nodes) init.condensed.labels.push_back(graph.labels()[node]);
  init.condensed.num_classes = graph.num_classes();
  return init;
}

double loss_gc(const Graph& graph, const CondensedGraph& condensed) {
  check_condensed(condensed, graph.feature_dim(), graph.num_classes());
  const Matrix z = representation(graph.features(), graph);
  return gc_from_targets(class_means(z, graph.labels(), graph.num_classes()), condensed,
                         graph.num_classes());
}

Objective::Objective(const Graph& graph, CondenseConfig config)
    : config_(std::move(config)), num_classes_(graph.num_classes()) {
  config_.validate();
  targets_ = class_means(representation(graph.features(), graph), graph.labels(), num_classes_);
}

double Objective::loss_gc(const CondensedGraph& condensed) const {
  check_condensed(condensed, targets_.cols(), num_classes_);
  return gc_from_targets(targets_, condensed, num_classes_);
}

RepresentationCloud Objective::reduced_cloud(const CondensedGraph& condensed) const {
  RepresentationCloud cloud = condensed_cloud(condensed);
  if (cloud.dim() > config_.pca_dims && cloud.size() >= 2) {
    const std::size_t t = std::min(config_.pca_dims, cloud.size() - 1);
    cloud.points = pca_fit_transform(cloud.points, t).projected;
  }
  return cloud;
}

namespace {

struct Evaluation {
  LossReport report;
  Geometry geometry;
  RepresentationCloud reduced;
};

Evaluation evaluate_with_geometry(const Objective& objective, const CondensedGraph& condensed,
                                  int num_classes) {
  const CondenseConfig& config = objective.config();
  Evaluation ev;
  ev.report.l_gc = objective.loss_gc(condensed);
  const bool any_regularizer = config.alpha != 0.0 || config.beta != 0.0 || config.gamma != 0.0;
  if (!any_regularizer || !all_finite(condensed.features)) {
    // Mirror the weighted sum so the recombination identity still holds.
    ev.report.total = ev.report.l_gc;
    if (!all_finite(condensed.features)) ev.report.total = std::numeric_limits<double>::quiet_NaN();
    return ev;
  }
  ev.reduced = objective.reduced_cloud(condensed);
  const DimLossConfig dim{config.epsilon};
  try {
    ev.report.l_dim = loss_dim_per_class(ev.reduced, dim);
  } catch (const Error& e) {
    throw e.with_context("l_dim");
  }
  try {
    ev.geometry = build_geometry(ev.reduced, config, num_classes);
    ev.report.l_cur = weighted_curvature(ev.geometry);
  } catch (const Error& e) {
    throw e.with_context("l_cur");
  }
  ev.report.l_sep = loss_sep(ev.reduced);
  ev.report.total = ev.report.l_gc + config.alpha * ev.report.l_dim + config.beta * ev.report.l_cur +
                    config.gamma * ev.report.l_sep;
  return ev;
}

Matrix gradient_at(const Objective& objective, const CondensedGraph& condensed,
                   const Evaluation& base, int num_classes) {
  const CondenseConfig& config = objective.config();
  const Matrix& x = condensed.features;
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Matrix grad(n, d);

  std::vector<std::size_t> class_size(static_cast<std::size_t>(num_classes), 0);
  for (int y : condensed.labels) ++class_size[static_cast<std::size_t>(y)];
  const bool numeric_gc = config.grad_mode == GradMode::full_numeric;
  if (!numeric_gc) {
    const Matrix means = class_means(x, condensed.labels, num_classes);
    const Matrix& t = objective.class_targets();
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(condensed.labels[i]);
      for (std::size_t f = 0; f < d; ++f)
        grad(i, f) = 2.0 * (means(c, f) - t(c, f)) / static_cast<double>(class_size[c]);
    }
  }
  const bool regularized = config.alpha != 0.0 || config.beta != 0.0 || config.gamma != 0.0;
  if (!regularized && !numeric_gc) return grad;

  const bool reduced_by_pca = base.reduced.dim() != d;
  const DimLossConfig dim{config.epsilon};
  // affected[p]: nodes whose fitted curvature reads row p.
  std::vector<std::vector<std::size_t>> affected(n);
  if (regularized) {
    for (std::size_t i = 0; i < n; ++i) {
      if (base.geometry.neighbors[i].empty()) continue;
      affected[i].push_back(i);
      for (std::size_t j : base.geometry.neighbors[i])
        if (j != i) affected[j].push_back(i);
    }
    for (auto& list : affected) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(condensed.labels[i])].push_back(i);

  // Terms of the probed objective that move with row p; everything else cancels
  // in the central difference.
  auto probe = [&](const CondensedGraph& g, std::size_t p) {
    double value = numeric_gc ? objective.loss_gc(g) : 0.0;
    if (!regularized) return value;
    const RepresentationCloud cloud =
        reduced_by_pca ? objective.reduced_cloud(g) : condensed_cloud(g);
    const auto c = static_cast<std::size_t>(g.labels[p]);
    if (config.alpha != 0.0) {
      const double l_dim = reduced_by_pca ? loss_dim_per_class(cloud, dim)
                                          : loss_dim(cloud.points.select_rows(members[c]), dim);
      value += config.alpha * l_dim;
    }
    if (config.beta != 0.0) {
      double l_cur = 0.0;
      if (reduced_by_pca) {
        for (std::size_t i = 0; i < n; ++i)
          if (!base.geometry.neighbors[i].empty())
            l_cur += base.geometry.weights[i] *
                     abs_curvature(cloud.points, i, base.geometry.neighbors[i]);
      } else {
        for (std::size_t i : affected[p])
          l_cur += base.geometry.weights[i] *
                   abs_curvature(cloud.points, i, base.geometry.neighbors[i]);
      }
      value += config.beta * l_cur;
    }
    if (config.gamma != 0.0) value += config.gamma * loss_sep(cloud);
    return value;
  };

  auto coordinate = [&](std::size_t index) {
    const std::size_t p = index / d;
    const std::size_t f = index % d;
    CondensedGraph g = condensed;
    const double x0 = x(p, f);
    const double h = 1e-4 * (1.0 + std::abs(x0));
    g.features(p, f) = x0 + h;
    const double up = probe(g, p);
    g.features(p, f) = x0 - h;
    const double down = probe(g, p);
    if (!std::isfinite(up) || !std::isfinite(down)) {
      fail(ErrorKind::non_finite_loss, "non-finite loss while probing node " + std::to_string(p) +
                                           ", feature " + std::to_string(f));
    }
    grad(p, f) += (up - down) / ((x0 + h) - (x0 - h));
  };

  const std::size_t total = n * d;
  const std::size_t workers = std::min(config.threads, total);
  if (workers <= 1) {
    for (std::size_t index = 0; index < total; ++index) coordinate(index);
    return grad;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t index = w; index < total; index += workers) coordinate(index);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return grad;
}

}  // namespace

LossReport Objective::evaluate(const CondensedGraph& condensed) const {
  return evaluate_with_geometry(*this, condensed, num_classes_).report;
}

Matrix Objective::gradient(const CondensedGraph& condensed) const {
  const Evaluation base = evaluate_with_geometry(*this, condensed, num_classes_);
  return gradient_at(*this, condensed, base, num_classes_);
}

LossReport total_loss(const Graph& graph, const CondensedGraph& condensed,
                      const CondenseConfig& config) {
  return Objective(graph, config).evaluate(condensed);
}

Matrix gradient(const Graph& graph, const CondensedGraph& condensed, const CondenseConfig& config) {
  return Objective(graph, config).gradient(condensed);
}

CondenseResult condense(const Graph& graph, const CondenseConfig& config) {
  const Objective objective(graph, config);
  CondenseResult result;
  result.init = init_condensed(graph, config);
  result.condensed = result.init.condensed;
  if (config.epochs == 0) return result;

  const int classes = graph.num_classes();
  CondensedGraph current = result.condensed;
  Evaluation ev = evaluate_with_geometry(objective, current, classes);
  CondensedGraph best = current;
  double best_total = ev.report.total;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Matrix grad;
    try {
      grad = gradient_at(objective, current, ev, classes);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::non_finite_loss) throw;
      result.diverged = true;
      break;
    }
    auto& xs = current.features.values();
    const auto& gs = grad.values();
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] -= config.learning_rate * gs[i];
    try {
      ev = evaluate_with_geometry(objective, current, classes);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::non_finite && e.kind() != ErrorKind::invariant) throw;
      ev.report.total = std::numeric_limits<double>::quiet_NaN();
    }
    if (!finite_report(ev.report)) {
      result.diverged = true;
      break;
    }
    ev.report.epoch = epoch;
    result.history.push_back(ev.report);
    if (!(ev.report.total >= best_total)) {
      best_total = ev.report.total;
      best = current;
    }
  }
  result.condensed = result.diverged ? best : current;
  return result;
}

}  // namespace mrgc
