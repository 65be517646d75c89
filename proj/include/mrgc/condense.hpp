#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrgc/curvature.hpp"
#include "mrgc/graph.hpp"
#include "mrgc/intrinsic_dimension.hpp"

namespace mrgc {

enum class GradMode {
  analytic_backbone,  ///< closed-form l_gc gradient, finite differences for the regularizers
  full_numeric,
};

std::string_view to_string(GradMode mode);
GradMode parse_grad_mode(std::string_view name);

struct CondenseConfig {
  double ratio = 0.1;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  std::size_t k = 8;
  std::size_t epochs = 100;
  double learning_rate = 1e-2;
  std::size_t pca_dims = 8;
  std::optional<double> epsilon;  ///< unset: median pairwise distance per class
  std::uint64_t seed = 0;
  GradMode grad_mode = GradMode::analytic_backbone;
  RicciConfig ricci;
  std::size_t threads = 1;  ///< finite-difference workers; results do not depend on it

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

std::string config_json(const CondenseConfig& config);
CondenseConfig parse_config(const std::string& json_text);

struct LossReport {
  std::size_t epoch = 0;
  double l_gc = 0.0;
  double l_dim = 0.0;
  double l_cur = 0.0;
  double l_sep = 0.0;
  double total = 0.0;
};

std::string report_line(const LossReport& report);

/// max(1, round(ratio · n_c)) per class.
std::vector<std::size_t> class_quotas(const Graph& graph, double ratio);

/// Nodes of each class whose mean feature distance to the rest of the class
/// exceeds mean + 2·std (population statistics) of those distances.
std::vector<bool> outlier_mask(const Graph& graph);

struct Initialization {
  CondensedGraph condensed;
  std::vector<std::size_t> source_nodes;  ///< original node behind each condensed row
  std::vector<int> fallback_classes;      ///< classes sampled with outliers included
};

Initialization init_condensed(const Graph& graph, const CondenseConfig& config);

/// Σ_c ‖mean(Z_c) - mean(X'_c)‖² with Z = A²X.
double loss_gc(const Graph& graph, const CondensedGraph& condensed);

/// The optimization target for one original graph: class targets are
/// computed once.
class Objective {
 public:
  Objective(const Graph& graph, CondenseConfig config);

  const CondenseConfig& config() const noexcept { return config_; }
  const Matrix& class_targets() const noexcept { return targets_; }

  double loss_gc(const CondensedGraph& condensed) const;
  LossReport evaluate(const CondensedGraph& condensed) const;
  Matrix gradient(const CondensedGraph& condensed) const;

  /// The cloud every regularizer sees: X', reduced by PCA when the feature
  /// dimension exceeds pca_dims.
  RepresentationCloud reduced_cloud(const CondensedGraph& condensed) const;

 private:
  CondenseConfig config_;
  Matrix targets_;  ///< row c: mean of Z over class c
  int num_classes_;
};

LossReport total_loss(const Graph& graph, const CondensedGraph& condensed,
                      const CondenseConfig& config);
Matrix gradient(const Graph& graph, const CondensedGraph& condensed, const CondenseConfig& config);

struct CondenseResult {
  CondensedGraph condensed;
  std::vector<LossReport> history;  ///< history[e]: loss after step e + 1
  Initialization init;
  bool diverged = false;  ///< a non-finite loss stopped the run; `condensed` is the best iterate
};

CondenseResult condense(const Graph& graph, const CondenseConfig& config);

}  // namespace mrgc
