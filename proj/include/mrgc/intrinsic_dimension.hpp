#pragma once

#include <cstddef>
#include <optional>

#include "mrgc/graph.hpp"
#include "mrgc/matrix.hpp"

namespace mrgc {

/// How the per-point log-ratio sum is normalized.
enum class IdNormalization {
  /// 1/(k-1) over the k-1 nonzero log ratios (Levina-Bickel).
  levina_bickel,
  /// 1/k over all k terms, the i = k term being log 1 = 0.
  literal,
};

struct IdEstimatorConfig {
  std::size_t k = 8;
  double min_distance = 1e-12;
  IdNormalization normalization = IdNormalization::levina_bickel;
};

/// Maximum-likelihood intrinsic dimension from k-nearest-neighbor distance
/// ratios: -(1/n) Σ_z [ c Σ_i log(r_i(z)/r_k(z)) ]⁻¹ with c = 1/(k-1) or 1/k.
/// Neighbors closer than min_distance are skipped.
double mle_id(const RepresentationCloud& cloud, const IdEstimatorConfig& config = {});
double mle_id(const Matrix& points, const IdEstimatorConfig& config = {});

struct DimLossConfig {
  /// Heat-kernel bandwidth ε; unset means the median pairwise distance of
  /// the cloud being evaluated.
  std::optional<double> epsilon;
};

/// Median Euclidean distance over unordered pairs (0 for fewer than 2 rows).
double median_pairwise_distance(const Matrix& points);

/// Kernel-weighted Dirichlet energy per coordinate:
/// S(α_i) = Σ_{p<q} exp(-‖Z_p - Z_q‖² / 2ε²) (Z_p[i] - Z_q[i])².
Vector dirichlet_energy(const Matrix& points, const DimLossConfig& config = {});

struct VolumeEstimate {
  double volume = 1.0;  ///< sqrt(det(Σ + I))
  double logdet = 0.0;  ///< log det(Σ + I)
};

/// Volume proxy from the uncentered second-moment matrix Σ = ZᵀZ / n.
VolumeEstimate manifold_volume(const Matrix& points);

/// sqrt(det(Σ + I)) · Σ_i S(α_i).
double loss_dim(const Matrix& points, const DimLossConfig& config = {});

/// loss_dim summed over each class subcloud.
double loss_dim_per_class(const RepresentationCloud& cloud, const DimLossConfig& config = {});

}  // namespace mrgc
