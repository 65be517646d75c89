#pragma once

#include <string>
#include <vector>

#include "mrgc/graph.hpp"
#include "mrgc/intrinsic_dimension.hpp"

namespace mrgc {

/// F1 = 1 / (1 + max_f r_f), r_f the between-class over within-class
/// scatter of coordinate f. A coordinate with zero within-class scatter and
/// distinct class means makes the cloud separable and returns 0.
double fdr(const RepresentationCloud& cloud);

enum class FhcRule {
  /// Recursive nearest-enemy radii, then a greedy cover: a sphere covers
  /// the points strictly inside it (and its own center), and the sphere
  /// covering the most uncovered points is taken until none remain.
  cover,
  /// Radius half the nearest-enemy distance; sphere j is absorbed when
  /// d(i, j) + r_j <= r_i for a surviving sphere i.
  containment,
};

struct FhcOptions {
  FhcRule rule = FhcRule::cover;
  double slack = 1e-12;  ///< containment tolerance
};

/// Number of hyperspheres retained divided by the number of points.
double fhc(const RepresentationCloud& cloud, const FhcOptions& options = {});

/// Nearest-enemy radius of every point under the given rule.
Vector fhc_radii(const RepresentationCloud& cloud, FhcRule rule);

/// (Σ_c |M_c| - |M|)² with the volume proxy of manifold_volume.
double loss_sep(const RepresentationCloud& cloud);

struct ComplexityReport {
  double id_estimate = 0.0;
  double fdr = 0.0;
  double fhc = 0.0;
  Vector class_volumes;
  double total_volume = 1.0;
};

ComplexityReport complexity_report(const RepresentationCloud& cloud,
                                   const IdEstimatorConfig& id_config = {},
                                   const FhcOptions& fhc_options = {});

/// {"id", "fdr", "fhc", "class_volumes", "total_volume"} plus `extra_json`
/// members, if any.
std::string report_json(const ComplexityReport& report, const std::string& extra_json = {});

}  // namespace mrgc
