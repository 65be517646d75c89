#include "mrgc/intrinsic_dimension.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrgc/error.hpp"
#include "mrgc/numerics.hpp"

namespace mrgc {

double mle_id(const Matrix& points, const IdEstimatorConfig& config) {
  const std::size_t n = points.rows();
  const std::size_t k = config.k;
  if (k < 2) fail(ErrorKind::config, "ID estimator needs k >= 2");
  if (n <= k) {
    fail(ErrorKind::too_few_points, "MLE ID needs more than k = " + std::to_string(k) +
                                        " points, got " + std::to_string(n));
  }
  if (!all_finite(points)) fail(ErrorKind::non_finite, "cloud has non-finite entries");

  const double norm = config.normalization == IdNormalization::literal
                          ? 1.0 / static_cast<double>(k)
                          : 1.0 / static_cast<double>(k - 1);
  double total = 0.0;
  for (std::size_t z = 0; z < n; ++z) {
    const auto all = sorted_neighbors(points, z);
    std::vector<double> radii;
    radii.reserve(k);
    for (const auto& nb : all) {
      if (nb.distance < config.min_distance) continue;
      radii.push_back(nb.distance);
      if (radii.size() == k) break;
    }
    if (radii.size() < k) {
      fail(ErrorKind::degenerate_cloud, "point " + std::to_string(z) + " has fewer than " +
                                            std::to_string(k) + " distinct neighbors");
    }
    const double rk = radii.back();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) s += std::log(radii[i] / rk);
    s *= norm;
    if (s == 0.0) {
      fail(ErrorKind::degenerate_cloud,
           "point " + std::to_string(z) + " has all k neighbors at the same distance");
    }
    total += 1.0 / s;
  }
  return -total / static_cast<double>(n);
}

double mle_id(const RepresentationCloud& cloud, const IdEstimatorConfig& config) {
  return mle_id(cloud.points, config);
}

double median_pairwise_distance(const Matrix& points) {
  const std::size_t n = points.rows();
  if (n < 2) return 0.0;
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) d.push_back(distance(points.row(p), points.row(q)));
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  if (d.size() % 2 == 1) return d[mid];
  const double upper = d[mid];
  const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Vector dirichlet_energy(const Matrix& points, const DimLossConfig& config) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  Vector energy(d, 0.0);
  if (n < 2) return energy;
  const double eps = config.epsilon ? *config.epsilon : median_pairwise_distance(points);
  // Coincident clouds have zero energy whatever the bandwidth.
  if (!(eps > 0.0)) return energy;
  const double inv = 1.0 / (2.0 * eps * eps);
  for (std::size_t p = 0; p < n; ++p) {
    const auto zp = points.row(p);
    for (std::size_t q = p + 1; q < n; ++q) {
      const auto zq = points.row(q);
      const double w = std::exp(-squared_distance(zp, zq) * inv);
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = zp[i] - zq[i];
        energy[i] += w * diff * diff;
      }
    }
  }
  return energy;
}

VolumeEstimate manifold_volume(const Matrix& points) {
  if (points.rows() == 0) fail(ErrorKind::too_few_points, "volume of an empty cloud");
  if (!all_finite(points)) fail(ErrorKind::non_finite, "cloud has non-finite entries");
  Matrix sigma = gram(points, 1.0 / static_cast<double>(points.rows()));
  for (std::size_t i = 0; i < sigma.rows(); ++i) sigma(i, i) += 1.0;
  const double logdet = logdet_spd(sigma);
  return {std::exp(0.5 * logdet), logdet};
}

double loss_dim(const Matrix& points, const DimLossConfig& config) {
  if (points.rows() < 2) return 0.0;
  const Vector energy = dirichlet_energy(points, config);
  double s = 0.0;
  for (double e : energy) s += e;
  if (s == 0.0) return 0.0;
  return manifold_volume(points).volume * s;
}

double loss_dim_per_class(const RepresentationCloud& cloud, const DimLossConfig& config) {
  double total = 0.0;
  for (int c : cloud.classes()) {
    const auto rows = cloud.members(c);
    total += loss_dim(cloud.points.select_rows(rows), config);
  }
  return total;
}

}  // namespace mrgc
