#include "mrgc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mrgc/error.hpp"

namespace mrgc {

namespace {

double frobenius(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return std::sqrt(s);
}

double off_diagonal_norm(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition sym_eig(const Matrix& matrix, const JacobiOptions& options) {
  const std::size_t n = matrix.rows();
  if (matrix.cols() != n) fail(ErrorKind::not_symmetric, "matrix is not square");
  double scale = 0.0;
  for (double v : matrix.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::non_finite, "non-finite matrix entry");
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(matrix(i, j) - matrix(j, i)) > options.symmetry_tolerance * std::max(1.0, scale)) {
        fail(ErrorKind::not_symmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                           ") and transpose differ");
      }
    }
  }

  Matrix a = matrix;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (matrix(i, j) + matrix(j, i));
  Matrix v = Matrix::identity(n);
  const double target = options.threshold * frobenius(a);

  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep++ >= options.max_sweeps) {
      fail(ErrorKind::no_convergence,
           "Jacobi did not converge in " + std::to_string(options.max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle from the classic stable formulation.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    out.eigenvalues[i] = a(src, src);
    std::size_t lead = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(v(k, src)) > std::abs(v(lead, src))) lead = k;
    const double sign = v(lead, src) < 0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, i) = sign * v(k, src);
  }
  return out;
}

Matrix cholesky(const Matrix& matrix) {
  const std::size_t n = matrix.rows();
  if (matrix.cols() != n) fail(ErrorKind::dimension_mismatch, "cholesky of non-square matrix");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = matrix(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) {
      fail(ErrorKind::not_positive_definite,
           "non-positive pivot at column " + std::to_string(j));
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = matrix(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Vector cholesky_solve(const Matrix& factor, const Vector& rhs) {
  const std::size_t n = factor.rows();
  Vector y(rhs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= factor(i, k) * y[k];
    y[i] /= factor(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= factor(k, i) * y[k];
    y[i] /= factor(i, i);
  }
  return y;
}

double logdet_spd(const Matrix& matrix) {
  const Matrix l = cholesky(matrix);
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

double determinant(Matrix a) {
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    if (a(pivot, c) == 0.0) return 0.0;
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(c, k), a(pivot, k));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t k = c; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return det;
}

Matrix PcaModel::transform(const Matrix& points) const {
  if (points.cols() != mean.size()) fail(ErrorKind::dimension_mismatch, "PCA input width");
  Matrix out(points.rows(), target_dims);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t k = 0; k < target_dims; ++k) {
      double s = 0.0;
      for (std::size_t c = 0; c < mean.size(); ++c) s += (points(r, c) - mean[c]) * components(c, k);
      out(r, k) = s;
    }
  }
  return out;
}

PcaResult pca_fit_transform(const Matrix& points, std::size_t target_dims) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (target_dims == 0 || n < 2 || target_dims > std::min(n - 1, d)) {
    fail(ErrorKind::dimension, "target_dims " + std::to_string(target_dims) +
                                   " must be in [1, min(rows - 1, cols)] for " + std::to_string(n) +
                                   "x" + std::to_string(d) + " points");
  }
  Vector mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += points(r, c);
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) centered(r, c) = points(r, c) - mean[c];

  const auto eig = sym_eig(gram(centered, 1.0 / static_cast<double>(n - 1)));
  PcaModel model{std::move(mean), Matrix(d, target_dims), Vector(target_dims), target_dims};
  for (std::size_t k = 0; k < target_dims; ++k) {
    model.variances[k] = eig.eigenvalues[k];
    for (std::size_t c = 0; c < d; ++c) model.components(c, k) = eig.eigenvectors(c, k);
  }
  Matrix projected = model.transform(points);
  return {std::move(model), std::move(projected)};
}

}  // namespace mrgc
