#pragma once

#include <cstddef>

#include "mrgc/matrix.hpp"

namespace mrgc {

/// Full spectrum of a symmetric matrix. Eigenvalues descend; column i of
/// `eigenvectors` pairs with eigenvalues[i].
struct EigenDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  Vector eigenvector(std::size_t i) const { return eigenvectors.column(i); }
};

struct JacobiOptions {
  double threshold = 1e-12;  ///< off-diagonal Frobenius norm relative to ‖M‖_F
  int max_sweeps = 100;
  double symmetry_tolerance = 1e-9;
};

/// Cyclic Jacobi rotations. Equal eigenvalues keep their original column
/// order; each eigenvector is signed so its largest-magnitude component is
/// positive.
EigenDecomposition sym_eig(const Matrix& matrix, const JacobiOptions& options = {});

/// Lower-triangular L with LLᵀ = M. Throws NotPositiveDefinite.
Matrix cholesky(const Matrix& matrix);

/// Solves M x = b given the Cholesky factor of M.
Vector cholesky_solve(const Matrix& factor, const Vector& rhs);

/// log det M via Cholesky.
double logdet_spd(const Matrix& matrix);

/// LU with partial pivoting; 0 for singular matrices.
double determinant(Matrix matrix);

struct PcaModel {
  Vector mean;
  Matrix components;  ///< cols × target_dims, orthonormal columns
  Vector variances;   ///< sample-covariance eigenvalues of the kept components
  std::size_t target_dims = 0;

  Matrix transform(const Matrix& points) const;
};

struct PcaResult {
  PcaModel model;
  Matrix projected;
};

/// Centers rows, then projects onto the `target_dims` leading eigenvectors
/// of the sample covariance. Requires target_dims <= min(rows - 1, cols).
PcaResult pca_fit_transform(const Matrix& points, std::size_t target_dims);

}  // namespace mrgc
