#pragma once

#include <Eigen/Dense>

#include "qct/rng.hpp"

namespace qct {

using ComplexMatrix = Eigen::MatrixXcd;

/// Dense Hermitian matrix. Construction symmetrizes the input, so the stored
/// entries satisfy H(i,j) == conj(H(j,i)) exactly and the diagonal is real.
/// Immutable after construction; safe to share across threads.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Eigen::MatrixXcd& m);

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix from_diagonal(const Eigen::VectorXd& diag);

  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXcd& mat() const { return mat_; }
  double trace() const { return mat_.trace().real(); }

 private:
  HermitianMatrix() = default;
  Eigen::MatrixXcd mat_;
};

/// Eigendecomposition with eigenvalues sorted descending and matching
/// orthonormal eigenvector columns.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;

  Eigen::Index dim() const { return eigenvalues.size(); }
  /// True if some adjacent (descending) eigenvalue gap is below 1e-9, in
  /// which case the per-index eigenvector assignment is basis dependent.
  bool has_degenerate_cluster() const;
};

/// Full Hermitian eigendecomposition, descending order.
///
/// Within a numerically degenerate cluster (adjacent gap < 1e-9) the
/// eigenvectors are ordered by lexicographic comparison of their absolute
/// entry values, and every eigenvector's phase is fixed by making its
/// largest-magnitude entry real positive, so the output is deterministic.
Spectrum herm_eig(const HermitianMatrix& h);

/// Haar-distributed d x d unitary: QR of a Ginibre matrix with the R diagonal
/// phases absorbed into Q.
ComplexMatrix haar_unitary(Eigen::Index d, Rng& rng);

/// Random rank-r state from the Ginibre-induced measure: G G^dag / tr(G G^dag)
/// with G a d x r complex Gaussian matrix.
HermitianMatrix random_fixed_rank_state(Eigen::Index d, Eigen::Index r, Rng& rng);

/// Frobenius-nearest positive semidefinite matrix: eigenvalues clipped at 0.
HermitianMatrix psd_project(const HermitianMatrix& h);

/// Squared Frobenius distance ||A - B||_F^2.
double frobenius_dist_sq(const HermitianMatrix& a, const HermitianMatrix& b);

}  // namespace qct
