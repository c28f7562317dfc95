#include "qct/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qct/errors.hpp"

namespace qct {

namespace {

constexpr double kDegenerateGap = 1e-9;

bool abs_lex_greater(const Eigen::MatrixXcd& vecs, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
    const double xa = std::abs(vecs(i, a));
    const double xb = std::abs(vecs(i, b));
    if (xa != xb) return xa > xb;
  }
  return false;
}

void fix_column_phase(Eigen::MatrixXcd& vecs, Eigen::Index col) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
    const double a = std::abs(vecs(i, col));
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const std::complex<double> phase = std::conj(vecs(imax, col)) / best;
  vecs.col(col) *= phase;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("HermitianMatrix: matrix must be square");
  if (m.rows() < 1) throw std::invalid_argument("HermitianMatrix: dimension must be >= 1");
  if (!m.allFinite()) throw std::invalid_argument("HermitianMatrix: entries must be finite");
  mat_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return HermitianMatrix(Eigen::MatrixXcd::Zero(dim, dim));
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return HermitianMatrix(Eigen::MatrixXcd::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::from_diagonal(const Eigen::VectorXd& diag) {
  return HermitianMatrix(diag.cast<std::complex<double>>().asDiagonal());
}

bool Spectrum::has_degenerate_cluster() const {
  for (Eigen::Index j = 0; j + 1 < eigenvalues.size(); ++j) {
    if (eigenvalues(j) - eigenvalues(j + 1) < kDegenerateGap) return true;
  }
  return false;
}

Spectrum herm_eig(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.mat());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("herm_eig: eigensolver failed to converge at dim " +
                         std::to_string(h.dim()));
  }

  const Eigen::Index d = h.dim();
  Spectrum s;
  s.eigenvalues.resize(d);
  s.eigenvectors.resize(d, d);
  // Eigen returns ascending order.
  for (Eigen::Index j = 0; j < d; ++j) {
    s.eigenvalues(j) = solver.eigenvalues()(d - 1 - j);
    s.eigenvectors.col(j) = solver.eigenvectors().col(d - 1 - j);
  }

  for (Eigen::Index j = 0; j < d; ++j) fix_column_phase(s.eigenvectors, j);

  // Deterministic order inside degenerate clusters.
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && s.eigenvalues(end - 1) - s.eigenvalues(end) < kDegenerateGap) ++end;
    if (end - start > 1) {
      std::vector<Eigen::Index> order(end - start);
      std::iota(order.begin(), order.end(), start);
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return abs_lex_greater(s.eigenvectors, a, b);
      });
      Eigen::VectorXd vals(end - start);
      Eigen::MatrixXcd vecs(d, end - start);
      for (Eigen::Index k = 0; k < end - start; ++k) {
        vals(k) = s.eigenvalues(order[k]);
        vecs.col(k) = s.eigenvectors.col(order[k]);
      }
      s.eigenvalues.segment(start, end - start) = vals;
      s.eigenvectors.middleCols(start, end - start) = vecs;
    }
    start = end;
  }
  return s;
}

ComplexMatrix haar_unitary(Eigen::Index d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("haar_unitary: dimension must be >= 1");
  Eigen::MatrixXcd g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.complex_gaussian();

  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the gauge so the distribution is exactly Haar, not QR-convention biased.
  for (Eigen::Index j = 0; j < d; ++j) {
    const std::complex<double> rjj = r(j, j);
    const double a = std::abs(rjj);
    q.col(j) *= (a > 0.0) ? rjj / a : 1.0;
  }
  return q;
}

HermitianMatrix random_fixed_rank_state(Eigen::Index d, Eigen::Index r, Rng& rng) {
  if (r < 1 || r > d) throw std::invalid_argument("random_fixed_rank_state: need 1 <= r <= d");
  Eigen::MatrixXcd g(d, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.complex_gaussian();
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return HermitianMatrix(rho);
}

HermitianMatrix psd_project(const HermitianMatrix& h) {
  const Spectrum s = herm_eig(h);
  const Eigen::VectorXd clipped = s.eigenvalues.cwiseMax(0.0);
  return HermitianMatrix(s.eigenvectors * clipped.asDiagonal() * s.eigenvectors.adjoint());
}

double frobenius_dist_sq(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("frobenius_dist_sq: dimension mismatch");
  return (a.mat() - b.mat()).squaredNorm();
}

}  // namespace qct
