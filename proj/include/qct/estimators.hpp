#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qct/linalg.hpp"
#include "qct/measurement.hpp"

namespace qct {

enum class StepRule { Backtracking, Fixed };

struct EstimatorOptions {
  int max_iters = 20000;
  /// Convergence: relative objective decrease below tol for 10 consecutive
  /// accepted iterations.
  double tol = 1e-9;
  StepRule step_rule = StepRule::Backtracking;
  std::uint64_t init_seed = 0;  // GRAD initialization stream
  double mu = 0.0;              // Lasso regularization weight
  double epsilon = 0.0;         // TNM residual target
  bool psd_prox = true;         // Lasso: fold the PSD constraint into the prox
};

/// Optimization variable of the factored estimator: rho = Q^dag Q with Q of
/// shape r x d, r capping the rank.
struct FactorMatrix {
  Eigen::MatrixXcd q;

  explicit FactorMatrix(Eigen::MatrixXcd m);
  Eigen::Index rank_cap() const { return q.rows(); }
  Eigen::Index dim() const { return q.cols(); }
  /// Q^dag Q, not trace normalized.
  HermitianMatrix state() const { return HermitianMatrix(q.adjoint() * q); }
};

struct EstimateResult {
  HermitianMatrix rho_hat;  // PSD, unit trace
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  /// Data-fit residual ||y - A(X)||_2^2 of the accepted iterate, measured
  /// before the final trace renormalization.
  double residual = 0.0;
};

/// g(Q) = ||y - A(Q^dag Q)||_2^2.
double grad_objective(const FactorMatrix& q, const DataVector& y, const SettingEnsemble& ens);

/// Gradient of g with respect to Q, treating real and imaginary parts as
/// independent coordinates: 4 Q A^dag(A(Q^dag Q) - y).
ComplexMatrix grad_gradient(const FactorMatrix& q, const DataVector& y, const SettingEnsemble& ens);

/// Factored gradient descent on Q from a random Gaussian start scaled to
/// unit trace; final state Q^dag Q renormalized to unit trace.
EstimateResult grad_estimate(const DataVector& y, const SettingEnsemble& ens, int rank_cap,
                             const EstimatorOptions& opts);

/// Projected gradient least squares: X <- psd_project(X - alpha * 2 A^dag(A(X)-y)),
/// the mu = 0 positivity-constrained estimator.
EstimateResult ls_pg_estimate(const DataVector& y, const SettingEnsemble& ens,
                              const EstimatorOptions& opts);

/// Matrix Lasso min ||y - A(X)||_2^2 + mu ||X||_* over Hermitian X by proximal
/// gradient with eigenvalue soft-thresholding (PSD constraint folded into the
/// prox when opts.psd_prox is set).
EstimateResult lasso_estimate(const DataVector& y, const SettingEnsemble& ens, double mu,
                              const EstimatorOptions& opts);

/// Trace-norm minimization min tr(X) s.t. X >= 0, ||y - A(X)||_2^2 <= epsilon,
/// realized by bisection over mu in the PSD-constrained Lasso until the
/// residual matches epsilon within 5% relative.
EstimateResult tnm_estimate(const DataVector& y, const SettingEnsemble& ens, double epsilon,
                            const EstimatorOptions& opts);

/// Proximal map of t ||.||_* over Hermitian matrices: soft-threshold the
/// eigenvalues at t. With psd = true, negatives are clipped instead
/// (prox of t ||.||_* plus the PSD indicator).
HermitianMatrix eig_soft_threshold(const HermitianMatrix& h, double t, bool psd);

/// Dispatch by estimator name: grad | ls_pg | lasso | tnm. rank_cap feeds
/// grad; opts.mu feeds lasso; opts.epsilon feeds tnm.
EstimateResult estimate(const std::string& name, const DataVector& y, const SettingEnsemble& ens,
                        int rank_cap, const EstimatorOptions& opts);

}  // namespace qct
