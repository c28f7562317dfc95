#include "qct/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "qct/errors.hpp"

namespace qct {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kArmijoC = 1e-4;
constexpr double kStepShrink = 0.5;
constexpr double kStepGrow = 2.0;
constexpr double kMinStep = 1e-18;
constexpr int kTolStreak = 10;
constexpr double kObjectiveFloor = 1e-26;

// Quadratic-model cache is worthwhile only while the d^2 x d^2 normal matrix
// stays small; above this the matrix-free per-setting path wins.
constexpr Eigen::Index kQuadModelMaxDim = 16;

void symmetrize(MatrixXcd& x) { x = 0.5 * (x + x.adjoint()).eval(); }

/// Shared evaluation context for one (ensemble, data) pair. For small
/// dimensions the normal operator A^dag A is cached as an explicit matrix,
/// which removes the per-setting work from every solver iteration.
class SamplingModel {
 public:
  SamplingModel(const SettingEnsemble& ens, const DataVector& y) : ens_(ens), y_(y) {
    ens.validate();
    if (y.size() != ens.data_length())
      throw std::invalid_argument("estimator: data length does not match ensemble");
    dim_ = ens.hilbert_dim();
    y2_ = y.squaredNorm();
    h0_ = adjoint_apply(y);
    use_quad_ = dim_ <= kQuadModelMaxDim;
    if (use_quad_) build_quad();
  }

  Eigen::Index dim() const { return dim_; }
  double norm_y_sq() const { return y2_; }
  const MatrixXcd& adjoint_y() const { return h0_; }

  DataVector apply(const MatrixXcd& x) const {
    const Eigen::Index d = dim_;
    DataVector out(ens_.data_length());
    for (std::size_t j = 0; j < ens_.settings.size(); ++j) {
      MatrixXcd m = x;
      detail::conjugate_by_setting(m, ens_.settings[j]);
      out.segment(static_cast<Eigen::Index>(j) * d, d) = m.diagonal().real();
    }
    return out;
  }

  MatrixXcd adjoint_apply(const DataVector& z) const {
    const Eigen::Index d = dim_;
    MatrixXcd acc = MatrixXcd::Zero(d, d);
    for (std::size_t j = 0; j < ens_.settings.size(); ++j) {
      MatrixXcd m = MatrixXcd::Zero(d, d);
      m.diagonal() = z.segment(static_cast<Eigen::Index>(j) * d, d).cast<std::complex<double>>();
      detail::inverse_conjugate_by_setting(m, ens_.settings[j]);
      acc += m;
    }
    return acc;
  }

  // A^dag(A(X)) for Hermitian X.
  MatrixXcd normal_apply(const MatrixXcd& x) const {
    if (use_quad_) {
      Eigen::Map<const VectorXcd> vx(x.data(), dim_ * dim_);
      VectorXcd w = quad_ * vx;
      return Eigen::Map<const MatrixXcd>(w.data(), dim_, dim_);
    }
    return adjoint_apply(apply(x));
  }

  // ||y - A(X)||_2^2.
  double objective(const MatrixXcd& x) const {
    if (use_quad_) {
      Eigen::Map<const VectorXcd> vx(x.data(), dim_ * dim_);
      const double cross = vx.dot(Eigen::Map<const VectorXcd>(h0_.data(), dim_ * dim_)).real();
      const double quad = vx.dot(quad_ * vx).real();
      return y2_ - 2.0 * cross + quad;
    }
    return (y_ - apply(x)).squaredNorm();
  }

  // Largest eigenvalue of A^dag A, estimated by 50 power iterations.
  double lipschitz() const {
    if (lip_ > 0.0) return lip_;
    Rng rng(0x51f1a9u);
    MatrixXcd v(dim_, dim_);
    for (Eigen::Index j = 0; j < dim_; ++j)
      for (Eigen::Index i = 0; i < dim_; ++i) v(i, j) = rng.complex_gaussian();
    symmetrize(v);
    v /= v.norm();
    double lam = 1.0;
    for (int it = 0; it < 50; ++it) {
      MatrixXcd w = normal_apply(v);
      symmetrize(w);
      lam = w.norm();
      if (lam <= 0.0) break;
      v = w / lam;
    }
    lip_ = std::max(lam, 1e-300);
    return lip_;
  }

 private:
  void build_quad() {
    const Eigen::Index d = dim_;
    quad_ = MatrixXcd::Zero(d * d, d * d);
    for (const auto& s : ens_.settings) {
      const MatrixXcd u = setting_basis_unitary(s);
      for (Eigen::Index k = 0; k < d; ++k) {
        const VectorXcd v = u.row(k).adjoint();  // |v_k>
        const MatrixXcd proj = v * v.adjoint();
        Eigen::Map<const VectorXcd> p(proj.data(), d * d);
        quad_.selfadjointView<Eigen::Lower>().rankUpdate(p, 1.0);
      }
    }
    quad_ = quad_.selfadjointView<Eigen::Lower>();
  }

  const SettingEnsemble& ens_;
  DataVector y_;
  Eigen::Index dim_ = 0;
  double y2_ = 0.0;
  MatrixXcd h0_;
  bool use_quad_ = false;
  MatrixXcd quad_;
  mutable double lip_ = -1.0;
};

struct TolStreak {
  double tol;
  int streak = 0;
  bool converged(double f_prev, double f_new) {
    const double rel = (f_prev - f_new) / std::max(std::abs(f_prev), 1e-300);
    streak = (rel < tol) ? streak + 1 : 0;
    return streak >= kTolStreak;
  }
};

void check_opts(const EstimatorOptions& opts) {
  if (opts.max_iters < 1) throw std::invalid_argument("EstimatorOptions: max_iters must be >= 1");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("EstimatorOptions: tol must be positive");
}

[[noreturn]] void throw_diverged(const char* what, int iter, double step, double value) {
  throw NumericalError(std::string(what) + ": non-finite objective at iteration " +
                       std::to_string(iter) + " (step " + std::to_string(step) + ", value " +
                       std::to_string(value) + "); reduce the step size");
}

EstimateResult finalize(const char* what, MatrixXcd x, std::vector<double> trace, int iters,
                        bool converged, double residual) {
  const double tr = x.trace().real();
  if (!(tr > 1e-12))
    throw NumericalError(std::string(what) + ": estimate collapsed to zero trace (" +
                         std::to_string(tr) + "); nothing to renormalize");
  x /= tr;
  EstimateResult result{HermitianMatrix(x), std::move(trace), iters, converged, residual};
  return result;
}

// Eigenvalue soft-threshold of a (symmetrized) iterate; also reports the
// nuclear norm of the result.
std::pair<MatrixXcd, double> soft_threshold_raw(const MatrixXcd& c, double t, bool psd) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(c);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eig_soft_threshold: eigensolver failed to converge");
  VectorXd lam = solver.eigenvalues();
  double nuc = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (psd) {
      lam(i) = std::max(lam(i) - t, 0.0);
    } else {
      lam(i) = lam(i) > 0.0 ? std::max(lam(i) - t, 0.0) : std::min(lam(i) + t, 0.0);
    }
    nuc += std::abs(lam(i));
  }
  MatrixXcd out =
      solver.eigenvectors() * lam.asDiagonal() * solver.eigenvectors().adjoint();
  symmetrize(out);
  return {std::move(out), nuc};
}

struct PgSolution {
  MatrixXcd x;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // data-fit part only
};

// Proximal gradient on f(X) = ||y - A(X)||^2 with prox of mu ||.||_* (+ PSD
// cone when psd). Backtracking uses the quadratic upper bound
//   f(X+) <= f(X) + <grad f, X+ - X> + ||X+ - X||^2 / (2 alpha),
// which makes the composite objective non-increasing.
PgSolution prox_gradient_solve(const char* what, const SamplingModel& model, double mu, bool psd,
                               const EstimatorOptions& opts, const MatrixXcd* x_init) {
  check_opts(opts);
  const Eigen::Index d = model.dim();

  // x_init, when given, must already be PSD if the PSD prox is in force.
  MatrixXcd x = x_init ? *x_init
                       : MatrixXcd(MatrixXcd::Identity(d, d) / static_cast<double>(d));
  double fx = model.objective(x);
  double nuc;
  if (psd) {
    nuc = x.trace().real();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(x);
    nuc = es.eigenvalues().cwiseAbs().sum();
  }

  PgSolution sol;
  sol.trace.push_back(fx + mu * nuc);

  const double fixed_step =
      opts.step_rule == StepRule::Fixed ? 1.0 / model.lipschitz() : 0.0;
  double alpha = opts.step_rule == StepRule::Fixed ? fixed_step : 1.0;
  TolStreak streak{opts.tol};

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    MatrixXcd grad = 2.0 * (model.normal_apply(x) - model.adjoint_y());
    symmetrize(grad);

    MatrixXcd x_next;
    double f_next = 0.0, nuc_next = 0.0;
    if (opts.step_rule == StepRule::Fixed) {
      auto [cand, cand_nuc] = soft_threshold_raw(x - alpha * grad, alpha * mu, psd);
      f_next = model.objective(cand);
      if (!std::isfinite(f_next)) throw_diverged(what, iter, alpha, f_next);
      x_next = std::move(cand);
      nuc_next = cand_nuc;
    } else {
      alpha = std::min(alpha * kStepGrow, 1e12);
      bool accepted = false;
      const double slack = 1e-12 * (std::abs(fx) + 1.0);
      while (alpha >= kMinStep) {
        auto [cand, cand_nuc] = soft_threshold_raw(x - alpha * grad, alpha * mu, psd);
        const double f_cand = model.objective(cand);
        const MatrixXcd diff = cand - x;
        const double bound =
            fx + (grad.conjugate().cwiseProduct(diff)).sum().real() +
            diff.squaredNorm() / (2.0 * alpha) + slack;
        if (std::isfinite(f_cand) && f_cand <= bound) {
          x_next = std::move(cand);
          f_next = f_cand;
          nuc_next = cand_nuc;
          accepted = true;
          break;
        }
        alpha *= kStepShrink;
      }
      if (!accepted) {  // step at the numerical floor; nothing left to gain
        sol.converged = true;
        break;
      }
    }

    const double obj_prev = sol.trace.back();
    const double obj_next = f_next + mu * nuc_next;
    x = std::move(x_next);
    fx = f_next;
    sol.trace.push_back(obj_next);
    sol.iterations = iter;
    if (obj_next <= kObjectiveFloor || streak.converged(obj_prev, obj_next)) {
      sol.converged = true;
      break;
    }
  }

  sol.x = std::move(x);
  sol.residual = fx;
  return sol;
}

}  // namespace

FactorMatrix::FactorMatrix(Eigen::MatrixXcd m) : q(std::move(m)) {
  if (q.rows() < 1 || q.cols() < 1)
    throw std::invalid_argument("FactorMatrix: matrix must be nonempty");
  if (q.rows() > q.cols())
    throw std::invalid_argument("FactorMatrix: rank cap r must satisfy r <= d");
  if (!q.allFinite()) throw std::invalid_argument("FactorMatrix: entries must be finite");
}

double grad_objective(const FactorMatrix& q, const DataVector& y, const SettingEnsemble& ens) {
  ens.validate();
  if (q.dim() != ens.hilbert_dim())
    throw std::invalid_argument("grad_objective: factor dimension does not match ensemble");
  if (y.size() != ens.data_length())
    throw std::invalid_argument("grad_objective: data length does not match ensemble");
  return (y - apply_sampling_operator(q.state(), ens)).squaredNorm();
}

ComplexMatrix grad_gradient(const FactorMatrix& q, const DataVector& y,
                            const SettingEnsemble& ens) {
  ens.validate();
  if (q.dim() != ens.hilbert_dim())
    throw std::invalid_argument("grad_gradient: factor dimension does not match ensemble");
  if (y.size() != ens.data_length())
    throw std::invalid_argument("grad_gradient: data length does not match ensemble");
  const HermitianMatrix state = q.state();
  const DataVector z = apply_sampling_operator(state, ens) - y;
  const HermitianMatrix w = adjoint_sampling_operator(z, ens);
  return 4.0 * q.q * w.mat();
}

EstimateResult grad_estimate(const DataVector& y, const SettingEnsemble& ens, int rank_cap,
                             const EstimatorOptions& opts) {
  check_opts(opts);
  const SamplingModel model(ens, y);
  const Eigen::Index d = model.dim();
  if (rank_cap < 1 || rank_cap > d)
    throw std::invalid_argument("grad_estimate: need 1 <= rank_cap <= d");

  Rng rng(opts.init_seed);
  MatrixXcd q(rank_cap, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < rank_cap; ++i) q(i, j) = rng.complex_gaussian();
  q /= q.norm();  // tr(Q^dag Q) = 1

  auto objective_of = [&](const MatrixXcd& qq) {
    MatrixXcd x = qq.adjoint() * qq;
    return model.objective(x);
  };

  double f = objective_of(q);
  std::vector<double> trace{f};
  int iterations = 0;
  bool converged = false;
  TolStreak streak{opts.tol};

  const double fixed_step =
      opts.step_rule == StepRule::Fixed ? 1.0 / model.lipschitz() : 0.0;
  double alpha = fixed_step;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    MatrixXcd x = q.adjoint() * q;
    MatrixXcd w = model.normal_apply(x) - model.adjoint_y();
    symmetrize(w);
    const MatrixXcd grad = 4.0 * q * w;
    const double gnorm2 = grad.squaredNorm();
    if (gnorm2 <= 0.0) {
      converged = true;
      break;
    }

    double f_next = 0.0;
    MatrixXcd q_next;
    if (opts.step_rule == StepRule::Fixed) {
      q_next = q - alpha * grad;
      f_next = objective_of(q_next);
      if (!std::isfinite(f_next)) throw_diverged("grad_estimate", iter, alpha, f_next);
    } else {
      if (iter == 1) alpha = f / gnorm2;  // scale-free first guess
      alpha = std::min(alpha * kStepGrow, 1e12);
      bool accepted = false;
      while (alpha >= kMinStep) {
        q_next = q - alpha * grad;
        f_next = objective_of(q_next);
        if (std::isfinite(f_next) && f_next <= f - kArmijoC * alpha * gnorm2) {
          accepted = true;
          break;
        }
        alpha *= kStepShrink;
      }
      if (!accepted) {
        converged = true;
        break;
      }
    }

    const double f_prev = f;
    q = std::move(q_next);
    f = f_next;
    trace.push_back(f);
    iterations = iter;
    if (f <= kObjectiveFloor || streak.converged(f_prev, f)) {
      converged = true;
      break;
    }
  }

  return finalize("grad_estimate", q.adjoint() * q, std::move(trace), iterations, converged, f);
}

EstimateResult ls_pg_estimate(const DataVector& y, const SettingEnsemble& ens,
                              const EstimatorOptions& opts) {
  const SamplingModel model(ens, y);
  PgSolution sol = prox_gradient_solve("ls_pg_estimate", model, 0.0, true, opts, nullptr);
  return finalize("ls_pg_estimate", std::move(sol.x), std::move(sol.trace), sol.iterations,
                  sol.converged, sol.residual);
}

EstimateResult lasso_estimate(const DataVector& y, const SettingEnsemble& ens, double mu,
                              const EstimatorOptions& opts) {
  if (mu < 0.0) throw std::invalid_argument("lasso_estimate: mu must be >= 0");
  const SamplingModel model(ens, y);
  PgSolution sol = prox_gradient_solve("lasso_estimate", model, mu, opts.psd_prox, opts, nullptr);
  return finalize("lasso_estimate", std::move(sol.x), std::move(sol.trace), sol.iterations,
                  sol.converged, sol.residual);
}

EstimateResult tnm_estimate(const DataVector& y, const SettingEnsemble& ens, double epsilon,
                            const EstimatorOptions& opts) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("tnm_estimate: epsilon must be positive");
  const SamplingModel model(ens, y);
  const double band = 0.05 * epsilon;

  // Residual floor at mu = 0 decides feasibility.
  PgSolution lo = prox_gradient_solve("tnm_estimate", model, 0.0, true, opts, nullptr);
  if (lo.residual > epsilon + band) {
    throw NumericalError("tnm_estimate: epsilon " + std::to_string(epsilon) +
                         " is infeasible; the positivity-constrained residual floor is " +
                         std::to_string(lo.residual));
  }
  if (lo.residual >= epsilon - band) {
    return finalize("tnm_estimate", std::move(lo.x), std::move(lo.trace), lo.iterations,
                    lo.converged, lo.residual);
  }

  // X = 0 solves the Lasso once mu >= 2 lambda_max(A^dag y); stay just below.
  Eigen::SelfAdjointEigenSolver<MatrixXcd> h0_eig(model.adjoint_y());
  const double mu_kill = 2.0 * std::max(h0_eig.eigenvalues().maxCoeff(), 1e-300);
  double mu_lo = 0.0;
  double mu_hi = 0.999 * mu_kill;

  PgSolution best = prox_gradient_solve("tnm_estimate", model, mu_hi, true, opts, &lo.x);
  if (best.residual <= epsilon) {
    // epsilon looser than anything on the path: the mu -> infinity reading.
    return finalize("tnm_estimate", std::move(best.x), std::move(best.trace), best.iterations,
                    best.converged, best.residual);
  }

  MatrixXcd warm = lo.x;
  bool hit_band = false;
  for (int step = 0; step < 60; ++step) {
    const double mu_mid = 0.5 * (mu_lo + mu_hi);
    PgSolution mid = prox_gradient_solve("tnm_estimate", model, mu_mid, true, opts, &warm);
    warm = mid.x;
    const double res_mid = mid.residual;
    if (std::abs(res_mid - epsilon) < std::abs(best.residual - epsilon)) best = std::move(mid);
    if (std::abs(best.residual - epsilon) <= band) {
      hit_band = true;
      break;
    }
    if (res_mid > epsilon)
      mu_hi = mu_mid;
    else
      mu_lo = mu_mid;
  }

  return finalize("tnm_estimate", std::move(best.x), std::move(best.trace), best.iterations,
                  best.converged && hit_band, best.residual);
}

HermitianMatrix eig_soft_threshold(const HermitianMatrix& h, double t, bool psd) {
  if (t < 0.0) throw std::invalid_argument("eig_soft_threshold: threshold must be >= 0");
  auto [x, nuc] = soft_threshold_raw(h.mat(), t, psd);
  (void)nuc;
  return HermitianMatrix(x);
}

EstimateResult estimate(const std::string& name, const DataVector& y, const SettingEnsemble& ens,
                        int rank_cap, const EstimatorOptions& opts) {
  if (name == "grad") return grad_estimate(y, ens, rank_cap, opts);
  if (name == "ls_pg") return ls_pg_estimate(y, ens, opts);
  if (name == "lasso") return lasso_estimate(y, ens, opts.mu, opts);
  if (name == "tnm") return tnm_estimate(y, ens, opts.epsilon, opts);
  throw std::invalid_argument("estimate: unknown estimator '" + name +
                              "' (expected grad, ls_pg, lasso, or tnm)");
}

}  // namespace qct
