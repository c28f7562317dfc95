#include "qct/codes.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qct/errors.hpp"

namespace qct {

namespace {

using Complex = std::complex<double>;

Eigen::Matrix2cd pauli_factor(char c) {
  Eigen::Matrix2cd m;
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument(std::string("pauli string: bad character '") + c + "'");
  }
  return m;
}

void fix_global_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      imax = i;
    }
  }
  if (best > 0.0) v *= std::conj(v(imax)) / best;
}

}  // namespace

ComplexMatrix StabilizerGenerator::matrix() const {
  if (pauli_string.empty())
    throw std::invalid_argument("StabilizerGenerator: empty Pauli string");
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("StabilizerGenerator: sign must be +1 or -1");
  // Last character first, so qubit 1 owns the most significant index bit.
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Ones(1, 1);
  for (auto it = pauli_string.rbegin(); it != pauli_string.rend(); ++it) {
    const Eigen::Matrix2cd f = pauli_factor(*it);
    Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j)
        next.block(i * m.rows(), j * m.cols(), m.rows(), m.cols()) = f(i, j) * m;
    m.swap(next);
  }
  return static_cast<double>(sign) * m;
}

std::vector<StabilizerGenerator> steane_generators() {
  // Supports are the rows of the Hamming(7,4) parity-check matrix.
  return {
      {"IIIXXXX", +1}, {"IXXIIXX", +1}, {"XIXIXIX", +1},
      {"IIIZZZZ", +1}, {"IZZIIZZ", +1}, {"ZIZIZIZ", +1},
  };
}

std::pair<LogicalState, LogicalState> logical_states() {
  const auto gens = steane_generators();
  const Eigen::Index d = 128;

  Eigen::MatrixXcd projector = Eigen::MatrixXcd::Identity(d, d);
  for (const auto& g : gens)
    projector = projector * 0.5 * (Eigen::MatrixXcd::Identity(d, d) + g.matrix());

  const Spectrum spec = herm_eig(HermitianMatrix(projector));
  if (!(spec.eigenvalues(0) > 0.5 && spec.eigenvalues(1) > 0.5 && spec.eigenvalues(2) < 0.5))
    throw NumericalError("logical_states: code space is not two dimensional");
  const Eigen::MatrixXcd basis = spec.eigenvectors.leftCols(2);

  const ComplexMatrix z_all = StabilizerGenerator{"ZZZZZZZ", +1}.matrix();
  const Eigen::Matrix2cd restricted =
      (basis.adjoint() * z_all * basis + (basis.adjoint() * z_all * basis).adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> z_eig(restricted);
  if (std::abs(z_eig.eigenvalues()(0) + 1.0) > 1e-8 ||
      std::abs(z_eig.eigenvalues()(1) - 1.0) > 1e-8)
    throw NumericalError("logical_states: logical Z does not split the code space into +-1");

  Eigen::VectorXcd zero_bar = basis * z_eig.eigenvectors().col(1);  // +1
  Eigen::VectorXcd one_bar = basis * z_eig.eigenvectors().col(0);   // -1
  zero_bar.normalize();
  one_bar.normalize();
  fix_global_phase(zero_bar);
  fix_global_phase(one_bar);

  return {LogicalState{"0bar", std::move(zero_bar)}, LogicalState{"1bar", std::move(one_bar)}};
}

LogicalState logical_plus() {
  const auto [zero_bar, one_bar] = logical_states();
  Eigen::VectorXcd v = (zero_bar.vector + one_bar.vector) / std::sqrt(2.0);
  fix_global_phase(v);
  return LogicalState{"plus", std::move(v)};
}

LogicalState logical_state_by_label(const std::string& label) {
  if (label == "plus") return logical_plus();
  const auto [zero_bar, one_bar] = logical_states();
  if (label == "0bar") return zero_bar;
  if (label == "1bar") return one_bar;
  throw std::invalid_argument("logical_state_by_label: unknown label '" + label +
                              "' (expected 0bar, 1bar, or plus)");
}

double fidelity(const Eigen::VectorXcd& psi, const HermitianMatrix& rho_hat) {
  if (psi.size() != rho_hat.dim())
    throw std::invalid_argument("fidelity: state and estimate dimensions differ");
  return (psi.adjoint() * rho_hat.mat() * psi)(0).real();
}

double fidelity(const LogicalState& psi, const HermitianMatrix& rho_hat) {
  return fidelity(psi.vector, rho_hat);
}

Eigen::VectorXcd permute_qubits(const Eigen::VectorXcd& v, const std::vector<int>& perm) {
  const auto num_qubits = static_cast<int>(perm.size());
  if (v.size() != (Eigen::Index(1) << num_qubits))
    throw std::invalid_argument("permute_qubits: vector length does not match permutation size");
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 1 || p > num_qubits || seen[static_cast<std::size_t>(p - 1)])
      throw std::invalid_argument("permute_qubits: perm must be a permutation of 1..L");
    seen[static_cast<std::size_t>(p - 1)] = true;
  }

  Eigen::VectorXcd out(v.size());
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    Eigen::Index src = 0;
    for (int i = 0; i < num_qubits; ++i) {
      const int out_bit = num_qubits - 1 - i;           // qubit i+1 of the output
      const int src_bit = num_qubits - perm[static_cast<std::size_t>(i)];
      if ((idx >> out_bit) & 1) src |= Eigen::Index(1) << src_bit;
    }
    out(idx) = v(src);
  }
  return out;
}

}  // namespace qct
