#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qct/linalg.hpp"

namespace qct {

/// Signed Pauli string over {I, X, Y, Z}, qubit 1 first.
struct StabilizerGenerator {
  std::string pauli_string;
  int sign = +1;

  /// Dense 2^L x 2^L matrix representation.
  ComplexMatrix matrix() const;
};

/// The six generators of the 7-qubit Steane code: X-type and Z-type on the
/// Hamming(7,4) parity-check supports.
std::vector<StabilizerGenerator> steane_generators();

struct LogicalState {
  std::string label;  // "0bar", "1bar", or "plus"
  Eigen::VectorXcd vector;
};

/// The code words |0bar>, |1bar>: the joint +1 eigenspace of the generators,
/// split by the Z^x7 eigenvalue (+1 -> |0bar>, -1 -> |1bar>). Global phases
/// are fixed by making the largest-magnitude amplitude real positive.
std::pair<LogicalState, LogicalState> logical_states();

/// (|0bar> + |1bar>) / sqrt(2).
LogicalState logical_plus();

LogicalState logical_state_by_label(const std::string& label);

/// F = <psi| rho |psi>.
double fidelity(const Eigen::VectorXcd& psi, const HermitianMatrix& rho_hat);
double fidelity(const LogicalState& psi, const HermitianMatrix& rho_hat);

/// Relabels qubits of a state vector: position i (1-based, qubit 1 = most
/// significant bit) of the output takes its outcome from qubit perm[i-1] of
/// the input. perm must be a permutation of 1..L.
Eigen::VectorXcd permute_qubits(const Eigen::VectorXcd& v, const std::vector<int>& perm);

}  // namespace qct
