#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qct/linalg.hpp"
#include "qct/rng.hpp"

namespace qct {

enum class PauliAxis { X, Y, Z };

char axis_to_char(PauliAxis a);
PauliAxis axis_from_char(char c);

/// One local Pauli axis per qubit. axes[0] is qubit 1, which owns the most
/// significant bit of the outcome index; outcome bit 0 means eigenvalue +1.
struct MeasurementSetting {
  std::vector<PauliAxis> axes;

  int num_qubits() const { return static_cast<int>(axes.size()); }
  std::string str() const;
  static MeasurementSetting from_string(const std::string& s);

  bool operator==(const MeasurementSetting& other) const = default;
};

/// Ordered, duplicate-free collection of settings over a fixed qubit count.
struct SettingEnsemble {
  int num_qubits = 0;
  std::vector<MeasurementSetting> settings;

  Eigen::Index hilbert_dim() const { return Eigen::Index(1) << num_qubits; }
  Eigen::Index data_length() const {
    return static_cast<Eigen::Index>(settings.size()) * hilbert_dim();
  }
  /// Checks L >= 1, per-setting qubit counts, and duplicate freedom.
  void validate() const;
};

/// Outcome histogram of one setting measured `shots` times.
struct MeasurementRecord {
  MeasurementSetting setting;
  std::vector<std::int64_t> counts;  // length 2^L, indexed by outcome
  std::int64_t shots = 0;

  Eigen::VectorXd frequencies() const;
};

/// Probabilities (or frequencies) across the whole ensemble, setting-major
/// then outcome index.
using DataVector = Eigen::VectorXd;

/// Basis-change unitary of a setting: row k is the bra of the k-th joint
/// eigenvector, so diag(U rho U^dag) lists the outcome probabilities.
/// Eigenvector convention: X -> (|0> +- |1>)/sqrt2, Y -> (|0> +- i|1>)/sqrt2,
/// Z -> |0>, |1>; bit value 0 <-> eigenvalue +1.
ComplexMatrix setting_basis_unitary(const MeasurementSetting& s);

/// Outcome probabilities of a single setting, length 2^L.
Eigen::VectorXd setting_probabilities(const HermitianMatrix& rho, const MeasurementSetting& s);

/// The sampling operator A: concatenated outcome probabilities over the
/// ensemble. Matrix-free: per setting a qubit-wise conjugation by the local
/// basis unitary; rank-1 projectors are never materialized.
DataVector apply_sampling_operator(const HermitianMatrix& rho, const SettingEnsemble& ens);

/// Adjoint A^dag(z) = sum_{j,k} z_{jk} P^{(j)}_k, computed per setting as
/// U^dag diag(z-block) U.
HermitianMatrix adjoint_sampling_operator(const DataVector& z, const SettingEnsemble& ens);

/// Multinomial draw of m outcomes for one setting. Probabilities within
/// -1e-12 of zero are clipped and the block renormalized; block sums outside
/// 1 +- 1e-8 raise NumericalError.
MeasurementRecord simulate_counts(const HermitianMatrix& rho, const MeasurementSetting& s,
                                  std::int64_t m, Rng& rng);

/// Multinomial second moment p(1-p)/m of an empirical frequency.
double outcome_variance(double p, std::int64_t m);

/// Pauli correlation tr(rho W_1 x ... x W_L) recovered from basis counts as
/// the parity-signed sum sum_k (-1)^parity(k) counts_k / m. The frequency
/// overload evaluates the same parity sum on probabilities directly.
double pauli_correlator(const MeasurementRecord& rec);
double pauli_correlator(const Eigen::VectorXd& frequencies);

/// All 3^L settings, in base-3 order (X < Y < Z, last qubit fastest).
SettingEnsemble enumerate_settings(int num_qubits);

/// n distinct settings drawn uniformly without replacement.
SettingEnsemble random_settings(int num_qubits, int n, Rng& rng);

namespace detail {
/// U M U^dag for the setting's basis unitary, via 2L single-qubit passes.
void conjugate_by_setting(Eigen::MatrixXcd& m, const MeasurementSetting& s);
/// U^dag M U.
void inverse_conjugate_by_setting(Eigen::MatrixXcd& m, const MeasurementSetting& s);
/// Clip tiny negatives and renormalize a probability block in place.
void normalize_probabilities(Eigen::VectorXd& p);
/// Multinomial draw from an already normalized probability vector.
std::vector<std::int64_t> multinomial_counts(const Eigen::VectorXd& p, std::int64_t m, Rng& rng);
}  // namespace detail

}  // namespace qct
