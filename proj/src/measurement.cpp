#include "qct/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "qct/errors.hpp"

namespace qct {

namespace {

using Complex = std::complex<double>;

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Row k of each block is the bra of the k-th eigenvector (+1 first).
struct Basis2 {
  Complex b00, b01, b10, b11;
};

Basis2 basis_for(PauliAxis a) {
  switch (a) {
    case PauliAxis::X:
      return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
    case PauliAxis::Y:
      return {kInvSqrt2, Complex(0, -kInvSqrt2), kInvSqrt2, Complex(0, kInvSqrt2)};
    case PauliAxis::Z:
      return {1.0, 0.0, 0.0, 1.0};
  }
  throw std::invalid_argument("basis_for: bad axis");
}

Basis2 adjoint(const Basis2& b) {
  return {std::conj(b.b00), std::conj(b.b10), std::conj(b.b01), std::conj(b.b11)};
}

// M <- (I x B x I) M, mixing row pairs that differ in `bit`.
void apply_left(Eigen::MatrixXcd& m, const Basis2& b, int bit) {
  const Eigen::Index d = m.rows();
  const Eigen::Index mask = Eigen::Index(1) << bit;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Complex* col = m.col(c).data();
    for (Eigen::Index i0 = 0; i0 < d; ++i0) {
      if (i0 & mask) continue;
      const Complex x0 = col[i0], x1 = col[i0 | mask];
      col[i0] = b.b00 * x0 + b.b01 * x1;
      col[i0 | mask] = b.b10 * x0 + b.b11 * x1;
    }
  }
}

// M <- M (I x B x I), mixing column pairs that differ in `bit`.
void apply_right(Eigen::MatrixXcd& m, const Basis2& b, int bit) {
  const Eigen::Index d = m.cols();
  const Eigen::Index rows = m.rows();
  const Eigen::Index mask = Eigen::Index(1) << bit;
  for (Eigen::Index j0 = 0; j0 < d; ++j0) {
    if (j0 & mask) continue;
    Complex* c0 = m.col(j0).data();
    Complex* c1 = m.col(j0 | mask).data();
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Complex x0 = c0[i], x1 = c1[i];
      c0[i] = b.b00 * x0 + b.b10 * x1;
      c1[i] = b.b01 * x0 + b.b11 * x1;
    }
  }
}

int bit_of_qubit(int qubit_index, int num_qubits) {
  // qubit 0 (first in the string) owns the most significant bit
  return num_qubits - 1 - qubit_index;
}

void check_setting(const MeasurementSetting& s) {
  if (s.axes.empty()) throw std::invalid_argument("MeasurementSetting: needs at least one qubit");
}

}  // namespace

char axis_to_char(PauliAxis a) {
  switch (a) {
    case PauliAxis::X: return 'X';
    case PauliAxis::Y: return 'Y';
    case PauliAxis::Z: return 'Z';
  }
  throw std::invalid_argument("axis_to_char: bad axis");
}

PauliAxis axis_from_char(char c) {
  switch (c) {
    case 'X': return PauliAxis::X;
    case 'Y': return PauliAxis::Y;
    case 'Z': return PauliAxis::Z;
    default: throw std::invalid_argument(std::string("axis_from_char: bad axis '") + c + "'");
  }
}

std::string MeasurementSetting::str() const {
  std::string out;
  out.reserve(axes.size());
  for (PauliAxis a : axes) out.push_back(axis_to_char(a));
  return out;
}

MeasurementSetting MeasurementSetting::from_string(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("MeasurementSetting: empty axis string");
  MeasurementSetting out;
  out.axes.reserve(s.size());
  for (char c : s) out.axes.push_back(axis_from_char(c));
  return out;
}

void SettingEnsemble::validate() const {
  if (num_qubits < 1) throw std::invalid_argument("SettingEnsemble: num_qubits must be >= 1");
  std::unordered_set<std::string> seen;
  for (const auto& s : settings) {
    if (s.num_qubits() != num_qubits)
      throw std::invalid_argument("SettingEnsemble: setting qubit count mismatch");
    if (!seen.insert(s.str()).second)
      throw std::invalid_argument("SettingEnsemble: duplicate setting " + s.str());
  }
}

Eigen::VectorXd MeasurementRecord::frequencies() const {
  if (shots < 1) throw std::invalid_argument("MeasurementRecord: shots must be >= 1");
  Eigen::VectorXd f(static_cast<Eigen::Index>(counts.size()));
  for (Eigen::Index k = 0; k < f.size(); ++k)
    f(k) = static_cast<double>(counts[static_cast<std::size_t>(k)]) / static_cast<double>(shots);
  return f;
}

void detail::conjugate_by_setting(Eigen::MatrixXcd& m, const MeasurementSetting& s) {
  const int L = s.num_qubits();
  for (int q = 0; q < L; ++q) {
    const Basis2 b = basis_for(s.axes[static_cast<std::size_t>(q)]);
    apply_left(m, b, bit_of_qubit(q, L));
  }
  for (int q = 0; q < L; ++q) {
    const Basis2 b = adjoint(basis_for(s.axes[static_cast<std::size_t>(q)]));
    apply_right(m, b, bit_of_qubit(q, L));
  }
}

void detail::inverse_conjugate_by_setting(Eigen::MatrixXcd& m, const MeasurementSetting& s) {
  const int L = s.num_qubits();
  for (int q = 0; q < L; ++q) {
    const Basis2 b = adjoint(basis_for(s.axes[static_cast<std::size_t>(q)]));
    apply_left(m, b, bit_of_qubit(q, L));
  }
  for (int q = 0; q < L; ++q) {
    const Basis2 b = basis_for(s.axes[static_cast<std::size_t>(q)]);
    apply_right(m, b, bit_of_qubit(q, L));
  }
}

void detail::normalize_probabilities(Eigen::VectorXd& p) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (p(k) < 0.0) {
      if (p(k) < -1e-12)
        throw NumericalError("probability " + std::to_string(p(k)) + " below -1e-12");
      p(k) = 0.0;
    }
    sum += p(k);
  }
  if (std::abs(sum - 1.0) > 1e-8)
    throw NumericalError("probabilities sum to " + std::to_string(sum) + ", outside 1 +- 1e-8");
  p /= sum;
}

ComplexMatrix setting_basis_unitary(const MeasurementSetting& s) {
  check_setting(s);
  // Build from the last qubit up so qubit 1 lands in the most significant slot.
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Ones(1, 1);
  for (auto it = s.axes.rbegin(); it != s.axes.rend(); ++it) {
    const Basis2 b = basis_for(*it);
    Eigen::Matrix2cd factor;
    factor << b.b00, b.b01, b.b10, b.b11;
    Eigen::MatrixXcd next(u.rows() * 2, u.cols() * 2);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j)
        next.block(i * u.rows(), j * u.cols(), u.rows(), u.cols()) = factor(i, j) * u;
    u.swap(next);
  }
  return u;
}

Eigen::VectorXd setting_probabilities(const HermitianMatrix& rho, const MeasurementSetting& s) {
  check_setting(s);
  if (rho.dim() != (Eigen::Index(1) << s.num_qubits()))
    throw std::invalid_argument("setting_probabilities: state dimension does not match setting");
  Eigen::MatrixXcd m = rho.mat();
  detail::conjugate_by_setting(m, s);
  return m.diagonal().real();
}

DataVector apply_sampling_operator(const HermitianMatrix& rho, const SettingEnsemble& ens) {
  ens.validate();
  if (rho.dim() != ens.hilbert_dim())
    throw std::invalid_argument("apply_sampling_operator: state dimension does not match ensemble");
  const Eigen::Index d = ens.hilbert_dim();
  DataVector y(ens.data_length());
  for (std::size_t j = 0; j < ens.settings.size(); ++j) {
    Eigen::MatrixXcd m = rho.mat();
    detail::conjugate_by_setting(m, ens.settings[j]);
    y.segment(static_cast<Eigen::Index>(j) * d, d) = m.diagonal().real();
  }
  return y;
}

HermitianMatrix adjoint_sampling_operator(const DataVector& z, const SettingEnsemble& ens) {
  ens.validate();
  if (z.size() != ens.data_length())
    throw std::invalid_argument("adjoint_sampling_operator: data length does not match ensemble");
  const Eigen::Index d = ens.hilbert_dim();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t j = 0; j < ens.settings.size(); ++j) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    m.diagonal() = z.segment(static_cast<Eigen::Index>(j) * d, d).cast<std::complex<double>>();
    detail::inverse_conjugate_by_setting(m, ens.settings[j]);
    acc += m;
  }
  return HermitianMatrix(acc);
}

std::vector<std::int64_t> detail::multinomial_counts(const Eigen::VectorXd& p, std::int64_t m,
                                                     Rng& rng) {
  const Eigen::Index d = p.size();
  Eigen::VectorXd cdf(d);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    acc += p(k);
    cdf(k) = acc;
  }
  cdf(d - 1) = 1.0;

  std::vector<std::int64_t> counts(static_cast<std::size_t>(d), 0);
  for (std::int64_t t = 0; t < m; ++t) {
    const double u = rng.uniform();
    const double* it = std::upper_bound(cdf.data(), cdf.data() + d, u);
    const Eigen::Index k = std::min<Eigen::Index>(it - cdf.data(), d - 1);
    ++counts[static_cast<std::size_t>(k)];
  }
  return counts;
}

MeasurementRecord simulate_counts(const HermitianMatrix& rho, const MeasurementSetting& s,
                                  std::int64_t m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("simulate_counts: shots must be >= 1");
  Eigen::VectorXd p = setting_probabilities(rho, s);
  detail::normalize_probabilities(p);

  MeasurementRecord rec;
  rec.setting = s;
  rec.shots = m;
  rec.counts = detail::multinomial_counts(p, m, rng);
  return rec;
}

double outcome_variance(double p, std::int64_t m) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("outcome_variance: p must lie in [0,1]");
  if (m < 1) throw std::invalid_argument("outcome_variance: m must be >= 1");
  return p * (1.0 - p) / static_cast<double>(m);
}

double pauli_correlator(const MeasurementRecord& rec) {
  if (rec.shots < 1) throw std::invalid_argument("pauli_correlator: shots must be >= 1");
  return pauli_correlator(rec.frequencies());
}

double pauli_correlator(const Eigen::VectorXd& frequencies) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < frequencies.size(); ++k) {
    const double term = frequencies(k);
    acc += (std::popcount(static_cast<std::uint64_t>(k)) & 1U) ? -term : term;
  }
  return acc;
}

namespace {

MeasurementSetting setting_from_index(int num_qubits, std::int64_t index) {
  MeasurementSetting s;
  s.axes.resize(static_cast<std::size_t>(num_qubits));
  for (int q = num_qubits - 1; q >= 0; --q) {
    const int digit = static_cast<int>(index % 3);
    index /= 3;
    s.axes[static_cast<std::size_t>(q)] =
        digit == 0 ? PauliAxis::X : (digit == 1 ? PauliAxis::Y : PauliAxis::Z);
  }
  return s;
}

std::int64_t pow3(int n) {
  std::int64_t v = 1;
  for (int i = 0; i < n; ++i) v *= 3;
  return v;
}

}  // namespace

SettingEnsemble enumerate_settings(int num_qubits) {
  if (num_qubits < 1 || num_qubits > 16)
    throw std::invalid_argument("enumerate_settings: num_qubits must lie in [1,16]");
  const std::int64_t total = pow3(num_qubits);
  SettingEnsemble ens;
  ens.num_qubits = num_qubits;
  ens.settings.reserve(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i)
    ens.settings.push_back(setting_from_index(num_qubits, i));
  return ens;
}

SettingEnsemble random_settings(int num_qubits, int n, Rng& rng) {
  if (num_qubits < 1 || num_qubits > 16)
    throw std::invalid_argument("random_settings: num_qubits must lie in [1,16]");
  const std::int64_t total = pow3(num_qubits);
  if (n < 1 || n > total)
    throw std::invalid_argument("random_settings: need 1 <= n <= 3^L = " + std::to_string(total));

  // partial Fisher-Yates over the index range
  std::vector<std::int64_t> indices(static_cast<std::size_t>(total));
  std::iota(indices.begin(), indices.end(), std::int64_t{0});
  SettingEnsemble ens;
  ens.num_qubits = num_qubits;
  ens.settings.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_index(static_cast<std::uint64_t>(total - i)) + static_cast<std::uint64_t>(i));
    std::swap(indices[static_cast<std::size_t>(i)], indices[j]);
    ens.settings.push_back(setting_from_index(num_qubits, indices[static_cast<std::size_t>(i)]));
  }
  return ens;
}

}  // namespace qct
