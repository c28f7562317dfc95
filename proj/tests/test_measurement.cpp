#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>

#include "qct/errors.hpp"
#include "qct/measurement.hpp"

using namespace qct;
using Complex = std::complex<double>;

namespace {

Eigen::Matrix2cd pauli_matrix(PauliAxis a) {
  Eigen::Matrix2cd m;
  switch (a) {
    case PauliAxis::X: m << 0, 1, 1, 0; break;
    case PauliAxis::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case PauliAxis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Oracle eigenvectors, written out by hand per the fixed conventions.
Eigen::Vector2cd oracle_eigenvector(PauliAxis a, int bit) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd v;
  switch (a) {
    case PauliAxis::X: v << s, (bit == 0 ? s : -s); break;
    case PauliAxis::Y: v << s, (bit == 0 ? Complex(0, s) : Complex(0, -s)); break;
    case PauliAxis::Z:
      v << (bit == 0 ? 1.0 : 0.0), (bit == 0 ? 0.0 : 1.0);
      break;
  }
  return v;
}

// |v_k> built directly as a tensor product, independent of the library path.
Eigen::VectorXcd oracle_outcome_vector(const MeasurementSetting& s, Eigen::Index outcome) {
  const int L = s.num_qubits();
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
  for (int q = 0; q < L; ++q) {
    const int bit = static_cast<int>((outcome >> (L - 1 - q)) & 1);
    const Eigen::Vector2cd factor = oracle_eigenvector(s.axes[static_cast<std::size_t>(q)], bit);
    Eigen::VectorXcd next(v.size() * 2);
    next.head(v.size()) = factor(0) * v;
    next.tail(v.size()) = factor(1) * v;
    v.swap(next);
  }
  return v;
}

HermitianMatrix random_state(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  return random_fixed_rank_state(d, d, rng);
}

}  // namespace

TEST_CASE("setting_basis_unitary matches the fixed conventions") {
  const ComplexMatrix uz = setting_basis_unitary(MeasurementSetting::from_string("Z"));
  CHECK((uz - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);

  const ComplexMatrix ux = setting_basis_unitary(MeasurementSetting::from_string("X"));
  Eigen::MatrixXcd hadamard(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  hadamard << s, s, s, -s;
  CHECK((ux - hadamard).norm() < 1e-15);

  const ComplexMatrix uzx = setting_basis_unitary(MeasurementSetting::from_string("ZX"));
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
  expected.topLeftCorner(2, 2) = hadamard;
  expected.bottomRightCorner(2, 2) = hadamard;
  CHECK((uzx - expected).norm() < 1e-15);
}

TEST_CASE("setting_basis_unitary rows are the outcome bras") {
  Rng rng(7);
  const SettingEnsemble ens = random_settings(3, 5, rng);
  for (const auto& s : ens.settings) {
    const ComplexMatrix u = setting_basis_unitary(s);
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
      const Eigen::VectorXcd v = oracle_outcome_vector(s, k);
      CHECK((u.row(k).adjoint() - v).norm() < 1e-14);
    }
  }
}

TEST_CASE("apply_sampling_operator on eigenstates") {
  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2, 2);
  zero(0, 0) = 1.0;
  const HermitianMatrix rho(zero);

  SettingEnsemble z_only{1, {MeasurementSetting::from_string("Z")}};
  const DataVector pz = apply_sampling_operator(rho, z_only);
  CHECK(pz(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pz(1) == doctest::Approx(0.0).epsilon(1e-14));

  SettingEnsemble x_only{1, {MeasurementSetting::from_string("X")}};
  const DataVector px = apply_sampling_operator(rho, x_only);
  CHECK(px(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(px(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("apply_sampling_operator agrees with the explicit projector oracle") {
  const HermitianMatrix rho = random_state(8, 99);
  Rng rng(100);
  const SettingEnsemble ens = random_settings(3, 9, rng);
  const DataVector y = apply_sampling_operator(rho, ens);
  for (std::size_t j = 0; j < ens.settings.size(); ++j) {
    for (Eigen::Index k = 0; k < 8; ++k) {
      const Eigen::VectorXcd v = oracle_outcome_vector(ens.settings[j], k);
      const double expected = (v.adjoint() * rho.mat() * v)(0).real();
      CHECK(y(static_cast<Eigen::Index>(j) * 8 + k) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("probability blocks are near-nonnegative and sum to one") {
  const HermitianMatrix rho = random_state(8, 5);
  const SettingEnsemble ens = enumerate_settings(3);
  const DataVector y = apply_sampling_operator(rho, ens);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(ens.settings.size()); ++j) {
    const auto block = y.segment(j * 8, 8);
    CHECK(block.minCoeff() >= -1e-12);
    CHECK(block.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("adjoint_sampling_operator basics") {
  SettingEnsemble z_only{1, {MeasurementSetting::from_string("Z")}};
  DataVector z(2);
  z << 1.0, 0.0;
  const HermitianMatrix h = adjoint_sampling_operator(z, z_only);
  CHECK(h.mat()(0, 0).real() == doctest::Approx(1.0));
  CHECK(std::abs(h.mat()(1, 1)) < 1e-14);
  CHECK(std::abs(h.mat()(0, 1)) < 1e-14);

  const HermitianMatrix zero = adjoint_sampling_operator(DataVector::Zero(2), z_only);
  CHECK(zero.mat().norm() == 0.0);
}

TEST_CASE("adjoint identity <A(X), z> = <X, A^dag(z)>") {
  Rng rng(123);
  for (int L = 1; L <= 4; ++L) {
    const Eigen::Index d = Eigen::Index(1) << L;
    const SettingEnsemble ens = random_settings(L, std::min<int>(7, 3 * L), rng);
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::MatrixXcd g(d, d);
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.complex_gaussian();
      const HermitianMatrix x(g);
      DataVector z(ens.data_length());
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.gaussian();

      const double lhs = apply_sampling_operator(x, ens).dot(z);
      const double rhs =
          (x.mat().adjoint() * adjoint_sampling_operator(z, ens).mat()).trace().real();
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("simulate_counts") {
  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2, 2);
  zero(0, 0) = 1.0;
  const HermitianMatrix pure(zero);
  Rng rng(9);

  SUBCASE("deterministic outcome") {
    for (int i = 0; i < 5; ++i) {
      const MeasurementRecord rec =
          simulate_counts(pure, MeasurementSetting::from_string("Z"), 100, rng);
      CHECK(rec.counts[0] == 100);
      CHECK(rec.counts[1] == 0);
    }
  }
  SUBCASE("unbiased coin within 5 sigma") {
    const HermitianMatrix mixed = HermitianMatrix(0.5 * Eigen::MatrixXcd::Identity(2, 2));
    const std::int64_t m = 100000;
    const MeasurementRecord rec =
        simulate_counts(mixed, MeasurementSetting::from_string("Z"), m, rng);
    const double freq = static_cast<double>(rec.counts[1]) / static_cast<double>(m);
    const double sigma = std::sqrt(outcome_variance(0.5, m));
    CHECK(std::abs(freq - 0.5) < 5.0 * sigma);
  }
  SUBCASE("counts always sum to m") {
    const HermitianMatrix rho = random_state(4, 77);
    for (int i = 0; i < 10; ++i) {
      const MeasurementRecord rec =
          simulate_counts(rho, MeasurementSetting::from_string("XY"), 57, rng);
      std::int64_t total = 0;
      for (auto c : rec.counts) total += c;
      CHECK(total == 57);
    }
  }
}

TEST_CASE("outcome_variance") {
  CHECK(outcome_variance(0.5, 100) == doctest::Approx(0.0025).epsilon(1e-15));
  CHECK(outcome_variance(0.0, 10) == 0.0);
  CHECK(outcome_variance(1.0, 10) == 0.0);
  CHECK(outcome_variance(0.25, 16) == doctest::Approx(0.01171875).epsilon(1e-15));
  CHECK_THROWS_AS(outcome_variance(-0.1, 10), std::invalid_argument);
  CHECK_THROWS_AS(outcome_variance(1.1, 10), std::invalid_argument);
}

TEST_CASE("pauli_correlator on simple records") {
  MeasurementRecord rec;
  rec.setting = MeasurementSetting::from_string("Z");
  rec.shots = 100;
  rec.counts = {100, 0};
  CHECK(pauli_correlator(rec) == doctest::Approx(1.0));
  rec.counts = {50, 50};
  CHECK(pauli_correlator(rec) == doctest::Approx(0.0));
}

TEST_CASE("pauli_correlator equals the direct trace over all settings") {
  for (int L = 1; L <= 3; ++L) {
    const Eigen::Index d = Eigen::Index(1) << L;
    const HermitianMatrix rho = random_state(d, 1000 + static_cast<std::uint64_t>(L));
    const SettingEnsemble ens = enumerate_settings(L);
    const DataVector y = apply_sampling_operator(rho, ens);
    for (std::size_t j = 0; j < ens.settings.size(); ++j) {
      const auto& setting = ens.settings[j];
      Eigen::MatrixXcd w = Eigen::MatrixXcd::Ones(1, 1);
      for (PauliAxis a : setting.axes) {
        const Eigen::Matrix2cd f = pauli_matrix(a);
        Eigen::MatrixXcd next(w.rows() * 2, w.cols() * 2);
        for (Eigen::Index r = 0; r < 2; ++r)
          for (Eigen::Index c = 0; c < 2; ++c)
            next.block(r * w.rows(), c * w.cols(), w.rows(), w.cols()) = f(r, c) * w;
        w.swap(next);
      }
      const double direct = (rho.mat() * w).trace().real();
      const double parity_sum =
          pauli_correlator(Eigen::VectorXd(y.segment(static_cast<Eigen::Index>(j) * d, d)));
      CHECK(parity_sum == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("law of large numbers at m = 10^6") {
  Rng seed_rng(31337);
  const HermitianMatrix rho = random_fixed_rank_state(2, 2, seed_rng);
  const MeasurementSetting s = MeasurementSetting::from_string("X");
  const Eigen::VectorXd p = setting_probabilities(rho, s);
  Rng rng(4242);
  const std::int64_t m = 1000000;
  const MeasurementRecord rec = simulate_counts(rho, s, m, rng);
  const Eigen::VectorXd freq = rec.frequencies();
  for (Eigen::Index k = 0; k < 2; ++k) {
    const double bound = 6.0 * std::sqrt(outcome_variance(std::clamp(p(k), 0.0, 1.0), m));
    CHECK(std::abs(freq(k) - p(k)) <= bound);
  }
}

TEST_CASE("enumerate_settings and random_settings") {
  const SettingEnsemble one = enumerate_settings(1);
  CHECK(one.settings.size() == 3);
  std::set<std::string> names;
  for (const auto& s : one.settings) names.insert(s.str());
  CHECK(names == std::set<std::string>{"X", "Y", "Z"});

  CHECK(enumerate_settings(7).settings.size() == 2187);

  Rng rng(55);
  const SettingEnsemble all4 = random_settings(4, 81, rng);
  CHECK(all4.settings.size() == 81);
  std::set<std::string> drawn;
  for (const auto& s : all4.settings) drawn.insert(s.str());
  CHECK(drawn.size() == 81);  // 81 = 3^4: must be the full set
  all4.validate();

  CHECK_THROWS_AS(random_settings(2, 10, rng), std::invalid_argument);

  const SettingEnsemble some = random_settings(3, 11, rng);
  CHECK(some.settings.size() == 11);
  some.validate();
}

TEST_CASE("argument errors") {
  const HermitianMatrix rho = random_state(4, 3);
  SettingEnsemble ens = enumerate_settings(1);
  CHECK_THROWS_AS(apply_sampling_operator(rho, ens), std::invalid_argument);
  CHECK_THROWS_AS(adjoint_sampling_operator(DataVector::Zero(5), ens), std::invalid_argument);
  Rng rng(1);
  CHECK_THROWS_AS(simulate_counts(rho, MeasurementSetting::from_string("Z"), 10, rng),
                  std::invalid_argument);
}
