#include <doctest.h>

#include <cmath>
#include <complex>

#include "qct/errors.hpp"
#include "qct/linalg.hpp"

using namespace qct;
using Complex = std::complex<double>;

namespace {

Eigen::MatrixXcd random_hermitian(Eigen::Index d, Rng& rng) {
  Eigen::MatrixXcd g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.complex_gaussian();
  return 0.5 * (g + g.adjoint());
}

// Independent oracle: two-sided Jacobi diagonalization of a Hermitian matrix,
// no shared code with herm_eig.
void jacobi_eig(const Eigen::MatrixXcd& h, Eigen::VectorXd& values, Eigen::MatrixXcd& vectors) {
  const Eigen::Index d = h.rows();
  Eigen::MatrixXcd a = h;
  vectors = Eigen::MatrixXcd::Identity(d, d);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < d; ++p)
      for (Eigen::Index q = p + 1; q < d; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) < 1e-14 * std::max(1.0, a.norm())) break;

    for (Eigen::Index p = 0; p < d; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const double cr = std::abs(a(p, q));
        if (cr < 1e-300) continue;
        const double phi = std::arg(a(p, q));
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * cr);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        Eigen::MatrixXcd j = Eigen::MatrixXcd::Identity(d, d);
        j(p, p) = c;
        j(p, q) = s * std::exp(Complex(0, phi));
        j(q, p) = -s * std::exp(Complex(0, -phi));
        j(q, q) = c;
        a = (j.adjoint() * a * j).eval();
        vectors = (vectors * j).eval();
      }
    }
  }
  values = a.diagonal().real();
}

}  // namespace

TEST_CASE("herm_eig identity and diagonal cases") {
  const Spectrum id = herm_eig(HermitianMatrix::identity(2));
  CHECK(id.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(id.eigenvalues(1) == doctest::Approx(1.0));

  Eigen::VectorXd diag(2);
  diag << 0.7, 0.3;
  const Spectrum s = herm_eig(HermitianMatrix::from_diagonal(diag));
  CHECK(s.eigenvalues(0) == doctest::Approx(0.7));
  CHECK(s.eigenvalues(1) == doctest::Approx(0.3));
  CHECK(std::abs(s.eigenvectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(s.eigenvectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("herm_eig reconstruction and orthonormality on random inputs") {
  Rng rng(11);
  for (Eigen::Index d : {2, 3, 5, 8, 17, 32}) {
    const HermitianMatrix h(random_hermitian(d, rng));
    const Spectrum s = herm_eig(h);
    for (Eigen::Index j = 0; j + 1 < d; ++j) CHECK(s.eigenvalues(j) >= s.eigenvalues(j + 1));
    const Eigen::MatrixXcd rebuilt =
        s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.adjoint();
    CHECK((rebuilt - h.mat()).norm() <= 1e-9 * std::max(1.0, h.mat().norm()));
    const Eigen::MatrixXcd gram = s.eigenvectors.adjoint() * s.eigenvectors;
    CHECK((gram - Eigen::MatrixXcd::Identity(d, d)).norm() <= 1e-10);
  }
}

TEST_CASE("herm_eig is deterministic and phase-fixed") {
  Rng rng(12);
  const HermitianMatrix h(random_hermitian(6, rng));
  const Spectrum a = herm_eig(h);
  const Spectrum b = herm_eig(h);
  CHECK((a.eigenvectors - b.eigenvectors).norm() == 0.0);
  for (Eigen::Index j = 0; j < 6; ++j) {
    Eigen::Index imax = 0;
    a.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
    CHECK(a.eigenvectors(imax, j).imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.eigenvectors(imax, j).real() > 0.0);
  }
}

TEST_CASE("haar_unitary basics") {
  Rng rng(21);
  const ComplexMatrix u1 = haar_unitary(1, rng);
  CHECK(std::abs(std::abs(u1(0, 0)) - 1.0) < 1e-12);

  const ComplexMatrix u4 = haar_unitary(4, rng);
  CHECK((u4.adjoint() * u4 - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("haar_unitary first moment of |<psi|U|psi>|^2 is 1/d") {
  const Eigen::Index d = 4;
  const int samples = 20000;
  Rng rng(22);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
  psi(0) = 1.0;
  double mean = 0.0;
  for (int i = 0; i < samples; ++i) {
    const ComplexMatrix u = haar_unitary(d, rng);
    mean += std::norm((psi.adjoint() * u * psi)(0));
  }
  mean /= samples;
  const double dd = static_cast<double>(d);
  const double var = 2.0 / (dd * (dd + 1.0)) - 1.0 / (dd * dd);
  const double se = std::sqrt(var / samples);
  CHECK(std::abs(mean - 1.0 / dd) < 5.0 * se);
}

TEST_CASE("random_fixed_rank_state construction invariants") {
  Rng rng(31);
  SUBCASE("pure state is pure") {
    const HermitianMatrix rho = random_fixed_rank_state(2, 1, rng);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((rho.mat() * rho.mat()).trace().real() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("rank is exact") {
    const HermitianMatrix rho = random_fixed_rank_state(16, 4, rng);
    const Spectrum s = herm_eig(rho);
    int above = 0;
    for (Eigen::Index j = 0; j < 16; ++j)
      if (s.eigenvalues(j) > 1e-10) ++above;
    CHECK(above == 4);
    CHECK(s.eigenvalues.minCoeff() >= -1e-12);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("rank above dimension is rejected") {
    CHECK_THROWS_AS(random_fixed_rank_state(4, 5, rng), std::invalid_argument);
  }
}

TEST_CASE("psd_project clips negative eigenvalues") {
  Eigen::VectorXd diag(2);
  diag << 0.5, -0.5;
  const HermitianMatrix projected = psd_project(HermitianMatrix::from_diagonal(diag));
  CHECK(projected.mat()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(projected.mat()(1, 1)) < 1e-12);

  Rng rng(41);
  const HermitianMatrix psd = random_fixed_rank_state(4, 4, rng);
  CHECK((psd_project(psd).mat() - psd.mat()).norm() < 1e-10);
}

TEST_CASE("psd_project matches the independent Jacobi clip oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXcd h = random_hermitian(4, rng);
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
    jacobi_eig(h, values, vectors);
    const Eigen::MatrixXcd oracle =
        vectors * values.cwiseMax(0.0).asDiagonal() * vectors.adjoint();
    const HermitianMatrix projected = psd_project(HermitianMatrix(h));
    CHECK((projected.mat() - oracle).norm() < 1e-9);
  }
}

TEST_CASE("psd_project is idempotent") {
  Rng rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const HermitianMatrix h(random_hermitian(6, rng));
    const HermitianMatrix once = psd_project(h);
    const HermitianMatrix twice = psd_project(once);
    CHECK((once.mat() - twice.mat()).norm() < 1e-10);
  }
}

TEST_CASE("frobenius_dist_sq") {
  const HermitianMatrix a = HermitianMatrix::identity(3);
  CHECK(frobenius_dist_sq(a, a) == 0.0);

  Eigen::VectorXd d1(2), d2(2);
  d1 << 1, 0;
  d2 << 0, 1;
  CHECK(frobenius_dist_sq(HermitianMatrix::from_diagonal(d1), HermitianMatrix::from_diagonal(d2)) ==
        doctest::Approx(2.0).epsilon(1e-14));

  Rng rng(51);
  const HermitianMatrix x(random_hermitian(5, rng));
  const HermitianMatrix y(random_hermitian(5, rng));
  double oracle = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) oracle += std::norm(x.mat()(i, j) - y.mat()(i, j));
  CHECK(frobenius_dist_sq(x, y) == doctest::Approx(oracle).epsilon(1e-12));

  CHECK_THROWS_AS(frobenius_dist_sq(a, HermitianMatrix::identity(2)), std::invalid_argument);
}

TEST_CASE("herm_eig flags non-finite input") {
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(HermitianMatrix{bad}, std::invalid_argument);
}
