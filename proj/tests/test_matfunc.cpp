#include <catch2/catch_amalgamated.hpp>

#include <gbs/covariance.hpp>
#include <gbs/hafnian.hpp>
#include <gbs/linalg.hpp>
#include <gbs/torontonian.hpp>
#include <gbs/unitary.hpp>

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <random>

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

gbs::Matrix random_complex_symmetric(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  gbs::Matrix B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      B(i, j) = gbs::Complex(gauss(rng), gauss(rng));
    }
  }
  return 0.5 * (B + B.transpose());
}

gbs::Matrix random_hermitian_pd(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  gbs::Matrix B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      B(i, j) = gbs::Complex(gauss(rng), gauss(rng));
    }
  }
  return B * B.adjoint() + gbs::Matrix::Identity(n, n);
}

std::int64_t double_factorial_odd(int n) {
  // (2n - 1)!! as an exact integer.
  std::int64_t v = 1;
  for (int k = 2 * n - 1; k >= 1; k -= 2) v *= k;
  return v;
}

gbs::Matrix pair_correlation_block(int n, double a, double b) {
  gbs::Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n).setConstant(b);
  H.bottomRightCorner(n, n).setConstant(b);
  H.topRightCorner(n, n).setConstant(a);
  H.bottomLeftCorner(n, n).setConstant(a);
  return H;
}

}  // namespace

TEST_CASE("hafnian handles the textbook cases", "[matfunc][hafnian]") {
  SECTION("empty matrix") {
    gbs::Matrix A(0, 0);
    CHECK(gbs::hafnian(A) == gbs::Complex(1.0, 0.0));
  }
  SECTION("2x2 off-diagonal") {
    gbs::Matrix A(2, 2);
    A << 0.0, gbs::Complex(2.0, 1.0), gbs::Complex(2.0, 1.0), 0.0;
    auto h = gbs::hafnian(A);
    CHECK_THAT(h.real(), WithinAbs(2.0, 1e-12));
    CHECK_THAT(h.imag(), WithinAbs(1.0, 1e-12));
  }
  SECTION("all-ones matrices count perfect matchings") {
    for (int n = 1; n <= 6; ++n) {
      gbs::Matrix A = gbs::Matrix::Constant(2 * n, 2 * n, 1.0);
      auto h = gbs::hafnian(A);
      CAPTURE(n);
      CHECK_THAT(h.real(),
                 WithinRel(static_cast<double>(double_factorial_odd(n)), 1e-10));
      CHECK_THAT(h.imag(), WithinAbs(0.0, 1e-10));
    }
  }
  SECTION("a block anti-diagonal identity gives the permanent of I") {
    const int m = 4;
    gbs::Matrix A = gbs::Matrix::Zero(2 * m, 2 * m);
    A.topRightCorner(m, m) = gbs::Matrix::Identity(m, m);
    A.bottomLeftCorner(m, m) = gbs::Matrix::Identity(m, m);
    auto h = gbs::hafnian(A);
    CHECK_THAT(h.real(), WithinAbs(1.0, 1e-10));
    CHECK_THAT(h.imag(), WithinAbs(0.0, 1e-12));
  }
  SECTION("diagonal entries do not contribute") {
    gbs::Matrix A(2, 2);
    A << 5.0, 3.0, 3.0, -7.0;
    CHECK_THAT(gbs::hafnian(A).real(), WithinAbs(3.0, 1e-12));
  }
}

TEST_CASE("hafnian matches the matching-sum definition on random matrices",
          "[matfunc][hafnian]") {
  for (int n = 2; n <= 12; n += 2) {
    auto A = random_complex_symmetric(n, 100 + static_cast<unsigned>(n));
    auto ref = gbs::hafnian_bruteforce(A);
    auto fast = gbs::hafnian(A);
    CAPTURE(n);
    CHECK_THAT(std::abs(fast - ref), WithinAbs(0.0, 1e-9 * std::max(1.0, std::abs(ref))));
  }
}

TEST_CASE("hafnian validates its input", "[matfunc][hafnian]") {
  CHECK_THROWS_AS(gbs::hafnian(random_complex_symmetric(3, 1)), gbs::MatrixError);
  CHECK_THROWS_AS(gbs::hafnian(gbs::Matrix::Zero(2, 4)), gbs::MatrixError);
  gbs::Matrix A(2, 2);
  A << 0.0, 1.0, 2.0, 0.0;
  CHECK_THROWS_AS(gbs::hafnian(A), gbs::MatrixError);
  CHECK_THROWS_AS(gbs::hafnian(gbs::Matrix::Zero(126, 126)), gbs::MatrixError);
}

TEST_CASE("pairing coefficients are exact integers with a known total",
          "[matfunc][coeffs]") {
  CHECK(gbs::f_coefficient(0, 0) == 1);
  CHECK(gbs::f_coefficient(1, 0) == 1);
  CHECK(gbs::f_coefficient(2, 0) == 2);
  CHECK(gbs::f_coefficient(2, 2) == 1);
  CHECK(gbs::f_coefficient(3, 2) == 9);

  for (int n = 1; n <= 12; ++n) {
    std::int64_t total = 0;
    for (int q = 0; q <= n; q += 2) total += gbs::f_coefficient(n, q);
    CAPTURE(n);
    CHECK(total == double_factorial_odd(n));
  }

  CHECK_THROWS_AS(gbs::f_coefficient(3, 1), std::invalid_argument);
  CHECK_THROWS_AS(gbs::f_coefficient(2, 4), std::invalid_argument);
  CHECK_THROWS_AS(gbs::f_coefficient(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gbs::f_coefficient(31, 0), std::overflow_error);
}

TEST_CASE("g closed form matches the structured hafnian", "[matfunc][gfunction]") {
  const double a = 0.0804536025349141;
  const double b = 0.5911507362488734;

  CHECK(gbs::g_function(0, a, b) == 1.0);
  CHECK_THAT(gbs::g_function(1, a, b), WithinRel(a, 1e-15));
  CHECK_THAT(gbs::g_function(2, a, b), WithinRel(2 * a * a + b * b, 1e-14));

  for (int n = 2; n <= 6; ++n) {
    auto h = gbs::hafnian(pair_correlation_block(n, a, b));
    CAPTURE(n);
    CHECK_THAT(gbs::g_function(n, a, b), WithinRel(h.real(), 1e-9));
    CHECK_THAT(h.imag(), WithinAbs(0.0, 1e-12));
  }

  // Setting b = 0 keeps only cross-block matchings; there are N! of them.
  CHECK_THAT(gbs::g_function(4, 0.3, 0.0), WithinRel(24.0 * 0.3 * 0.3 * 0.3 * 0.3, 1e-12));
}

TEST_CASE("positive definite determinant helpers agree with eigenvalues",
          "[matfunc][linalg]") {
  SECTION("closed forms") {
    CHECK(gbs::log_det_pd(gbs::Matrix::Identity(4, 4)) == 0.0);
    CHECK_THAT(gbs::det_pd(2.0 * gbs::Matrix::Identity(3, 3)), WithinRel(8.0, 1e-13));
    gbs::Matrix A(2, 2);
    A << 2.0, gbs::Complex(0.0, 1.0), gbs::Complex(0.0, -1.0), 2.0;
    CHECK_THAT(gbs::det_pd(A), WithinRel(3.0, 1e-13));
    gbs::Matrix empty(0, 0);
    CHECK(gbs::log_det_pd(empty) == 0.0);
  }
  SECTION("eigenvalue product oracle") {
    for (unsigned seed : {5u, 6u, 7u}) {
      auto A = random_hermitian_pd(8, seed);
      Eigen::SelfAdjointEigenSolver<gbs::Matrix> es(A);
      double logdet = es.eigenvalues().array().log().sum();
      CHECK_THAT(gbs::log_det_pd(A), WithinRel(logdet, 1e-10));
    }
  }
  SECTION("indefinite input is rejected") {
    gbs::Matrix A(2, 2);
    A << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(gbs::log_det_pd(A), gbs::MatrixError);
  }
  SECTION("inverse round trip") {
    auto A = random_hermitian_pd(6, 9);
    auto Ainv = gbs::inverse_pd(A);
    CHECK(((A * Ainv) - gbs::Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("paired submatrix determinants satisfy the complement identity",
          "[matfunc][linalg]") {
  // det(Q_R) == det(Q) * det((Q^{-1})_V) when R is the complement of V and
  // both index sets select paired rows and columns.
  const int K = 5;
  auto Q = random_hermitian_pd(2 * K, 31);
  gbs::Matrix Qinv = Q.inverse();

  for (unsigned mask = 0; mask < (1u << K); ++mask) {
    gbs::ClickPattern V, R;
    for (int k = 0; k < K; ++k) {
      if (mask & (1u << k)) {
        V.push_back(k);
      } else {
        R.push_back(k);
      }
    }
    double lhs = gbs::det_pd(gbs::select_by_ports(Q, R));
    double rhs = gbs::det_pd(Q) * gbs::det_pd(gbs::select_by_ports(Qinv, V));
    CAPTURE(mask);
    CHECK_THAT(lhs, WithinRel(rhs, 1e-9));
  }
}

TEST_CASE("torontonian reduces to known values", "[matfunc][torontonian]") {
  const int K = 3;

  SECTION("empty click set") {
    auto Q = random_hermitian_pd(2 * K, 41);
    CHECK(gbs::torontonian(Q, {}) == 1.0);
  }
  SECTION("vacuum state never clicks") {
    gbs::Matrix Q = gbs::Matrix::Identity(2 * K, 2 * K);
    CHECK_THAT(gbs::torontonian(Q, {0}), WithinAbs(0.0, 1e-14));
    CHECK_THAT(gbs::torontonian(Q, {0, 1, 2}), WithinAbs(0.0, 1e-14));
  }
  SECTION("a single port matches the two-term expansion") {
    auto Q = random_hermitian_pd(2 * K, 42);
    gbs::Matrix Qinv = Q.inverse();
    double expect = 1.0 / std::sqrt(gbs::det_pd(gbs::select_by_ports(Qinv, {1}))) - 1.0;
    CHECK_THAT(gbs::torontonian(Q, {1}), WithinRel(expect, 1e-11));
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(gbs::torontonian(gbs::Matrix::Identity(3, 3), {0}),
                    gbs::MatrixError);
    CHECK_THROWS_AS(gbs::torontonian(gbs::Matrix::Identity(4, 4), {0, 1, 2}),
                    gbs::ConfigError);
  }
}
