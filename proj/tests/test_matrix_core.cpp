#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "aksvd/error.hpp"
#include "aksvd/matrix.hpp"
#include "aksvd/matrix_io.hpp"
#include "aksvd/nystrom.hpp"
#include "aksvd/svd.hpp"
#include "support.hpp"

using namespace aksvd;
using testing_support::Gen;
using testing_support::max_abs_diff;
using testing_support::max_principal_angle;
using testing_support::oracle_singular_values;

namespace {

DenseMatrix diag(std::initializer_list<double> d) {
  DenseMatrix a(d.size(), d.size());
  std::size_t i = 0;
  for (double v : d) a(i, i) = v, ++i;
  return a;
}

// ‖A − U·diag(S)·Vᵀ‖_F
double reconstruction(const DenseMatrix& a, const SvdResult& s) {
  return frobenius_norm(a - matmul_nt(scale_columns(s.U, s.S), s.V));
}

double orthogonality_gap(const DenseMatrix& q) {
  return max_abs_diff(matmul_tn(q, q), DenseMatrix::identity(q.cols()));
}

}  // namespace

TEST_CASE("construction rejects non-finite entries") {
  std::vector<double> bad{1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(DenseMatrix(1, 2, bad), Error);
  CHECK_THROWS_AS(DenseMatrix(1, 3, std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("identity times X is X") {
  Gen gen(1);
  const DenseMatrix x = gen.matrix(3, 4);
  CHECK(matmul(DenseMatrix::identity(3), x) == x);
}

TEST_CASE("transpose of a product") {
  Gen gen(2);
  const DenseMatrix a = gen.matrix(4, 3);
  const DenseMatrix b = gen.matrix(3, 2);
  CHECK(max_abs_diff(transpose(matmul(a, b)), matmul(transpose(b), transpose(a))) < 1e-14);
}

TEST_CASE("mismatched shapes throw ShapeMismatch") {
  const DenseMatrix a(2, 3), b(2, 3);
  try {
    (void)matmul(a, b);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("parallel products agree with the serial references") {
  Gen gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = gen.size(1, 40), k = gen.size(1, 40), m = gen.size(1, 40);
    const DenseMatrix a = gen.matrix(n, k), b = gen.matrix(k, m), c = gen.matrix(n, m);
    CHECK(max_abs_diff(matmul(a, b), serial::matmul(a, b)) < 1e-12);
    CHECK(max_abs_diff(matmul_tn(a, c), serial::matmul_tn(a, c)) < 1e-12);
    CHECK(max_abs_diff(matmul_nt(a, transpose(b)), serial::matmul_nt(a, transpose(b))) < 1e-12);
    const std::vector<double> x = gen.matrix(n, 1).column(0);
    const std::vector<double> got = matvec_t(a, x);
    const std::vector<double> want = serial::matvec_t(a, x);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("qr_thin: Q orthonormal, R upper triangular, QR = A") {
  Gen gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t rows = gen.size(1, 30);
    const std::size_t cols = gen.size(1, 30);
    const DenseMatrix a = gen.matrix(rows, cols);
    const QrResult qr = qr_thin(a);
    CHECK(orthogonality_gap(qr.Q) < 1e-12);
    for (std::size_t i = 0; i < qr.R.rows(); ++i)
      for (std::size_t j = 0; j < std::min(i, qr.R.cols()); ++j) CHECK(qr.R(i, j) == 0.0);
    CHECK(frobenius_norm(matmul(qr.Q, qr.R) - a) <= 1e-12 * frobenius_norm(a));
  }
}

TEST_CASE("qr_thin of an orthonormal matrix returns it with R = ±I") {
  Gen gen(5);
  const DenseMatrix q = orthonormalize(gen.matrix(7, 3));
  const QrResult qr = qr_thin(q);
  for (std::size_t j = 0; j < 3; ++j) {
    const double sign = qr.R(j, j) > 0 ? 1.0 : -1.0;
    CHECK(std::abs(qr.R(j, j)) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 7; ++i) CHECK(qr.Q(i, j) * sign == doctest::Approx(q(i, j)).epsilon(1e-12));
  }
}

TEST_CASE("gaussian_matrix is deterministic per seed") {
  CHECK(gaussian_matrix(5, 4, 11) == gaussian_matrix(5, 4, 11));
  CHECK_FALSE(gaussian_matrix(5, 4, 11) == gaussian_matrix(5, 4, 12));
}

TEST_CASE("sample_indices: sorted, distinct, deterministic, bounded") {
  const auto a = sample_indices(100, 30, 9);
  CHECK(a == sample_indices(100, 30, 9));
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a.back() < 100);
  CHECK_THROWS_AS(sample_indices(5, 6, 0), Error);
}

TEST_CASE("svd_exact: diag(3,1)") {
  const SvdResult s = svd_exact(diag({3, 1}));
  REQUIRE(s.rank() == 2);
  CHECK(s.S[0] == doctest::Approx(3.0));
  CHECK(s.S[1] == doctest::Approx(1.0));
  CHECK(max_abs_diff(s.U, DenseMatrix::identity(2)) < 1e-14);
  CHECK(max_abs_diff(s.V, DenseMatrix::identity(2)) < 1e-14);
}

TEST_CASE("svd_exact: nilpotent shift has rank one") {
  const SvdResult s = svd_exact(DenseMatrix{{0, 1}, {0, 0}});
  REQUIRE(s.rank() == 1);
  CHECK(s.S[0] == doctest::Approx(1.0));
  CHECK(s.U(0, 0) == doctest::Approx(1.0));
  CHECK(s.U(1, 0) == doctest::Approx(0.0));
  CHECK(s.V(0, 0) == doctest::Approx(0.0));
  CHECK(s.V(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("svd_exact: 8x5 singular values match the eigenvalues of AᵀA") {
  Gen gen(8);
  const DenseMatrix a = gen.matrix(8, 5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(testing_support::to_eigen(matmul_tn(a, a)));
  const SvdResult s = svd_exact(a);
  REQUIRE(s.rank() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const double want = std::sqrt(eig.eigenvalues()(4 - static_cast<Eigen::Index>(i)));
    CHECK(std::abs(s.S[i] - want) <= 1e-10 * want);
  }
}

TEST_CASE("svd_exact errors") {
  CHECK_THROWS_AS(svd_exact(DenseMatrix(3, 3)), Error);
  try {
    (void)svd_exact(DenseMatrix(2, 2));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroMatrix);
  }
}

TEST_CASE("property: shifted-eigenvalue identities for the exact solver") {
  Gen gen(10);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t rows = gen.size(1, 60), cols = gen.size(1, 60);
    const DenseMatrix a = gen.matrix(rows, cols);
    const SvdResult s = svd_exact(a);
    const double na = frobenius_norm(a);
    const DenseMatrix us = scale_columns(s.U, s.S);
    const DenseMatrix vs = scale_columns(s.V, s.S);
    CHECK(frobenius_norm(matmul(a, s.V) - us) <= 1e-8 * na);
    CHECK(frobenius_norm(matmul_tn(a, s.U) - vs) <= 1e-8 * na);
    // AᵀA·V = Aᵀ·U·S and AAᵀ·U = A·V·S
    CHECK(frobenius_norm(matmul_tn(a, matmul(a, s.V)) - matmul_tn(a, us)) <= 1e-7 * na * na);
    CHECK(frobenius_norm(matmul(a, matmul_tn(a, s.U)) - matmul(a, vs)) <= 1e-7 * na * na);
    CHECK(reconstruction(a, s) <= 10 * kDefaultRankTol * na);
    CHECK(orthogonality_gap(s.U) < 1e-10);
    CHECK(orthogonality_gap(s.V) < 1e-10);
    for (std::size_t i = 1; i < s.rank(); ++i) CHECK(s.S[i] <= s.S[i - 1]);
    const std::vector<double> want = oracle_singular_values(a);
    for (std::size_t i = 0; i < s.rank(); ++i) CHECK(std::abs(s.S[i] - want[i]) <= 1e-10 * want[0]);
  }
}

TEST_CASE("property: svd of the transpose swaps the factors") {
  Gen gen(11);
  for (int trial = 0; trial < 6; ++trial) {
    const DenseMatrix a = gen.matrix(gen.size(2, 30), gen.size(2, 30));
    const SvdResult s = svd_exact(a);
    const SvdResult t = svd_exact(transpose(a));
    REQUIRE(s.rank() == t.rank());
    for (std::size_t j = 0; j < s.rank(); ++j) {
      CHECK(s.S[j] == doctest::Approx(t.S[j]).epsilon(1e-12));
      // Signs are canonical on the left vectors, so compare up to one flip per pair.
      double inner = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) inner += s.U(i, j) * t.V(i, j);
      CHECK(std::abs(inner) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("canonical signs: largest entry of each u is positive") {
  Gen gen(12);
  const SvdResult s = svd_exact(gen.matrix(9, 6));
  for (std::size_t j = 0; j < s.rank(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < s.U.rows(); ++i)
      if (std::abs(s.U(i, j)) > std::abs(best)) best = s.U(i, j);
    CHECK(best > 0.0);
  }
}

TEST_CASE("svd_randomized: full sketch on diag(5,4,3,2,1)") {
  const DenseMatrix a = diag({5, 4, 3, 2, 1});
  const SvdResult s = svd_randomized(a, 2, {3, 0, 0});
  REQUIRE(s.rank() == 2);
  CHECK(s.S[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(s.S[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("svd_randomized: small oversample with power iterations is accurate") {
  const DenseMatrix a = diag({5, 4, 3, 2, 1});
  const SvdResult ref = svd_exact(a);
  const SvdResult s = svd_randomized(a, 2, {2, 2, 0});
  CHECK(eta_accuracy(s.U, s.V, ref, 2) <= 1e-6);
}

TEST_CASE("svd_randomized: oversampling helps on a flat spectrum") {
  Gen gen(13);
  std::vector<double> spectrum;
  for (int i = 0; i < 60; ++i) spectrum.push_back(std::pow(0.99, i));
  const DenseMatrix a = gen.with_spectrum(120, 80, spectrum);
  const SvdResult ref = svd_exact(a);
  const SvdResult lean = svd_randomized(a, 3, {0, 0, 7});
  const SvdResult wide = svd_randomized(a, 3, {10, 0, 7});
  CHECK(eta_accuracy(lean.U, lean.V, ref, 3) > eta_accuracy(wide.U, wide.V, ref, 3));
}

TEST_CASE("svd_randomized: full oversample equals svd_exact; rank checked") {
  Gen gen(14);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t rows = gen.size(5, 40), cols = gen.size(5, 40);
    const DenseMatrix a = gen.matrix(rows, cols);
    const std::size_t r = gen.size(1, std::min(rows, cols));
    const SvdResult ref = svd_exact(a);
    const SvdResult s = svd_randomized(a, r, {std::min(rows, cols) - r, 0, gen.seed()});
    for (std::size_t i = 0; i < r; ++i) CHECK(std::abs(s.S[i] - ref.S[i]) <= 1e-8 * ref.S[0]);
    CHECK(eta_accuracy(s.U, s.V, ref, r) <= 1e-8 * ref.S[0]);
  }
  CHECK_THROWS_AS(svd_randomized(DenseMatrix::identity(3), 4), Error);
}

TEST_CASE("svd_randomized is deterministic per seed") {
  Gen gen(15);
  const DenseMatrix a = gen.matrix(50, 40);
  const SvdResult s1 = svd_randomized(a, 4, {5, 1, 3});
  const SvdResult s2 = svd_randomized(a, 4, {5, 1, 3});
  CHECK(s1.U == s2.U);
  CHECK(s1.S == s2.S);
  CHECK(s1.V == s2.V);
}

TEST_CASE("svd_truncated: diag(5,4,3,2,1), r = 3") {
  const SvdResult s = svd_truncated(diag({5, 4, 3, 2, 1}), 3);
  REQUIRE(s.rank() == 3);
  CHECK(s.S[0] == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(s.S[1] == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(s.S[2] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("svd_truncated: seeded 50x30, r = 5 matches the exact solver") {
  Gen gen(16);
  const DenseMatrix a = gen.matrix(50, 30);
  const SvdResult ref = svd_exact(a);
  const SvdResult s = svd_truncated(a, 5);
  CHECK(eta_accuracy(s.U, s.V, ref, 5) <= 1e-8);
}

TEST_CASE("svd_truncated: rank deflation on a rank-2 matrix") {
  Gen gen(17);
  const DenseMatrix a = gen.with_spectrum(20, 15, {3.0, 1.0});
  const SvdResult s = svd_truncated(a, 2);
  REQUIRE(s.rank() == 2);
  CHECK(s.S[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(s.S[1] == doctest::Approx(1.0).epsilon(1e-10));
  // Asking for more than the numerical rank keeps only the two real triplets.
  CHECK(svd_truncated(a, 4).rank() == 2);
}

TEST_CASE("property: svd_truncated against Eigen on random shapes") {
  Gen gen(18);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t rows = gen.size(4, 80), cols = gen.size(4, 80);
    const DenseMatrix a = gen.matrix(rows, cols);
    const std::size_t r = gen.size(1, std::min<std::size_t>(6, std::min(rows, cols)));
    const SvdResult s = svd_truncated(a, r, {1e-12, 500, 0, gen.seed()});
    const std::vector<double> want = oracle_singular_values(a);
    for (std::size_t i = 0; i < r; ++i) CHECK(std::abs(s.S[i] - want[i]) <= 1e-9 * want[0]);
    CHECK(orthogonality_gap(s.U) < 1e-10);
    CHECK(orthogonality_gap(s.V) < 1e-10);
  }
}

TEST_CASE("eigen solvers agree with Eigen on symmetric matrices") {
  Gen gen(19);
  const DenseMatrix b = gen.matrix(25, 25);
  const DenseMatrix k = matmul_tn(b, b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(testing_support::to_eigen(k));
  const EigResult jac = eig_sym_jacobi(k);
  const EigResult lan = eig_sym_lanczos(k, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const double want = oracle.eigenvalues()(24 - static_cast<Eigen::Index>(i));
    CHECK(jac.values[i] == doctest::Approx(want).epsilon(1e-11));
    CHECK(lan.values[i] == doctest::Approx(want).epsilon(1e-11));
  }
  CHECK(max_principal_angle(jac.vectors.leading_cols(4), lan.vectors) < 1e-8);
  const EigResult d = eig_sym_lanczos(diag({4, 1}), 2);
  CHECK(d.values[0] == doctest::Approx(4.0));
  CHECK(d.values[1] == doctest::Approx(1.0));
}

TEST_CASE("pseudo_inverse satisfies the Moore–Penrose conditions") {
  Gen gen(20);
  const DenseMatrix a = gen.matrix(6, 4);
  const DenseMatrix c = pseudo_inverse(a);
  const double na = frobenius_norm(a);
  CHECK(frobenius_norm(matmul(matmul(a, c), a) - a) <= 1e-8 * na);
  CHECK(frobenius_norm(matmul(matmul(c, a), c) - c) <= 1e-8 * frobenius_norm(c));
  const DenseMatrix ac = matmul(a, c), ca = matmul(c, a);
  CHECK(max_abs_diff(ac, transpose(ac)) < 1e-10);
  CHECK(max_abs_diff(ca, transpose(ca)) < 1e-10);
  const Eigen::MatrixXd oracle =
      testing_support::to_eigen(a).completeOrthogonalDecomposition().pseudoInverse();
  CHECK(max_abs_diff(c, testing_support::from_eigen(oracle)) < 1e-10);
}

TEST_CASE("matrix CSV round trip is exact") {
  Gen gen(21);
  DenseMatrix a = gen.matrix(7, 5);
  a(0, 0) = 1e-300;
  a(1, 1) = -0.1;
  a(2, 2) = 123456789.123456789;
  const auto path = std::filesystem::temp_directory_path() / "aksvd_roundtrip.csv";
  write_matrix_csv(path, a);
  CHECK(read_matrix_csv(path) == a);
  std::filesystem::remove(path);
}

TEST_CASE("parse_double is strict and locale independent") {
  CHECK(parse_double(" 1.5 ", "t") == 1.5);
  CHECK(parse_double("+2e3", "t") == 2000.0);
  CHECK_THROWS_AS(parse_double("1,5", "t"), Error);
  CHECK_THROWS_AS(parse_double("abc", "t"), Error);
  CHECK_THROWS_AS(parse_double("nan", "t"), Error);
}
