#pragma once

// Test helpers: Eigen as an independent oracle, plus small seeded generators
// for property tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aksvd/matrix.hpp"
#include "aksvd/svd.hpp"

namespace testing_support {

using aksvd::DenseMatrix;

inline Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  return e;
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
  DenseMatrix a(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) a(i, j) = e(i, j);
  return a;
}

/// Singular values from Eigen's JacobiSVD, descending.
inline std::vector<double> oracle_singular_values(const DenseMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  const Eigen::VectorXd s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

inline Eigen::JacobiSVD<Eigen::MatrixXd> oracle_svd(const DenseMatrix& a) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
}

/// Largest principal angle (radians) between the column spaces of a and b,
/// from the sine form ‖(I − QaQaᵀ)Qb‖₂, which stays accurate for tiny angles.
inline double max_principal_angle(const DenseMatrix& a, const DenseMatrix& b) {
  const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(to_eigen(a)).householderQ() *
                             Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(to_eigen(b)).householderQ() *
                             Eigen::MatrixXd::Identity(b.rows(), b.cols());
  const Eigen::MatrixXd resid = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Eigen::MatrixXd> rs(resid);
  return std::asin(std::min(1.0, rs.singularValues().maxCoeff()));
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

inline double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Seeded shape/value generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::uint64_t seed() { return rng_(); }

  DenseMatrix matrix(std::size_t rows, std::size_t cols) {
    return aksvd::gaussian_matrix(rows, cols, seed());
  }

  /// U·diag(s)·Vᵀ with random orthonormal factors.
  DenseMatrix with_spectrum(std::size_t rows, std::size_t cols, const std::vector<double>& s) {
    const DenseMatrix u = aksvd::orthonormalize(matrix(rows, s.size()));
    const DenseMatrix v = aksvd::orthonormalize(matrix(cols, s.size()));
    return aksvd::matmul_nt(aksvd::scale_columns(u, s), v);
  }

  DenseMatrix binary(std::size_t rows, std::size_t cols, double p) {
    DenseMatrix a(rows, cols);
    std::bernoulli_distribution b(p);
    for (double& v : a.data()) v = b(rng_) ? 1.0 : 0.0;
    return a;
  }

 private:
  std::mt19937_64 rng_;
};

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("aksvd_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const std::filesystem::path p = path / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testing_support
