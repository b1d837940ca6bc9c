#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace aksvd {

/// Row-major dense real matrix. Entries supplied at construction must be
/// finite; element writes afterwards are unchecked.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<double> column(std::size_t j) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Leading `count` columns.
  DenseMatrix leading_cols(std::size_t count) const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool all_finite(std::span<const double> values);
void require_finite(const DenseMatrix& a, const char* what);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

/// A·B. Rows of the result are computed independently (OpenMP over rows) and
/// zero entries of A are skipped, so sparse 0/1 inputs such as adjacency
/// matrices multiply in time proportional to their nonzeros.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// Aᵀ·B without forming Aᵀ.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// A·Bᵀ without forming Bᵀ.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x);
/// Aᵀ·x. Parallel over fixed-width column chunks; the summation order per
/// output entry does not depend on the thread count.
std::vector<double> matvec_t(const DenseMatrix& a, std::span<const double> x);

/// A·diag(s).
DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> s);
DenseMatrix select_rows(const DenseMatrix& a, std::span<const std::size_t> idx);
DenseMatrix select_cols(const DenseMatrix& a, std::span<const std::size_t> idx);
DenseMatrix hstack(const DenseMatrix& a, const DenseMatrix& b);

struct QrResult {
  DenseMatrix Q;  ///< rows × k, orthonormal columns, k = min(rows, cols)
  DenseMatrix R;  ///< k × cols, upper triangular with non-negative diagonal
};

/// Householder thin QR.
QrResult qr_thin(const DenseMatrix& a);

/// Orthonormal basis of the column space of `a` (the Q of qr_thin).
DenseMatrix orthonormalize(const DenseMatrix& a);

/// Standard normal entries from a seeded mt19937_64.
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Solves (A)X = B for symmetric positive definite A via Cholesky.
DenseMatrix cholesky_solve(const DenseMatrix& a, const DenseMatrix& b);

/// `count` distinct indices drawn uniformly from [0, population), sorted.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count,
                                        std::uint64_t seed);

// Straightforward triple-loop versions of the parallel kernels, kept as the
// reference the parallel paths are tested and benchmarked against.
namespace serial {
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> matvec_t(const DenseMatrix& a, std::span<const double> x);
}  // namespace serial

}  // namespace aksvd
