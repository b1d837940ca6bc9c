#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "aksvd/kernels.hpp"
#include "aksvd/matrix.hpp"

namespace aksvd {

/// The three sub-blocks a Nyström approximation needs, for sorted row indices
/// I (size n) and column indices J (size m).
struct NystromBlocks {
  DenseMatrix G_nm;  ///< G[I, J]
  DenseMatrix G_Nm;  ///< G[:, J]
  DenseMatrix G_nM;  ///< G[I, :]
  std::vector<std::size_t> row_indices;
  std::vector<std::size_t> col_indices;
};

/// Anything that can produce entries of an N×M kernel matrix. Implementations
/// count the entries they evaluate so callers can check that only the sampled
/// blocks were ever formed.
class KernelSource {
 public:
  virtual ~KernelSource() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;

  /// G[row_idx, col_idx].
  virtual DenseMatrix block(std::span<const std::size_t> row_idx,
                            std::span<const std::size_t> col_idx) const = 0;

  /// G[:, J], G[I, :] and their intersection. The default evaluates the two
  /// strips and slices G[I, J] out of the first.
  virtual NystromBlocks sampled_blocks(std::span<const std::size_t> row_idx,
                                       std::span<const std::size_t> col_idx) const;

  /// The full matrix. Counted separately so callers can assert it never happens.
  DenseMatrix materialize() const {
    ++materialized_;
    return materialize_impl();
  }

  std::size_t evaluated_entries() const noexcept { return evaluated_.load(); }
  std::size_t materialize_calls() const noexcept { return materialized_.load(); }
  void reset_counters() const noexcept {
    evaluated_ = 0;
    materialized_ = 0;
  }

 protected:
  void count(std::size_t entries) const noexcept { evaluated_ += entries; }
  virtual DenseMatrix materialize_impl() const;

 private:
  mutable std::atomic<std::size_t> evaluated_{0};
  mutable std::atomic<std::size_t> materialized_{0};
};

std::vector<std::size_t> all_indices(std::size_t count);

/// Wraps an existing matrix (not owned; it must outlive the source).
class MatrixSource final : public KernelSource {
 public:
  explicit MatrixSource(const DenseMatrix& g) : g_(&g) {}
  std::size_t rows() const override { return g_->rows(); }
  std::size_t cols() const override { return g_->cols(); }
  DenseMatrix block(std::span<const std::size_t> row_idx,
                    std::span<const std::size_t> col_idx) const override;
  const DenseMatrix& matrix() const { return *g_; }

 private:
  const DenseMatrix* g_;
};

/// Evaluates κ(x_i, z_j) on demand from conformable sources.
///
/// SNE rows need a denominator over all M column samples. By default a row
/// that is evaluated in full (a sampled row) uses its exact denominator, and
/// any other row estimates it from the sampled columns scaled by M/m. With
/// `full_denominator` the exact denominators of every row are computed once at
/// construction (N·M evaluations, but no N×M storage).
class LazyKernelSource final : public KernelSource {
 public:
  LazyKernelSource(KernelFamily family, double gamma, DataSources conformed,
                   bool full_denominator = false);

  std::size_t rows() const override { return x_.rows(); }
  std::size_t cols() const override { return z_.rows(); }
  DenseMatrix block(std::span<const std::size_t> row_idx,
                    std::span<const std::size_t> col_idx) const override;
  NystromBlocks sampled_blocks(std::span<const std::size_t> row_idx,
                               std::span<const std::size_t> col_idx) const override;

 private:
  DenseMatrix materialize_impl() const override;
  // Squared distances (Linear: inner products) for the block; a null index
  // span means "all".
  DenseMatrix raw_block(std::span<const std::size_t> row_idx,
                        std::span<const std::size_t> col_idx) const;
  // Raw values to kernel values in place. SNE rows use log_den.
  void finish(DenseMatrix& raw, std::span<const double> log_den) const;
  // Exact SNE log denominators for the given rows, computed in row chunks.
  std::vector<double> exact_log_den(std::span<const std::size_t> row_idx) const;

  KernelFamily family_;
  double gamma_;
  DenseMatrix x_;
  DenseMatrix z_;
  DenseMatrix zt_;  // z_ transposed, for full-width strips
  std::vector<double> x_norms_;
  std::vector<double> z_norms_;
  std::vector<double> full_log_den_;  // empty unless full_denominator
};

/// K = G·Gᵀ (left) or Gᵀ·G (right) over a materialized G, evaluated blockwise.
class GramSource final : public KernelSource {
 public:
  GramSource(const DenseMatrix& g, Side side);
  std::size_t rows() const override { return n_; }
  std::size_t cols() const override { return n_; }
  DenseMatrix block(std::span<const std::size_t> row_idx,
                    std::span<const std::size_t> col_idx) const override;

 private:
  DenseMatrix samples_;  // one row per sample: rows of G, or rows of Gᵀ
  std::size_t n_;
};

}  // namespace aksvd
