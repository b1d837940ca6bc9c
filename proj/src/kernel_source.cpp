#include "aksvd/kernel_source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aksvd/error.hpp"

namespace aksvd {

namespace {

constexpr std::size_t kDenominatorChunk = 256;

bool is_all(std::span<const std::size_t> idx) { return idx.data() == nullptr; }

void check_indices(std::span<const std::size_t> idx, std::size_t bound, const char* what) {
  for (std::size_t i : idx) {
    if (i >= bound) {
      fail(ErrorCode::SampleTooLarge, std::string(what) + " index " + std::to_string(i) +
                                          " out of range " + std::to_string(bound));
    }
  }
}

}  // namespace

std::vector<std::size_t> all_indices(std::size_t count) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

NystromBlocks KernelSource::sampled_blocks(std::span<const std::size_t> row_idx,
                                           std::span<const std::size_t> col_idx) const {
  const std::vector<std::size_t> all_r = all_indices(rows());
  const std::vector<std::size_t> all_c = all_indices(cols());
  NystromBlocks b;
  b.G_Nm = block(all_r, col_idx);
  b.G_nM = block(row_idx, all_c);
  b.G_nm = select_cols(b.G_nM, col_idx);
  b.row_indices.assign(row_idx.begin(), row_idx.end());
  b.col_indices.assign(col_idx.begin(), col_idx.end());
  return b;
}

DenseMatrix KernelSource::materialize_impl() const {
  return block(all_indices(rows()), all_indices(cols()));
}

DenseMatrix MatrixSource::block(std::span<const std::size_t> row_idx,
                                std::span<const std::size_t> col_idx) const {
  check_indices(row_idx, g_->rows(), "row");
  check_indices(col_idx, g_->cols(), "column");
  count(row_idx.size() * col_idx.size());
  DenseMatrix out(row_idx.size(), col_idx.size());
  for (std::size_t a = 0; a < row_idx.size(); ++a) {
    for (std::size_t b = 0; b < col_idx.size(); ++b) out(a, b) = (*g_)(row_idx[a], col_idx[b]);
  }
  return out;
}

LazyKernelSource::LazyKernelSource(KernelFamily family, double gamma, DataSources conformed,
                                   bool full_denominator)
    : family_(family), gamma_(gamma), x_(std::move(conformed.X)), z_(std::move(conformed.Z)) {
  if (x_.cols() != z_.cols()) {
    fail(ErrorCode::DimensionMismatch, "lazy kernel needs conformable sources");
  }
  if (family_ != KernelFamily::Linear && !(gamma_ > 0.0)) {
    fail(ErrorCode::ConfigError, "kernel bandwidth must be positive");
  }
  zt_ = transpose(z_);
  x_norms_.resize(x_.rows());
  z_norms_.resize(z_.rows());
  for (std::size_t i = 0; i < x_.rows(); ++i) x_norms_[i] = dot(x_.row(i), x_.row(i));
  for (std::size_t j = 0; j < z_.rows(); ++j) z_norms_[j] = dot(z_.row(j), z_.row(j));
  if (family_ == KernelFamily::SNE && full_denominator) {
    full_log_den_ = exact_log_den(all_indices(x_.rows()));
  }
}

DenseMatrix LazyKernelSource::raw_block(std::span<const std::size_t> row_idx,
                                        std::span<const std::size_t> col_idx) const {
  const DenseMatrix xs = is_all(row_idx) ? DenseMatrix{} : select_rows(x_, row_idx);
  const DenseMatrix& xb = is_all(row_idx) ? x_ : xs;
  const DenseMatrix zt = is_all(col_idx) ? DenseMatrix{} : transpose(select_rows(z_, col_idx));
  DenseMatrix d = matmul(xb, is_all(col_idx) ? zt_ : zt);
  count(d.size());
  if (family_ == KernelFamily::Linear) return d;
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < d.rows(); ++a) {
    const double xn = x_norms_[is_all(row_idx) ? a : row_idx[a]];
    auto r = d.row(a);
    for (std::size_t b = 0; b < r.size(); ++b) {
      const double zn = z_norms_[is_all(col_idx) ? b : col_idx[b]];
      r[b] = std::max(0.0, xn + zn - 2.0 * r[b]);
    }
  }
  return d;
}

void LazyKernelSource::finish(DenseMatrix& raw, std::span<const double> log_den) const {
  if (family_ == KernelFamily::Linear) return;
  const double inv = 1.0 / (gamma_ * gamma_);
  const bool sne = family_ == KernelFamily::SNE;
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < raw.rows(); ++a) {
    const double shift = sne ? log_den[a] : 0.0;
    for (double& v : raw.row(a)) v = std::exp(-v * inv - shift);
  }
}

std::vector<double> LazyKernelSource::exact_log_den(std::span<const std::size_t> row_idx) const {
  std::vector<double> out(row_idx.size());
  for (std::size_t start = 0; start < row_idx.size(); start += kDenominatorChunk) {
    const std::size_t stop = std::min(row_idx.size(), start + kDenominatorChunk);
    const DenseMatrix d = raw_block(row_idx.subspan(start, stop - start), {});
    const std::vector<double> ld = sne_log_denominators(d, gamma_);
    std::copy(ld.begin(), ld.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
  }
  return out;
}

DenseMatrix LazyKernelSource::block(std::span<const std::size_t> row_idx,
                                    std::span<const std::size_t> col_idx) const {
  check_indices(row_idx, rows(), "row");
  check_indices(col_idx, cols(), "column");
  DenseMatrix d = raw_block(row_idx, col_idx);
  std::vector<double> log_den;
  if (family_ == KernelFamily::SNE) {
    if (!full_log_den_.empty()) {
      log_den.resize(row_idx.size());
      for (std::size_t a = 0; a < row_idx.size(); ++a) log_den[a] = full_log_den_[row_idx[a]];
    } else {
      log_den = exact_log_den(row_idx);
    }
  }
  finish(d, log_den);
  return d;
}

NystromBlocks LazyKernelSource::sampled_blocks(std::span<const std::size_t> row_idx,
                                               std::span<const std::size_t> col_idx) const {
  check_indices(row_idx, rows(), "row");
  check_indices(col_idx, cols(), "column");
  NystromBlocks b;
  b.row_indices.assign(row_idx.begin(), row_idx.end());
  b.col_indices.assign(col_idx.begin(), col_idx.end());

  DenseMatrix strip_rows = raw_block(row_idx, {});   // n × M
  DenseMatrix strip_cols = raw_block({}, col_idx);   // N × m
  std::vector<double> rows_den;
  std::vector<double> cols_den;
  if (family_ == KernelFamily::SNE) {
    if (!full_log_den_.empty()) {
      rows_den.resize(row_idx.size());
      for (std::size_t a = 0; a < row_idx.size(); ++a) rows_den[a] = full_log_den_[row_idx[a]];
      cols_den = full_log_den_;
    } else {
      rows_den = sne_log_denominators(strip_rows, gamma_);
      // Unsampled rows: Σ over all columns estimated by (M/m)·Σ over sampled ones.
      cols_den = sne_log_denominators(strip_cols, gamma_);
      const double scale = std::log(static_cast<double>(cols()) /
                                    static_cast<double>(col_idx.size()));
      for (double& v : cols_den) v += scale;
      for (std::size_t a = 0; a < row_idx.size(); ++a) cols_den[row_idx[a]] = rows_den[a];
    }
  }
  finish(strip_rows, rows_den);
  finish(strip_cols, cols_den);
  b.G_nm = select_cols(strip_rows, col_idx);
  b.G_nM = std::move(strip_rows);
  b.G_Nm = std::move(strip_cols);
  return b;
}

DenseMatrix LazyKernelSource::materialize_impl() const {
  DenseMatrix d = raw_block({}, {});
  std::vector<double> log_den;
  if (family_ == KernelFamily::SNE) log_den = sne_log_denominators(d, gamma_);
  finish(d, log_den);
  return d;
}

GramSource::GramSource(const DenseMatrix& g, Side side)
    : samples_(side == Side::Row ? g : transpose(g)), n_(samples_.rows()) {}

DenseMatrix GramSource::block(std::span<const std::size_t> row_idx,
                              std::span<const std::size_t> col_idx) const {
  check_indices(row_idx, n_, "row");
  check_indices(col_idx, n_, "column");
  count(row_idx.size() * col_idx.size());
  return matmul_nt(select_rows(samples_, row_idx), select_rows(samples_, col_idx));
}

}  // namespace aksvd
