#include "aksvd/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "aksvd/error.hpp"

namespace aksvd {

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::ShapeMismatch, std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                                       std::to_string(a.cols()) + " vs " +
                                       std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

constexpr std::size_t kColumnChunk = 256;
constexpr std::size_t kInnerChunk = 128;
constexpr std::size_t kRowChunk = 32;

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) fail(ErrorCode::NonFinite, "fill value");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    fail(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                       " != " + std::to_string(rows_ * cols_));
  }
  if (!all_finite(data_)) fail(ErrorCode::NonFinite, "matrix entries");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) fail(ErrorCode::ShapeMismatch, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite(data_)) fail(ErrorCode::NonFinite, "matrix entries");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

std::vector<double> DenseMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

DenseMatrix DenseMatrix::leading_cols(std::size_t count) const {
  if (count > cols_) fail(ErrorCode::ShapeMismatch, "leading_cols beyond width");
  DenseMatrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i) {
    std::copy_n(data_.begin() + i * cols_, count, out.data().begin() + i * count);
  }
  return out;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const DenseMatrix& a, const char* what) {
  if (!all_finite(a.data())) fail(ErrorCode::NonFinite, what);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double frobenius_norm(const DenseMatrix& a) { return norm2(a.data()); }

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) out(j, i) = a(i, j);
  }
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add");
  DenseMatrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "subtract");
  DenseMatrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) fail(ErrorCode::ShapeMismatch, "matmul inner dimensions");
  const std::size_t n = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
  DenseMatrix out(n, m);
  // Tiles of B (kInnerChunk × kColumnChunk) stay in cache across a block of
  // rows. Each entry still accumulates over k in ascending order.
  const std::size_t row_blocks = (n + kRowChunk - 1) / kRowChunk;
#pragma omp parallel for schedule(static)
  for (std::size_t rb = 0; rb < row_blocks; ++rb) {
    const std::size_t i0 = rb * kRowChunk;
    const std::size_t i1 = std::min(n, i0 + kRowChunk);
    for (std::size_t j0 = 0; j0 < m; j0 += kColumnChunk) {
      const std::size_t j1 = std::min(m, j0 + kColumnChunk);
      for (std::size_t k0 = 0; k0 < inner; k0 += kInnerChunk) {
        const std::size_t k1 = std::min(inner, k0 + kInnerChunk);
        for (std::size_t i = i0; i < i1; ++i) {
          double* c = out.row(i).data();
          const double* ai = a.row(i).data();
          for (std::size_t k = k0; k < k1; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k).data();
            for (std::size_t j = j0; j < j1; ++j) c[j] += aik * bk[j];
          }
        }
      }
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) fail(ErrorCode::ShapeMismatch, "matmul_tn inner dimensions");
  return matmul(transpose(a), b);
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) fail(ErrorCode::ShapeMismatch, "matmul_nt inner dimensions");
  const std::size_t n = a.rows();
  const std::size_t m = b.rows();
  DenseMatrix out(n, m);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const auto ai = a.row(i);
    double* c = out.row(i).data();
    for (std::size_t j = 0; j < m; ++j) c[j] = dot(ai, b.row(j));
  }
  return out;
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) fail(ErrorCode::ShapeMismatch, "matvec length");
  std::vector<double> y(a.rows());
  const std::size_t n = a.rows();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(a.row(i), x);
  return y;
}

std::vector<double> matvec_t(const DenseMatrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) fail(ErrorCode::ShapeMismatch, "matvec_t length");
  const std::size_t cols = a.cols();
  const std::size_t rows = a.rows();
  std::vector<double> y(cols, 0.0);
  const std::size_t chunks = (cols + kColumnChunk - 1) / kColumnChunk;
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t j0 = c * kColumnChunk;
    const std::size_t j1 = std::min(cols, j0 + kColumnChunk);
    for (std::size_t i = 0; i < rows; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* ai = a.row(i).data();
      for (std::size_t j = j0; j < j1; ++j) y[j] += xi * ai[j];
    }
  }
  return y;
}

DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> s) {
  if (s.size() != a.cols()) fail(ErrorCode::ShapeMismatch, "scale_columns length");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] *= s[j];
  }
  return out;
}

DenseMatrix select_rows(const DenseMatrix& a, std::span<const std::size_t> idx) {
  DenseMatrix out(idx.size(), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= a.rows()) fail(ErrorCode::ShapeMismatch, "row index out of range");
    std::copy_n(a.row(idx[k]).begin(), a.cols(), out.row(k).begin());
  }
  return out;
}

DenseMatrix select_cols(const DenseMatrix& a, std::span<const std::size_t> idx) {
  for (std::size_t j : idx) {
    if (j >= a.cols()) fail(ErrorCode::ShapeMismatch, "column index out of range");
  }
  DenseMatrix out(a.rows(), idx.size());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto src = a.row(i);
    auto dst = out.row(i);
    for (std::size_t k = 0; k < idx.size(); ++k) dst[k] = src[idx[k]];
  }
  return out;
}

DenseMatrix hstack(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) fail(ErrorCode::ShapeMismatch, "hstack row counts");
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(a.row(i).begin(), a.row(i).end(), dst.begin());
    std::copy(b.row(i).begin(), b.row(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

QrResult qr_thin(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t k = std::min(m, n);
  DenseMatrix w = a;
  std::vector<std::vector<double>> reflectors(k);
  std::vector<double> beta(k, 0.0);
  std::vector<double> s(n);

  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double>& v = reflectors[j];
    v.resize(m - j);
    for (std::size_t i = j; i < m; ++i) v[i - j] = w(i, j);
    const double xnorm = norm2(v);
    if (xnorm == 0.0) continue;
    const double alpha = v[0] >= 0.0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double vnorm2 = dot(v, v);
    if (vnorm2 == 0.0) continue;
    beta[j] = 2.0 / vnorm2;
    std::fill(s.begin() + static_cast<std::ptrdiff_t>(j), s.end(), 0.0);
    for (std::size_t i = j; i < m; ++i) {
      const double vi = v[i - j];
      if (vi == 0.0) continue;
      const double* wi = w.row(i).data();
      for (std::size_t c = j; c < n; ++c) s[c] += vi * wi[c];
    }
    for (std::size_t i = j; i < m; ++i) {
      const double f = beta[j] * v[i - j];
      if (f == 0.0) continue;
      double* wi = w.row(i).data();
      for (std::size_t c = j; c < n; ++c) wi[c] -= f * s[c];
    }
  }

  DenseMatrix r(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = i; c < n; ++c) r(i, c) = w(i, c);
  }

  DenseMatrix q(m, k);
  for (std::size_t i = 0; i < k; ++i) q(i, i) = 1.0;
  std::vector<double> t(k);
  for (std::size_t jj = k; jj-- > 0;) {
    if (beta[jj] == 0.0) continue;
    const std::vector<double>& v = reflectors[jj];
    std::fill(t.begin(), t.end(), 0.0);
    for (std::size_t i = jj; i < m; ++i) {
      const double vi = v[i - jj];
      if (vi == 0.0) continue;
      const double* qi = q.row(i).data();
      for (std::size_t c = 0; c < k; ++c) t[c] += vi * qi[c];
    }
    for (std::size_t i = jj; i < m; ++i) {
      const double f = beta[jj] * v[i - jj];
      if (f == 0.0) continue;
      double* qi = q.row(i).data();
      for (std::size_t c = 0; c < k; ++c) qi[c] -= f * t[c];
    }
  }

  for (std::size_t i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) {
      for (std::size_t c = i; c < n; ++c) r(i, c) = -r(i, c);
      for (std::size_t row = 0; row < m; ++row) q(row, i) = -q(row, i);
    }
  }
  return {std::move(q), std::move(r)};
}

DenseMatrix orthonormalize(const DenseMatrix& a) { return qr_thin(a).Q; }

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = dist(gen);
  return DenseMatrix(rows, cols, std::move(data));
}

DenseMatrix cholesky_solve(const DenseMatrix& a, const DenseMatrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) fail(ErrorCode::ShapeMismatch, "cholesky_solve shapes");
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) fail(ErrorCode::SingularSystem, "matrix not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  DenseMatrix x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count,
                                        std::uint64_t seed) {
  if (count > population) {
    fail(ErrorCode::SampleTooLarge,
         std::to_string(count) + " samples from population " + std::to_string(population));
  }
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(pool[i], pool[pick(gen)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) fail(ErrorCode::ShapeMismatch, "matmul inner dimensions");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) fail(ErrorCode::ShapeMismatch, "matmul_tn inner dimensions");
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) fail(ErrorCode::ShapeMismatch, "matmul_nt inner dimensions");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
  }
  return out;
}

std::vector<double> matvec_t(const DenseMatrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) fail(ErrorCode::ShapeMismatch, "matvec_t length");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) y[j] += a(i, j) * x[i];
  }
  return y;
}

}  // namespace serial

}  // namespace aksvd
