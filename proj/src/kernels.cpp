#include "aksvd/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "aksvd/compat.hpp"
#include "aksvd/error.hpp"

namespace aksvd {

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SNE: return "sne";
    case KernelFamily::RBF: return "rbf";
    case KernelFamily::Linear: return "linear";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "sne") return KernelFamily::SNE;
  if (s == "rbf") return KernelFamily::RBF;
  if (s == "linear") return KernelFamily::Linear;
  fail(ErrorCode::ConfigError, "unknown kernel family '" + name + "'");
}

DataSources build_sources(const DenseMatrix& a) {
  if (a.empty()) fail(ErrorCode::ShapeMismatch, "empty data matrix");
  return {a, transpose(a)};
}

namespace {

void check_gamma(KernelFamily family, double gamma) {
  if (family != KernelFamily::Linear && !(gamma > 0.0 && std::isfinite(gamma))) {
    fail(ErrorCode::ConfigError, "kernel bandwidth must be positive");
  }
}

void check_conformable(const DenseMatrix& x, const DenseMatrix& z) {
  if (x.cols() != z.cols()) {
    fail(ErrorCode::DimensionMismatch, "row samples have length " + std::to_string(x.cols()) +
                                           ", column samples " + std::to_string(z.cols()));
  }
}

std::vector<double> row_sq_norms(const DenseMatrix& a) {
  std::vector<double> out(a.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    out[i] = dot(r, r);
  }
  return out;
}

// Turns squared distances into kernel values in place.
void distances_to_kernel(KernelFamily family, double gamma, DenseMatrix& d) {
  const double inv = 1.0 / (gamma * gamma);
  if (family == KernelFamily::RBF) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (double& v : d.row(i)) v = std::exp(-v * inv);
    }
    return;
  }
  const std::vector<double> logden = sne_log_denominators(d, gamma);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (double& v : d.row(i)) v = std::exp(-v * inv - logden[i]);
  }
}

}  // namespace

double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) fail(ErrorCode::DimensionMismatch, "kernel arguments differ in length");
  check_gamma(spec.family, spec.gamma);
  switch (spec.family) {
    case KernelFamily::Linear: return dot(x, z);
    case KernelFamily::RBF: {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - z[k]) * (x[k] - z[k]);
      return std::exp(-s / (spec.gamma * spec.gamma));
    }
    case KernelFamily::SNE: break;
  }
  fail(ErrorCode::ConfigError, "SNE values need the full column set; use kernel_row");
}

DenseMatrix squared_distances(const DenseMatrix& x, const DenseMatrix& z) {
  check_conformable(x, z);
  const std::vector<double> xn = row_sq_norms(x);
  const std::vector<double> zn = row_sq_norms(z);
  DenseMatrix d = matmul(x, transpose(z));
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < d.rows(); ++i) {
    auto r = d.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = std::max(0.0, xn[i] + zn[j] - 2.0 * r[j]);
  }
  return d;
}

std::vector<double> sne_log_denominators(const DenseMatrix& sq_dist, double gamma) {
  const double inv = 1.0 / (gamma * gamma);
  std::vector<double> out(sq_dist.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < sq_dist.rows(); ++i) {
    const auto r = sq_dist.row(i);
    const double shift = *std::min_element(r.begin(), r.end());
    double s = 0.0;
    for (double v : r) s += std::exp(-(v - shift) * inv);
    out[i] = std::log(s) - shift * inv;
  }
  return out;
}

DenseMatrix assemble_kernel(KernelFamily family, double gamma, const DenseMatrix& x,
                            const DenseMatrix& z) {
  check_gamma(family, gamma);
  check_conformable(x, z);
  if (family == KernelFamily::Linear) return matmul(x, transpose(z));
  DenseMatrix d = squared_distances(x, z);
  distances_to_kernel(family, gamma, d);
  return d;
}

DataSources conform_sources(const KernelSpec& spec, const DataSources& sources) {
  if (spec.compat) return apply_compat(*spec.compat, sources);
  if (sources.X.cols() != sources.Z.cols()) {
    fail(ErrorCode::CompatibilityMissing,
         "data matrix is " + std::to_string(sources.X.rows()) + "x" +
             std::to_string(sources.X.cols()) + " and no compatibility transform was given");
  }
  return sources;
}

DenseMatrix kernel_matrix(const KernelSpec& spec, const DataSources& sources) {
  if (spec.compat) {
    const DataSources s = apply_compat(*spec.compat, sources);
    return assemble_kernel(spec.family, spec.gamma, s.X, s.Z);
  }
  if (sources.X.cols() != sources.Z.cols()) conform_sources(spec, sources);  // throws
  return assemble_kernel(spec.family, spec.gamma, sources.X, sources.Z);
}

std::vector<double> kernel_row(KernelFamily family, double gamma, std::span<const double> x,
                               const DenseMatrix& z) {
  DenseMatrix one(1, x.size(), std::vector<double>(x.begin(), x.end()));
  DenseMatrix k = assemble_kernel(family, gamma, one, z);
  return {k.data().begin(), k.data().end()};
}

CenteringStats centering_stats(const DenseMatrix& g) {
  const std::size_t n = g.rows();
  const std::size_t m = g.cols();
  CenteringStats s{std::vector<double>(n), std::vector<double>(m, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = g.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      sum += r[j];
      s.col_means[j] += r[j];
    }
    s.row_means[i] = sum / static_cast<double>(m);
  }
  for (double& c : s.col_means) c /= static_cast<double>(n);
  double total = 0.0;
  for (double r : s.row_means) total += r;
  s.grand_mean = total / static_cast<double>(n);
  return s;
}

Centered center(const DenseMatrix& g) {
  CenteringStats s = centering_stats(g);
  DenseMatrix c(g.rows(), g.cols());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < g.rows(); ++i) {
    const auto src = g.row(i);
    auto dst = c.row(i);
    for (std::size_t j = 0; j < g.cols(); ++j) {
      dst[j] = src[j] - s.row_means[i] - s.col_means[j] + s.grand_mean;
    }
  }
  return {std::move(c), std::move(s)};
}

std::vector<double> center_oos(std::span<const double> values, const CenteringStats& stats,
                               Side side) {
  const std::vector<double>& means = side == Side::Row ? stats.col_means : stats.row_means;
  if (values.size() != means.size()) {
    fail(ErrorCode::LengthMismatch, "kernel vector has length " + std::to_string(values.size()) +
                                        ", expected " + std::to_string(means.size()));
  }
  double own = 0.0;
  for (double v : values) own += v;
  own /= static_cast<double>(values.size());
  std::vector<double> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    out[j] = values[j] - means[j] - own + stats.grand_mean;
  }
  return out;
}

double default_gamma(const DenseMatrix& a, double k) {
  if (a.empty()) fail(ErrorCode::ShapeMismatch, "empty data matrix");
  const auto d = a.data();
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d.size());
  if (var == 0.0) return k;
  return k * std::sqrt(static_cast<double>(a.cols()) * var);
}

namespace serial {

DenseMatrix assemble_kernel(KernelFamily family, double gamma, const DenseMatrix& x,
                            const DenseMatrix& z) {
  check_gamma(family, gamma);
  check_conformable(x, z);
  DenseMatrix g(x.rows(), z.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < z.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        if (family == KernelFamily::Linear) {
          s += x(i, k) * z(j, k);
        } else {
          const double diff = x(i, k) - z(j, k);
          s += diff * diff;
        }
      }
      g(i, j) = family == KernelFamily::Linear ? s : std::exp(-s / (gamma * gamma));
    }
    if (family == KernelFamily::SNE) {
      double total = 0.0;
      for (std::size_t j = 0; j < z.rows(); ++j) total += g(i, j);
      for (std::size_t j = 0; j < z.rows(); ++j) g(i, j) /= total;
    }
  }
  return g;
}

}  // namespace serial

}  // namespace aksvd
