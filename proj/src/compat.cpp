#include "aksvd/compat.hpp"

#include <algorithm>
#include <cmath>

#include "aksvd/error.hpp"
#include "aksvd/svd.hpp"

namespace aksvd {

const char* to_string(CompatMode mode) {
  switch (mode) {
    case CompatMode::Identity: return "identity";
    case CompatMode::PseudoInverse: return "a0";
    case CompatMode::Pca: return "a1";
    case CompatMode::Random: return "a2";
  }
  return "unknown";
}

CompatMode parse_compat_mode(const std::string& name) {
  if (name == "identity") return CompatMode::Identity;
  if (name == "a0") return CompatMode::PseudoInverse;
  if (name == "a1") return CompatMode::Pca;
  if (name == "a2") return CompatMode::Random;
  fail(ErrorCode::ConfigError, "unknown compat mode '" + name + "' (expected a0, a1, a2, identity)");
}

CompatMatrix compat_pseudoinverse(const DenseMatrix& a) {
  return {pseudo_inverse(a), CompatMode::PseudoInverse, CompatSide::X, std::nullopt};
}

CompatMatrix compat_pca(const DenseMatrix& a, std::size_t target_dim, bool center) {
  if (target_dim == 0 || target_dim > std::min(a.rows(), a.cols())) {
    fail(ErrorCode::RankTooLarge, "target_dim " + std::to_string(target_dim));
  }
  DenseMatrix work = a;
  if (center) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) mean += a(i, j);
      mean /= static_cast<double>(a.rows());
      for (std::size_t i = 0; i < a.rows(); ++i) work(i, j) -= mean;
    }
  }
  DenseMatrix basis;
  if (frobenius_norm(work) > 0.0) {
    SvdResult svd = svd_exact(work);
    basis = svd.V.leading_cols(std::min(target_dim, svd.rank()));
  }
  if (basis.cols() < target_dim) {
    // Rank-deficient: extend with directions orthogonal to the found ones.
    DenseMatrix fill = gaussian_matrix(a.cols(), target_dim, 0x5eed);
    DenseMatrix q = basis.empty() ? orthonormalize(fill) : orthonormalize(hstack(basis, fill));
    basis = q.leading_cols(target_dim);
  }
  return {std::move(basis), CompatMode::Pca, CompatSide::X, std::nullopt};
}

CompatMatrix compat_random(const DenseMatrix& a, std::uint64_t seed) {
  const std::size_t m = a.cols();
  const std::size_t n = a.rows();
  DenseMatrix c = gaussian_matrix(m, n, seed);
  c = (1.0 / std::sqrt(static_cast<double>(m))) * c;
  return {std::move(c), CompatMode::Random, CompatSide::X, seed};
}

std::shared_ptr<const CompatMatrix> make_compat(const DenseMatrix& a, const CompatOptions& opts) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  if (opts.mode == CompatMode::Identity) {
    if (n != m) {
      fail(ErrorCode::CompatibilityMissing,
           "identity transform needs a square matrix, got " + std::to_string(n) + "x" +
               std::to_string(m));
    }
    return nullptr;
  }
  const bool tall = n > m;
  const DenseMatrix at = tall ? transpose(a) : DenseMatrix{};
  const DenseMatrix& base = tall ? at : a;
  CompatMatrix c;
  switch (opts.mode) {
    case CompatMode::PseudoInverse:
      c = compat_pseudoinverse(base);
      break;
    case CompatMode::Pca:
      c = compat_pca(base, std::min(n, m), opts.pca_center);
      break;
    case CompatMode::Random:
      c = compat_random(base, opts.seed);
      break;
    case CompatMode::Identity:
      break;
  }
  if (tall) c.side = CompatSide::Z;
  return std::make_shared<const CompatMatrix>(std::move(c));
}

DataSources apply_compat(const CompatMatrix& c, const DataSources& sources) {
  if (c.mode == CompatMode::Identity && c.C.empty()) return sources;
  const DenseMatrix& target = c.side == CompatSide::X ? sources.X : sources.Z;
  if (target.cols() != c.C.rows()) {
    fail(ErrorCode::ShapeMismatch, "compatibility matrix has " + std::to_string(c.C.rows()) +
                                       " rows, samples have length " +
                                       std::to_string(target.cols()));
  }
  DataSources out;
  if (c.side == CompatSide::X) {
    out.X = matmul(sources.X, c.C);
    out.Z = sources.Z;
  } else {
    out.X = sources.X;
    out.Z = matmul(sources.Z, c.C);
  }
  if (out.X.cols() != out.Z.cols()) {
    fail(ErrorCode::ShapeMismatch, "transformed samples still differ in length");
  }
  return out;
}

}  // namespace aksvd
