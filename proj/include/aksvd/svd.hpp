#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aksvd/matrix.hpp"

namespace aksvd {

/// Compact SVD A ≈ U·diag(S)·Vᵀ with S strictly positive and non-increasing.
/// Every solver returns its vectors sign-canonicalized (see canonicalize_signs).
struct SvdResult {
  DenseMatrix U;          ///< rows × r
  std::vector<double> S;  ///< r
  DenseMatrix V;          ///< cols × r

  std::size_t rank() const noexcept { return S.size(); }
};

/// Singular values at or below tol·σ₁ are treated as numerically zero.
inline constexpr double kDefaultRankTol = 1e-10;

/// Flips each (u_s, v_s) pair so the largest-magnitude entry of u_s is positive
/// (first such entry on ties).
void canonicalize_signs(DenseMatrix& u, DenseMatrix& v);
void canonicalize_signs(SvdResult& svd);

/// Reference solver: one-sided (Hestenes) Jacobi with a QR preconditioning step
/// for tall inputs. Pairs are visited in round-robin tournament order so each
/// round's rotations touch disjoint columns and run in parallel; the result
/// does not depend on the thread count.
SvdResult svd_exact(const DenseMatrix& a, double tol = kDefaultRankTol);

struct RandomizedSvdOptions {
  std::size_t oversample = 10;
  std::size_t power_iters = 2;
  std::uint64_t seed = 0;
  double rank_tol = kDefaultRankTol;
};

/// Randomized range finder with power iterations followed by an exact SVD of
/// the projected matrix. The sketch width is capped at min(rows, cols), at
/// which point the result coincides with svd_exact.
SvdResult svd_randomized(const DenseMatrix& a, std::size_t r,
                         const RandomizedSvdOptions& opts = {});

struct TruncatedSvdOptions {
  double tol = 1e-10;           ///< Ritz residual bound, relative to σ₁
  std::size_t max_iters = 500;  ///< restart cycles
  std::size_t krylov_dim = 0;   ///< 0 picks max(2r + 10, r + 20), capped at min(rows, cols)
  std::uint64_t seed = 0;       ///< start vector
  double rank_tol = kDefaultRankTol;
};

/// Golub–Kahan–Lanczos bidiagonalization with full reorthogonalization and
/// thick restarts that keep the leading Ritz vectors.
SvdResult svd_truncated(const DenseMatrix& a, std::size_t r,
                        const TruncatedSvdOptions& opts = {});

struct EigResult {
  DenseMatrix vectors;         ///< n × r, orthonormal columns
  std::vector<double> values;  ///< descending
};

/// All eigenpairs of a small symmetric matrix by cyclic two-sided Jacobi.
EigResult eig_sym_jacobi(const DenseMatrix& k, double tol = 1e-14, std::size_t max_sweeps = 60);

struct LanczosOptions {
  double tol = 1e-12;
  std::size_t max_iters = 500;
  std::size_t krylov_dim = 0;
  std::uint64_t seed = 0;
};

/// Largest-r eigenpairs of a symmetric matrix by thick-restart Lanczos.
EigResult eig_sym_lanczos(const DenseMatrix& k, std::size_t r, const LanczosOptions& opts = {});

/// Moore–Penrose pseudo-inverse V·diag(1/S)·Uᵀ from svd_exact.
DenseMatrix pseudo_inverse(const DenseMatrix& a, double tol = kDefaultRankTol);

}  // namespace aksvd
