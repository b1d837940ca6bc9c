#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aksvd/matrix.hpp"

namespace aksvd {

struct CompatMatrix;

enum class KernelFamily { SNE, RBF, Linear };

const char* to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

struct KernelSpec {
  KernelFamily family = KernelFamily::RBF;
  double gamma = 1.0;                           ///< bandwidth, ignored by Linear
  std::shared_ptr<const CompatMatrix> compat;   ///< null means no transform
};

/// Row data X = A and column data Z = Aᵀ. Each row of either matrix is one sample.
struct DataSources {
  DenseMatrix X;
  DenseMatrix Z;
};

DataSources build_sources(const DenseMatrix& a);

/// Pointwise RBF or Linear value. SNE is only defined relative to a full column
/// set, so it is rejected here; use kernel_row or kernel_matrix.
double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// ‖x_i − z_j‖² for all pairs, via ‖x‖² + ‖z‖² − 2xᵀz. Parallel over rows of x;
/// zero entries of x are skipped in the cross term. Rounding can make tiny
/// distances negative, so results are clamped at 0.
DenseMatrix squared_distances(const DenseMatrix& x, const DenseMatrix& z);

/// log Σ_j exp(−‖x_i − z_j‖²/γ²) per row of x, evaluated with a max shift so
/// no row can underflow to an empty denominator.
std::vector<double> sne_log_denominators(const DenseMatrix& sq_dist, double gamma);

/// κ(x_i, z_j) for already-conformable feature rows. SNE rows are normalized
/// against the rows of `z` given here.
DenseMatrix assemble_kernel(KernelFamily family, double gamma, const DenseMatrix& x,
                            const DenseMatrix& z);

/// Assembles G for the given sources, applying spec.compat first when present.
DenseMatrix kernel_matrix(const KernelSpec& spec, const DataSources& sources);

/// Applies the compatibility transform from the spec (or checks that none is
/// needed) and returns the conformable sources.
DataSources conform_sources(const KernelSpec& spec, const DataSources& sources);

/// Kernel values of one (already transformed) row sample against all rows of `z`.
std::vector<double> kernel_row(KernelFamily family, double gamma, std::span<const double> x,
                               const DenseMatrix& z);

struct CenteringStats {
  std::vector<double> row_means;  ///< length N
  std::vector<double> col_means;  ///< length M
  double grand_mean = 0.0;
};

struct Centered {
  DenseMatrix G;
  CenteringStats stats;
};

CenteringStats centering_stats(const DenseMatrix& g);

/// Double centering G_ij − r_i − c_j + g.
Centered center(const DenseMatrix& g);

enum class Side { Row, Column };

/// Centers a new kernel row (against all training columns) or a new kernel
/// column (against all training rows) consistently with the training statistics.
std::vector<double> center_oos(std::span<const double> values, const CenteringStats& stats,
                               Side side);

/// Bandwidth k·sqrt(M·var(A)) with var the population variance of all
/// entries. Falls back to k when A is constant.
double default_gamma(const DenseMatrix& a, double k);

namespace serial {
/// Reference assembly by direct differences, one entry at a time.
DenseMatrix assemble_kernel(KernelFamily family, double gamma, const DenseMatrix& x,
                            const DenseMatrix& z);
}  // namespace serial

}  // namespace aksvd
