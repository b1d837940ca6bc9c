#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aksvd/compat.hpp"
#include "aksvd/kernels.hpp"
#include "aksvd/matrix.hpp"
#include "aksvd/nystrom.hpp"
#include "aksvd/svd.hpp"

namespace aksvd {

enum class SolverKind { Exact, Truncated, Randomized, Nystrom };
const char* to_string(SolverKind solver);
SolverKind parse_solver(const std::string& name);

struct FitOptions {
  std::size_t rank = 1;
  SolverKind solver = SolverKind::Exact;
  bool center = true;
  double rank_tol = kDefaultRankTol;
  TruncatedSvdOptions truncated;
  RandomizedSvdOptions randomized;
  NystromConfig nystrom;  ///< rank is taken from `rank`
  bool full_denominator = false;  ///< Nyström SNE: exact row sums instead of sampled estimates
};

/// A fitted model. U and V hold unit-norm singular vectors of the (centered)
/// kernel matrix; B_phi = U·Λ^{-1/2} and B_psi = V·Λ^{-1/2}.
struct KsvdModel {
  DenseMatrix B_phi;  ///< N × r
  DenseMatrix B_psi;  ///< M × r
  std::vector<double> lambda;
  DenseMatrix U;
  DenseMatrix V;
  KernelSpec kernel;
  bool centered = true;
  CenteringStats centering;
  SolverKind solver = SolverKind::Exact;
  /// SNE log row sums over the training columns, needed to score new column
  /// samples. Filled lazily when the solver never formed full rows.
  mutable std::vector<double> sne_log_den;
  /// Training samples after the compatibility transform.
  std::shared_ptr<const DataSources> train;
  std::vector<std::string> warnings;

  std::size_t rank() const noexcept { return lambda.size(); }
};

/// Fits on A: builds X = A, Z = Aᵀ, constructs the compatibility transform
/// (unless kernel.compat is already set) and runs fit_sources.
KsvdModel fit(const DenseMatrix& a, KernelSpec kernel, const CompatOptions& compat,
              const FitOptions& opts);

/// Fits on explicit sources. Passing {A, A} with a symmetric kernel gives
/// kernel PCA on the rows of A.
KsvdModel fit_sources(const DataSources& sources, const KernelSpec& kernel, const FitOptions& opts);

/// The (centered, if the model is) training kernel matrix.
DenseMatrix training_kernel(const KsvdModel& model);

struct KktResiduals {
  double residual_psi = 0.0;  ///< ‖GᵀG·B_ψ − Gᵀ·B_φ·Λ‖ / max(1, ‖GᵀG·B_ψ‖)
  double residual_phi = 0.0;  ///< ‖GGᵀ·B_φ − G·B_ψ·Λ‖ / max(1, ‖GGᵀ·B_φ‖)
  double ortho_gap = 0.0;     ///< max |B_φᵀ·G·B_ψ − I|
};

KktResiduals verify_kkt(const DenseMatrix& b_phi, const DenseMatrix& b_psi,
                        std::span<const double> lambda, const DenseMatrix& g);
KktResiduals verify_kkt(const KsvdModel& model, const DenseMatrix& g);

/// ½‖Gᵀ·B_φ‖² + ½‖G·B_ψ‖².
double objective(const DenseMatrix& b_phi, const DenseMatrix& b_psi, const DenseMatrix& g);
double objective(const KsvdModel& model, const DenseMatrix& g);

/// Leading r columns of U (left) or V (right).
DenseMatrix transform(const KsvdModel& model, Side side, std::size_t r);

/// Scores of a new row sample (Side::Row, length M before the transform) or a
/// new column sample (Side::Column, length N), one value per model component.
std::vector<double> transform_oos(const KsvdModel& model, std::span<const double> sample, Side side);

/// Writes B_phi.csv, B_psi.csv, lambda.csv, centering.csv, C.csv (when a
/// transform exists) and config.txt. Training samples are not stored.
void save_model(const KsvdModel& model, const std::filesystem::path& dir);
KsvdModel load_model(const std::filesystem::path& dir);

/// Re-attaches training data to a loaded model so it can score new samples.
void attach_training(KsvdModel& model, const DenseMatrix& a);

}  // namespace aksvd
