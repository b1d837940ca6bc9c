#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aksvd/kernel_source.hpp"
#include "aksvd/matrix.hpp"
#include "aksvd/svd.hpp"

namespace aksvd {

struct NystromConfig {
  std::size_t n = 0;  ///< row subsamples; 0 derives it from m
  std::size_t m = 0;  ///< column subsamples; 0 starts at max(4r, 32)
  std::uint64_t seed = 0;
  std::size_t r = 1;
  double epsilon = 1e-1;
  double m_growth = 2.0;
  std::size_t m_max = 0;  ///< 0 means min(N, M)
  /// Reuse the column sample as the row sample. Only meaningful when N = M.
  std::optional<bool> shared_indices;
  std::size_t oversample = 10;   ///< RSVD on G_nm
  std::size_t power_iters = 2;
  double rank_tol = kDefaultRankTol;
};

struct NystromResult {
  DenseMatrix U_tilde;  ///< N × r, unit columns
  DenseMatrix V_tilde;  ///< M × r, unit columns
  std::vector<double> lambda_tilde;
  std::vector<std::size_t> row_indices;
  std::vector<std::size_t> col_indices;
  std::optional<double> eta;
  double wall_time = 0.0;
  /// G_nm had numerical rank below r; the result holds fewer columns.
  bool rank_deficient = false;
};

/// Row count to pair with m columns: m itself for shared square sampling,
/// otherwise m·N/M rounded, clamped to [r, N].
std::size_t paired_row_count(std::size_t rows, std::size_t cols, std::size_t m, std::size_t r);

/// Uniform sampling without replacement, sorted, deterministic per seed.
/// Row indices come from seed, column indices from seed + 1 unless shared.
NystromBlocks subsample(const KernelSource& source, const NystromConfig& cfg);

/// Asymmetric Nyström from already-sampled blocks of an N×M matrix.
NystromResult asym_nystrom_from_blocks(const NystromBlocks& blocks, std::size_t rows,
                                       std::size_t cols, const NystromConfig& cfg);

NystromResult asym_nystrom(const KernelSource& source, const NystromConfig& cfg);

struct SymNystromResult {
  DenseMatrix U_tilde;  ///< N × r, unit columns
  std::vector<double> lambda_tilde;
  std::vector<std::size_t> indices;
  bool rank_deficient = false;
};

/// Nyström eigen-approximation of a symmetric PSD source from cfg.n sampled
/// indices (cfg.m when n is 0); the n×n eigenproblem is solved by Lanczos.
SymNystromResult sym_nystrom(const KernelSource& k, const NystromConfig& cfg);
/// Same, with a caller-chosen sorted index set.
SymNystromResult sym_nystrom_indices(const KernelSource& k, std::vector<std::size_t> indices,
                                     std::size_t r);

/// Weighted misalignment of approximate singular vectors against a reference,
/// weights λ_i of the reference. Columns missing from the approximation count
/// as fully misaligned.
double eta_accuracy(const DenseMatrix& u_approx, const DenseMatrix& v_approx,
                    const SvdResult& reference, std::size_t r);

enum class BenchSolver { Tsvd, Rsvd, SymNystrom, AsymNystrom };
const char* to_string(BenchSolver solver);
BenchSolver parse_bench_solver(const std::string& name);

enum class SolveStatus { Ok, ToleranceUnreachable };
const char* to_string(SolveStatus status);

struct ToleranceOutcome {
  BenchSolver solver = BenchSolver::AsymNystrom;
  SolveStatus status = SolveStatus::Ok;
  std::size_t m_used = 0;  ///< subsamples (Nyström), oversamples (RSVD), Krylov size (TSVD)
  double eta = 0.0;
  double wall_time = 0.0;   ///< final attempt
  double total_time = 0.0;  ///< all attempts
  std::size_t attempts = 0;
  std::size_t peak_entries = 0;  ///< kernel entries evaluated in the final attempt
};

/// Grows the subsample (or oversample) budget by cfg.m_growth until η ≤ ε or
/// the cap is reached. TSVD and RSVD materialize G inside the timed region;
/// the Nyström solvers only touch sampled blocks (sym Nyström works on the
/// Gram matrices and so needs G itself).
ToleranceOutcome solve_to_tolerance(const KernelSource& source, BenchSolver solver,
                                    double epsilon, const SvdResult& reference,
                                    const NystromConfig& cfg);

}  // namespace aksvd
