#include "aksvd/nystrom.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "aksvd/error.hpp"

namespace aksvd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void normalize_columns(DenseMatrix& a) {
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
    s = std::sqrt(s);
    if (s == 0.0) fail(ErrorCode::ZeroColumn, "approximate vector " + std::to_string(j) + " is zero");
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) /= s;
  }
}

bool use_shared(std::size_t rows, std::size_t cols, const NystromConfig& cfg) {
  return rows == cols && cfg.shared_indices.value_or(true);
}

std::size_t start_m(const NystromConfig& cfg) {
  return cfg.m != 0 ? cfg.m : std::max<std::size_t>(4 * cfg.r, 32);
}

std::size_t grow(std::size_t value, double factor, std::size_t cap) {
  const auto next = static_cast<std::size_t>(std::ceil(static_cast<double>(value) * factor));
  return std::min(cap, std::max(next, value + 1));
}

}  // namespace

std::size_t paired_row_count(std::size_t rows, std::size_t cols, std::size_t m, std::size_t r) {
  if (rows == cols) return m;
  const double ratio = static_cast<double>(rows) / static_cast<double>(cols);
  auto n = static_cast<std::size_t>(std::llround(static_cast<double>(m) * ratio));
  return std::clamp(n, std::min(r, rows), rows);
}

NystromBlocks subsample(const KernelSource& source, const NystromConfig& cfg) {
  const std::size_t rows = source.rows();
  const std::size_t cols = source.cols();
  const std::size_t m = start_m(cfg);
  if (m > cols) {
    fail(ErrorCode::SampleTooLarge, "m = " + std::to_string(m) + " exceeds " + std::to_string(cols));
  }
  const bool shared = use_shared(rows, cols, cfg);
  std::size_t n = cfg.n != 0 ? cfg.n : paired_row_count(rows, cols, m, cfg.r);
  if (shared && cfg.n != 0 && cfg.n != m) {
    fail(ErrorCode::ConfigError, "shared row/column sampling needs n = m");
  }
  if (n > rows) {
    fail(ErrorCode::SampleTooLarge, "n = " + std::to_string(n) + " exceeds " + std::to_string(rows));
  }
  std::vector<std::size_t> col_idx = sample_indices(cols, m, shared ? cfg.seed : cfg.seed + 1);
  std::vector<std::size_t> row_idx = shared ? col_idx : sample_indices(rows, n, cfg.seed);
  return source.sampled_blocks(row_idx, col_idx);
}

NystromResult asym_nystrom_from_blocks(const NystromBlocks& blocks, std::size_t rows,
                                       std::size_t cols, const NystromConfig& cfg) {
  const std::size_t n = blocks.row_indices.size();
  const std::size_t m = blocks.col_indices.size();
  if (cfg.r == 0 || cfg.r > std::min(n, m)) {
    fail(ErrorCode::RankTooLarge, "rank " + std::to_string(cfg.r) + " with n = " +
                                      std::to_string(n) + ", m = " + std::to_string(m));
  }
  // At full sampling G_nm is G itself and the result must be exact. A sketch
  // would have to span all of G, so a tight Lanczos solve is used instead.
  const bool full = n == rows && m == cols;
  SvdResult sub;
  try {
    if (full) {
      sub = svd_truncated(blocks.G_nm, cfg.r, {1e-13, 500, 0, cfg.seed, cfg.rank_tol});
    } else {
      sub = svd_randomized(blocks.G_nm, cfg.r, {cfg.oversample, cfg.power_iters, cfg.seed, cfg.rank_tol});
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroMatrix) throw;
    fail(ErrorCode::SubproblemRankDeficient, "sampled block is zero");
  }
  const std::size_t k = sub.rank();
  std::vector<double> inv(k);
  for (std::size_t s = 0; s < k; ++s) inv[s] = 1.0 / sub.S[s];

  NystromResult out;
  out.U_tilde = scale_columns(matmul(blocks.G_Nm, sub.V), inv);
  out.V_tilde = scale_columns(matmul_tn(blocks.G_nM, sub.U), inv);
  normalize_columns(out.U_tilde);
  normalize_columns(out.V_tilde);
  canonicalize_signs(out.U_tilde, out.V_tilde);
  const double scale = std::sqrt(static_cast<double>(rows) * static_cast<double>(cols) /
                                 (static_cast<double>(n) * static_cast<double>(m)));
  out.lambda_tilde.resize(k);
  for (std::size_t s = 0; s < k; ++s) out.lambda_tilde[s] = sub.S[s] * scale;
  out.row_indices = blocks.row_indices;
  out.col_indices = blocks.col_indices;
  out.rank_deficient = k < cfg.r;
  return out;
}

NystromResult asym_nystrom(const KernelSource& source, const NystromConfig& cfg) {
  const auto start = Clock::now();
  NystromBlocks blocks = subsample(source, cfg);
  NystromResult out = asym_nystrom_from_blocks(blocks, source.rows(), source.cols(), cfg);
  out.wall_time = seconds_since(start);
  return out;
}

SymNystromResult sym_nystrom_indices(const KernelSource& k, std::vector<std::size_t> indices,
                                     std::size_t r) {
  const std::size_t big = k.rows();
  if (k.cols() != big) fail(ErrorCode::ShapeMismatch, "symmetric Nyström needs a square source");
  const std::size_t n = indices.size();
  if (r == 0 || r > n) fail(ErrorCode::RankTooLarge, "rank " + std::to_string(r));
  const DenseMatrix k_Nn = k.block(all_indices(big), indices);
  const DenseMatrix k_nn = select_rows(k_Nn, indices);
  EigResult eig;
  try {
    eig = eig_sym_lanczos(k_nn, r);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroMatrix) throw;
    fail(ErrorCode::SubproblemRankDeficient, "sampled block is zero");
  }
  const double top = std::abs(eig.values.front());
  std::size_t keep = 0;
  while (keep < r && eig.values[keep] > kDefaultRankTol * top) ++keep;
  if (keep == 0) fail(ErrorCode::SubproblemRankDeficient, "no positive eigenvalue in sample");

  std::vector<double> inv(keep);
  const double root = std::sqrt(static_cast<double>(n) / static_cast<double>(big));
  for (std::size_t s = 0; s < keep; ++s) inv[s] = root / eig.values[s];
  SymNystromResult out;
  out.U_tilde = scale_columns(matmul(k_Nn, eig.vectors.leading_cols(keep)), inv);
  normalize_columns(out.U_tilde);
  DenseMatrix dummy;
  canonicalize_signs(out.U_tilde, dummy);
  out.lambda_tilde.resize(keep);
  for (std::size_t s = 0; s < keep; ++s) {
    out.lambda_tilde[s] = static_cast<double>(big) / static_cast<double>(n) * eig.values[s];
  }
  out.indices = std::move(indices);
  out.rank_deficient = keep < r;
  return out;
}

SymNystromResult sym_nystrom(const KernelSource& k, const NystromConfig& cfg) {
  const std::size_t n = cfg.n != 0 ? cfg.n : start_m(cfg);
  if (n > k.rows()) {
    fail(ErrorCode::SampleTooLarge, "n = " + std::to_string(n) + " exceeds " + std::to_string(k.rows()));
  }
  return sym_nystrom_indices(k, sample_indices(k.rows(), n, cfg.seed), cfg.r);
}

double eta_accuracy(const DenseMatrix& u_approx, const DenseMatrix& v_approx,
                    const SvdResult& reference, std::size_t r) {
  if (r == 0 || r > reference.rank()) {
    fail(ErrorCode::RankTooLarge, "reference holds " + std::to_string(reference.rank()) +
                                      " triplets, η requested for " + std::to_string(r));
  }
  auto side = [&](const DenseMatrix& approx, const DenseMatrix& ref) {
    if (approx.cols() > 0 && approx.rows() != ref.rows()) {
      fail(ErrorCode::ShapeMismatch, "approximate vectors have the wrong length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      double cosine = 0.0;
      if (i < approx.cols()) {
        double nrm = 0.0;
        double inner = 0.0;
        for (std::size_t k = 0; k < ref.rows(); ++k) {
          nrm += approx(k, i) * approx(k, i);
          inner += approx(k, i) * ref(k, i);
        }
        if (nrm == 0.0) fail(ErrorCode::ZeroColumn, "approximate vector " + std::to_string(i));
        cosine = std::abs(inner) / std::sqrt(nrm);
      }
      total += reference.S[i] * std::max(0.0, 1.0 - cosine);
    }
    return total / static_cast<double>(r);
  };
  return side(u_approx, reference.U) + side(v_approx, reference.V);
}

const char* to_string(BenchSolver solver) {
  switch (solver) {
    case BenchSolver::Tsvd: return "tsvd";
    case BenchSolver::Rsvd: return "rsvd";
    case BenchSolver::SymNystrom: return "sym_nystrom";
    case BenchSolver::AsymNystrom: return "asym_nystrom";
  }
  return "unknown";
}

BenchSolver parse_bench_solver(const std::string& name) {
  if (name == "tsvd") return BenchSolver::Tsvd;
  if (name == "rsvd") return BenchSolver::Rsvd;
  if (name == "sym_nystrom") return BenchSolver::SymNystrom;
  if (name == "asym_nystrom") return BenchSolver::AsymNystrom;
  fail(ErrorCode::ConfigError, "unknown solver '" + name + "'");
}

const char* to_string(SolveStatus status) {
  return status == SolveStatus::Ok ? "ok" : "tolerance_unreachable";
}

ToleranceOutcome solve_to_tolerance(const KernelSource& source, BenchSolver solver,
                                    double epsilon, const SvdResult& reference,
                                    const NystromConfig& cfg) {
  const std::size_t rows = source.rows();
  const std::size_t cols = source.cols();
  const std::size_t full = std::min(rows, cols);
  const std::size_t cap = cfg.m_max != 0 ? std::min(cfg.m_max, full) : full;
  const std::size_t r = cfg.r;
  if (r == 0 || r > full) fail(ErrorCode::RankTooLarge, "rank " + std::to_string(r));

  ToleranceOutcome out;
  out.solver = solver;

  auto finish_attempt = [&](double eta, double elapsed, std::size_t budget) {
    out.wall_time = elapsed;
    out.total_time += out.wall_time;
    out.eta = eta;
    out.m_used = budget;
    out.peak_entries = source.evaluated_entries();
    ++out.attempts;
    return eta <= epsilon;
  };

  switch (solver) {
    case BenchSolver::Tsvd: {
      source.reset_counters();
      const auto start = Clock::now();
      const DenseMatrix g = source.materialize();
      TruncatedSvdOptions opts;
      opts.tol = 1e-13;
      opts.seed = cfg.seed;
      const SvdResult svd = svd_truncated(g, r, opts);
      out.wall_time = seconds_since(start);
      const double eta = eta_accuracy(svd.U, svd.V, reference, r);
      out.total_time = out.wall_time;
      out.eta = eta;
      out.m_used = std::min(full, std::max(2 * r + 10, r + 20));
      out.peak_entries = source.evaluated_entries();
      out.attempts = 1;
      out.status = eta <= epsilon ? SolveStatus::Ok : SolveStatus::ToleranceUnreachable;
      return out;
    }
    case BenchSolver::Rsvd: {
      std::size_t p = std::min(cfg.oversample, full - r);
      for (;;) {
        source.reset_counters();
        const auto start = Clock::now();
        const DenseMatrix g = source.materialize();
        const SvdResult svd = svd_randomized(g, r, {p, cfg.power_iters, cfg.seed, cfg.rank_tol});
        const double elapsed = seconds_since(start);
        const double eta = eta_accuracy(svd.U, svd.V, reference, r);
        if (finish_attempt(eta, elapsed, p)) return out;
        if (r + p >= full) break;
        p = grow(std::max<std::size_t>(p, 1), cfg.m_growth, full - r);
      }
      break;
    }
    case BenchSolver::AsymNystrom:
    case BenchSolver::SymNystrom: {
      std::size_t m = std::min(start_m(cfg), cap);
      for (;;) {
        NystromConfig attempt = cfg;
        attempt.m = m;
        attempt.n = 0;
        source.reset_counters();
        const auto start = Clock::now();
        double eta = 0.0;
        double elapsed = 0.0;
        if (solver == BenchSolver::AsymNystrom) {
          const NystromResult res = asym_nystrom(source, attempt);
          elapsed = seconds_since(start);
          eta = eta_accuracy(res.U_tilde, res.V_tilde, reference, r);
        } else {
          const DenseMatrix g = source.materialize();
          const GramSource left(g, Side::Row);
          const GramSource right(g, Side::Column);
          const std::size_t n = paired_row_count(rows, cols, m, r);
          const SymNystromResult u = sym_nystrom_indices(left, sample_indices(rows, n, cfg.seed), r);
          const SymNystromResult v =
              sym_nystrom_indices(right, sample_indices(cols, m, cfg.seed + 1), r);
          elapsed = seconds_since(start);
          eta = eta_accuracy(u.U_tilde, v.U_tilde, reference, r);
        }
        if (finish_attempt(eta, elapsed, m)) return out;
        if (m >= cap) break;
        m = grow(m, cfg.m_growth, cap);
      }
      break;
    }
  }
  out.status = SolveStatus::ToleranceUnreachable;
  return out;
}

}  // namespace aksvd
