#include "aksvd/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aksvd/error.hpp"

namespace aksvd {

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr std::size_t kJacobiMaxSweeps = 30;

void flip_column(DenseMatrix& m, std::size_t j) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
}

void canonicalize_columns(DenseMatrix& u) {
  DenseMatrix dummy;
  for (std::size_t s = 0; s < u.cols(); ++s) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, s)) > best_abs) {
        best_abs = std::abs(u(i, s));
        best = i;
      }
    }
    if (u.rows() > 0 && u(best, s) < 0.0) flip_column(u, s);
  }
}

// Rotates rows i and j of `w` (and of `vt`) so that they become orthogonal.
// Returns true when a rotation was applied.
bool jacobi_rotate(DenseMatrix& w, DenseMatrix& vt, std::size_t i, std::size_t j) {
  auto wi = w.row(i);
  auto wj = w.row(j);
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  for (std::size_t k = 0; k < wi.size(); ++k) {
    alpha += wi[k] * wi[k];
    beta += wj[k] * wj[k];
    gamma += wi[k] * wj[k];
  }
  if (alpha == 0.0 || beta == 0.0) return false;
  if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) return false;
  const double zeta = (beta - alpha) / (2.0 * gamma);
  const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = c * t;
  for (std::size_t k = 0; k < wi.size(); ++k) {
    const double a = wi[k];
    const double b = wj[k];
    wi[k] = c * a - s * b;
    wj[k] = s * a + c * b;
  }
  auto vi = vt.row(i);
  auto vj = vt.row(j);
  for (std::size_t k = 0; k < vi.size(); ++k) {
    const double a = vi[k];
    const double b = vj[k];
    vi[k] = c * a - s * b;
    vj[k] = s * a + c * b;
  }
  return true;
}

// One-sided Jacobi on the rows of `w` (the columns of the matrix being
// factorized). Round-robin ordering: every round is a perfect matching.
void jacobi_sweeps(DenseMatrix& w, DenseMatrix& vt) {
  const std::size_t n = w.rows();
  if (n < 2) return;
  const std::size_t players = n + (n % 2);
  std::vector<std::size_t> ring(players);
  std::iota(ring.begin(), ring.end(), std::size_t{0});
  const std::size_t half = players / 2;
  std::vector<std::pair<std::size_t, std::size_t>> pairs(half);

  for (std::size_t sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t round = 0; round + 1 < players; ++round) {
      for (std::size_t k = 0; k < half; ++k) {
        std::size_t a = ring[k];
        std::size_t b = ring[players - 1 - k];
        if (a > b) std::swap(a, b);
        pairs[k] = {a, b};
      }
      bool round_rotated = false;
#pragma omp parallel for schedule(static) reduction(|| : round_rotated)
      for (std::size_t k = 0; k < half; ++k) {
        const auto [a, b] = pairs[k];
        if (b >= n) continue;  // bye for odd n
        if (jacobi_rotate(w, vt, a, b)) round_rotated = true;
      }
      rotated = rotated || round_rotated;
      // Circle method: keep ring[0] fixed, rotate the rest.
      std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
    }
    if (!rotated) break;
  }
}

void require_nonzero(const DenseMatrix& a, const char* what) {
  if (a.empty() || frobenius_norm(a) == 0.0) fail(ErrorCode::ZeroMatrix, what);
}

// Removes from `w` its components along rows [0, count) of `basis` (classical
// Gram–Schmidt applied twice). Coefficients are accumulated into `coeffs`.
void orthogonalize_against(std::span<double> w, const DenseMatrix& basis, std::size_t count,
                           std::span<double> coeffs) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < count; ++i) {
      const double c = dot(basis.row(i), w);
      if (!coeffs.empty()) coeffs[i] += c;
      const auto bi = basis.row(i);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= c * bi[k];
    }
  }
}

// A unit vector orthogonal to rows [0, count) of `basis`.
std::vector<double> random_orthogonal(const DenseMatrix& basis, std::size_t count,
                                      std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    DenseMatrix g = gaussian_matrix(1, basis.cols(), seed * 7919 + attempt);
    std::vector<double> w(g.data().begin(), g.data().end());
    orthogonalize_against(w, basis, count, {});
    const double nrm = norm2(w);
    if (nrm > 1e-8) {
      for (double& x : w) x /= nrm;
      return w;
    }
  }
  fail(ErrorCode::DegenerateKernel, "could not extend orthonormal basis");
}

void set_row(DenseMatrix& m, std::size_t i, std::span<const double> v) {
  std::copy(v.begin(), v.end(), m.row(i).begin());
}

// rows [0, count) of `basis` combined by the leading `keep` columns of `coeff`:
// out.row(s) = Σ_k coeff(k, s) · basis.row(k).
DenseMatrix combine_rows(const DenseMatrix& coeff, std::size_t keep, const DenseMatrix& basis,
                         std::size_t count) {
  DenseMatrix out(keep, basis.cols());
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < keep; ++s) {
    auto dst = out.row(s);
    for (std::size_t k = 0; k < count; ++k) {
      const double c = coeff(k, s);
      if (c == 0.0) continue;
      const auto src = basis.row(k);
      for (std::size_t t = 0; t < dst.size(); ++t) dst[t] += c * src[t];
    }
  }
  return out;
}

void truncate_rank(SvdResult& svd, std::size_t r, double rank_tol) {
  std::size_t keep = std::min(r, svd.S.size());
  if (!svd.S.empty()) {
    const double cutoff = rank_tol * svd.S.front();
    while (keep > 0 && !(svd.S[keep - 1] > cutoff)) --keep;
  }
  if (keep < svd.S.size()) {
    svd.S.resize(keep);
    svd.U = svd.U.leading_cols(keep);
    svd.V = svd.V.leading_cols(keep);
  }
}

}  // namespace

void canonicalize_signs(DenseMatrix& u, DenseMatrix& v) {
  for (std::size_t s = 0; s < u.cols(); ++s) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, s)) > best_abs) {
        best_abs = std::abs(u(i, s));
        best = i;
      }
    }
    if (u.rows() > 0 && u(best, s) < 0.0) {
      flip_column(u, s);
      if (s < v.cols()) flip_column(v, s);
    }
  }
}

void canonicalize_signs(SvdResult& svd) { canonicalize_signs(svd.U, svd.V); }

SvdResult svd_exact(const DenseMatrix& a, double tol) {
  require_finite(a, "svd_exact input");
  require_nonzero(a, "svd_exact input");
  if (a.rows() < a.cols()) {
    SvdResult t = svd_exact(transpose(a), tol);
    SvdResult out{std::move(t.V), std::move(t.S), std::move(t.U)};
    canonicalize_signs(out);
    return out;
  }

  const std::size_t n = a.cols();
  const bool preconditioned = a.rows() > n;
  DenseMatrix q;
  DenseMatrix w;
  if (preconditioned) {
    QrResult qr = qr_thin(a);
    q = std::move(qr.Q);
    w = transpose(qr.R);
  } else {
    w = transpose(a);
  }
  DenseMatrix vt = DenseMatrix::identity(n);
  jacobi_sweeps(w, vt);

  std::vector<double> sigma(n);
  for (std::size_t k = 0; k < n; ++k) sigma[k] = norm2(w.row(k));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double cutoff = tol * sigma[order.front()];
  std::size_t r = 0;
  while (r < n && sigma[order[r]] > cutoff && sigma[order[r]] > 0.0) ++r;

  const std::size_t len = w.cols();
  DenseMatrix u(len, r);
  DenseMatrix v(n, r);
  std::vector<double> s(r);
  for (std::size_t c = 0; c < r; ++c) {
    const std::size_t k = order[c];
    s[c] = sigma[k];
    for (std::size_t i = 0; i < len; ++i) u(i, c) = w(k, i) / sigma[k];
    for (std::size_t i = 0; i < n; ++i) v(i, c) = vt(k, i);
  }
  if (preconditioned) u = matmul(q, u);

  SvdResult out{std::move(u), std::move(s), std::move(v)};
  canonicalize_signs(out);
  return out;
}

SvdResult svd_randomized(const DenseMatrix& a, std::size_t r, const RandomizedSvdOptions& opts) {
  require_finite(a, "svd_randomized input");
  const std::size_t p = std::min(a.rows(), a.cols());
  if (r == 0 || r > p) {
    fail(ErrorCode::RankTooLarge, "rank " + std::to_string(r) + " for " +
                                      std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  require_nonzero(a, "svd_randomized input");
  const std::size_t width = std::min(r + opts.oversample, p);
  const DenseMatrix at = transpose(a);

  DenseMatrix q = orthonormalize(matmul(a, gaussian_matrix(a.cols(), width, opts.seed)));
  for (std::size_t it = 0; it < opts.power_iters; ++it) {
    DenseMatrix z = orthonormalize(matmul(at, q));
    q = orthonormalize(matmul(a, z));
  }
  const DenseMatrix b = matmul(transpose(q), a);  // width × cols
  SvdResult small = svd_exact(b, 0.0);
  SvdResult out{matmul(q, small.U), std::move(small.S), std::move(small.V)};
  truncate_rank(out, r, opts.rank_tol);
  canonicalize_signs(out);
  return out;
}

SvdResult svd_truncated(const DenseMatrix& a, std::size_t r, const TruncatedSvdOptions& opts) {
  require_finite(a, "svd_truncated input");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t p = std::min(m, n);
  if (r == 0 || r > p) {
    fail(ErrorCode::RankTooLarge,
         "rank " + std::to_string(r) + " for " + std::to_string(m) + "x" + std::to_string(n));
  }
  require_nonzero(a, "svd_truncated input");
  const double anorm = frobenius_norm(a);
  const double tiny = 1e-13 * anorm;

  std::size_t kdim = opts.krylov_dim != 0 ? opts.krylov_dim : std::max(2 * r + 10, r + 20);
  kdim = std::max(std::min(kdim, p), r);
  if (kdim >= p) {
    // The Krylov space would cover the short side; a dense solve is exact and cheaper.
    SvdResult out = svd_exact(a, 0.0);
    truncate_rank(out, r, opts.rank_tol);
    return out;
  }

  DenseMatrix vb(kdim + 1, n);  // right Lanczos vectors, one per row
  DenseMatrix ub(kdim, m);      // left Lanczos vectors
  DenseMatrix bmat(kdim, kdim);
  {
    DenseMatrix g = gaussian_matrix(1, n, opts.seed);
    std::vector<double> v0(g.data().begin(), g.data().end());
    const double nrm = norm2(v0);
    for (double& x : v0) x /= nrm;
    set_row(vb, 0, v0);
  }
  std::uint64_t breakdown_seed = opts.seed + 1;
  std::size_t start = 0;
  double beta = 0.0;
  std::vector<double> coeffs(kdim + 1);

  for (std::size_t iter = 0;; ++iter) {
    for (std::size_t j = start; j < kdim; ++j) {
      std::vector<double> w = matvec(a, vb.row(j));
      std::fill(coeffs.begin(), coeffs.end(), 0.0);
      orthogonalize_against(w, ub, j, coeffs);
      double alpha = norm2(w);
      if (alpha <= tiny) {
        w = random_orthogonal(ub, j, breakdown_seed++);
        alpha = 0.0;
      } else {
        for (double& x : w) x /= alpha;
      }
      for (std::size_t i = 0; i < j; ++i) bmat(i, j) = coeffs[i];
      bmat(j, j) = alpha;
      set_row(ub, j, w);

      std::vector<double> f = matvec_t(a, ub.row(j));
      orthogonalize_against(f, vb, j + 1, {});
      beta = norm2(f);
      if (beta <= tiny) {
        beta = 0.0;
        f = (j + 1 < n) ? random_orthogonal(vb, j + 1, breakdown_seed++) : std::vector<double>(n);
      } else {
        for (double& x : f) x /= beta;
      }
      set_row(vb, j + 1, f);
    }

    SvdResult small = svd_exact(bmat, 0.0);
    const std::size_t found = small.S.size();
    const std::size_t want = std::min(r, found);
    bool converged = true;
    for (std::size_t i = 0; i < want; ++i) {
      if (std::abs(beta * small.U(kdim - 1, i)) > opts.tol * small.S.front()) converged = false;
    }
    if (converged || iter + 1 >= opts.max_iters) {
      DenseMatrix u_rows = combine_rows(small.U, want, ub, kdim);
      DenseMatrix v_rows = combine_rows(small.V, want, vb, kdim);
      SvdResult out{transpose(u_rows),
                    std::vector<double>(small.S.begin(), small.S.begin() + static_cast<std::ptrdiff_t>(want)),
                    transpose(v_rows)};
      truncate_rank(out, r, opts.rank_tol);
      canonicalize_signs(out);
      return out;
    }

    std::size_t keep = std::max(r, (kdim + r) / 2);
    keep = std::min({keep, found, kdim - 1});
    DenseMatrix new_u = combine_rows(small.U, keep, ub, kdim);
    DenseMatrix new_v = combine_rows(small.V, keep, vb, kdim);
    std::vector<double> residual(vb.row(kdim).begin(), vb.row(kdim).end());
    ub = DenseMatrix(kdim, m);
    vb = DenseMatrix(kdim + 1, n);
    for (std::size_t i = 0; i < keep; ++i) {
      set_row(ub, i, new_u.row(i));
      set_row(vb, i, new_v.row(i));
    }
    if (beta == 0.0) residual = random_orthogonal(vb, keep, breakdown_seed++);
    set_row(vb, keep, residual);
    bmat = DenseMatrix(kdim, kdim);
    for (std::size_t i = 0; i < keep; ++i) bmat(i, i) = small.S[i];
    start = keep;
  }
}

EigResult eig_sym_jacobi(const DenseMatrix& k, double tol, std::size_t max_sweeps) {
  const std::size_t n = k.rows();
  if (k.cols() != n) fail(ErrorCode::ShapeMismatch, "eig_sym_jacobi needs a square matrix");
  require_finite(k, "eig_sym_jacobi input");
  DenseMatrix a = k;
  DenseMatrix v = DenseMatrix::identity(n);
  const double scale = frobenius_norm(a);
  for (std::size_t sweep = 0; sweep < max_sweeps && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  EigResult out{DenseMatrix(n, n), std::vector<double>(n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, c) = v(i, order[c]);
  }
  canonicalize_columns(out.vectors);
  return out;
}

EigResult eig_sym_lanczos(const DenseMatrix& k, std::size_t r, const LanczosOptions& opts) {
  const std::size_t n = k.rows();
  if (k.cols() != n) fail(ErrorCode::ShapeMismatch, "eig_sym_lanczos needs a square matrix");
  require_finite(k, "eig_sym_lanczos input");
  if (r == 0 || r > n) fail(ErrorCode::RankTooLarge, "rank " + std::to_string(r));
  require_nonzero(k, "eig_sym_lanczos input");
  const double tiny = 1e-13 * frobenius_norm(k);

  std::size_t kdim = opts.krylov_dim != 0 ? opts.krylov_dim : std::max(2 * r + 10, r + 20);
  kdim = std::max(std::min(kdim, n), r);

  DenseMatrix qb(kdim + 1, n);
  DenseMatrix tmat(kdim, kdim);
  {
    DenseMatrix g = gaussian_matrix(1, n, opts.seed);
    std::vector<double> q0(g.data().begin(), g.data().end());
    const double nrm = norm2(q0);
    for (double& x : q0) x /= nrm;
    set_row(qb, 0, q0);
  }
  std::uint64_t breakdown_seed = opts.seed + 1;
  std::size_t start = 0;
  double beta = 0.0;
  std::vector<double> coeffs(kdim + 1);

  for (std::size_t iter = 0;; ++iter) {
    for (std::size_t j = start; j < kdim; ++j) {
      std::vector<double> w = matvec(k, qb.row(j));
      std::fill(coeffs.begin(), coeffs.end(), 0.0);
      orthogonalize_against(w, qb, j + 1, coeffs);
      for (std::size_t i = 0; i <= j; ++i) {
        tmat(i, j) = coeffs[i];
        tmat(j, i) = coeffs[i];
      }
      beta = norm2(w);
      if (beta <= tiny) {
        beta = 0.0;
        w = (j + 1 < n) ? random_orthogonal(qb, j + 1, breakdown_seed++) : std::vector<double>(n);
      } else {
        for (double& x : w) x /= beta;
      }
      set_row(qb, j + 1, w);
    }

    EigResult small = eig_sym_jacobi(tmat);
    double scale = 0.0;
    for (double v : small.values) scale = std::max(scale, std::abs(v));
    bool converged = true;
    for (std::size_t i = 0; i < r; ++i) {
      if (std::abs(beta * small.vectors(kdim - 1, i)) > opts.tol * scale) converged = false;
    }
    if (converged || iter + 1 >= opts.max_iters || kdim >= n) {
      DenseMatrix rows = combine_rows(small.vectors, r, qb, kdim);
      EigResult out{transpose(rows),
                    std::vector<double>(small.values.begin(),
                                        small.values.begin() + static_cast<std::ptrdiff_t>(r))};
      canonicalize_columns(out.vectors);
      return out;
    }

    std::size_t keep = std::min(std::max(r, (kdim + r) / 2), kdim - 1);
    DenseMatrix kept = combine_rows(small.vectors, keep, qb, kdim);
    std::vector<double> residual(qb.row(kdim).begin(), qb.row(kdim).end());
    qb = DenseMatrix(kdim + 1, n);
    for (std::size_t i = 0; i < keep; ++i) set_row(qb, i, kept.row(i));
    if (beta == 0.0) residual = random_orthogonal(qb, keep, breakdown_seed++);
    set_row(qb, keep, residual);
    tmat = DenseMatrix(kdim, kdim);
    for (std::size_t i = 0; i < keep; ++i) tmat(i, i) = small.values[i];
    start = keep;
  }
}

DenseMatrix pseudo_inverse(const DenseMatrix& a, double tol) {
  const SvdResult svd = svd_exact(a, tol);
  std::vector<double> inv(svd.S.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / svd.S[i];
  return matmul(scale_columns(svd.V, inv), transpose(svd.U));
}

}  // namespace aksvd
