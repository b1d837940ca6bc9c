#include "aksvd/ksvd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aksvd/config.hpp"
#include "aksvd/error.hpp"
#include "aksvd/kernel_source.hpp"
#include "aksvd/matrix_io.hpp"

namespace aksvd {

namespace {

constexpr std::size_t kRowChunk = 256;

std::vector<double> inv_sqrt(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = 1.0 / std::sqrt(v[i]);
  return out;
}

// Subtracts estimated centering statistics from the sampled blocks in place.
CenteringStats center_blocks(NystromBlocks& b) {
  const std::size_t rows = b.G_Nm.rows();
  const std::size_t cols = b.G_nM.cols();
  CenteringStats s;
  s.row_means.assign(rows, 0.0);
  s.col_means.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (double v : b.G_Nm.row(i)) sum += v;
    s.row_means[i] = sum / static_cast<double>(b.G_Nm.cols());
  }
  for (std::size_t a = 0; a < b.G_nM.rows(); ++a) {
    const auto r = b.G_nM.row(a);
    for (std::size_t j = 0; j < cols; ++j) s.col_means[j] += r[j];
  }
  for (double& c : s.col_means) c /= static_cast<double>(b.G_nM.rows());
  double g = 0.0;
  for (double v : b.G_nm.data()) g += v;
  s.grand_mean = g / static_cast<double>(b.G_nm.size());

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < b.col_indices.size(); ++c) {
      b.G_Nm(i, c) -= s.row_means[i] + s.col_means[b.col_indices[c]] - s.grand_mean;
    }
  }
  for (std::size_t a = 0; a < b.row_indices.size(); ++a) {
    const double rm = s.row_means[b.row_indices[a]];
    for (std::size_t j = 0; j < cols; ++j) b.G_nM(a, j) -= rm + s.col_means[j] - s.grand_mean;
    for (std::size_t c = 0; c < b.col_indices.size(); ++c) {
      b.G_nm(a, c) -= rm + s.col_means[b.col_indices[c]] - s.grand_mean;
    }
  }
  return s;
}

std::vector<double> compute_log_den(const KsvdModel& model) {
  const DataSources& t = *model.train;
  std::vector<double> out;
  out.reserve(t.X.rows());
  for (std::size_t start = 0; start < t.X.rows(); start += kRowChunk) {
    const std::size_t stop = std::min(t.X.rows(), start + kRowChunk);
    std::vector<std::size_t> idx(stop - start);
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = start + k;
    const std::vector<double> ld =
        sne_log_denominators(squared_distances(select_rows(t.X, idx), t.Z), model.kernel.gamma);
    out.insert(out.end(), ld.begin(), ld.end());
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

std::vector<double> split_doubles(const std::string& line, const std::string& where) {
  std::vector<double> out;
  if (line.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(parse_double(
        std::string_view(line).substr(start, comma == std::string::npos ? line.npos : comma - start),
        where));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

const char* to_string(SolverKind solver) {
  switch (solver) {
    case SolverKind::Exact: return "exact";
    case SolverKind::Truncated: return "truncated";
    case SolverKind::Randomized: return "randomized";
    case SolverKind::Nystrom: return "nystrom";
  }
  return "unknown";
}

SolverKind parse_solver(const std::string& name) {
  if (name == "exact") return SolverKind::Exact;
  if (name == "truncated" || name == "tsvd") return SolverKind::Truncated;
  if (name == "randomized" || name == "rsvd") return SolverKind::Randomized;
  if (name == "nystrom") return SolverKind::Nystrom;
  fail(ErrorCode::ConfigError, "unknown solver '" + name + "'");
}

KsvdModel fit(const DenseMatrix& a, KernelSpec kernel, const CompatOptions& compat,
              const FitOptions& opts) {
  if (!kernel.compat) kernel.compat = make_compat(a, compat);
  return fit_sources(build_sources(a), kernel, opts);
}

KsvdModel fit_sources(const DataSources& sources, const KernelSpec& kernel, const FitOptions& opts) {
  auto conf = std::make_shared<const DataSources>(conform_sources(kernel, sources));
  const std::size_t rows = conf->X.rows();
  const std::size_t cols = conf->Z.rows();
  const std::size_t r = opts.rank;
  if (r == 0 || r > std::min(rows, cols)) {
    fail(ErrorCode::RankTooLarge, "rank " + std::to_string(r) + " for a " + std::to_string(rows) +
                                      "x" + std::to_string(cols) + " kernel matrix");
  }

  KsvdModel model;
  model.kernel = kernel;
  model.centered = opts.center;
  model.solver = opts.solver;
  model.train = conf;

  SvdResult svd;
  try {
    if (opts.solver == SolverKind::Nystrom) {
      const LazyKernelSource source(kernel.family, kernel.gamma, *conf, opts.full_denominator);
      NystromConfig cfg = opts.nystrom;
      cfg.r = r;
      if (cfg.m == 0) cfg.m = std::min(std::max<std::size_t>(4 * r, 32), std::min(rows, cols));
      NystromBlocks blocks = subsample(source, cfg);
      if (opts.center) model.centering = center_blocks(blocks);
      NystromResult res = asym_nystrom_from_blocks(blocks, rows, cols, cfg);
      if (res.rank_deficient) {
        model.warnings.push_back("sampled block has numerical rank " +
                                 std::to_string(res.lambda_tilde.size()) + " < " +
                                 std::to_string(r));
      }
      svd = SvdResult{std::move(res.U_tilde), std::move(res.lambda_tilde), std::move(res.V_tilde)};
    } else {
      DenseMatrix g;
      if (kernel.family == KernelFamily::SNE) {
        g = squared_distances(conf->X, conf->Z);
        model.sne_log_den = sne_log_denominators(g, kernel.gamma);
        const double inv = 1.0 / (kernel.gamma * kernel.gamma);
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < rows; ++i) {
          for (double& v : g.row(i)) v = std::exp(-v * inv - model.sne_log_den[i]);
        }
      } else {
        g = assemble_kernel(kernel.family, kernel.gamma, conf->X, conf->Z);
      }
      if (opts.center) {
        Centered c = center(g);
        g = std::move(c.G);
        model.centering = std::move(c.stats);
      }
      switch (opts.solver) {
        case SolverKind::Exact:
          svd = svd_exact(g, opts.rank_tol);
          break;
        case SolverKind::Truncated: {
          TruncatedSvdOptions t = opts.truncated;
          t.rank_tol = opts.rank_tol;
          svd = svd_truncated(g, r, t);
          break;
        }
        case SolverKind::Randomized: {
          RandomizedSvdOptions t = opts.randomized;
          t.rank_tol = opts.rank_tol;
          svd = svd_randomized(g, r, t);
          break;
        }
        case SolverKind::Nystrom:
          break;
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroMatrix) throw;
    fail(ErrorCode::DegenerateKernel, "kernel matrix is zero after centering");
  }

  std::size_t k = std::min(r, svd.rank());
  if (k == 0) fail(ErrorCode::DegenerateKernel, "kernel matrix has numerical rank 0");
  if (k < r) {
    model.warnings.push_back("kernel matrix has numerical rank " + std::to_string(k) +
                             "; keeping " + std::to_string(k) + " of " + std::to_string(r) +
                             " requested components");
  }
  model.lambda.assign(svd.S.begin(), svd.S.begin() + static_cast<std::ptrdiff_t>(k));
  model.U = svd.U.leading_cols(k);
  model.V = svd.V.leading_cols(k);
  const std::vector<double> scale = inv_sqrt(model.lambda);
  model.B_phi = scale_columns(model.U, scale);
  model.B_psi = scale_columns(model.V, scale);
  return model;
}

DenseMatrix training_kernel(const KsvdModel& model) {
  if (!model.train) fail(ErrorCode::ConfigError, "model has no training data attached");
  DenseMatrix g = assemble_kernel(model.kernel.family, model.kernel.gamma, model.train->X,
                                  model.train->Z);
  if (!model.centered) return g;
  const CenteringStats& s = model.centering;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      g(i, j) -= s.row_means[i] + s.col_means[j] - s.grand_mean;
    }
  }
  return g;
}

KktResiduals verify_kkt(const DenseMatrix& b_phi, const DenseMatrix& b_psi,
                        std::span<const double> lambda, const DenseMatrix& g) {
  if (b_phi.rows() != g.rows() || b_psi.rows() != g.cols() || b_phi.cols() != b_psi.cols() ||
      b_phi.cols() != lambda.size()) {
    fail(ErrorCode::ShapeMismatch, "model and kernel matrix do not conform");
  }
  const DenseMatrix g_bpsi = matmul(g, b_psi);
  const DenseMatrix gt_bphi = matmul_tn(g, b_phi);
  const DenseMatrix lhs_psi = matmul_tn(g, g_bpsi);
  const DenseMatrix rhs_psi = scale_columns(gt_bphi, lambda);
  const DenseMatrix lhs_phi = matmul(g, gt_bphi);
  const DenseMatrix rhs_phi = scale_columns(g_bpsi, lambda);

  KktResiduals out;
  out.residual_psi =
      frobenius_norm(lhs_psi - rhs_psi) / std::max(1.0, frobenius_norm(lhs_psi));
  out.residual_phi =
      frobenius_norm(lhs_phi - rhs_phi) / std::max(1.0, frobenius_norm(lhs_phi));
  const DenseMatrix gram = matmul_tn(b_phi, g_bpsi);
  out.ortho_gap = max_abs(gram - DenseMatrix::identity(gram.rows()));
  return out;
}

KktResiduals verify_kkt(const KsvdModel& model, const DenseMatrix& g) {
  return verify_kkt(model.B_phi, model.B_psi, model.lambda, g);
}

double objective(const DenseMatrix& b_phi, const DenseMatrix& b_psi, const DenseMatrix& g) {
  if (b_phi.rows() != g.rows() || b_psi.rows() != g.cols()) {
    fail(ErrorCode::ShapeMismatch, "model and kernel matrix do not conform");
  }
  const double a = frobenius_norm(matmul_tn(g, b_phi));
  const double b = frobenius_norm(matmul(g, b_psi));
  return 0.5 * a * a + 0.5 * b * b;
}

double objective(const KsvdModel& model, const DenseMatrix& g) {
  return objective(model.B_phi, model.B_psi, g);
}

DenseMatrix transform(const KsvdModel& model, Side side, std::size_t r) {
  if (r == 0 || r > model.rank()) {
    fail(ErrorCode::RankTooLarge, "requested " + std::to_string(r) + " features from a rank-" +
                                      std::to_string(model.rank()) + " model");
  }
  return (side == Side::Row ? model.U : model.V).leading_cols(r);
}

std::vector<double> transform_oos(const KsvdModel& model, std::span<const double> sample,
                                  Side side) {
  if (!model.train) fail(ErrorCode::ConfigError, "model has no training data attached");
  const DataSources& t = *model.train;
  const CompatMatrix* c = model.kernel.compat.get();
  const bool project = c != nullptr && !c->C.empty() &&
                       (c->side == CompatSide::X) == (side == Side::Row);
  const std::size_t expected = project ? c->C.rows() : t.X.cols();
  if (sample.size() != expected) {
    fail(ErrorCode::DimensionMismatch, "sample has length " + std::to_string(sample.size()) +
                                           ", expected " + std::to_string(expected));
  }
  const std::vector<double> feat =
      project ? matvec_t(c->C, sample) : std::vector<double>(sample.begin(), sample.end());

  std::vector<double> k;
  if (side == Side::Row) {
    k = kernel_row(model.kernel.family, model.kernel.gamma, feat, t.Z);
  } else if (model.kernel.family == KernelFamily::SNE) {
    if (model.sne_log_den.empty()) model.sne_log_den = compute_log_den(model);
    const DenseMatrix one(1, feat.size(), feat);
    const DenseMatrix d = squared_distances(t.X, one);
    const double inv = 1.0 / (model.kernel.gamma * model.kernel.gamma);
    k.resize(t.X.rows());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(-d(i, 0) * inv - model.sne_log_den[i]);
  } else {
    k = kernel_row(model.kernel.family, model.kernel.gamma, feat, t.X);
  }
  if (model.centered) k = center_oos(k, model.centering, side);

  const DenseMatrix& basis = side == Side::Row ? model.V : model.U;
  std::vector<double> scores = matvec_t(basis, k);
  for (std::size_t s = 0; s < scores.size(); ++s) scores[s] /= model.lambda[s];
  return scores;
}

void save_model(const KsvdModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_matrix_csv(dir / "B_phi.csv", model.B_phi);
  write_matrix_csv(dir / "B_psi.csv", model.B_psi);
  write_vector_csv(dir / "lambda.csv", model.lambda);
  write_text(dir / "centering.csv", join(model.centering.row_means) + "\n" +
                                        join(model.centering.col_means) + "\n" +
                                        format_double(model.centering.grand_mean) + "\n");
  if (!model.sne_log_den.empty()) write_vector_csv(dir / "sne_log_den.csv", model.sne_log_den);

  Config cfg;
  cfg.set("kernel.family", to_string(model.kernel.family));
  cfg.set("kernel.gamma", format_double(model.kernel.gamma));
  cfg.set("ksvd.center", model.centered ? "true" : "false");
  cfg.set("ksvd.solver", to_string(model.solver));
  cfg.set("rank", std::to_string(model.rank()));
  const CompatMatrix* c = model.kernel.compat.get();
  cfg.set("compat.mode", c ? to_string(c->mode) : "identity");
  if (c) {
    cfg.set("compat.side", c->side == CompatSide::X ? "x" : "z");
    if (c->seed) cfg.set("compat.seed", std::to_string(*c->seed));
    write_matrix_csv(dir / "C.csv", c->C);
  }
  write_text(dir / "config.txt", cfg.dump());
}

KsvdModel load_model(const std::filesystem::path& dir) {
  const Config cfg = Config::load(dir / "config.txt");
  KsvdModel model;
  model.kernel.family = parse_kernel_family(cfg.get("kernel.family", "rbf"));
  model.kernel.gamma = cfg.get_double("kernel.gamma", 1.0);
  model.centered = cfg.get_bool("ksvd.center", true);
  model.solver = parse_solver(cfg.get("ksvd.solver", "exact"));
  const CompatMode mode = parse_compat_mode(cfg.get("compat.mode", "identity"));
  if (mode != CompatMode::Identity || std::filesystem::exists(dir / "C.csv")) {
    CompatMatrix c;
    c.mode = mode;
    c.side = cfg.get("compat.side", "x") == "z" ? CompatSide::Z : CompatSide::X;
    if (cfg.has("compat.seed")) c.seed = cfg.get_u64("compat.seed", 0);
    c.C = read_matrix_csv(dir / "C.csv");
    model.kernel.compat = std::make_shared<const CompatMatrix>(std::move(c));
  }
  model.B_phi = read_matrix_csv(dir / "B_phi.csv");
  model.B_psi = read_matrix_csv(dir / "B_psi.csv");
  model.lambda = read_vector_csv(dir / "lambda.csv");
  if (model.B_phi.cols() != model.lambda.size() || model.B_psi.cols() != model.lambda.size()) {
    fail(ErrorCode::ShapeMismatch, "model files in " + dir.string() + " disagree on rank");
  }
  {
    std::ifstream in(dir / "centering.csv", std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read centering.csv");
    std::string rows_line, cols_line, grand_line;
    std::getline(in, rows_line);
    std::getline(in, cols_line);
    std::getline(in, grand_line);
    const std::string where = (dir / "centering.csv").string();
    model.centering.row_means = split_doubles(rows_line, where);
    model.centering.col_means = split_doubles(cols_line, where);
    model.centering.grand_mean = grand_line.empty() ? 0.0 : parse_double(grand_line, where);
  }
  if (std::filesystem::exists(dir / "sne_log_den.csv")) {
    model.sne_log_den = read_vector_csv(dir / "sne_log_den.csv");
  }
  std::vector<double> root(model.lambda.size());
  for (std::size_t s = 0; s < root.size(); ++s) root[s] = std::sqrt(model.lambda[s]);
  model.U = scale_columns(model.B_phi, root);
  model.V = scale_columns(model.B_psi, root);
  return model;
}

void attach_training(KsvdModel& model, const DenseMatrix& a) {
  DataSources conf = conform_sources(model.kernel, build_sources(a));
  if (conf.X.rows() != model.B_phi.rows() || conf.Z.rows() != model.B_psi.rows()) {
    fail(ErrorCode::ShapeMismatch, "training matrix does not match the model");
  }
  model.train = std::make_shared<const DataSources>(std::move(conf));
}

}  // namespace aksvd
