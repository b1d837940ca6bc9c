#include "aksvd/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "aksvd/compat.hpp"
#include "aksvd/config.hpp"
#include "aksvd/data_io.hpp"
#include "aksvd/error.hpp"
#include "aksvd/eval.hpp"
#include "aksvd/kernel_source.hpp"
#include "aksvd/kernels.hpp"
#include "aksvd/ksvd.hpp"
#include "aksvd/matrix_io.hpp"
#include "aksvd/nystrom.hpp"

namespace aksvd {

namespace fs = std::filesystem;

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "data.path", "data.format", "data.labels", "data.synth", "data.n", "data.directed",
      "data.node_count", "data.target", "data.zscore", "data.p_in", "data.p_ab", "data.p_ba",
      "data.p_dag",
      "kernel.family", "kernel.gamma", "kernel.gamma_k",
      "compat.mode", "compat.seed", "compat.target_dim", "compat.pca_center",
      "ksvd.center", "rank", "solver", "solver.tol", "solver.max_iters", "solver.oversample",
      "solver.power_iters",
      "nystrom.n", "nystrom.m", "nystrom.epsilon", "nystrom.seed", "nystrom.growth",
      "nystrom.m_max", "nystrom.full_denominator", "nystrom.oversample", "nystrom.power_iters",
      "task", "method", "features.sides",
      "split.seed", "split.test_fraction", "cv.folds", "cv.grid", "cv.seed", "lssvm.gamma",
      "bench.solvers", "bench.epsilons", "bench.repeats", "bench.warmup", "bench.gamma_grid",
      "bench.reference",
      "threads", "seed", "out"};
  return keys;
}

namespace {

using Clock = std::chrono::steady_clock;

enum class Method { Ksvd, Kpca, Svd, Pca };

Method parse_method(const std::string& name) {
  if (name == "ksvd") return Method::Ksvd;
  if (name == "kpca") return Method::Kpca;
  if (name == "svd") return Method::Svd;
  if (name == "pca") return Method::Pca;
  fail(ErrorCode::ConfigError, "unknown method '" + name + "' (expected ksvd, kpca, svd, pca)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Ksvd: return "ksvd";
    case Method::Kpca: return "kpca";
    case Method::Svd: return "svd";
    case Method::Pca: return "pca";
  }
  return "unknown";
}

/// Everything a run needs, validated up front so bad input fails before any numerics.
struct Settings {
  Config config;
  fs::path out;
  std::uint64_t seed = 0;
  int threads = 0;

  std::string format;
  Method method = Method::Ksvd;
  KernelFamily family = KernelFamily::SNE;
  std::optional<double> gamma;
  double gamma_k = 1.0;
  CompatOptions compat;
  std::optional<std::size_t> target_dim;
  FitOptions fit;
  bool left_only = false;
  Task task = Task::Classification;
  std::uint64_t split_seed = 0;
  double test_fraction = 0.2;
  std::size_t folds = 10;
  std::vector<double> cv_grid;
  std::uint64_t cv_seed = 0;
  double lssvm_gamma = 1.0;
  std::vector<BenchSolver> bench_solvers;
  std::vector<double> bench_epsilons;
  std::size_t repeats = 3;
  std::size_t warmup = 1;
  std::vector<double> gamma_grid;
  std::string reference = "tsvd";
};

Settings read_settings(const Config& cfg) {
  std::set<std::string> known(known_config_keys().begin(), known_config_keys().end());
  for (const auto& [k, v] : cfg.values()) {
    if (!known.count(k)) fail(ErrorCode::ConfigError, "unknown configuration key '" + k + "'");
  }
  Settings s;
  s.config = cfg;
  s.out = cfg.get("out", "out");
  s.seed = cfg.get_u64("seed", 0);
  s.threads = static_cast<int>(cfg.get_int("threads", 0));
  if (s.threads < 0) fail(ErrorCode::ConfigError, "threads must be non-negative");

  s.format = cfg.get("data.format", cfg.has("data.synth") ? "synth" : "edges");
  if (s.format != "edges" && s.format != "csv" && s.format != "matrix" && s.format != "synth") {
    fail(ErrorCode::ConfigError, "data.format must be edges, csv, matrix or synth");
  }
  s.method = parse_method(cfg.get("method", "ksvd"));
  s.family = parse_kernel_family(cfg.get("kernel.family", "sne"));
  if (cfg.has("kernel.gamma")) {
    s.gamma = cfg.get_double("kernel.gamma", 1.0);
    if (!(*s.gamma > 0.0)) fail(ErrorCode::ConfigError, "kernel.gamma must be positive");
  }
  s.gamma_k = cfg.get_double("kernel.gamma_k", 1.0);
  if (!(s.gamma_k > 0.0)) fail(ErrorCode::ConfigError, "kernel.gamma_k must be positive");

  s.compat.mode = parse_compat_mode(cfg.get("compat.mode", "identity"));
  s.compat.seed = cfg.get_u64("compat.seed", s.seed);
  s.compat.pca_center = cfg.get_bool("compat.pca_center", true);
  if (cfg.has("compat.target_dim")) s.target_dim = cfg.get_size("compat.target_dim", 0);

  s.fit.rank = cfg.get_size("rank", 16);
  if (s.fit.rank == 0) fail(ErrorCode::ConfigError, "rank must be positive");
  s.fit.solver = parse_solver(cfg.get("solver", "exact"));
  s.fit.center = cfg.get_bool("ksvd.center", true);
  s.fit.truncated.tol = cfg.get_double("solver.tol", 1e-10);
  s.fit.truncated.max_iters = cfg.get_size("solver.max_iters", 500);
  s.fit.truncated.seed = s.seed;
  s.fit.randomized.oversample = cfg.get_size("solver.oversample", 10);
  s.fit.randomized.power_iters = cfg.get_size("solver.power_iters", 2);
  s.fit.randomized.seed = s.seed;

  NystromConfig& ny = s.fit.nystrom;
  ny.n = cfg.get_size("nystrom.n", 0);
  ny.m = cfg.get_size("nystrom.m", 0);
  ny.seed = cfg.get_u64("nystrom.seed", s.seed);
  ny.epsilon = cfg.get_double("nystrom.epsilon", 1e-1);
  ny.m_growth = cfg.get_double("nystrom.growth", 2.0);
  ny.m_max = cfg.get_size("nystrom.m_max", 0);
  ny.oversample = cfg.get_size("nystrom.oversample", 10);
  ny.power_iters = cfg.get_size("nystrom.power_iters", 2);
  ny.r = s.fit.rank;
  if (!(ny.m_growth > 1.0 && ny.m_growth <= 4.0)) {
    fail(ErrorCode::ConfigError, "nystrom.growth must lie in (1, 4]");
  }
  if (!(ny.epsilon > 0.0)) fail(ErrorCode::ConfigError, "nystrom.epsilon must be positive");
  s.fit.full_denominator = cfg.get_bool("nystrom.full_denominator", false);

  const std::string task = cfg.get("task", "classification");
  if (task == "classification") s.task = Task::Classification;
  else if (task == "regression") s.task = Task::Regression;
  else fail(ErrorCode::ConfigError, "task must be classification or regression");
  const std::string sides = cfg.get("features.sides", "both");
  if (sides != "both" && sides != "left") fail(ErrorCode::ConfigError, "features.sides must be both or left");
  s.left_only = sides == "left";

  s.split_seed = cfg.get_u64("split.seed", s.seed);
  s.test_fraction = cfg.get_double("split.test_fraction", 0.2);
  if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0)) {
    fail(ErrorCode::ConfigError, "split.test_fraction must lie in (0, 1)");
  }
  s.folds = cfg.get_size("cv.folds", 10);
  s.cv_grid = cfg.get_doubles("cv.grid", {});
  s.cv_seed = cfg.get_u64("cv.seed", s.seed);
  s.lssvm_gamma = cfg.get_double("lssvm.gamma", 1.0);
  if (!(s.lssvm_gamma > 0.0)) fail(ErrorCode::ConfigError, "lssvm.gamma must be positive");

  for (const std::string& name : cfg.get_list("bench.solvers", {"tsvd", "rsvd", "asym_nystrom"})) {
    s.bench_solvers.push_back(parse_bench_solver(name));
  }
  s.bench_epsilons = cfg.get_doubles("bench.epsilons", {1e-1});
  s.repeats = cfg.get_size("bench.repeats", 3);
  s.warmup = cfg.get_size("bench.warmup", 1);
  if (s.repeats == 0) fail(ErrorCode::ConfigError, "bench.repeats must be positive");
  s.gamma_grid = cfg.get_doubles("bench.gamma_grid", {0.25, 0.5, 1.0, 2.0, 4.0});
  s.reference = cfg.get("bench.reference", "tsvd");
  if (s.reference != "tsvd" && s.reference != "exact") {
    fail(ErrorCode::ConfigError, "bench.reference must be tsvd or exact");
  }
  return s;
}

struct Dataset {
  DenseMatrix a;
  std::vector<int> labels;       // empty when unlabeled
  std::vector<double> targets;   // regression
  bool graph = false;
  std::string name;
};

Dataset load_dataset(const Settings& s) {
  const Config& c = s.config;
  Dataset d;
  if (s.format == "synth") {
    SynthOptions so;
    so.p_in = c.get_double("data.p_in", so.p_in);
    so.p_ab = c.get_double("data.p_ab", so.p_ab);
    so.p_ba = c.get_double("data.p_ba", so.p_ba);
    so.p_dag = c.get_double("data.p_dag", so.p_dag);
    GraphDataset g = synth_directed_graph(parse_synth_kind(c.get("data.synth", "two_block")),
                                          c.get_size("data.n", 200), s.seed, so);
    d.a = std::move(g.adjacency);
    d.labels = std::move(g.labels);
    d.graph = true;
    d.name = g.name;
    return d;
  }
  const auto path = c.find("data.path");
  if (!path) fail(ErrorCode::ConfigError, "data.path is required for format " + s.format);
  if (!fs::exists(*path)) fail(ErrorCode::ConfigError, "data.path '" + *path + "' does not exist");
  if (s.format == "edges") {
    EdgeListOptions eo;
    eo.directed = c.get_bool("data.directed", true);
    if (c.has("data.node_count")) eo.node_count = c.get_size("data.node_count", 0);
    if (const auto labels = c.find("data.labels")) {
      if (!fs::exists(*labels)) fail(ErrorCode::ConfigError, "data.labels '" + *labels + "' does not exist");
      eo.labels_path = *labels;
    }
    GraphDataset g = load_edge_list(*path, eo);
    d.a = std::move(g.adjacency);
    d.labels = std::move(g.labels);
    d.graph = true;
    d.name = g.name;
  } else if (s.format == "csv") {
    CsvOptions co;
    co.target_column = c.get("data.target", "");
    co.task = s.task;
    co.zscore = c.get_bool("data.zscore", true);
    TabularDataset t = load_csv(*path, co);
    d.a = std::move(t.features);
    d.labels = std::move(t.labels);
    d.targets = std::move(t.targets);
    d.name = fs::path(*path).stem().string();
  } else {
    d.a = read_matrix_csv(*path);
    d.name = fs::path(*path).stem().string();
  }
  return d;
}

struct Embedding {
  DenseMatrix left;
  DenseMatrix right;
  std::vector<double> lambda;
  std::optional<KsvdModel> model;
  // Tabular projections for the linear baselines: test rows map via (x − shift)·proj.
  DenseMatrix proj;
  std::vector<double> shift;
};

double resolve_gamma(const Settings& s, const DenseMatrix& a, std::optional<double> k) {
  if (k) return default_gamma(a, *k);
  if (s.gamma) return *s.gamma;
  return default_gamma(a, s.gamma_k);
}

FitOptions fit_options(const Settings& s, std::size_t rows, std::size_t cols) {
  FitOptions f = s.fit;
  if (s.target_dim && *s.target_dim != std::min(rows, cols)) {
    fail(ErrorCode::ConfigError, "compat.target_dim must equal min(N, M) = " +
                                     std::to_string(std::min(rows, cols)));
  }
  return f;
}

void report_warnings(const KsvdModel& m, std::ostream& err) {
  for (const std::string& w : m.warnings) err << "warning: " << w << "\n";
}

Embedding embed(const Settings& s, const DenseMatrix& a, std::optional<double> gamma_k,
                std::ostream& err) {
  Embedding e;
  const std::size_t r = s.fit.rank;
  switch (s.method) {
    case Method::Ksvd: {
      KernelSpec spec{s.family, resolve_gamma(s, a, gamma_k), nullptr};
      KsvdModel m = fit(a, spec, s.compat, fit_options(s, a.rows(), a.cols()));
      report_warnings(m, err);
      e.left = m.U;
      e.right = m.V;
      e.lambda = m.lambda;
      e.model = std::move(m);
      break;
    }
    case Method::Kpca: {
      KernelSpec spec{KernelFamily::RBF, resolve_gamma(s, a, gamma_k), nullptr};
      FitOptions f = s.fit;
      KsvdModel m = fit_sources(DataSources{a, a}, spec, f);
      report_warnings(m, err);
      e.left = m.U;
      e.right = m.U;
      e.lambda = m.lambda;
      e.model = std::move(m);
      break;
    }
    case Method::Svd:
    case Method::Pca: {
      DenseMatrix work = a;
      e.shift.assign(a.cols(), 0.0);
      if (s.method == Method::Pca) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
          double mean = 0.0;
          for (std::size_t i = 0; i < a.rows(); ++i) mean += a(i, j);
          e.shift[j] = mean / static_cast<double>(a.rows());
          for (std::size_t i = 0; i < a.rows(); ++i) work(i, j) -= e.shift[j];
        }
      }
      SvdResult svd = svd_exact(work);
      const std::size_t k = std::min(r, svd.rank());
      if (k < r) {
        err << "warning: matrix has numerical rank " << k << "; keeping " << k << " of " << r
            << " requested components\n";
      }
      e.left = svd.U.leading_cols(k);
      e.right = svd.V.leading_cols(k);
      e.lambda.assign(svd.S.begin(), svd.S.begin() + static_cast<std::ptrdiff_t>(k));
      e.proj = e.right;
      if (s.method == Method::Pca) {
        e.left = matmul(work, e.right);  // principal component scores
        e.right = e.left;
      }
      break;
    }
  }
  return e;
}

// Feature rows for graph nodes: both sides side by side unless left-only.
DenseMatrix graph_features(const Settings& s, const Embedding& e) {
  if (s.left_only || s.method == Method::Kpca || s.method == Method::Pca) return e.left;
  return hstack(e.left, e.right);
}

// Features for tabular samples: train rows from the fit, test rows projected.
std::pair<DenseMatrix, DenseMatrix> tabular_features(const Settings& s, const DenseMatrix& train,
                                                     const DenseMatrix& test,
                                                     std::optional<double> gamma_k,
                                                     std::ostream& err) {
  Embedding e = embed(s, train, gamma_k, err);
  if (e.model) {
    DenseMatrix out(test.rows(), e.model->rank());
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const std::vector<double> sc = transform_oos(*e.model, test.row(i), Side::Row);
      std::copy(sc.begin(), sc.end(), out.row(i).begin());
    }
    return {e.left, out};
  }
  DenseMatrix shifted = test;
  for (std::size_t i = 0; i < test.rows(); ++i)
    for (std::size_t j = 0; j < test.cols(); ++j) shifted(i, j) -= e.shift[j];
  DenseMatrix train_shifted = train;
  for (std::size_t i = 0; i < train.rows(); ++i)
    for (std::size_t j = 0; j < train.cols(); ++j) train_shifted(i, j) -= e.shift[j];
  return {matmul(train_shifted, e.proj), matmul(shifted, e.proj)};
}

struct MetricRow {
  std::string name;
  double value;
};

class MetricWriter {
 public:
  MetricWriter(const Settings& s, std::string task, std::string kernel, double gamma)
      : s_(s), task_(std::move(task)), kernel_(std::move(kernel)), gamma_(gamma) {}
  void add(const std::string& name, double value) { rows_.push_back({name, value}); }
  void write(const fs::path& path, std::ostream& out) const {
    std::ostringstream ss;
    ss << "task,method,kernel,gamma,seed,metric_name,value\n";
    for (const MetricRow& r : rows_) {
      ss << task_ << ',' << to_string(s_.method) << ',' << kernel_ << ','
         << format_double(gamma_) << ',' << s_.seed << ',' << r.name << ','
         << format_double(r.value) << '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot write " + path.string());
    f << ss.str();
    out << ss.str();
  }

 private:
  const Settings& s_;
  std::string task_;
  std::string kernel_;
  double gamma_;
  std::vector<MetricRow> rows_;
};

std::string kernel_label(const Settings& s) {
  switch (s.method) {
    case Method::Ksvd: return to_string(s.family);
    case Method::Kpca: return "rbf";
    case Method::Svd:
    case Method::Pca: return "linear";
  }
  return "unknown";
}

void write_manifest(const Settings& s, const std::string& command) {
  Config snapshot = s.config;
  snapshot.set("seed", std::to_string(s.seed));
  snapshot.set("threads", std::to_string(s.threads));
  snapshot.set("out", s.out.string());
  std::ostringstream ss;
  ss << "# aksvd run manifest\n";
  // Provenance lines are comments so the manifest loads back via --config.
  ss << "# command = " << command << "\n";
  ss << "# version = " << kVersion << "\n";
  ss << "# omp_max_threads = " << omp_get_max_threads() << "\n";
  ss << snapshot.dump();
  std::ofstream f(s.out / "manifest.txt", std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot write manifest");
  f << ss.str();
}

std::vector<std::size_t> labeled_nodes(const std::vector<int>& labels) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) idx.push_back(i);
  }
  return idx;
}

std::vector<int> pick(const std::vector<int>& v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

std::vector<double> pick(const std::vector<double>& v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

double macro_f1_of(const DenseMatrix& f_train, const std::vector<int>& y_train,
                   const DenseMatrix& f_test, const std::vector<int>& y_test, double gamma_reg) {
  const LssvmModel m = lssvm_fit(f_train, y_train, gamma_reg);
  return f1_scores(lssvm_predict(m, f_test), y_test).macro;
}

bool uses_bandwidth(const Settings& s) {
  return s.method == Method::Kpca || (s.method == Method::Ksvd && s.family != KernelFamily::Linear);
}

// ---------------------------------------------------------------- commands

int cmd_extract(const Settings& s, std::ostream& out, std::ostream& err) {
  const Dataset d = load_dataset(s);
  const Embedding e = embed(s, d.a, std::nullopt, err);
  write_matrix_csv(s.out / "left.csv", e.left);
  write_matrix_csv(s.out / "right.csv", e.right);
  write_vector_csv(s.out / "lambda.csv", e.lambda);
  if (e.model) save_model(*e.model, s.out / "model");
  write_manifest(s, "extract");
  out << "extracted " << e.lambda.size() << " components from a " << d.a.rows() << "x"
      << d.a.cols() << " matrix into " << s.out.string() << "\n";
  return 0;
}

int cmd_classify(const Settings& s, std::ostream& out, std::ostream& err) {
  const Dataset d = load_dataset(s);
  if (d.labels.empty()) fail(ErrorCode::ConfigError, "classification needs labels");
  const std::vector<std::size_t> nodes = labeled_nodes(d.labels);
  const std::vector<int> y_all = pick(d.labels, nodes);
  if (std::set<int>(y_all.begin(), y_all.end()).size() < 2) {
    fail(ErrorCode::SingleClass, "labels contain a single class; nothing to classify");
  }
  const Split split = stratified_split(y_all, s.test_fraction, s.split_seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i : split.train) train_idx.push_back(nodes[i]);
  for (std::size_t i : split.test) test_idx.push_back(nodes[i]);
  const std::vector<int> y_train = pick(d.labels, train_idx);
  const std::vector<int> y_test = pick(d.labels, test_idx);

  // Features for (train, test) at a bandwidth multiplier; graphs embed all nodes at once.
  auto features = [&](std::optional<double> k, std::span<const std::size_t> tr,
                      std::span<const std::size_t> te) -> std::pair<DenseMatrix, DenseMatrix> {
    if (d.graph) {
      const DenseMatrix f = graph_features(s, embed(s, d.a, k, err));
      return {select_rows(f, tr), select_rows(f, te)};
    }
    return tabular_features(s, select_rows(d.a, tr), select_rows(d.a, te), k, err);
  };

  std::optional<double> chosen_k;
  if (!s.cv_grid.empty() && uses_bandwidth(s)) {
    chosen_k = crossval_gamma(s.cv_grid, train_idx.size(), s.folds, s.cv_seed,
                              [&](double k, std::span<const std::size_t> tr,
                                  std::span<const std::size_t> va) {
                                std::vector<std::size_t> tr_n, va_n;
                                for (std::size_t i : tr) tr_n.push_back(train_idx[i]);
                                for (std::size_t i : va) va_n.push_back(train_idx[i]);
                                const auto [ftr, fva] = features(k, tr_n, va_n);
                                return macro_f1_of(ftr, pick(d.labels, tr_n), fva,
                                                   pick(d.labels, va_n), s.lssvm_gamma);
                              });
  }
  const auto [f_train, f_test] = features(chosen_k, train_idx, test_idx);
  const LssvmModel model = lssvm_fit(f_train, y_train, s.lssvm_gamma);
  const std::vector<int> pred = lssvm_predict(model, f_test);
  const F1Scores f1 = f1_scores(pred, y_test);

  const double gamma = uses_bandwidth(s) ? resolve_gamma(s, d.graph ? d.a : select_rows(d.a, train_idx), chosen_k) : 0.0;
  MetricWriter w(s, "classification", kernel_label(s), gamma);
  w.add("micro_f1", f1.micro);
  w.add("macro_f1", f1.macro);
  w.add("accuracy", accuracy(pred, y_test));
  if (model.classes.size() == 2 && std::set<int>(y_test.begin(), y_test.end()).size() == 2) {
    const DenseMatrix dec = lssvm_decision(model, f_test);
    std::vector<double> score(dec.rows());
    std::vector<int> truth(dec.rows());
    for (std::size_t i = 0; i < dec.rows(); ++i) {
      score[i] = dec(i, 1) - dec(i, 0);
      truth[i] = y_test[i] == model.classes[1];
    }
    w.add("auroc", auroc(score, truth));
  }
  if (chosen_k) w.add("gamma_k", *chosen_k);
  w.write(s.out / "metrics.csv", out);
  write_manifest(s, "classify");
  return 0;
}

int cmd_regress(const Settings& s, std::ostream& out, std::ostream& err) {
  const Dataset d = load_dataset(s);
  if (d.graph || d.targets.empty()) fail(ErrorCode::ConfigError, "regression needs a csv dataset");
  if (s.task != Task::Regression) fail(ErrorCode::ConfigError, "regress needs task = regression");
  const Split split = uniform_split(d.a.rows(), s.test_fraction, s.split_seed);
  const std::vector<double> y_train = pick(d.targets, split.train);
  const std::vector<double> y_test = pick(d.targets, split.test);

  auto features = [&](std::optional<double> k, std::span<const std::size_t> tr,
                      std::span<const std::size_t> te) {
    return tabular_features(s, select_rows(d.a, tr), select_rows(d.a, te), k, err);
  };
  std::optional<double> chosen_k;
  if (!s.cv_grid.empty() && uses_bandwidth(s)) {
    chosen_k = crossval_gamma(s.cv_grid, split.train.size(), s.folds, s.cv_seed,
                              [&](double k, std::span<const std::size_t> tr,
                                  std::span<const std::size_t> va) {
                                std::vector<std::size_t> tr_n, va_n;
                                for (std::size_t i : tr) tr_n.push_back(split.train[i]);
                                for (std::size_t i : va) va_n.push_back(split.train[i]);
                                const auto [ftr, fva] = features(k, tr_n, va_n);
                                const RidgeModel m =
                                    lssvm_regress_fit(ftr, pick(d.targets, tr_n), s.lssvm_gamma);
                                return -rmse(ridge_predict(m, fva), pick(d.targets, va_n));
                              });
  }
  const auto [f_train, f_test] = features(chosen_k, split.train, split.test);
  const RidgeModel model = lssvm_regress_fit(f_train, y_train, s.lssvm_gamma);
  const double gamma =
      uses_bandwidth(s) ? resolve_gamma(s, select_rows(d.a, split.train), chosen_k) : 0.0;
  MetricWriter w(s, "regression", kernel_label(s), gamma);
  w.add("rmse", rmse(ridge_predict(model, f_test), y_test));
  if (chosen_k) w.add("gamma_k", *chosen_k);
  w.write(s.out / "metrics.csv", out);
  write_manifest(s, "regress");
  return 0;
}

int cmd_reconstruct(const Settings& s, std::ostream& out, std::ostream& err) {
  const Dataset d = load_dataset(s);
  if (!d.graph) fail(ErrorCode::ConfigError, "reconstruction needs a graph dataset");
  const Embedding e = embed(s, d.a, std::nullopt, err);
  const std::vector<std::size_t> deg = out_degrees(d.a);
  const bool symmetric = s.method == Method::Kpca || s.method == Method::Pca;
  const DenseMatrix recon =
      symmetric ? graph_reconstruct(e.left, deg) : graph_reconstruct(e.left, e.right, deg);
  const ReconstructionError err_val = reconstruction_error(recon, d.a);
  MetricWriter w(s, "reconstruction", kernel_label(s),
                 uses_bandwidth(s) ? resolve_gamma(s, d.a, std::nullopt) : 0.0);
  w.add("l1", err_val.l1);
  w.add("l2", err_val.l2);
  w.write(s.out / "metrics.csv", out);
  write_manifest(s, "reconstruct");
  return 0;
}

SvdResult reference_for(const Settings& s, const KernelSource& source, std::size_t r) {
  const DenseMatrix g = source.materialize();
  if (s.reference == "exact") return svd_exact(g);
  TruncatedSvdOptions t;
  t.tol = 1e-13;
  t.seed = s.seed;
  return svd_truncated(g, r, t);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Runs warmup + repeats and keeps the median wall time (other fields from the last run).
ToleranceOutcome timed_solve(const Settings& s, const KernelSource& source, BenchSolver solver,
                             double eps, const SvdResult& ref) {
  for (std::size_t w = 0; w < s.warmup; ++w) solve_to_tolerance(source, solver, eps, ref, s.fit.nystrom);
  std::vector<double> walls, totals;
  ToleranceOutcome last;
  for (std::size_t k = 0; k < s.repeats; ++k) {
    last = solve_to_tolerance(source, solver, eps, ref, s.fit.nystrom);
    walls.push_back(last.wall_time);
    totals.push_back(last.total_time);
  }
  last.wall_time = median(walls);
  last.total_time = median(totals);
  return last;
}

std::unique_ptr<LazyKernelSource> bench_source(const Settings& s, const DenseMatrix& a, double gamma) {
  KernelSpec spec{s.family, gamma, make_compat(a, s.compat)};
  return std::make_unique<LazyKernelSource>(s.family, gamma, conform_sources(spec, build_sources(a)),
                                            s.fit.full_denominator);
}

int cmd_bench(const Settings& s, std::ostream& out, std::ostream&) {
  const Dataset d = load_dataset(s);
  const double gamma = resolve_gamma(s, d.a, std::nullopt);
  const auto source = bench_source(s, d.a, gamma);
  const std::size_t r = s.fit.rank;
  const SvdResult ref = reference_for(s, *source, r);

  std::ostringstream ss;
  ss << "solver,N,M,r,epsilon,m_used,eta,wall_time_s,seed,status,speedup,total_time_s\n";
  for (double eps : s.bench_epsilons) {
    std::vector<ToleranceOutcome> rows;
    std::optional<double> t_rsvd;
    for (BenchSolver solver : s.bench_solvers) {
      rows.push_back(timed_solve(s, *source, solver, eps, ref));
      if (solver == BenchSolver::Rsvd) t_rsvd = rows.back().wall_time;
    }
    for (const ToleranceOutcome& o : rows) {
      ss << to_string(o.solver) << ',' << source->rows() << ',' << source->cols() << ',' << r << ','
         << format_double(eps) << ',' << o.m_used << ',' << format_double(o.eta) << ','
         << format_double(o.wall_time) << ',' << s.seed << ',' << to_string(o.status) << ',';
      if (t_rsvd && o.wall_time > 0.0) ss << format_double(*t_rsvd / o.wall_time);
      ss << ',' << format_double(o.total_time) << '\n';
    }
  }
  std::ofstream f(s.out / "bench.csv", std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot write bench.csv");
  f << ss.str();
  out << ss.str();
  write_manifest(s, "bench");
  return 0;
}

int cmd_sweep(const Settings& s, std::ostream& out, std::ostream&) {
  const Dataset d = load_dataset(s);
  const std::size_t r = s.fit.rank;
  const double eps = s.fit.nystrom.epsilon;
  std::ostringstream ss;
  ss << "gamma_k,gamma,N,M,r,epsilon,m_used,eta,wall_time_s,rsvd_time_s,speedup,status,seed\n";
  for (double k : s.gamma_grid) {
    const double gamma = default_gamma(d.a, k);
    const auto source = bench_source(s, d.a, gamma);
    const SvdResult ref = reference_for(s, *source, r);
    const ToleranceOutcome o = timed_solve(s, *source, BenchSolver::AsymNystrom, eps, ref);
    const double t_rsvd = timed_solve(s, *source, BenchSolver::Rsvd, eps, ref).wall_time;
    ss << format_double(k) << ',' << format_double(gamma) << ',' << source->rows() << ','
       << source->cols() << ',' << r << ',' << format_double(eps) << ',' << o.m_used << ','
       << format_double(o.eta) << ',' << format_double(o.wall_time) << ','
       << format_double(t_rsvd) << ','
       << (o.wall_time > 0.0 ? format_double(t_rsvd / o.wall_time) : std::string()) << ','
       << to_string(o.status) << ',' << s.seed << '\n';
  }
  std::ofstream f(s.out / "sweep.csv", std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot write sweep.csv");
  f << ss.str();
  out << ss.str();
  write_manifest(s, "nystrom-sweep");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel SVD feature extraction, Nyström benchmarking and evaluation", "aksvd"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir;
  std::string method;
  std::vector<std::string> overrides;
  auto add_globals = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value configuration file");
    cmd->add_option("--seed", seed, "global seed (default for every unset seed key)");
    cmd->add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--method", method, "ksvd | kpca | svd | pca");
    cmd->add_option("--set", overrides, "override a configuration key: key=value");
  };
  add_globals(&app);

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Settings&, std::ostream&, std::ostream&);
  };
  const Sub subs[] = {
      {"extract", "fit a model and write left/right features", cmd_extract},
      {"classify", "node or sample classification with a linear LSSVM", cmd_classify},
      {"regress", "regression on tabular data", cmd_regress},
      {"reconstruct", "graph reconstruction from embeddings", cmd_reconstruct},
      {"bench", "solver comparison to a target accuracy", cmd_bench},
      {"nystrom-sweep", "subsample need and speedup across a bandwidth grid", cmd_sweep},
  };
  std::vector<CLI::App*> cmds;
  for (const Sub& sub : subs) {
    CLI::App* c = app.add_subcommand(sub.name, sub.help);
    add_globals(c);
    cmds.push_back(c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? 0 : 2;
  }

  try {
    Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
    cfg.apply_env(known_config_keys());
    for (const std::string& kv : overrides) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) fail(ErrorCode::ConfigError, "--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.set("seed", std::to_string(*seed));
    if (threads) cfg.set("threads", std::to_string(*threads));
    if (!out_dir.empty()) cfg.set("out", out_dir);
    if (!method.empty()) cfg.set("method", method);

    const Settings s = read_settings(cfg);
    if (s.threads > 0) omp_set_num_threads(s.threads);
    std::error_code ec;
    fs::create_directories(s.out, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + s.out.string() + ": " + ec.message());

    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (cmds[i]->parsed()) return subs[i].run(s, out, err);
    }
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_user_error(e.code()) ? 2 : 3;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace aksvd
