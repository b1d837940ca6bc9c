#include "aksvd/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "aksvd/error.hpp"

namespace aksvd {

namespace {

struct CenteredSystem {
  DenseMatrix normal;  // FcᵀFc + I/γ
  DenseMatrix fc;
  std::vector<double> means;
};

CenteredSystem ridge_system(const DenseMatrix& f, double gamma_reg) {
  require_finite(f, "features");
  if (!(gamma_reg > 0.0)) fail(ErrorCode::ConfigError, "regularization must be positive");
  const std::size_t n = f.rows();
  const std::size_t d = f.cols();
  CenteredSystem s{DenseMatrix(), f, std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.means[j] += f(i, j);
  for (double& m : s.means) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.fc(i, j) -= s.means[j];
  s.normal = matmul_tn(s.fc, s.fc);
  for (std::size_t j = 0; j < d; ++j) s.normal(j, j) += 1.0 / gamma_reg;
  return s;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    fail(ErrorCode::LengthMismatch, std::to_string(a) + " predictions for " + std::to_string(b) +
                                        " targets");
  }
}

}  // namespace

LssvmModel lssvm_fit(const DenseMatrix& features, std::span<const int> labels, double gamma_reg) {
  check_lengths(features.rows(), labels.size());
  const std::set<int> uniq(labels.begin(), labels.end());
  if (uniq.size() < 2) fail(ErrorCode::SingleClass, "training labels contain a single class");
  LssvmModel model;
  model.classes.assign(uniq.begin(), uniq.end());
  model.gamma_reg = gamma_reg;

  const std::size_t n = features.rows();
  const std::size_t c = model.classes.size();
  const CenteredSystem sys = ridge_system(features, gamma_reg);
  DenseMatrix y(n, c, -1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pos = std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]);
    y(i, static_cast<std::size_t>(pos - model.classes.begin())) = 1.0;
  }
  std::vector<double> y_mean(c, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c; ++k) y_mean[k] += y(i, k);
  for (double& v : y_mean) v /= static_cast<double>(n);

  model.W = cholesky_solve(sys.normal, matmul_tn(sys.fc, y));
  model.b.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    double offset = 0.0;
    for (std::size_t j = 0; j < features.cols(); ++j) offset += sys.means[j] * model.W(j, k);
    model.b[k] = y_mean[k] - offset;
  }
  return model;
}

DenseMatrix lssvm_decision(const LssvmModel& model, const DenseMatrix& features) {
  if (features.cols() != model.W.rows()) {
    fail(ErrorCode::DimensionMismatch, "feature count differs from the trained model");
  }
  DenseMatrix d = matmul(features, model.W);
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t k = 0; k < d.cols(); ++k) d(i, k) += model.b[k];
  return d;
}

std::vector<int> lssvm_predict(const LssvmModel& model, const DenseMatrix& features) {
  const DenseMatrix d = lssvm_decision(model, features);
  std::vector<int> out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto r = d.row(i);
    out[i] = model.classes[static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin())];
  }
  return out;
}

RidgeModel lssvm_regress_fit(const DenseMatrix& features, std::span<const double> targets,
                             double gamma_reg) {
  check_lengths(features.rows(), targets.size());
  if (targets.empty()) fail(ErrorCode::LengthMismatch, "no training samples");
  const CenteredSystem sys = ridge_system(features, gamma_reg);
  const double y_mean =
      std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  DenseMatrix y(targets.size(), 1);
  for (std::size_t i = 0; i < targets.size(); ++i) y(i, 0) = targets[i] - y_mean;
  const DenseMatrix w = cholesky_solve(sys.normal, matmul_tn(sys.fc, y));
  RidgeModel model;
  model.w = w.column(0);
  model.b = y_mean - dot(sys.means, model.w);
  return model;
}

std::vector<double> ridge_predict(const RidgeModel& model, const DenseMatrix& features) {
  if (features.cols() != model.w.size()) {
    fail(ErrorCode::DimensionMismatch, "feature count differs from the trained model");
  }
  std::vector<double> out = matvec(features, model.w);
  for (double& v : out) v += model.b;
  return out;
}

F1Scores f1_scores(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred.size(), truth.size());
  if (truth.empty()) fail(ErrorCode::LengthMismatch, "no samples");
  std::map<int, std::array<std::size_t, 3>> counts;  // tp, fp, fn
  std::size_t tp = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) {
      ++counts[truth[i]][0];
      ++tp;
    } else {
      ++counts[pred[i]][1];
      ++counts[truth[i]][2];
    }
  }
  // Single-label data: pooled FP and FN both equal the number of mistakes.
  const double mistakes = static_cast<double>(pred.size() - tp);
  F1Scores out;
  out.micro = 2.0 * static_cast<double>(tp) / (2.0 * static_cast<double>(tp) + 2.0 * mistakes);
  double sum = 0.0;
  for (const auto& [cls, c] : counts) {
    const double denom = static_cast<double>(2 * c[0] + c[1] + c[2]);
    sum += denom > 0.0 ? 2.0 * static_cast<double>(c[0]) / denom : 0.0;
  }
  out.macro = sum / static_cast<double>(counts.size());
  return out;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred.size(), truth.size());
  if (truth.empty()) fail(ErrorCode::LengthMismatch, "no samples");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

double auroc(std::span<const double> scores, std::span<const int> truth) {
  check_lengths(scores.size(), truth.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] != 0) {
        pos_rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) fail(ErrorCode::SingleClass, "AUROC needs both classes");
  const double p = static_cast<double>(pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred.size(), truth.size());
  if (truth.empty()) fail(ErrorCode::LengthMismatch, "no samples");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

DenseMatrix graph_reconstruct(const DenseMatrix& source, const DenseMatrix& target,
                              std::span<const std::size_t> out_degrees) {
  const std::size_t n = source.rows();
  if (target.rows() != n || target.cols() != source.cols()) {
    fail(ErrorCode::ShapeMismatch, "source and target embeddings differ in shape");
  }
  check_lengths(out_degrees.size(), n);
  for (std::size_t v = 0; v < n; ++v) {
    if (out_degrees[v] >= n) {
      fail(ErrorCode::DegreeTooLarge, "node " + std::to_string(v) + " has out-degree " +
                                          std::to_string(out_degrees[v]));
    }
  }
  DenseMatrix recon(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t k = out_degrees[v];
    if (k == 0) continue;
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    const auto sv = source.row(v);
    for (std::size_t w = 0; w < n; ++w) {
      if (w == v) continue;
      const auto tw = target.row(w);
      double d = 0.0;
      for (std::size_t t = 0; t < sv.size(); ++t) d += (sv[t] - tw[t]) * (sv[t] - tw[t]);
      cand.emplace_back(d, w);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t t = 0; t < k; ++t) recon(v, cand[t].second) = 1.0;
  }
  return recon;
}

DenseMatrix graph_reconstruct(const DenseMatrix& embedding, std::span<const std::size_t> out_degrees) {
  return graph_reconstruct(embedding, embedding, out_degrees);
}

ReconstructionError reconstruction_error(const DenseMatrix& recon, const DenseMatrix& truth) {
  if (recon.rows() != truth.rows() || recon.cols() != truth.cols()) {
    fail(ErrorCode::ShapeMismatch, "adjacency shapes differ");
  }
  ReconstructionError e;
  double sq = 0.0;
  const auto a = recon.data();
  const auto b = truth.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    e.l1 += d;
    sq += d * d;
  }
  e.l2 = std::sqrt(sq);
  return e;
}

std::vector<std::size_t> fold_assignment(std::size_t samples, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > samples) {
    fail(ErrorCode::ConfigError, "cannot split " + std::to_string(samples) + " samples into " +
                                     std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> perm(samples);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> fold(samples);
  for (std::size_t i = 0; i < samples; ++i) fold[perm[i]] = i % folds;
  return fold;
}

double crossval_gamma(std::span<const double> grid, std::size_t samples, std::size_t folds,
                      std::uint64_t seed, const FoldEvaluator& evaluate) {
  if (grid.empty()) fail(ErrorCode::EmptyGrid, "bandwidth grid is empty");
  std::vector<double> values(grid.begin(), grid.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() == 1) return values.front();

  const std::vector<std::size_t> fold = fold_assignment(samples, folds, seed);
  double best_gamma = values.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (double gamma : values) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train, valid;
      for (std::size_t i = 0; i < samples; ++i) (fold[i] == f ? valid : train).push_back(i);
      total += evaluate(gamma, train, valid);
    }
    const double mean = total / static_cast<double>(folds);
    if (mean > best_score) {
      best_score = mean;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

Split stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorCode::ConfigError, "test fraction must lie in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  Split s;
  for (auto& [cls, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) take = std::clamp<std::size_t>(take, 1, idx.size() - 1);
    else take = 0;
    s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split uniform_split(std::size_t samples, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorCode::ConfigError, "test fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> perm(samples);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto take = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(samples)));
  if (samples >= 2) take = std::clamp<std::size_t>(take, 1, samples - 1);
  Split s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(take), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace aksvd
