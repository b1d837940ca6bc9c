#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "aksvd/matrix.hpp"

namespace aksvd {

/// One-vs-rest least-squares SVM in primal form on given features. Each
/// class c has weights W[:, c] and bias b[c].
struct LssvmModel {
  DenseMatrix W;  ///< features × classes
  std::vector<double> b;
  std::vector<int> classes;  ///< sorted class ids
  double gamma_reg = 1.0;
};

/// Solves (FcᵀFc + I/γ)·w = Fcᵀ·yc per class on ±1 targets, with Fc, yc the
/// mean-centered features and targets; b is then the mean residual.
LssvmModel lssvm_fit(const DenseMatrix& features, std::span<const int> labels, double gamma_reg = 1.0);
/// samples × classes decision values.
DenseMatrix lssvm_decision(const LssvmModel& model, const DenseMatrix& features);
/// argmax of the decision values (first class on ties).
std::vector<int> lssvm_predict(const LssvmModel& model, const DenseMatrix& features);

/// The same system with real targets, for regression.
struct RidgeModel {
  std::vector<double> w;
  double b = 0.0;
};
RidgeModel lssvm_regress_fit(const DenseMatrix& features, std::span<const double> targets,
                             double gamma_reg = 1.0);
std::vector<double> ridge_predict(const RidgeModel& model, const DenseMatrix& features);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};
F1Scores f1_scores(std::span<const int> pred, std::span<const int> truth);
double accuracy(std::span<const int> pred, std::span<const int> truth);
/// Probability that a random positive (truth != 0) outscores a random negative; ties count ½.
double auroc(std::span<const double> scores, std::span<const int> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);

/// Row v gets ones at the out_degrees[v] target rows nearest to source row v
/// (Euclidean, v itself excluded, ties to the lower index). Passing the left
/// embedding as source and the right one as target scores edge v → w by how
/// well u_v matches v_w.
DenseMatrix graph_reconstruct(const DenseMatrix& source, const DenseMatrix& target,
                              std::span<const std::size_t> out_degrees);
DenseMatrix graph_reconstruct(const DenseMatrix& embedding, std::span<const std::size_t> out_degrees);

struct ReconstructionError {
  double l1 = 0.0;
  double l2 = 0.0;
};
ReconstructionError reconstruction_error(const DenseMatrix& recon, const DenseMatrix& truth);

/// Fold id per sample: a seeded shuffle dealt round-robin into `folds` folds.
std::vector<std::size_t> fold_assignment(std::size_t samples, std::size_t folds, std::uint64_t seed);

/// Scores a bandwidth on one fold: (γ, train indices, validation indices) → metric.
using FoldEvaluator =
    std::function<double(double, std::span<const std::size_t>, std::span<const std::size_t>)>;

/// γ with the best mean validation metric over the folds; duplicates in the
/// grid are ignored and ties go to the smaller γ.
double crossval_gamma(std::span<const double> grid, std::size_t samples, std::size_t folds,
                      std::uint64_t seed, const FoldEvaluator& evaluate);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
/// Per-class seeded split; every class with at least two samples keeps one in each part.
Split stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);
Split uniform_split(std::size_t samples, double test_fraction, std::uint64_t seed);

}  // namespace aksvd
