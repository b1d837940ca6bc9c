#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aksvd/data_io.hpp"
#include "aksvd/error.hpp"
#include "aksvd/eval.hpp"
#include "aksvd/kernels.hpp"
#include "aksvd/svd.hpp"
#include "support.hpp"

using namespace aksvd;
using testing_support::Gen;
using testing_support::max_abs_diff;

namespace {

struct Blobs {
  DenseMatrix x;
  std::vector<int> y;
};

// Gaussian blobs with centers on a circle, pairwise center distance `gap`.
Blobs blobs(std::size_t per_class, std::size_t classes, double gap, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const double pi = std::acos(-1.0);
  const double radius = gap / (2.0 * std::sin(pi / static_cast<double>(classes)));
  Blobs b{DenseMatrix(per_class * classes, 2), {}};
  for (std::size_t c = 0; c < classes; ++c) {
    const double t = 2.0 * pi * static_cast<double>(c) / static_cast<double>(classes);
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t row = c * per_class + i;
      b.x(row, 0) = radius * std::cos(t) + noise(rng);
      b.x(row, 1) = radius * std::sin(t) + noise(rng);
      b.y.push_back(static_cast<int>(c));
    }
  }
  return b;
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

std::vector<std::size_t> row_sums(const DenseMatrix& a) {
  std::vector<std::size_t> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j);
    out[i] = static_cast<std::size_t>(std::llround(s));
  }
  return out;
}

}  // namespace

TEST_CASE("lssvm: separable clusters at ±10 are fit perfectly") {
  Gen gen(1);
  DenseMatrix f(40, 2);
  std::vector<int> y;
  for (std::size_t i = 0; i < 40; ++i) {
    const bool pos = i % 2 == 0;
    f(i, 0) = (pos ? 10.0 : -10.0) + gen.real(-1, 1);
    f(i, 1) = gen.real(-1, 1);
    y.push_back(pos ? 1 : 0);
  }
  const LssvmModel model = lssvm_fit(f, y);
  CHECK(accuracy(lssvm_predict(model, f), y) == 1.0);
}

TEST_CASE("lssvm: single feature with y = sign(f) gets a positive weight") {
  DenseMatrix f(6, 1);
  const std::vector<double> vals{-3, -2, -1, 1, 2, 3};
  std::vector<int> y;
  for (std::size_t i = 0; i < 6; ++i) {
    f(i, 0) = vals[i];
    y.push_back(vals[i] > 0 ? 1 : -1);
  }
  const LssvmModel model = lssvm_fit(f, y, 1.0);
  REQUIRE(model.classes == std::vector<int>{-1, 1});
  CHECK(model.W(0, 1) > 0.0);
  CHECK(model.W(0, 0) < 0.0);
}

TEST_CASE("lssvm: three Gaussian blobs, one-vs-rest") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Blobs b = blobs(50, 3, 5.0, 0.1, seed);
    const LssvmModel model = lssvm_fit(b.x, b.y);
    CHECK(accuracy(lssvm_predict(model, b.x), b.y) >= 0.99);
  }
}

TEST_CASE("lssvm: the ridge system matches an independent normal-equation solve") {
  Gen gen(2);
  const DenseMatrix f = gen.matrix(30, 4);
  std::vector<int> y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = static_cast<int>(i % 3);
  const double g = 0.7;
  const LssvmModel model = lssvm_fit(f, y, g);
  const Eigen::MatrixXd fe = testing_support::to_eigen(f);
  const Eigen::MatrixXd fc = fe.rowwise() - fe.colwise().mean();
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd t(30);
    for (int i = 0; i < 30; ++i) t(i) = y[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
    const Eigen::VectorXd tc = t.array() - t.mean();
    const Eigen::MatrixXd lhs = fc.transpose() * fc + Eigen::MatrixXd::Identity(4, 4) / g;
    const Eigen::VectorXd w = lhs.ldlt().solve(fc.transpose() * tc);
    const double b = t.mean() - fe.colwise().mean().dot(w);
    for (int k = 0; k < 4; ++k) CHECK(model.W(static_cast<std::size_t>(k), static_cast<std::size_t>(c)) == doctest::Approx(w(k)).epsilon(1e-10));
    CHECK(model.b[static_cast<std::size_t>(c)] == doctest::Approx(b).epsilon(1e-10));
  }
}

// Duplicating every column is the original problem with γ_reg doubled: with
// w' = [v, v], (2FᵀF + I/γ)v = Fᵀy, so 2v solves (FᵀF + I/(2γ))·2v = Fᵀy.
TEST_CASE("property: duplicated feature columns act as a doubled regularization parameter") {
  Gen gen(3);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = gen.size(10, 40), d = gen.size(1, 5);
    const DenseMatrix f = gen.matrix(n, d);
    std::vector<int> y(n);
    for (int& v : y) v = static_cast<int>(gen.size(0, 2));
    if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; })) y[0] = (y[0] + 1) % 3;
    const double g = gen.real(0.1, 5.0);
    const DenseMatrix dup = hstack(f, f);
    const DenseMatrix d1 = lssvm_decision(lssvm_fit(dup, y, g), dup);
    const DenseMatrix d2 = lssvm_decision(lssvm_fit(f, y, 2.0 * g), f);
    CHECK(max_abs_diff(d1, d2) < 1e-10);
  }
  // Well separated classes: argmax is unchanged by the duplication itself.
  const Blobs b = blobs(30, 3, 5.0, 0.3, 9);
  const DenseMatrix dup = hstack(b.x, b.x);
  CHECK(lssvm_predict(lssvm_fit(dup, b.y), dup) == lssvm_predict(lssvm_fit(b.x, b.y), b.x));
}

TEST_CASE("lssvm: errors") {
  const DenseMatrix f(4, 2, 1.0);
  CHECK_THROWS_AS(lssvm_fit(f, std::vector<int>{1, 1, 1, 1}), Error);
  CHECK_THROWS_AS(lssvm_fit(f, std::vector<int>{0, 1, 1}), Error);
  CHECK_THROWS_AS(lssvm_fit(f, std::vector<int>{0, 1, 0, 1}, 0.0), Error);
}

TEST_CASE("regression: ridge recovers a noiseless linear map") {
  Gen gen(4);
  const DenseMatrix f = gen.matrix(200, 3);
  std::vector<double> t(200);
  for (std::size_t i = 0; i < 200; ++i) t[i] = 2.0 * f(i, 0) - f(i, 2) + 0.5;
  const RidgeModel m = lssvm_regress_fit(f, t, 1e8);
  CHECK(m.w[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(m.w[1]) < 1e-6);
  CHECK(m.w[2] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(m.b == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(rmse(ridge_predict(m, f), t) < 1e-6);
}

TEST_CASE("f1: perfect prediction and the binary all-positive case") {
  const std::vector<int> truth{0, 1, 2, 1, 0, 2};
  const F1Scores same = f1_scores(truth, truth);
  CHECK(same.micro == 1.0);
  CHECK(same.macro == 1.0);

  // Truth half positive, everything predicted positive. Per class: F1₊ = 2/3,
  // F1₋ = 0. Pooled over both classes TP = 2, FP = FN = 2.
  const std::vector<int> t{1, 1, 0, 0}, p{1, 1, 1, 1};
  const F1Scores s = f1_scores(p, t);
  CHECK(s.macro == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.micro == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.micro == doctest::Approx(accuracy(p, t)).epsilon(1e-15));
  CHECK_THROWS_AS(f1_scores(p, std::vector<int>{1, 0}), Error);
}

TEST_CASE("f1: predicted classes absent from truth count as zero in the macro mean") {
  const F1Scores s = f1_scores(std::vector<int>{0, 0, 5}, std::vector<int>{0, 0, 0});
  // class 0: tp 2, fn 1 → 0.8; class 5: 0.
  CHECK(s.macro == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("property: metrics are permutation invariant and match a confusion-matrix oracle") {
  Gen gen(5);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen.size(2, 60);
    const std::size_t k = gen.size(2, 5);
    std::vector<int> p(n), t(n);
    std::vector<double> score(n), pr(n), tr(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(gen.size(0, k - 1));
      t[i] = static_cast<int>(gen.size(0, k - 1));
      score[i] = std::round(gen.real(0, 4));  // ties on purpose
      pr[i] = gen.real(-1, 1);
      tr[i] = gen.real(-1, 1);
    }
    t[0] = 0;
    t[1] = 1;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    const F1Scores a = f1_scores(p, t), b = f1_scores(pick(p, perm), pick(t, perm));
    CHECK(a.micro == doctest::Approx(b.micro).epsilon(1e-15));
    CHECK(a.macro == doctest::Approx(b.macro).epsilon(1e-15));
    CHECK(rmse(pr, tr) == doctest::Approx(rmse(pick(pr, perm), pick(tr, perm))).epsilon(1e-14));

    std::vector<int> bin(n);
    for (std::size_t i = 0; i < n; ++i) bin[i] = t[i] == 0 ? 0 : 1;
    CHECK(auroc(score, bin) == doctest::Approx(auroc(pick(score, perm), pick(bin, perm))).epsilon(1e-14));

    // Oracle: per-class counts from a confusion matrix, F1 = 2TP/(2TP+FP+FN).
    std::vector<int> classes(p);
    classes.insert(classes.end(), t.begin(), t.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    double macro = 0.0, tp_all = 0.0, fp_all = 0.0, fn_all = 0.0;
    for (int c : classes) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += p[i] == c && t[i] == c;
        fp += p[i] == c && t[i] != c;
        fn += p[i] != c && t[i] == c;
      }
      macro += 2 * tp / (2 * tp + fp + fn);
      tp_all += tp;
      fp_all += fp;
      fn_all += fn;
    }
    CHECK(a.macro == doctest::Approx(macro / static_cast<double>(classes.size())).epsilon(1e-14));
    CHECK(a.micro == doctest::Approx(2 * tp_all / (2 * tp_all + fp_all + fn_all)).epsilon(1e-14));
  }
}

TEST_CASE("auroc: ranking examples, ties, single class") {
  const std::vector<int> t{0, 0, 1, 1};
  CHECK(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, t) == 1.0);
  CHECK(auroc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, t) == 0.0);
  CHECK(auroc(std::vector<double>{3, 3, 3, 3}, t) == 0.5);
  try {
    (void)auroc(std::vector<double>{1, 2}, std::vector<int>{1, 1});
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClass);
  }
}

TEST_CASE("property: auroc matches pair counting and ignores monotone transforms") {
  Gen gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen.size(2, 50);
    std::vector<double> s(n);
    std::vector<int> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(gen.real(-3, 3) * 2.0) / 2.0;
      t[i] = gen.real(0, 1) < 0.4 ? 1 : 0;
    }
    t[0] = 0;
    t[1] = 1;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (t[i] != 1 || t[j] != 0) continue;
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
    const double a = auroc(s, t);
    CHECK(a == doctest::Approx(wins / pairs).epsilon(1e-14));
    std::vector<double> e(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = std::exp(s[i]);
      c[i] = s[i] * s[i] * s[i] + 5.0 * s[i];
    }
    CHECK(auroc(e, t) == doctest::Approx(a).epsilon(1e-14));
    CHECK(auroc(c, t) == doctest::Approx(a).epsilon(1e-14));
  }
}

TEST_CASE("rmse: examples") {
  const std::vector<double> t{3, 4, -1};
  CHECK(rmse(t, t) == 0.0);
  CHECK(rmse(std::vector<double>{3.5, 4.5, -0.5}, t) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(5.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(rmse(std::vector<double>{0}, t), Error);
}

TEST_CASE("graph_reconstruct: points on a line, zero degrees") {
  const DenseMatrix e{{0}, {1}, {10}};
  const std::vector<std::size_t> k{1, 1, 1};
  CHECK(graph_reconstruct(e, k) == DenseMatrix{{0, 1, 0}, {1, 0, 0}, {0, 1, 0}});
  CHECK(graph_reconstruct(e, std::vector<std::size_t>{0, 0, 0}) == DenseMatrix(3, 3));
}

TEST_CASE("graph_reconstruct: ties go to the lower index; degree limits") {
  const DenseMatrix e{{0}, {1}, {-1}, {5}};
  const DenseMatrix r = graph_reconstruct(e, std::vector<std::size_t>{1, 0, 0, 0});
  CHECK(r(0, 1) == 1.0);
  CHECK(r(0, 2) == 0.0);
  try {
    (void)graph_reconstruct(e, std::vector<std::size_t>{4, 0, 0, 0});
    FAIL("expected DegreeTooLarge");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::DegreeTooLarge);
  }
  CHECK_THROWS_AS(graph_reconstruct(e, std::vector<std::size_t>{1, 1}), Error);
}

TEST_CASE("graph_reconstruct: the exact SVD of a directed 6-cycle reconstructs it") {
  const GraphDataset g = synth_directed_graph(SynthKind::Cycle, 6, 0);
  const SvdResult svd = svd_exact(g.adjacency);
  REQUIRE(svd.rank() == 6);
  const std::vector<std::size_t> deg = out_degrees(g.adjacency);
  const DenseMatrix recon = graph_reconstruct(svd.U, svd.V, deg);
  CHECK(recon == g.adjacency);
  CHECK(reconstruction_error(recon, g.adjacency).l1 == 0.0);
}

TEST_CASE("property: graph_reconstruct preserves out-degrees and excludes self") {
  Gen gen(7);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = gen.size(2, 40), d = gen.size(1, 4);
    const DenseMatrix src = gen.matrix(n, d), dst = gen.matrix(n, d);
    std::vector<std::size_t> deg(n);
    for (auto& k : deg) k = gen.size(0, n - 1);
    const DenseMatrix one = graph_reconstruct(src, deg);
    const DenseMatrix two = graph_reconstruct(src, dst, deg);
    CHECK(row_sums(one) == deg);
    CHECK(row_sums(two) == deg);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(one(i, i) == 0.0);
      CHECK(two(i, i) == 0.0);
    }
  }
}

TEST_CASE("reconstruction_error: examples and elementwise oracle") {
  const DenseMatrix a{{0, 1}, {1, 0}};
  CHECK(reconstruction_error(a, a).l1 == 0.0);
  CHECK(reconstruction_error(a, a).l2 == 0.0);
  const DenseMatrix moved{{1, 0}, {1, 0}};  // one edge moved under fixed degree
  CHECK(reconstruction_error(moved, a).l1 == 2.0);
  CHECK(reconstruction_error(moved, a).l2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const DenseMatrix single{{0, 1}, {0, 0}};
  CHECK(reconstruction_error(single, a).l1 == 1.0);
  CHECK(reconstruction_error(single, a).l2 == 1.0);

  Gen gen(8);
  const DenseMatrix x = gen.binary(17, 13, 0.3), y = gen.binary(17, 13, 0.3);
  const Eigen::MatrixXd diff = testing_support::to_eigen(x) - testing_support::to_eigen(y);
  const ReconstructionError e = reconstruction_error(x, y);
  CHECK(e.l1 == doctest::Approx(diff.cwiseAbs().sum()).epsilon(1e-15));
  CHECK(e.l2 == doctest::Approx(diff.norm()).epsilon(1e-15));
  CHECK_THROWS_AS(reconstruction_error(x, DenseMatrix(17, 12)), Error);
}

TEST_CASE("folds and splits are deterministic and balanced") {
  const auto f = fold_assignment(23, 5, 3);
  CHECK(f == fold_assignment(23, 5, 3));
  std::vector<std::size_t> sizes(5, 0);
  for (std::size_t k : f) ++sizes[k];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);

  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) labels.push_back(i < 40 ? 0 : 1);
  const Split s = stratified_split(labels, 0.2, 4);
  CHECK(s.train.size() + s.test.size() == 50);
  std::size_t test_pos = 0;
  for (std::size_t i : s.test) test_pos += labels[i] == 1;
  CHECK(test_pos == 2);
  CHECK(s.test.size() == 10);
  const Split again = stratified_split(labels, 0.2, 4);
  CHECK(again.test == s.test);

  const Split u = uniform_split(100, 0.2, 1);
  CHECK(u.test.size() == 20);
  std::vector<std::size_t> all(u.train);
  all.insert(all.end(), u.test.begin(), u.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);
  CHECK_THROWS_AS(uniform_split(10, 1.0, 0), Error);
}

TEST_CASE("crossval_gamma: single grid, duplicates, empty grid") {
  const FoldEvaluator peak = [](double g, std::span<const std::size_t>, std::span<const std::size_t>) {
    return -std::abs(std::log(g));
  };
  CHECK(crossval_gamma(std::vector<double>{3.0}, 20, 4, 0, peak) == 3.0);
  const std::vector<double> grid{0.1, 1.0, 10.0}, dup{10.0, 0.1, 1.0, 1.0, 0.1};
  CHECK(crossval_gamma(grid, 20, 4, 0, peak) == crossval_gamma(dup, 20, 4, 0, peak));
  const FoldEvaluator flat = [](double, std::span<const std::size_t>, std::span<const std::size_t>) { return 1.0; };
  CHECK(crossval_gamma(grid, 20, 4, 0, flat) == 0.1);
  try {
    (void)crossval_gamma(std::vector<double>{}, 20, 4, 0, peak);
    FAIL("expected EmptyGrid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyGrid);
  }
}

// Features are RBF values against the training fold. A tiny bandwidth makes
// the kernel the identity (validation rows vanish), a huge one makes it
// constant to working precision; both leave only the bias.
TEST_CASE("crossval_gamma: a kernel classifier selects an interior bandwidth") {
  const std::vector<double> grid{1e-6, 1e-3, 1.0, 1e3, 1e6};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Blobs b = blobs(20, 3, 5.0, 1.0, 100 + seed);
    const FoldEvaluator eval = [&](double gamma, std::span<const std::size_t> tr, std::span<const std::size_t> va) {
      const DenseMatrix xt = select_rows(b.x, tr), xv = select_rows(b.x, va);
      const DenseMatrix ft = assemble_kernel(KernelFamily::RBF, gamma, xt, xt);
      const DenseMatrix fv = assemble_kernel(KernelFamily::RBF, gamma, xv, xt);
      const LssvmModel m = lssvm_fit(ft, pick(b.y, tr));
      return accuracy(lssvm_predict(m, fv), pick(b.y, va));
    };
    const double best = crossval_gamma(grid, b.x.rows(), 10, seed, eval);
    CHECK(best > grid.front());
    CHECK(best < grid.back());
  }
}
