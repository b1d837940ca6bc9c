// Parallel kernels against their serial references. Run with
// OMP_NUM_THREADS set to compare thread counts.
#include <benchmark/benchmark.h>

#include "aksvd/kernels.hpp"
#include "aksvd/matrix.hpp"

namespace {

using aksvd::DenseMatrix;

DenseMatrix input(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return aksvd::gaussian_matrix(rows, cols, seed);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = input(n, n, 1), b = input(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = input(n, n, 1), b = input(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::serial::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

void BM_MatmulNt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = input(n, n, 1), b = input(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::matmul_nt(a, b));
}

void BM_MatmulNtSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = input(n, n, 1), b = input(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::serial::matmul_nt(a, b));
}

void BM_MatvecT(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = input(n, n, 1);
  const std::vector<double> x(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::matvec_t(a, x));
}

void BM_MatvecTSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = input(n, n, 1);
  const std::vector<double> x(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::serial::matvec_t(a, x));
}

// Kernel assembly: N × N RBF/SNE over 64-dimensional samples.
void BM_Assemble(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto family = static_cast<aksvd::KernelFamily>(state.range(1));
  const DenseMatrix x = input(n, 64, 3), z = input(n, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::assemble_kernel(family, 8.0, x, z));
}

void BM_AssembleSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto family = static_cast<aksvd::KernelFamily>(state.range(1));
  const DenseMatrix x = input(n, 64, 3), z = input(n, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(aksvd::serial::assemble_kernel(family, 8.0, x, z));
}

}  // namespace

BENCHMARK(BM_Matmul)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulSerial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulNt)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulNtSerial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatvecT)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MatvecTSerial)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Assemble)
    ->Args({512, static_cast<int>(aksvd::KernelFamily::RBF)})
    ->Args({512, static_cast<int>(aksvd::KernelFamily::SNE)})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleSerial)
    ->Args({512, static_cast<int>(aksvd::KernelFamily::RBF)})
    ->Args({512, static_cast<int>(aksvd::KernelFamily::SNE)})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
