#include <benchmark/benchmark.h>

#include <limits>
#include <random>
#include <vector>

#include "bsam/kernels.hpp"
#include "bsam/objective.hpp"

using namespace bsam;

namespace {

std::vector<double> filled(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& e : v) e = d(rng);
  return v;
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 64, k = 64;
  const auto a = filled(n * m, 1), b = filled(m * k, 2);
  std::vector<double> c(n * k);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::matmul(a.data(), b.data(), c.data(), n, m, k);
    } else {
      kernels::serial::matmul(a.data(), b.data(), c.data(), n, m, k);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * m * k));
}

template <bool Parallel>
void BM_MatmulGradRhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 64, k = 64;
  const auto a = filled(n * m, 3), dy = filled(n * k, 4);
  std::vector<double> db(m * k);
  for (auto _ : state) {
    std::fill(db.begin(), db.end(), 0.0);
    if constexpr (Parallel) {
      kernels::omp::matmul_grad_rhs(a.data(), dy.data(), db.data(), n, m, k);
    } else {
      kernels::serial::matmul_grad_rhs(a.data(), dy.data(), db.data(), n, m, k);
    }
    benchmark::DoNotOptimize(db.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * m * k));
}

template <bool Parallel>
void BM_Tanh(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = filled(n, 5);
  std::vector<double> y(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::tanh_forward(x.data(), y.data(), n);
    } else {
      kernels::serial::tanh_forward(x.data(), y.data(), n);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

// Full loss gradient of a 16-64-64-1 MLP; the serial variant raises the
// parallel threshold so every kernel takes the reference path.
template <bool Parallel>
void BM_MlpGradient(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  MlpModel model({16, 64, 64, 1}, Activation::Tanh);
  model.init(7);
  const Tensor x({batch, 16}, filled(batch * 16, 8));
  const Tensor y({batch, 1}, filled(batch, 9));
  const LossObjective obj(model, x, y, LossKind::L2);
  std::vector<double> g(obj.dim());
  const std::size_t saved = kernels::parallel_threshold();
  kernels::set_parallel_threshold(Parallel ? 0 : std::numeric_limits<std::size_t>::max());
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.gradient(model.params.values, g));
  }
  kernels::set_parallel_threshold(saved);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Name("matmul/serial")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_Matmul<true>)->Name("matmul/omp")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_MatmulGradRhs<false>)->Name("matmul_grad_rhs/serial")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_MatmulGradRhs<true>)->Name("matmul_grad_rhs/omp")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_Tanh<false>)->Name("tanh/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_Tanh<true>)->Name("tanh/omp")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_MlpGradient<false>)->Name("mlp_gradient/serial")->RangeMultiplier(4)->Range(32, 2048);
BENCHMARK(BM_MlpGradient<true>)->Name("mlp_gradient/omp")->RangeMultiplier(4)->Range(32, 2048);

BENCHMARK_MAIN();
