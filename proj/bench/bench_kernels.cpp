// Serial reference kernels vs their OpenMP variants on representative sizes.
#include <benchmark/benchmark.h>

#include "grr/common.hpp"
#include "grr/kernels.hpp"

using namespace grr;

namespace {

MatrixXd random_cloud(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

void bm_nn_serial(benchmark::State& state) {
  const auto q = random_cloud(state.range(0), 2, 1);
  const auto r = random_cloud(state.range(0), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(min_nn_dist2_serial(q, r));
}

void bm_nn_parallel(benchmark::State& state) {
  const auto q = random_cloud(state.range(0), 2, 1);
  const auto r = random_cloud(state.range(0), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(min_nn_dist2_parallel(q, r));
}

void bm_estep_serial(benchmark::State& state) {
  const auto x = random_cloud(state.range(0), 2, 3);
  const auto y = random_cloud(state.range(0), 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(gmm_posterior_serial(y, x, 0.5, 0.0));
}

void bm_estep_parallel(benchmark::State& state) {
  const auto x = random_cloud(state.range(0), 2, 3);
  const auto y = random_cloud(state.range(0), 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(gmm_posterior_parallel(y, x, 0.5, 0.0));
}

void bm_expjac_serial(benchmark::State& state) {
  const Index p = state.range(0);
  RowMat gu = 0.1 * random_cloud(p, 4, 5);
  VectorXd w = VectorXd::Constant(p, 1.0 / static_cast<double>(p));
  VectorXd terms;
  RowMat sens;
  for (auto _ : state) {
    expjac_terms_serial(gu, w, 0.1, 0.0025, 700.0, terms, sens);
    benchmark::DoNotOptimize(terms.data());
  }
}

void bm_expjac_parallel(benchmark::State& state) {
  const Index p = state.range(0);
  RowMat gu = 0.1 * random_cloud(p, 4, 5);
  VectorXd w = VectorXd::Constant(p, 1.0 / static_cast<double>(p));
  VectorXd terms;
  RowMat sens;
  for (auto _ : state) {
    expjac_terms_parallel(gu, w, 0.1, 0.0025, 700.0, terms, sens);
    benchmark::DoNotOptimize(terms.data());
  }
}

}  // namespace

BENCHMARK(bm_nn_serial)->Arg(2000)->Arg(8000);
BENCHMARK(bm_nn_parallel)->Arg(2000)->Arg(8000);
BENCHMARK(bm_estep_serial)->Arg(500)->Arg(2000);
BENCHMARK(bm_estep_parallel)->Arg(500)->Arg(2000);
BENCHMARK(bm_expjac_serial)->Arg(10000)->Arg(100000);
BENCHMARK(bm_expjac_parallel)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
