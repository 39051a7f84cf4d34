// Serial reference kernel against the OpenMP kernel on a location-shift
// problem; the argument is the number of observations.
#include <random>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "ordshift/fit.hpp"
#include "ordshift/kernels.hpp"

namespace {

ordshift::Problem make_bench_problem(int n) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  ordshift::OrdinalDataset data;
  data.k = 6;
  for (int j = 1; j <= 4; ++j) {
    ordshift::Column c;
    c.name = "x" + std::to_string(j);
    for (int i = 0; i < n; ++i) c.numeric.push_back(normal(rng));
    data.columns.push_back(std::move(c));
  }
  for (int i = 0; i < n; ++i) data.response.push_back(1 + i % 6);
  ordshift::ModelSpec spec;
  spec.structure = ordshift::Structure::location_shift;
  for (int j = 1; j <= 4; ++j) spec.location.push_back({"x" + std::to_string(j), false, 6});
  spec.dispersion = spec.location;
  return ordshift::make_problem(data, spec);
}

void BM_Serial(benchmark::State& state) {
  const auto problem = make_bench_problem(static_cast<int>(state.range(0)));
  const Eigen::VectorXd params = ordshift::initial_params(problem);
  for (auto _ : state) {
    auto sums = ordshift::kernels::evaluate_serial(problem, params, ordshift::kernels::Want::information);
    benchmark::DoNotOptimize(sums.loglik);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Parallel(benchmark::State& state) {
  const auto problem = make_bench_problem(static_cast<int>(state.range(0)));
  const Eigen::VectorXd params = ordshift::initial_params(problem);
  for (auto _ : state) {
    auto sums = ordshift::kernels::evaluate_parallel(problem, params, ordshift::kernels::Want::information);
    benchmark::DoNotOptimize(sums.loglik);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_Serial)->RangeMultiplier(8)->Range(1 << 10, 1 << 19)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->RangeMultiplier(8)->Range(1 << 10, 1 << 19)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
