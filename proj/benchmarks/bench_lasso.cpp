#include <benchmark/benchmark.h>

#include "common.hpp"
#include "fvg/regression.hpp"

using namespace fvg;

namespace {

Matrix joint_design(const bench::Instance& in) {
  Matrix d(in.data.data.x.rows(), 2 * in.data.data.x.cols());
  d << in.data.data.x, in.x_knock;
  return d;
}

void BM_LassoFixed(benchmark::State& st) {
  const auto& in = bench::instance(static_cast<Index>(st.range(0)));
  const Matrix d = joint_design(in);
  const double lambda = 0.05 * lambda_max(d, in.data.data.y, Family::linear);
  for (auto _ : st) benchmark::DoNotOptimize(lasso_fit(d, in.data.data.y, lambda, Family::linear));
}
BENCHMARK(BM_LassoFixed)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LassoPath(benchmark::State& st) {
  const auto& in = bench::instance(1000);
  const Matrix d = joint_design(in);
  const auto grid = lambda_grid(lambda_max(d, in.data.data.y, Family::linear));
  for (auto _ : st) benchmark::DoNotOptimize(lasso_path(d, in.data.data.y, grid, Family::linear));
}
BENCHMARK(BM_LassoPath)->Unit(benchmark::kMillisecond);

void BM_LassoCv(benchmark::State& st) {
  const auto& in = bench::instance(static_cast<Index>(st.range(0)));
  const Matrix d = joint_design(in);
  for (auto _ : st) benchmark::DoNotOptimize(lasso_cv(d, in.data.data.y, Family::linear, 5, 1));
}
BENCHMARK(BM_LassoCv)->Arg(1000)->Unit(benchmark::kMillisecond)->Iterations(2);

void BM_KnockoffSampling(benchmark::State& st) {
  const auto& in = bench::instance(1000);
  const KnockoffSampler sampler(in.experiment.model(), in.experiment.s_matrix());
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(sampler.sample(in.data.data.x, ++seed));
}
BENCHMARK(BM_KnockoffSampling)->Unit(benchmark::kMillisecond);

} // namespace
