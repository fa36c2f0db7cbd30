#include <benchmark/benchmark.h>

#include "common.hpp"
#include "fvg/importance.hpp"

using namespace fvg;

// Combined scores need one joint lasso fit; separate lasso needs p of them.
// Both use the same fixed penalty so the comparison is fit count only.

namespace {

ScoreOptions options() {
  ScoreOptions o;
  o.lambda = LambdaRule::fixed(0.05);
  return o;
}

void BM_CombinedScores(benchmark::State& st) {
  const auto& in = bench::instance(1000);
  const Matrix psi = psi_matrix(in.experiment.model(), in.experiment.s_matrix());
  for (auto _ : st)
    benchmark::DoNotOptimize(
        scores_combined(in.data.data.x, in.x_knock, in.data.data.y, in.experiment.model().gs, psi, options()));
}
BENCHMARK(BM_CombinedScores)->Unit(benchmark::kMillisecond);

void BM_SeparateLassoScores(benchmark::State& st) {
  const auto& in = bench::instance(1000);
  const std::span<const Matrix> ks(&in.x_knock, 1);
  for (auto _ : st)
    benchmark::DoNotOptimize(
        scores_separate_lasso(in.data.data.x, ks, in.data.data.y, in.experiment.model().gs, options()));
}
BENCHMARK(BM_SeparateLassoScores)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_MarginalScores(benchmark::State& st) {
  const auto& in = bench::instance(1000);
  const std::span<const Matrix> ks(&in.x_knock, 1);
  for (auto _ : st) benchmark::DoNotOptimize(scores_marginal(in.data.data.x, ks, in.data.data.y));
}
BENCHMARK(BM_MarginalScores)->Unit(benchmark::kMicrosecond);

void BM_ComputeG(benchmark::State& st) {
  const auto& in = bench::instance(1000);
  const Matrix psi = psi_matrix(in.experiment.model(), in.experiment.s_matrix());
  const Vector gamma = Vector::LinSpaced(psi.rows(), -1.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(compute_g(gamma, psi, in.experiment.model().gs));
}
BENCHMARK(BM_ComputeG)->Unit(benchmark::kMillisecond);

} // namespace
