#include <benchmark/benchmark.h>

#include <random>

#include "fvg/filters.hpp"

using namespace fvg;

namespace {

// Strong signals in the first groups, symmetric noise elsewhere.
WTable table(Index groups, Index size) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> w(groups * size);
  for (Index j = 0; j < w.size(); ++j) w[j] = nd(rng) + (j < w.size() / 5 ? 3.0 : 0.0);
  return align_w(w, GroupStructure::contiguous(std::vector<Index>(groups, size)));
}

void BM_FvgFilter(benchmark::State& st) {
  const WTable wt = table(static_cast<Index>(st.range(0)), 5);
  const BudgetVector v = budgets(wt, BudgetStrategy::magnitude);
  for (auto _ : st) benchmark::DoNotOptimize(fvg_filter(wt, 0.2, v));
}
BENCHMARK(BM_FvgFilter)->Arg(50)->Arg(500)->Arg(5000);

void BM_NaiveFilter(benchmark::State& st) {
  const WTable wt = table(static_cast<Index>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(naive_fvg(wt, 0.2));
}
BENCHMARK(BM_NaiveFilter)->Arg(50)->Arg(500)->Arg(5000);

void BM_EvalueFilter(benchmark::State& st) {
  const WTable wt = table(static_cast<Index>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(evalue_filter(wt, 0.2));
}
BENCHMARK(BM_EvalueFilter)->Arg(50)->Arg(500)->Arg(5000);

void BM_KnockoffPlus(benchmark::State& st) {
  const WTable wt = table(static_cast<Index>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(knockoff_plus(wt.w, 0.2));
}
BENCHMARK(BM_KnockoffPlus)->Arg(50)->Arg(500)->Arg(5000);

} // namespace
