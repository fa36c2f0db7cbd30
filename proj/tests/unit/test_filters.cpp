#include "doctest.h"

#include <random>

#include "fvg/error.hpp"
#include "fvg/filters.hpp"
#include "oracles/oracles.hpp"

using namespace fvg;

namespace {

bool subset(const std::vector<Index>& a, const std::vector<Index>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Random groups of sizes 1..max_size covering p features, shuffled labels.
GroupStructure random_groups(Index p, Index max_size, std::mt19937_64& rng) {
  std::vector<Index> perm(p);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_int_distribution<Index> size(1, max_size);
  std::vector<std::vector<Index>> groups;
  for (Index i = 0; i < p;) {
    const Index s = std::min(size(rng), p - i);
    groups.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(i), perm.begin() + static_cast<std::ptrdiff_t>(i + s));
    i += s;
  }
  return GroupStructure(p, groups);
}

std::vector<double> random_w(Index p, int range, std::mt19937_64& rng, double positive_bias = 0.0) {
  std::uniform_int_distribution<int> mag(0, range);
  std::uniform_real_distribution<double> u;
  std::vector<double> w(p);
  for (auto& x : w) x = (u(rng) < 0.5 + positive_bias ? 1.0 : -1.0) * mag(rng);
  return w;
}

std::vector<Index> one_based(std::vector<Index> v) {
  for (auto& x : v) ++x;
  return v;
}

} // namespace

TEST_CASE("knockoff+ examples") {
  CHECK(knockoff_plus({-1, -2, -3}, 0.5).selected.empty());
  CHECK(knockoff_plus({-1, -2, -3}, 0.5).thresholds.front() == kInf);
  const RejectionSet r = knockoff_plus({5, 4, 3, 2, -1}, 0.5);
  CHECK(one_based(r.selected) == std::vector<Index>{1, 2, 3, 4});
  // t = 1 already meets the ratio: (1 + 1) / 4 = 0.5.
  CHECK(r.thresholds.front() == 1.0);
  CHECK(r.method == Method::knockoff_plus);
}

TEST_CASE("knockoff+ matches the threshold scan") {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 500; ++rep) {
    const auto w = random_w(15, 6, rng, 0.2);
    for (double alpha : {0.1, 0.3, 1.0}) {
      double t = 0.0;
      const auto want = oracle::knockoff_plus(w, alpha, &t);
      const auto got = knockoff_plus(w, alpha);
      CHECK(got.selected == want);
      CHECK(got.thresholds.front() == t);
    }
  }
}

TEST_CASE("group filter works on group statistics") {
  const RejectionSet r = group_filter({5, 4, 3, 2, -1}, 0.5);
  CHECK(r.selected == std::vector<Index>{0, 1, 2, 3});
  CHECK(r.method == Method::group_filter);
  CHECK(group_filter({-1, -2}, 0.5).selected.empty());
}

TEST_CASE("budget strategies") {
  const std::vector<double> sums{6, 2};
  auto v = budgets_from_row_sums(sums, BudgetStrategy::magnitude).v;
  CHECK(v[0] == doctest::Approx(0.75));
  CHECK(v[1] == doctest::Approx(0.25));
  v = budgets_from_row_sums(sums, BudgetStrategy::magnitude_over_l).v;
  CHECK(v[0] == doctest::Approx(6.0 / 7.0));
  CHECK(v[1] == doctest::Approx(1.0 / 7.0));
  v = budgets_from_row_sums({0, 0, 0}, BudgetStrategy::magnitude).v;
  for (double x : v) CHECK(x == doctest::Approx(1.0 / 3.0));
  v = budgets_from_row_sums(sums, BudgetStrategy::uniform).v;
  CHECK(v[0] == 0.5);

  const WTable wt = align_w({5, 1, 4, -2}, GroupStructure(4, {{0, 1}, {2, 3}}));
  v = budgets(wt, BudgetStrategy::magnitude).v;
  CHECK(v[0] == doctest::Approx(0.75));
  CHECK(budgets(wt, BudgetStrategy::magnitude).strategy == BudgetStrategy::magnitude);
  CHECK(budget_strategy_from_string(to_string(BudgetStrategy::magnitude_over_l)) == BudgetStrategy::magnitude_over_l);
  CHECK_THROWS_AS(budget_strategy_from_string("x"), ValidationError);
}

TEST_CASE("naive filter examples") {
  const WTable wt = align_w({5, 1, 4, -2}, GroupStructure(4, {{0, 1}, {2, 3}}));
  const RejectionSet r = naive_fvg(wt, 0.5);
  CHECK(one_based(r.selected) == std::vector<Index>{1, 3});
  CHECK(r.thresholds.front() == 4.0);
  CHECK(r.fdp_hat == doctest::Approx(0.5));
  CHECK(naive_fvg(align_w({-1, -3}, GroupStructure::singletons(2)), 0.5).selected.empty());
}

TEST_CASE("singleton naive filter equals knockoff+") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 500; ++rep) {
    const auto w = random_w(12, 8, rng, 0.2);
    const WTable wt = align_w(w, GroupStructure::singletons(12));
    for (double alpha : {0.1, 0.25, 0.5})
      CHECK(naive_fvg(wt, alpha).selected == knockoff_plus(w, alpha).selected);
  }
}

TEST_CASE("naive filter matches its oracle") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    const auto gs = random_groups(14, 4, rng);
    const auto w = random_w(14, 6, rng, 0.25);
    for (double alpha : {0.2, 0.5})
      CHECK(naive_fvg(align_w(w, gs), alpha).selected == oracle::naive(w, gs.groups(), alpha));
  }
}

TEST_CASE("FDP estimate closed form equals the row-decomposed sum") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto gs = random_groups(12, 4, rng);
    const auto w = random_w(12, 5, rng);
    const WTable wt = align_w(w, gs);
    for (double t : {0.5, 1.0, 2.0, 3.0, 5.0, 6.0}) CHECK(naive_fdp_closed_form(wt, t) == naive_fdp_row_sum(wt, t));
  }
}

TEST_CASE("FVG filter hand trace") {
  const WTable wt = align_w({6, 5, 4, 3, -1}, GroupStructure::singletons(5));
  const BudgetVector v = budgets(wt, BudgetStrategy::magnitude);
  REQUIRE(v.v.size() == 1);
  const RejectionSet r = fvg_filter(wt, 0.8, v);
  CHECK(one_based(r.selected) == std::vector<Index>{1, 2, 3, 4});
  REQUIRE(r.thresholds.size() == 1);
  CHECK(r.thresholds[0] == 3.0);
  CHECK(r.method == Method::fvg);
}

TEST_CASE("FVG filter degenerate inputs") {
  const WTable neg = align_w({-1, -2, 0, -4}, GroupStructure(4, {{0, 1}, {2, 3}}));
  const RejectionSet r = fvg_filter(neg, 0.5, budgets(neg, BudgetStrategy::magnitude));
  CHECK(r.selected.empty());
  for (double t : r.thresholds) CHECK(t == kInf);

  // A zero budget row never rejects.
  const WTable wt = align_w({9, 8, 7, 6}, GroupStructure(4, {{0, 1}, {2, 3}}));
  const BudgetVector only_first{{1.0, 0.0}, BudgetStrategy::uniform};
  const RejectionSet z = fvg_filter(wt, 1.0, only_first, 1.0);
  CHECK(z.thresholds[1] == kInf);
  for (Index j : z.selected) CHECK(wt.alignment.row_of[j] == 0);
}

TEST_CASE("FVG filter matches the exhaustive oracle") {
  std::mt19937_64 rng(5);
  int nonempty = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const Index p = 6 + rep % 7;
    const auto gs = random_groups(p, 2 + rep % 2, rng);
    const auto w = random_w(p, 9, rng, 0.3);
    const WTable wt = align_w(w, gs);
    for (auto strategy : {BudgetStrategy::magnitude, BudgetStrategy::uniform}) {
      const BudgetVector v = budgets(wt, strategy);
      for (double alpha : {0.3, 0.8, 1.0})
        for (double c : {1.93, 1.0}) {
          const RejectionSet got = fvg_filter(wt, alpha, v, c);
          const auto want = oracle::fvg(w, gs.groups(), alpha, v.v, c);
          CHECK(got.selected == want.selected);
          CHECK(got.thresholds == want.thresholds);
          nonempty += !got.selected.empty();
        }
    }
  }
  CHECK(nonempty > 100);
}

TEST_CASE("FVG output satisfies every row constraint") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 300; ++rep) {
    const auto gs = random_groups(20, 4, rng);
    const auto w = random_w(20, 10, rng, 0.3);
    const WTable wt = align_w(w, gs);
    const BudgetVector v = budgets(wt, BudgetStrategy::magnitude);
    const double alpha = 0.9;
    const RejectionSet r = fvg_filter(wt, alpha, v);
    const auto ratios = fvg_row_ratios(wt, r.thresholds);
    for (Index l = 0; l < ratios.size(); ++l) CHECK(ratios[l] <= v.v[l] * alpha / kDefaultCorrection + 1e-12);
  }
}

TEST_CASE("selections grow with alpha") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 300; ++rep) {
    const auto gs = random_groups(16, 4, rng);
    const auto w = random_w(16, 8, rng, 0.3);
    const WTable wt = align_w(w, gs);
    const BudgetVector v = budgets(wt, BudgetStrategy::magnitude);
    std::vector<Index> prev_fvg, prev_kp, prev_naive;
    for (double alpha : {0.05, 0.1, 0.2, 0.4, 0.7, 1.0}) {
      const auto f = fvg_filter(wt, alpha, v).selected;
      const auto k = knockoff_plus(w, alpha).selected;
      const auto n = naive_fvg(wt, alpha).selected;
      CHECK(subset(prev_fvg, f));
      CHECK(subset(prev_kp, k));
      CHECK(subset(prev_naive, n));
      prev_fvg = f;
      prev_kp = k;
      prev_naive = n;
    }
  }
}

TEST_CASE("multiple-knockoff filter") {
  const auto gs = GroupStructure::singletons(4);
  const KappaTauTable all_lost = align_kappa_tau({1, 2, 1, 3}, {5, 4, 3, 2}, 3, gs);
  CHECK(fvg_multiple(all_lost, 1.0, budgets(all_lost, BudgetStrategy::magnitude)).selected.empty());

  // With one copy, kappa = (W < 0) and tau = |W| reproduce the FVG filter.
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 300; ++rep) {
    const auto g = random_groups(12, 3, rng);
    auto w = random_w(12, 9, rng, 0.3);
    for (auto& x : w)
      if (x == 0.0) x = 1.0;
    std::vector<Index> kappa(12);
    std::vector<double> tau(12);
    for (Index j = 0; j < 12; ++j) {
      kappa[j] = w[j] < 0 ? 1 : 0;
      tau[j] = std::abs(w[j]);
    }
    const WTable wt = align_w(w, g);
    const KappaTauTable kt = align_kappa_tau(kappa, tau, 1, g);
    const BudgetVector v = budgets(wt, BudgetStrategy::magnitude);
    for (double alpha : {0.3, 0.8}) {
      const auto a = fvg_filter(wt, alpha, v), b = fvg_multiple(kt, alpha, v);
      CHECK(a.selected == b.selected);
      CHECK(a.thresholds == b.thresholds);
    }
  }
}

TEST_CASE("multiple-knockoff filter hand trace") {
  // One row, M = 2, v = 1, alpha = 1, correction 1: the constraint is
  // (1/2)(1 + #lost >= t) / #won >= t <= 1.
  const auto gs = GroupStructure::singletons(5);
  const KappaTauTable kt = align_kappa_tau({0, 0, 1, 0, 2}, {5, 4, 3, 2, 1}, 2, gs);
  const BudgetVector v{{1.0}, BudgetStrategy::uniform};
  // neg = 2, grid {3, 2, 1, 0}. Grid 3: t = 1 (1 + 2 <= 3): ratio 3/2/3 = 0.5 <= 1.
  const RejectionSet r = fvg_multiple(kt, 1.0, v, 1.0);
  CHECK(r.selected == std::vector<Index>{0, 1, 3});
  CHECK(r.thresholds[0] == 1.0);
  // alpha = 0.4: grid 3 fails (0.5), grid 2 gives t = 2 (1 + 1 <= 2):
  // ratio (1/2)(2)/3 = 1/3 <= 0.4.
  const RejectionSet s = fvg_multiple(kt, 0.4, v, 1.0);
  CHECK(s.selected == std::vector<Index>{0, 1, 3});
  CHECK(s.thresholds[0] == 2.0);
  // alpha = 0.3: grid 1 gives t = 4: ratio (1/2)(1)/2 = 0.25 <= 0.3.
  const RejectionSet u = fvg_multiple(kt, 0.3, v, 1.0);
  CHECK(u.selected == std::vector<Index>{0, 1});
}

TEST_CASE("e-BH") {
  CHECK(ebh({10, 1, 0, 0}, 0.5) == std::vector<Index>{0});
  CHECK(ebh({0, 0, 0}, 0.5).empty());
  CHECK(ebh({2.5, 2.5, 2.5, 0, 2.5}, 1.0) == std::vector<Index>{0, 1, 2, 4});
}

TEST_CASE("e-value filter examples") {
  const WTable one_row = align_w({8, 7, 6, -1, 5}, GroupStructure::singletons(5));
  const EvalueResult r = evalue_filter_detail(one_row, 1.0);
  CHECK(r.e == std::vector<double>{2.5, 2.5, 2.5, 0, 2.5});
  CHECK(r.set.selected == std::vector<Index>{0, 1, 2, 4});
  CHECK(r.set.thresholds[0] == 1.0);
  const EvalueResult none = evalue_filter_detail(align_w({-1, -2, -3}, GroupStructure::singletons(3)), 0.5);
  for (double e : none.e) CHECK(e == 0.0);
  CHECK(none.set.selected.empty());
}

TEST_CASE("e-value filter matches its oracle") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 500; ++rep) {
    const auto gs = random_groups(15, 4, rng);
    const auto w = random_w(15, 7, rng, 0.35);
    for (double alpha : {0.2, 0.5, 1.0}) {
      std::vector<double> e;
      const auto want = oracle::evalue(w, gs.groups(), alpha, &e);
      const EvalueResult got = evalue_filter_detail(align_w(w, gs), alpha);
      CHECK(got.set.selected == want);
      REQUIRE(got.e.size() == e.size());
      for (Index j = 0; j < e.size(); ++j) CHECK(got.e[j] == doctest::Approx(e[j]));
    }
  }
}

TEST_CASE("invalid parameters") {
  const WTable wt = align_w({1, 2}, GroupStructure::singletons(2));
  const BudgetVector v = budgets(wt, BudgetStrategy::magnitude);
  CHECK_THROWS_AS(fvg_filter(wt, 0.0, v), ValidationError);
  CHECK_THROWS_AS(fvg_filter(wt, 0.1, v, 0.0), ValidationError);
  CHECK_THROWS_AS(fvg_filter(wt, 0.1, BudgetVector{{0.5, 0.5}, BudgetStrategy::uniform}), ValidationError);
  CHECK_THROWS_AS(knockoff_plus({1, 2}, -0.1), ValidationError);
}
