#include "fvg/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fvg/error.hpp"

namespace fvg {

std::string to_string(BudgetStrategy s) {
  switch (s) {
  case BudgetStrategy::magnitude: return "magnitude";
  case BudgetStrategy::magnitude_over_l: return "magnitude_over_l";
  case BudgetStrategy::uniform: return "uniform";
  }
  return "unknown";
}

BudgetStrategy budget_strategy_from_string(const std::string& s) {
  if (s == "magnitude") return BudgetStrategy::magnitude;
  if (s == "magnitude_over_l" || s == "magnitude-over-l") return BudgetStrategy::magnitude_over_l;
  if (s == "uniform") return BudgetStrategy::uniform;
  throw ValidationError("unknown budget strategy '" + s + "'");
}

BudgetVector budgets_from_row_sums(const std::vector<double>& row_sums, BudgetStrategy strategy) {
  require(!row_sums.empty(), "budgets need at least one row");
  const Index rows = row_sums.size();
  BudgetVector b{std::vector<double>(rows, 1.0 / static_cast<double>(rows)), strategy};
  if (strategy == BudgetStrategy::uniform) return b;
  std::vector<double> raw(rows);
  for (Index l = 0; l < rows; ++l) {
    require(std::isfinite(row_sums[l]) && row_sums[l] >= 0.0, "row magnitude sums must be finite and >= 0");
    raw[l] = strategy == BudgetStrategy::magnitude ? row_sums[l] : row_sums[l] / static_cast<double>(l + 1);
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (!(total > 0.0)) return b;
  for (Index l = 0; l < rows; ++l) b.v[l] = raw[l] / total;
  return b;
}

BudgetVector budgets(const WTable& wt, BudgetStrategy strategy) {
  std::vector<double> sums(wt.row_count(), 0.0);
  for (Index l = 0; l < wt.row_count(); ++l)
    for (Index j : wt.row(l)) sums[l] += std::abs(wt.w[j]);
  return budgets_from_row_sums(sums, strategy);
}

BudgetVector budgets(const KappaTauTable& kt, BudgetStrategy strategy) {
  std::vector<double> sums(kt.row_count(), 0.0);
  for (Index l = 0; l < kt.row_count(); ++l)
    for (Index j : kt.row(l)) sums[l] += kt.tau[j];
  return budgets_from_row_sums(sums, strategy);
}

namespace {

void check_alpha(double alpha) { require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive"); }

void check_w(const std::vector<double>& w) {
  for (double v : w) require(std::isfinite(v), "feature statistics must be finite");
}

// Sorted distinct nonzero magnitudes.
std::vector<double> candidate_thresholds(const std::vector<double>& w) {
  std::vector<double> t;
  for (double v : w)
    if (v != 0.0) t.push_back(std::abs(v));
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

// Counts of W >= t and W <= -t for any t > 0 by binary search.
struct SignCounts {
  std::vector<double> pos; // ascending magnitudes of W > 0
  std::vector<double> neg; // ascending magnitudes of W < 0

  explicit SignCounts(const std::vector<double>& w) {
    for (double v : w) {
      if (v > 0.0) pos.push_back(v);
      if (v < 0.0) neg.push_back(-v);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
  }
  static Index at_least(const std::vector<double>& a, double t) {
    return static_cast<Index>(a.end() - std::lower_bound(a.begin(), a.end(), t));
  }
  Index positives(double t) const { return at_least(pos, t); }
  Index negatives(double t) const { return at_least(neg, t); }
};

RejectionSet knockoff_plus_impl(const std::vector<double>& w, double alpha, Method tag) {
  check_alpha(alpha);
  check_w(w);
  RejectionSet r;
  r.method = tag;
  r.alpha = alpha;
  const SignCounts counts(w);
  double chosen = kInf;
  for (double t : candidate_thresholds(w)) {
    const Index pos = counts.positives(t), neg = counts.negatives(t);
    const double ratio = (1.0 + static_cast<double>(neg)) / static_cast<double>(std::max<Index>(1, pos));
    if (ratio <= alpha) {
      chosen = t;
      r.fdp_hat = ratio;
      break;
    }
  }
  r.thresholds = {chosen};
  for (Index j = 0; j < w.size(); ++j)
    if (w[j] >= chosen) r.selected.push_back(j);
  return r;
}

// Per-row view shared by the W and (kappa, tau) row filters: an entry is a
// "negative" (W < 0, or kappa != 0) or a "positive" (W > 0, or kappa == 0)
// with magnitude |W| or tau.
struct RowEntry {
  double mag;
  bool negative;
  bool positive;
};

struct RowView {
  std::vector<double> candidates; // ascending distinct magnitudes > 0
  std::vector<Index> neg_ge;      // negatives with magnitude >= candidates[i]
  std::vector<Index> pos_ge;      // positives with magnitude >= candidates[i]
  Index negatives = 0;

  // Index of t among the candidates; thresholds are always candidates or +inf.
  Index count_neg(double t) const { return t == kInf ? 0 : neg_ge[slot(t)]; }
  Index count_pos(double t) const { return t == kInf ? 0 : pos_ge[slot(t)]; }

private:
  Index slot(double t) const {
    return static_cast<Index>(std::lower_bound(candidates.begin(), candidates.end(), t) - candidates.begin());
  }
};

RowView make_row(std::vector<RowEntry> entries) {
  RowView r;
  for (auto& e : entries) {
    if (e.negative) ++r.negatives;
    if (e.mag > 0.0) r.candidates.push_back(e.mag);
  }
  std::sort(r.candidates.begin(), r.candidates.end());
  r.candidates.erase(std::unique(r.candidates.begin(), r.candidates.end()), r.candidates.end());
  const Index m = r.candidates.size();
  r.neg_ge.assign(m + 1, 0);
  r.pos_ge.assign(m + 1, 0);
  for (auto& e : entries) {
    if (!(e.mag > 0.0)) continue;
    const Index i = static_cast<Index>(std::lower_bound(r.candidates.begin(), r.candidates.end(), e.mag) -
                                       r.candidates.begin());
    r.neg_ge[i] += e.negative;
    r.pos_ge[i] += e.positive;
  }
  for (Index i = m; i-- > 0;) {
    r.neg_ge[i] += r.neg_ge[i + 1];
    r.pos_ge[i] += r.pos_ge[i + 1];
  }
  return r;
}

RejectionSet grid_filter(const std::vector<RowView>& rows, const std::vector<double>& v, double alpha,
                         double correction, double ratio_scale) {
  check_alpha(alpha);
  require(correction > 0.0 && std::isfinite(correction), "correction must be positive");
  require(v.size() == rows.size(), "budget length " + std::to_string(v.size()) + " does not match " +
                                       std::to_string(rows.size()) + " alignment rows");
  double total = 0.0;
  for (double b : v) {
    require(std::isfinite(b) && b >= 0.0, "budgets must be nonnegative");
    total += b;
  }
  require(std::abs(total - 1.0) <= 1e-9, "budgets must sum to 1");

  std::vector<double> grid{0.0};
  for (Index l = 0; l < rows.size(); ++l) {
    if (!(v[l] > 0.0)) continue;
    for (Index m = 1; m <= rows[l].negatives + 1; ++m) grid.push_back(static_cast<double>(m) / v[l]);
  }
  std::sort(grid.begin(), grid.end(), std::greater<>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const Index L = rows.size();
  std::vector<double> t(L, kInf);
  RejectionSet out;
  out.alpha = alpha;
  out.budgets = v;
  for (double g : grid) {
    for (Index l = 0; l < L; ++l) {
      t[l] = kInf;
      if (!(v[l] > 0.0)) continue;
      // The negative count falls as t grows, so the qualifying candidates
      // form a suffix; binary-search its first element.
      const RowView& row = rows[l];
      Index lo = 0, hi = row.candidates.size();
      while (lo < hi) {
        const Index mid = lo + (hi - lo) / 2;
        if ((1.0 + static_cast<double>(row.neg_ge[mid])) / v[l] <= g) hi = mid;
        else lo = mid + 1;
      }
      if (lo < row.candidates.size()) t[l] = row.candidates[lo];
    }
    Index pos = 0;
    for (Index l = 0; l < L; ++l) pos += rows[l].count_pos(t[l]);
    const double denom = static_cast<double>(std::max<Index>(1, pos));
    bool ok = true;
    double fdp = 0.0;
    for (Index l = 0; l < L; ++l) {
      if (t[l] == kInf) continue; // inactive row
      const double ratio = ratio_scale * (1.0 + static_cast<double>(rows[l].count_neg(t[l]))) / denom;
      fdp += ratio;
      if (ratio > v[l] * alpha / correction) ok = false;
    }
    if (ok) {
      out.fdp_hat = fdp;
      break;
    }
  }
  out.thresholds = t;
  return out;
}

} // namespace

RejectionSet knockoff_plus(const std::vector<double>& w, double alpha) {
  return knockoff_plus_impl(w, alpha, Method::knockoff_plus);
}

RejectionSet group_filter(const std::vector<double>& w_group, double alpha) {
  return knockoff_plus_impl(w_group, alpha, Method::group_filter);
}

namespace {

// phi(t) counts the rows holding some |W| >= t.
std::vector<double> row_maxima(const WTable& wt) {
  std::vector<double> m;
  for (Index l = 0; l < wt.row_count(); ++l) {
    double best = 0.0;
    for (Index j : wt.row(l)) best = std::max(best, std::abs(wt.w[j]));
    m.push_back(best);
  }
  std::sort(m.begin(), m.end());
  return m;
}

Index phi(const std::vector<double>& sorted_maxima, double t) { return SignCounts::at_least(sorted_maxima, t); }

// Direct definition: one past the last row with some |W| >= t.
Index phi(const WTable& wt, double t) {
  Index rows = 0;
  for (Index l = 0; l < wt.row_count(); ++l)
    for (Index j : wt.row(l))
      if (std::abs(wt.w[j]) >= t) {
        rows = l + 1;
        break;
      }
  return rows;
}

} // namespace

RejectionSet naive_fvg(const WTable& wt, double alpha) {
  check_alpha(alpha);
  check_w(wt.w);
  RejectionSet r;
  r.method = Method::naive;
  r.alpha = alpha;
  const SignCounts counts(wt.w);
  const std::vector<double> maxima = row_maxima(wt);
  double chosen = kInf;
  for (double t : candidate_thresholds(wt.w)) {
    const Index pos = counts.positives(t), neg = counts.negatives(t);
    const double ratio = static_cast<double>(phi(maxima, t) + neg) / static_cast<double>(std::max<Index>(1, pos));
    if (ratio <= alpha) {
      chosen = t;
      r.fdp_hat = ratio;
      break;
    }
  }
  r.thresholds = {chosen};
  for (Index j = 0; j < wt.p(); ++j)
    if (wt.w[j] >= chosen) r.selected.push_back(j);
  return r;
}

RejectionSet fvg_filter(const WTable& wt, double alpha, const BudgetVector& b, double correction) {
  check_w(wt.w);
  std::vector<RowView> rows;
  for (Index l = 0; l < wt.row_count(); ++l) {
    std::vector<RowEntry> e;
    for (Index j : wt.row(l)) e.push_back({std::abs(wt.w[j]), wt.w[j] < 0.0, wt.w[j] > 0.0});
    rows.push_back(make_row(std::move(e)));
  }
  RejectionSet r = grid_filter(rows, b.v, alpha, correction, 1.0);
  r.method = Method::fvg;
  for (Index j = 0; j < wt.p(); ++j)
    if (wt.w[j] > 0.0 && wt.w[j] >= r.thresholds[wt.alignment.row_of[j]]) r.selected.push_back(j);
  return r;
}

RejectionSet fvg_multiple(const KappaTauTable& kt, double alpha, const BudgetVector& b, double correction) {
  std::vector<RowView> rows;
  for (Index l = 0; l < kt.row_count(); ++l) {
    std::vector<RowEntry> e;
    for (Index j : kt.row(l)) e.push_back({kt.tau[j], kt.kappa[j] != 0, kt.kappa[j] == 0});
    rows.push_back(make_row(std::move(e)));
  }
  RejectionSet r = grid_filter(rows, b.v, alpha, correction, 1.0 / static_cast<double>(kt.copies));
  r.method = Method::multiple;
  for (Index j = 0; j < kt.p(); ++j)
    if (kt.kappa[j] == 0 && kt.tau[j] > 0.0 && kt.tau[j] >= r.thresholds[kt.alignment.row_of[j]])
      r.selected.push_back(j);
  return r;
}

std::vector<Index> ebh(const std::vector<double>& e, double alpha) {
  check_alpha(alpha);
  const Index p = e.size();
  for (double v : e) require(std::isfinite(v) && v >= 0.0, "e-values must be finite and nonnegative");
  std::vector<double> sorted = e;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Index jhat = 0;
  for (Index j = 1; j <= p; ++j)
    if (sorted[j - 1] >= static_cast<double>(p) / (alpha * static_cast<double>(j))) jhat = j;
  std::vector<Index> sel;
  if (jhat == 0) return sel;
  const double cut = sorted[jhat - 1];
  for (Index j = 0; j < p; ++j)
    if (e[j] >= cut) sel.push_back(j);
  return sel;
}

EvalueResult evalue_filter_detail(const WTable& wt, double alpha) {
  check_alpha(alpha);
  check_w(wt.w);
  EvalueResult out;
  out.e.assign(wt.p(), 0.0);
  out.set.method = Method::evalue;
  out.set.alpha = alpha;
  for (Index l = 0; l < wt.row_count(); ++l) {
    std::vector<double> row_w;
    for (Index j : wt.row(l)) row_w.push_back(wt.w[j]);
    double t_row = kInf;
    Index neg_at = 0;
    for (double t : candidate_thresholds(row_w)) {
      Index pos = 0, neg = 0;
      for (double v : row_w) {
        if (v >= t) ++pos;
        if (v <= -t) ++neg;
      }
      if ((1.0 + static_cast<double>(neg)) / static_cast<double>(std::max<Index>(1, pos)) <= alpha / 2.0) {
        t_row = t;
        neg_at = neg;
        break;
      }
    }
    out.set.thresholds.push_back(t_row);
    if (t_row == kInf) continue;
    const double pl = static_cast<double>(wt.row(l).size());
    for (Index j : wt.row(l))
      if (wt.w[j] >= t_row) out.e[j] = pl / (1.0 + static_cast<double>(neg_at));
  }
  out.set.selected = ebh(out.e, alpha);
  return out;
}

RejectionSet evalue_filter(const WTable& wt, double alpha) { return evalue_filter_detail(wt, alpha).set; }

namespace {

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

Fraction reduce(Fraction f) {
  const std::int64_t g = gcd64(f.num, f.den);
  if (g > 1) f.num /= g, f.den /= g;
  return f;
}

Fraction add(Fraction a, Fraction b) { return reduce({a.num * b.den + b.num * a.den, a.den * b.den}); }
Fraction mul(Fraction a, Fraction b) { return reduce({a.num * b.num, a.den * b.den}); }

} // namespace

Fraction naive_fdp_closed_form(const WTable& wt, double t) {
  require(t > 0.0, "threshold must be positive");
  std::int64_t pos = 0, neg = 0;
  for (double v : wt.w) {
    if (v >= t) ++pos;
    if (v <= -t) ++neg;
  }
  return reduce({static_cast<std::int64_t>(phi(wt, t)) + neg, std::max<std::int64_t>(1, pos)});
}

Fraction naive_fdp_row_sum(const WTable& wt, double t) {
  require(t > 0.0, "threshold must be positive");
  std::int64_t total_pos = 0;
  for (double v : wt.w)
    if (v >= t) ++total_pos;
  const std::int64_t denom = std::max<std::int64_t>(1, total_pos);
  Fraction sum{0, 1};
  const Index rows = phi(wt, t);
  for (Index l = 0; l < rows; ++l) {
    std::int64_t pos = 0, neg = 0;
    for (Index j : wt.row(l)) {
      if (wt.w[j] >= t) ++pos;
      if (wt.w[j] <= -t) ++neg;
    }
    const std::int64_t rl = std::max<std::int64_t>(1, pos);
    sum = add(sum, mul(Fraction{rl, denom}, Fraction{1 + neg, rl}));
  }
  return sum;
}

std::vector<double> fvg_row_ratios(const WTable& wt, const std::vector<double>& thresholds) {
  require(thresholds.size() == wt.row_count(), "one threshold per alignment row is required");
  Index pos = 0;
  for (Index l = 0; l < wt.row_count(); ++l)
    for (Index j : wt.row(l))
      if (wt.w[j] > 0.0 && wt.w[j] >= thresholds[l]) ++pos;
  std::vector<double> out(wt.row_count(), 0.0);
  for (Index l = 0; l < wt.row_count(); ++l) {
    if (thresholds[l] == kInf) continue;
    Index neg = 0;
    for (Index j : wt.row(l))
      if (wt.w[j] < 0.0 && -wt.w[j] >= thresholds[l]) ++neg;
    out[l] = (1.0 + static_cast<double>(neg)) / static_cast<double>(std::max<Index>(1, pos));
  }
  return out;
}

} // namespace fvg
