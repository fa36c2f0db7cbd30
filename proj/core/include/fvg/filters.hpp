#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fvg/types.hpp"

namespace fvg {

inline constexpr double kDefaultCorrection = 1.93;

enum class BudgetStrategy { magnitude, magnitude_over_l, uniform };

std::string to_string(BudgetStrategy s);
BudgetStrategy budget_strategy_from_string(const std::string& s);

/// Share v_l of the FDP estimate allotted to alignment row l; sums to 1.
struct BudgetVector {
  std::vector<double> v;
  BudgetStrategy strategy = BudgetStrategy::magnitude;
};

/// v_l proportional to the row sum of |W| (magnitude), to that sum divided by
/// l (magnitude_over_l, l 1-based), or 1/L (uniform). All-zero magnitudes
/// fall back to uniform.
BudgetVector budgets(const WTable& wt, BudgetStrategy strategy);
BudgetVector budgets(const KappaTauTable& kt, BudgetStrategy strategy);
BudgetVector budgets_from_row_sums(const std::vector<double>& row_sums, BudgetStrategy strategy);

/// Knockoff+ threshold on individual statistics.
RejectionSet knockoff_plus(const std::vector<double>& w, double alpha);

/// Knockoff+ applied to group statistics; `selected` holds group indices.
RejectionSet group_filter(const std::vector<double>& w_group, double alpha);

/// Single threshold t minimizing over {|W_j| : W_j != 0} subject to
/// (phi(t) + #{W <= -t}) / (1 v #{W >= t}) <= alpha, where phi(t) is the
/// number of alignment rows holding some |W| >= t. No FDR guarantee.
RejectionSet naive_fvg(const WTable& wt, double alpha);

/// Row-threshold filter driven by a descending grid of budget multiples.
///
/// For each grid value, row l takes the smallest threshold t in its observed
/// magnitudes with (1 + #{j in C_l : W_j <= -t}) / v_l <= grid; the loop
/// stops at the first grid value where every active row satisfies
/// (1 + #{j in C_l : W_j <= -t_l}) / (1 v total rejections) <= v_l alpha / correction.
/// Rows with v_l = 0 never reject.
RejectionSet fvg_filter(const WTable& wt, double alpha, const BudgetVector& budgets,
                        double correction = kDefaultCorrection);

/// Multiple-knockoff counterpart: kappa != 0 plays the role of a negative
/// sign, tau of |W|, and the row ratio is scaled by 1/M.
RejectionSet fvg_multiple(const KappaTauTable& kt, double alpha, const BudgetVector& budgets,
                          double correction = kDefaultCorrection);

struct EvalueResult {
  RejectionSet set;
  std::vector<double> e;
};

/// Per-row knockoff e-values at level alpha/2 followed by e-BH at alpha.
EvalueResult evalue_filter_detail(const WTable& wt, double alpha);
RejectionSet evalue_filter(const WTable& wt, double alpha);

/// e-BH: J = max{J : e_(J) >= p / (alpha J)}; selects {j : e_j >= e_(J)}.
std::vector<Index> ebh(const std::vector<double>& e, double alpha);

/// Exact rational value, used by the FDP-estimator identity checks.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool operator==(const Fraction& o) const { return num * o.den == o.num * den; }
};

/// (phi(t) + #{W <= -t}) / (1 v #{W >= t}).
Fraction naive_fdp_closed_form(const WTable& wt, double t);

/// sum_{l <= phi(t)} (1 v |R_l|)/(1 v |R|) * (1 + #{j in C_l : W_j <= -t}) / (1 v |R_l|).
Fraction naive_fdp_row_sum(const WTable& wt, double t);

/// Left-hand sides of the per-row constraints for given row thresholds
/// (0 for inactive rows).
std::vector<double> fvg_row_ratios(const WTable& wt, const std::vector<double>& thresholds);

} // namespace fvg
