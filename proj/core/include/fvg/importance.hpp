#pragma once

#include <span>
#include <string>
#include <vector>

#include "fvg/regression.hpp"
#include "fvg/types.hpp"

namespace fvg {

enum class ScoreFamily { marginal, joint_lasso, residual_corr, separate_lasso, combined };

std::string to_string(ScoreFamily f);
ScoreFamily score_family_from_string(const std::string& s);

/// Centered Pearson correlation with (n-1) normalization; 0 when either
/// vector is constant.
double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Options shared by the lasso-based families.
struct ScoreOptions {
  LambdaRule lambda = LambdaRule::cv(5, 0);
  Family family = Family::linear;
  LassoOptions lasso;
};

// Every family accepts M >= 1 knockoff copies; ScorePair::values holds
// (T_j, T_j^(1), ..., T_j^(M)).

/// T = |rho(X_j, y)|, T^(m) = |rho(X~^(m)_j, y)|.
Scores scores_marginal(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y);

/// One lasso on [X, X~^(1), ..., X~^(M)]; T = |standardized coefficient|.
/// The fit is returned through `fit_out` when given.
Scores scores_joint_lasso(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                          const ScoreOptions& opts, LassoFit* fit_out = nullptr);

/// Per group B_k: lasso on every column outside B_k (all copies), then
/// correlations of X_j and its copies with the lasso residual. K fits.
Scores scores_residual_corr(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                            const GroupStructure& gs, const ScoreOptions& opts);

/// Per feature j in B_k: lasso on {X_j and its copies} plus every column
/// outside B_k; T = |coefficients of X_j and its copies|. p fits.
Scores scores_separate_lasso(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                             const GroupStructure& gs, const ScoreOptions& opts);

/// Quantities behind the combined scores.
struct CombinedScoreContext {
  Matrix psi;
  Vector gamma_hat; // (b_j + b~_j) / 2
  Vector delta_hat; // (b_j - b~_j) / 2, diagnostic only
  Vector g;
};

/// g_j = gamma_j + sum_{j' in B_k, j' != j} (A_{j j'} / A_{j j}) gamma_{j'} where
/// A = Psi_{BB} - Psi_{B,-B} Psi_{-B,-B}^{-1} Psi_{-B,B} for B = B_k.
/// One factorization of Psi_{-B,-B} per group. Throws NumericalError naming j
/// when A_{jj} <= 1e-12.
Vector compute_g(const Vector& gamma_hat, const Matrix& psi, const GroupStructure& gs);

/// T = |g_j| |rho(X_j, y)|, T~ = |g_j| |rho(X~_j, y)| with g from one joint
/// lasso fit. Single knockoff copy only.
Scores scores_combined(const Matrix& x, const Matrix& x_knock, const Vector& y, const GroupStructure& gs,
                       const Matrix& psi, const ScoreOptions& opts, CombinedScoreContext* ctx = nullptr);

/// Dispatches on `family`. `psi` is required only for the combined family.
Scores compute_scores(ScoreFamily family, const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                      const GroupStructure& gs, const ScoreOptions& opts, const Matrix* psi = nullptr);

/// W_j = sign(T_j - T~_j) * max(T_j, T~_j).
std::vector<double> w_statistics(const Scores& scores);

/// kappa_j = argmax_m T^(m) (smallest m on ties), tau_j = max - median of the
/// remaining M values; aligned by descending tau.
KappaTauTable kappa_tau(const Scores& scores, const GroupStructure& gs);

/// Group-level pair (sum over B_k of T_j, sum of T~_j).
Scores group_scores(const Scores& scores, const GroupStructure& gs);

} // namespace fvg
