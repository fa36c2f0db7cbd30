#pragma once

#include <cstdint>
#include <vector>

#include "fvg/types.hpp"

namespace fvg {

enum class Family { linear, logistic };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Column centering and scaling applied before fitting. A zero scale marks a
/// constant column, which is excluded from the fit (coefficient fixed at 0).
struct Standardization {
  Vector mean;
  Vector scale;
};

struct LassoFit {
  double intercept = 0.0; // original scale
  Vector coef;            // original scale
  Vector coef_std;        // standardized scale; what importance scores compare
  double lambda = 0.0;
  Family family = Family::linear;
  Standardization standardization;
  int sweeps = 0;
  bool converged = false;
};

struct LassoOptions {
  double tol = 1e-8;       // max standardized coefficient change per sweep
  int max_sweeps = 100000;
  /// When set, the penalized objective is appended after every sweep.
  std::vector<double>* objective_trace = nullptr;
};

/// Lasso on standardized columns (mean 0, variance 1 with 1/n normalization).
///
/// linear:   (1/2n) ||y - b0 - X b||^2 + lambda ||b||_1, via covariance-update
///           coordinate descent on the Gram matrix.
/// logistic: (1/n) negative log-likelihood + lambda ||b||_1 with unpenalized
///           intercept, via proximal Newton (IRLS outer, coordinate descent inner).
LassoFit lasso_fit(const Matrix& design, const Vector& y, double lambda, Family family,
                   const LassoOptions& opts = {});

/// Fits a decreasing sequence of penalties with warm starts.
std::vector<LassoFit> lasso_path(const Matrix& design, const Vector& y, const std::vector<double>& lambdas,
                                 Family family, const LassoOptions& opts = {});

/// Smallest penalty at which every coefficient is zero.
double lambda_max(const Matrix& design, const Vector& y, Family family);

/// 100 log-spaced values from lambda_max down to 1e-3 * lambda_max.
std::vector<double> lambda_grid(double lmax, Index count = 100, double ratio = 1e-3);

struct CvResult {
  double lambda = 0.0;
  LassoFit fit;
  std::vector<double> lambdas;
  std::vector<double> cv_error; // mean held-out deviance per lambda
};

/// K-fold cross-validation over lambda_grid; picks the minimizer of mean
/// held-out deviance (MSE for linear, binomial deviance for logistic).
CvResult lasso_cv(const Matrix& design, const Vector& y, Family family, Index folds, std::uint64_t seed,
                  const LassoOptions& opts = {});

/// How a score family chooses its penalty.
struct LambdaRule {
  enum class Kind { fixed, cv };
  Kind kind = Kind::cv;
  double value = 0.0;
  Index folds = 5;
  std::uint64_t seed = 0;

  static LambdaRule fixed(double lambda) { return {Kind::fixed, lambda, 0, 0}; }
  static LambdaRule cv(Index folds, std::uint64_t seed) { return {Kind::cv, 0.0, folds, seed}; }
};

LassoFit fit_with_rule(const Matrix& design, const Vector& y, Family family, const LambdaRule& rule,
                       const LassoOptions& opts = {});

/// Linear predictor b0 + X b (original scale).
Vector lasso_linear_predictor(const LassoFit& fit, const Matrix& design);

/// y - yhat (linear) or y - phat (logistic).
Vector lasso_residuals(const LassoFit& fit, const Matrix& design, const Vector& y);

/// Largest KKT violation of the standardized problem:
/// |grad_j + lambda sign(b_j)| for active j, max(0, |grad_j| - lambda) otherwise.
double kkt_violation(const LassoFit& fit, const Matrix& design, const Vector& y);

/// Penalized objective of `fit` on the standardized problem.
double lasso_objective(const LassoFit& fit, const Matrix& design, const Vector& y);

/// Mean deviance of `fit` on (design, y): squared error or binomial deviance.
double mean_deviance(const LassoFit& fit, const Matrix& design, const Vector& y);

} // namespace fvg
