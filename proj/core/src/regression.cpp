#include "fvg/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fvg/error.hpp"
#include "fvg/rng.hpp"

namespace fvg {

std::string to_string(Family f) { return f == Family::linear ? "linear" : "logistic"; }

Family family_from_string(const std::string& s) {
  if (s == "linear" || s == "gaussian") return Family::linear;
  if (s == "logistic" || s == "binomial") return Family::logistic;
  throw ValidationError("unknown regression family '" + s + "'");
}

namespace {

double soft_threshold(double z, double l) {
  if (z > l) return z - l;
  if (z < -l) return z + l;
  return 0.0;
}

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

void check_inputs(const Matrix& design, const Vector& y, double lambda, Family family) {
  require(design.cols() >= 1, "design needs at least one column");
  require(design.rows() == y.size(), "design has " + std::to_string(design.rows()) + " rows, y has " +
                                         std::to_string(y.size()));
  require(design.rows() >= 2, "lasso needs at least two samples");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
  require(design.allFinite() && y.allFinite(), "non-finite value in lasso input");
  if (family == Family::logistic) {
    bool zero = false, one = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      require(y(i) == 0.0 || y(i) == 1.0, "logistic response must be coded 0/1");
      (y(i) == 0.0 ? zero : one) = true;
    }
    require(zero && one, "logistic response needs both classes");
  }
}

Standardization standardize(const Matrix& x) {
  Standardization st;
  st.mean = x.colwise().mean().transpose();
  st.scale.resize(x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - st.mean(j)).square().sum() / n;
    const double sd = std::sqrt(ss);
    st.scale(j) = sd > 1e-12 * std::max(1.0, std::abs(st.mean(j))) ? sd : 0.0;
  }
  return st;
}

Matrix apply(const Standardization& st, const Matrix& x) {
  Matrix xs(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (st.scale(j) > 0.0)
      xs.col(j) = (x.col(j).array() - st.mean(j)) / st.scale(j);
    else
      xs.col(j).setZero();
  }
  return xs;
}

// Standardized linear problem: 1/2 b'Gb - c'b + lambda |b|_1 (+ const).
struct GramProblem {
  Matrix gram;
  Vector c;
  double y_mean = 0.0;
};

GramProblem linear_problem(const Matrix& xs, const Vector& y) {
  const double n = static_cast<double>(xs.rows());
  GramProblem gp;
  gp.y_mean = y.mean();
  gp.gram = Matrix::Zero(xs.cols(), xs.cols());
  gp.gram.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose(), 1.0 / n);
  gp.gram = gp.gram.selfadjointView<Eigen::Lower>();
  gp.c = xs.transpose() * (y.array() - gp.y_mean).matrix() / n;
  return gp;
}

// Cyclic coordinate descent with covariance updates. `grad` holds c - G b and
// is kept consistent with `beta` on exit.
void cd_gram(const GramProblem& gp, double lambda, Vector& beta, Vector& grad, const LassoOptions& opts,
             int& sweeps, bool& converged) {
  const Eigen::Index q = beta.size();
  auto objective = [&] { return -0.5 * beta.dot(gp.c + grad) + lambda * beta.lpNorm<1>(); };
  auto update = [&](Eigen::Index j) {
    const double gjj = gp.gram(j, j);
    if (!(gjj > 0.0)) return 0.0;
    const double z = grad(j) + gjj * beta(j);
    const double nb = soft_threshold(z, lambda) / gjj;
    const double delta = nb - beta(j);
    if (delta != 0.0) {
      grad.noalias() -= gp.gram.col(j) * delta;
      beta(j) = nb;
    }
    return std::abs(delta);
  };

  // Feature-sign refinement on the current support: step toward the exact
  // minimizer with the current signs, stopping where the first coefficient
  // reaches zero, drop it and repeat. Each segment stays on one orthant face,
  // where the objective is a convex quadratic decreasing toward that
  // minimizer, so no step increases it.
  auto newton = [&](const std::vector<Eigen::Index>& active) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j : active)
      if (beta(j) != 0.0) support.push_back(j);
    while (!support.empty()) {
      const auto a = static_cast<Eigen::Index>(support.size());
      Matrix gaa(a, a);
      Vector rhs(a);
      for (Eigen::Index r = 0; r < a; ++r) {
        for (Eigen::Index k = 0; k < a; ++k) gaa(r, k) = gp.gram(support[r], support[k]);
        rhs(r) = gp.c(support[r]) - lambda * (beta(support[r]) > 0 ? 1.0 : -1.0);
      }
      Eigen::LLT<Matrix> llt(gaa);
      if (llt.info() != Eigen::Success) return;
      const Vector sol = llt.solve(rhs);
      if (!sol.allFinite()) return;
      double t = 1.0;
      Eigen::Index hit = -1;
      for (Eigen::Index r = 0; r < a; ++r) {
        const double b = beta(support[r]);
        if (sol(r) == 0.0 || (sol(r) > 0) != (b > 0)) {
          const double tr = b / (b - sol(r));
          if (tr < t) t = tr, hit = r;
        }
      }
      for (Eigen::Index r = 0; r < a; ++r) {
        const double nb = r == hit ? 0.0 : beta(support[r]) + t * (sol(r) - beta(support[r]));
        const double delta = nb - beta(support[r]);
        if (delta != 0.0) grad.noalias() -= gp.gram.col(support[r]) * delta;
        beta(support[r]) = nb;
      }
      if (hit < 0) return;
      support.erase(support.begin() + hit);
    }
  };

  converged = false;
  std::vector<Eigen::Index> active;
  while (sweeps < opts.max_sweeps) {
    double dmax = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) dmax = std::max(dmax, update(j));
    ++sweeps;
    if (opts.objective_trace) opts.objective_trace->push_back(objective());
    if (dmax < opts.tol) {
      converged = true;
      break;
    }
    active.clear();
    for (Eigen::Index j = 0; j < q; ++j)
      if (beta(j) != 0.0) active.push_back(j);
    for (int inner = 1; sweeps < opts.max_sweeps; ++inner) {
      double amax = 0.0;
      for (Eigen::Index j : active) amax = std::max(amax, update(j));
      ++sweeps;
      if (opts.objective_trace) opts.objective_trace->push_back(objective());
      if (amax < opts.tol) break;
      if (inner % 4 == 1) newton(active);
    }
  }
}

double logistic_nll(const Vector& eta, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // log(1 + exp(eta)) - y * eta, computed stably
    const double e = eta(i);
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    s += softplus - y(i) * e;
  }
  return s / static_cast<double>(y.size());
}

// Proximal Newton for the standardized logistic lasso with backtracking on the
// outer step so that the penalized objective never increases.
void logistic_solve(const Matrix& xs, const Vector& y, double lambda, Vector& beta, double& b0,
                    const LassoOptions& opts, int& sweeps, bool& converged) {
  const Eigen::Index n = xs.rows(), q = xs.cols();
  const double nd = static_cast<double>(n);
  auto penalized = [&](const Vector& b, double a) {
    Vector eta = (xs * b).array() + a;
    return logistic_nll(eta, y) + lambda * b.lpNorm<1>();
  };

  double current = penalized(beta, b0);
  converged = false;
  Vector w(n), r(n), v(q);
  std::vector<Eigen::Index> active;
  while (sweeps < opts.max_sweeps) {
    const Vector eta = (xs * beta).array() + b0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = sigmoid(eta(i));
      w(i) = std::max(pi * (1.0 - pi), 1e-5);
      r(i) = (y(i) - pi) / w(i);
    }
    for (Eigen::Index j = 0; j < q; ++j) v(j) = (w.array() * xs.col(j).array().square()).sum() / nd;
    const double wsum = w.sum();

    Vector nb = beta;
    double na = b0;
    auto update = [&](Eigen::Index j) {
      if (!(v(j) > 0.0)) return 0.0;
      const double g = (w.array() * xs.col(j).array() * r.array()).sum() / nd;
      const double val = soft_threshold(g + v(j) * nb(j), lambda) / v(j);
      const double delta = val - nb(j);
      if (delta != 0.0) {
        r.noalias() -= xs.col(j) * delta;
        nb(j) = val;
      }
      return std::abs(delta);
    };
    auto update_intercept = [&] {
      const double d = (w.array() * r.array()).sum() / wsum;
      na += d;
      r.array() -= d;
      return std::abs(d);
    };

    // Inner weighted lasso on the quadratic model.
    bool inner_done = false;
    while (!inner_done && sweeps < opts.max_sweeps) {
      double dmax = update_intercept();
      for (Eigen::Index j = 0; j < q; ++j) dmax = std::max(dmax, update(j));
      ++sweeps;
      if (dmax < opts.tol) break;
      active.clear();
      for (Eigen::Index j = 0; j < q; ++j)
        if (nb(j) != 0.0) active.push_back(j);
      while (sweeps < opts.max_sweeps) {
        double amax = update_intercept();
        for (Eigen::Index j : active) amax = std::max(amax, update(j));
        ++sweeps;
        if (amax < opts.tol) break;
      }
    }

    // Backtracking along the proximal Newton direction.
    Vector step = nb - beta;
    double astep = na - b0;
    double t = 1.0, trial = penalized(nb, na);
    while (trial > current && t > 1e-10) {
      t *= 0.5;
      trial = penalized(beta + t * step, b0 + t * astep);
    }
    if (trial > current) trial = current, t = 0.0;
    const double change = std::max(t * (step.size() ? step.cwiseAbs().maxCoeff() : 0.0), t * std::abs(astep));
    beta += t * step;
    b0 += t * astep;
    current = trial;
    if (opts.objective_trace) opts.objective_trace->push_back(current);
    if (change < opts.tol) {
      converged = true;
      break;
    }
  }
}

LassoFit finalize(const Standardization& st, const Vector& beta_std, double intercept_std, double lambda,
                  Family family, int sweeps, bool converged) {
  LassoFit fit;
  fit.family = family;
  fit.lambda = lambda;
  fit.standardization = st;
  fit.coef_std = beta_std;
  fit.coef = Vector::Zero(beta_std.size());
  for (Eigen::Index j = 0; j < beta_std.size(); ++j)
    if (st.scale(j) > 0.0) fit.coef(j) = beta_std(j) / st.scale(j);
  fit.intercept = intercept_std - st.mean.dot(fit.coef);
  fit.sweeps = sweeps;
  fit.converged = converged;
  return fit;
}

// Path fit sharing the standardization and (for linear) the Gram matrix.
std::vector<LassoFit> path_impl(const Matrix& design, const Vector& y, const std::vector<double>& lambdas,
                                Family family, const LassoOptions& opts) {
  const Standardization st = standardize(design);
  const Matrix xs = apply(st, design);
  const Eigen::Index q = design.cols();
  std::vector<LassoFit> fits;
  fits.reserve(lambdas.size());
  Vector beta = Vector::Zero(q);

  if (family == Family::linear) {
    const GramProblem gp = linear_problem(xs, y);
    Vector grad = gp.c;
    for (double lambda : lambdas) {
      int sweeps = 0;
      bool converged = false;
      cd_gram(gp, lambda, beta, grad, opts, sweeps, converged);
      fits.push_back(finalize(st, beta, gp.y_mean, lambda, family, sweeps, converged));
    }
  } else {
    const double ybar = y.mean();
    require(ybar > 0.0 && ybar < 1.0, "logistic response needs both classes");
    double b0 = std::log(ybar / (1.0 - ybar));
    for (double lambda : lambdas) {
      int sweeps = 0;
      bool converged = false;
      logistic_solve(xs, y, lambda, beta, b0, opts, sweeps, converged);
      fits.push_back(finalize(st, beta, b0, lambda, family, sweeps, converged));
    }
  }
  return fits;
}

} // namespace

LassoFit lasso_fit(const Matrix& design, const Vector& y, double lambda, Family family, const LassoOptions& opts) {
  check_inputs(design, y, lambda, family);
  return path_impl(design, y, {lambda}, family, opts).front();
}

std::vector<LassoFit> lasso_path(const Matrix& design, const Vector& y, const std::vector<double>& lambdas,
                                 Family family, const LassoOptions& opts) {
  for (double l : lambdas) check_inputs(design, y, l, family);
  return path_impl(design, y, lambdas, family, opts);
}

double lambda_max(const Matrix& design, const Vector& y, Family family) {
  check_inputs(design, y, 0.0, family);
  const Standardization st = standardize(design);
  const Matrix xs = apply(st, design);
  const Vector centered = (y.array() - y.mean()).matrix();
  return (xs.transpose() * centered).cwiseAbs().maxCoeff() / static_cast<double>(y.size());
}

std::vector<double> lambda_grid(double lmax, Index count, double ratio) {
  require(count >= 1, "lambda grid needs at least one value");
  std::vector<double> g(count);
  if (count == 1) return {lmax};
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (Index i = 0; i < count; ++i) g[i] = lmax * std::exp(step * static_cast<double>(i));
  return g;
}

Vector lasso_linear_predictor(const LassoFit& fit, const Matrix& design) {
  require(design.cols() == fit.coef.size(), "design does not match fit");
  return (design * fit.coef).array() + fit.intercept;
}

Vector lasso_residuals(const LassoFit& fit, const Matrix& design, const Vector& y) {
  require(design.rows() == y.size(), "design and response lengths differ");
  Vector eta = lasso_linear_predictor(fit, design);
  if (fit.family == Family::logistic) eta = eta.unaryExpr([](double e) { return sigmoid(e); });
  return y - eta;
}

double mean_deviance(const LassoFit& fit, const Matrix& design, const Vector& y) {
  const Vector eta = lasso_linear_predictor(fit, design);
  if (fit.family == Family::linear) return (y - eta).squaredNorm() / static_cast<double>(y.size());
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double pi = std::clamp(sigmoid(eta(i)), 1e-15, 1.0 - 1e-15);
    s += y(i) * std::log(pi) + (1.0 - y(i)) * std::log(1.0 - pi);
  }
  return -2.0 * s / static_cast<double>(y.size());
}

CvResult lasso_cv(const Matrix& design, const Vector& y, Family family, Index folds, std::uint64_t seed,
                  const LassoOptions& opts) {
  require(folds >= 2, "cross-validation needs at least two folds");
  require(static_cast<Index>(y.size()) >= folds, "fewer samples than folds");
  const double lmax = lambda_max(design, y, family);
  CvResult out;
  out.lambdas = lambda_grid(lmax);
  out.cv_error.assign(out.lambdas.size(), 0.0);

  const Index n = static_cast<Index>(y.size());
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Index> fold_of(n);
  for (Index i = 0; i < n; ++i) fold_of[order[i]] = i % folds;

  for (Index f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Index i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    const Matrix xt = design(train, Eigen::all);
    const Vector yt = y(train);
    const Matrix xv = design(test, Eigen::all);
    const Vector yv = y(test);
    const auto fits = path_impl(xt, yt, out.lambdas, family, opts);
    for (Index l = 0; l < fits.size(); ++l)
      out.cv_error[l] += mean_deviance(fits[l], xv, yv) * static_cast<double>(test.size());
  }
  for (double& e : out.cv_error) e /= static_cast<double>(n);

  const Index best = static_cast<Index>(std::min_element(out.cv_error.begin(), out.cv_error.end()) -
                                        out.cv_error.begin());
  out.lambda = out.lambdas[best];
  std::vector<double> head(out.lambdas.begin(), out.lambdas.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  out.fit = path_impl(design, y, head, family, opts).back();
  return out;
}

LassoFit fit_with_rule(const Matrix& design, const Vector& y, Family family, const LambdaRule& rule,
                       const LassoOptions& opts) {
  if (rule.kind == LambdaRule::Kind::fixed) return lasso_fit(design, y, rule.value, family, opts);
  return lasso_cv(design, y, family, rule.folds, rule.seed, opts).fit;
}

namespace {

Vector standardized_gradient(const LassoFit& fit, const Matrix& design, const Vector& y, Matrix& xs) {
  xs = apply(fit.standardization, design);
  const Vector r = lasso_residuals(fit, design, y);
  return -(xs.transpose() * r) / static_cast<double>(y.size());
}

} // namespace

double kkt_violation(const LassoFit& fit, const Matrix& design, const Vector& y) {
  Matrix xs;
  const Vector grad = standardized_gradient(fit, design, y, xs);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    if (!(fit.standardization.scale(j) > 0.0)) continue;
    const double b = fit.coef_std(j);
    const double v = b != 0.0 ? std::abs(grad(j) + fit.lambda * (b > 0 ? 1.0 : -1.0))
                              : std::max(0.0, std::abs(grad(j)) - fit.lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

double lasso_objective(const LassoFit& fit, const Matrix& design, const Vector& y) {
  const double pen = fit.lambda * fit.coef_std.lpNorm<1>();
  if (fit.family == Family::linear) return (y - lasso_linear_predictor(fit, design)).squaredNorm() / (2.0 * y.size()) + pen;
  return logistic_nll(lasso_linear_predictor(fit, design), y) + pen;
}

} // namespace fvg
