#include "fvg/importance.hpp"

#include <algorithm>
#include <cmath>

#include "fvg/error.hpp"

namespace fvg {

std::string to_string(ScoreFamily f) {
  switch (f) {
  case ScoreFamily::marginal: return "marginal";
  case ScoreFamily::joint_lasso: return "joint_lasso";
  case ScoreFamily::residual_corr: return "residual_corr";
  case ScoreFamily::separate_lasso: return "separate_lasso";
  case ScoreFamily::combined: return "combined";
  }
  return "unknown";
}

ScoreFamily score_family_from_string(const std::string& s) {
  if (s == "marginal") return ScoreFamily::marginal;
  if (s == "joint_lasso" || s == "joint-lasso" || s == "lasso") return ScoreFamily::joint_lasso;
  if (s == "residual_corr" || s == "residual-corr") return ScoreFamily::residual_corr;
  if (s == "separate_lasso" || s == "separate-lasso") return ScoreFamily::separate_lasso;
  if (s == "combined") return ScoreFamily::combined;
  throw ValidationError("unknown score family '" + s + "'");
}

double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  require(a.size() == b.size() && a.size() >= 2, "correlation needs two equal-length vectors");
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  const double na = ac.norm(), nb = bc.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  // Relative degeneracy guard: a residual that is constant up to rounding.
  if (na <= 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff()) * std::sqrt(double(a.size()))) return 0.0;
  if (nb <= 1e-14 * std::max(1.0, b.cwiseAbs().maxCoeff()) * std::sqrt(double(b.size()))) return 0.0;
  return std::clamp(ac.dot(bc) / (na * nb), -1.0, 1.0);
}

namespace {

void check_shapes(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y) {
  require(!knockoffs.empty(), "at least one knockoff copy is required");
  require(x.rows() == y.size(), "X has " + std::to_string(x.rows()) + " rows, y has " + std::to_string(y.size()));
  for (const Matrix& k : knockoffs)
    require(k.rows() == x.rows() && k.cols() == x.cols(), "knockoff matrix is not conformable with X");
}

void check_groups(const Matrix& x, const GroupStructure& gs) {
  require(static_cast<Index>(x.cols()) == gs.p(), "group structure covers " + std::to_string(gs.p()) +
                                                       " features, X has " + std::to_string(x.cols()));
}

// Column `j` of copy `m` (0 = original).
const Matrix& copy_of(const Matrix& x, std::span<const Matrix> knockoffs, Index m) {
  return m == 0 ? x : knockoffs[m - 1];
}

// Design made of the listed features, copy-major: all copies of features[0],
// then all copies of features[1], ...
Matrix gather(const Matrix& x, std::span<const Matrix> knockoffs, const std::vector<Index>& features) {
  const Index copies = knockoffs.size() + 1;
  Matrix d(x.rows(), static_cast<Eigen::Index>(features.size() * copies));
  Eigen::Index c = 0;
  for (Index j : features)
    for (Index m = 0; m < copies; ++m) d.col(c++) = copy_of(x, knockoffs, m).col(static_cast<Eigen::Index>(j));
  return d;
}

std::vector<Index> complement(const GroupStructure& gs, Index k) {
  std::vector<Index> out;
  for (Index j = 0; j < gs.p(); ++j)
    if (gs.group_of(j) != k) out.push_back(j);
  return out;
}

} // namespace

Scores scores_marginal(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y) {
  check_shapes(x, knockoffs, y);
  const Index copies = knockoffs.size() + 1;
  Scores out(static_cast<Index>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> v(copies);
    for (Index m = 0; m < copies; ++m) v[m] = std::abs(pearson(copy_of(x, knockoffs, m).col(j), y));
    out[static_cast<Index>(j)] = ScorePair(std::move(v));
  }
  return out;
}

Scores scores_joint_lasso(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                          const ScoreOptions& opts, LassoFit* fit_out) {
  check_shapes(x, knockoffs, y);
  const Index p = static_cast<Index>(x.cols());
  const Index copies = knockoffs.size() + 1;
  Matrix design(x.rows(), static_cast<Eigen::Index>(p * copies));
  for (Index m = 0; m < copies; ++m)
    design.middleCols(static_cast<Eigen::Index>(m * p), static_cast<Eigen::Index>(p)) = copy_of(x, knockoffs, m);
  LassoFit fit = fit_with_rule(design, y, opts.family, opts.lambda, opts.lasso);
  Scores out(p);
  for (Index j = 0; j < p; ++j) {
    std::vector<double> v(copies);
    for (Index m = 0; m < copies; ++m) v[m] = std::abs(fit.coef_std(static_cast<Eigen::Index>(m * p + j)));
    out[j] = ScorePair(std::move(v));
  }
  if (fit_out) *fit_out = std::move(fit);
  return out;
}

Scores scores_residual_corr(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                            const GroupStructure& gs, const ScoreOptions& opts) {
  check_shapes(x, knockoffs, y);
  check_groups(x, gs);
  const Index copies = knockoffs.size() + 1;
  Scores out(gs.p());
  for (Index k = 0; k < gs.size(); ++k) {
    const auto rest = complement(gs, k);
    Vector resid;
    if (rest.empty()) {
      // Null model: intercept only.
      resid = opts.family == Family::linear ? Vector(y.array() - y.mean()) : Vector(y.array() - y.mean());
    } else {
      const Matrix design = gather(x, knockoffs, rest);
      const LassoFit fit = fit_with_rule(design, y, opts.family, opts.lambda, opts.lasso);
      resid = lasso_residuals(fit, design, y);
    }
    for (Index j : gs.group(k)) {
      std::vector<double> v(copies);
      for (Index m = 0; m < copies; ++m)
        v[m] = std::abs(pearson(copy_of(x, knockoffs, m).col(static_cast<Eigen::Index>(j)), resid));
      out[j] = ScorePair(std::move(v));
    }
  }
  return out;
}

Scores scores_separate_lasso(const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                             const GroupStructure& gs, const ScoreOptions& opts) {
  check_shapes(x, knockoffs, y);
  check_groups(x, gs);
  const Index copies = knockoffs.size() + 1;
  Scores out(gs.p());
  for (Index k = 0; k < gs.size(); ++k) {
    const auto rest = complement(gs, k);
    for (Index j : gs.group(k)) {
      std::vector<Index> cols{j};
      cols.insert(cols.end(), rest.begin(), rest.end());
      const Matrix design = gather(x, knockoffs, cols);
      const LassoFit fit = fit_with_rule(design, y, opts.family, opts.lambda, opts.lasso);
      std::vector<double> v(copies);
      for (Index m = 0; m < copies; ++m) v[m] = std::abs(fit.coef_std(static_cast<Eigen::Index>(m)));
      out[j] = ScorePair(std::move(v));
    }
  }
  return out;
}

Vector compute_g(const Vector& gamma_hat, const Matrix& psi, const GroupStructure& gs) {
  const Index p = gs.p();
  require(static_cast<Index>(gamma_hat.size()) == p, "gamma_hat length does not match p");
  require(static_cast<Index>(psi.rows()) == p && static_cast<Index>(psi.cols()) == p, "Psi has wrong dimensions");
  Vector g(static_cast<Eigen::Index>(p));
  for (Index k = 0; k < gs.size(); ++k) {
    std::vector<Eigen::Index> in(gs.group(k).begin(), gs.group(k).end());
    std::vector<Eigen::Index> rest;
    for (Index j : complement(gs, k)) rest.push_back(static_cast<Eigen::Index>(j));

    Matrix schur = psi(in, in);
    if (!rest.empty()) {
      const Matrix cross = psi(rest, in);
      Eigen::LLT<Matrix> llt(psi(rest, rest));
      if (llt.info() != Eigen::Success) throw NumericalError("Psi restricted to the complement of group " +
                                                             std::to_string(k + 1) + " is not positive definite");
      schur.noalias() -= cross.transpose() * llt.solve(cross);
    }
    for (Index a = 0; a < in.size(); ++a) {
      const double denom = schur(a, a);
      if (!(denom > 1e-12))
        throw NumericalError("vanishing Schur complement for feature " + std::to_string(in[a] + 1));
      double v = gamma_hat(in[a]);
      for (Index b = 0; b < in.size(); ++b)
        if (b != a) v += schur(a, b) / denom * gamma_hat(in[b]);
      g(in[a]) = v;
    }
  }
  return g;
}

Scores scores_combined(const Matrix& x, const Matrix& x_knock, const Vector& y, const GroupStructure& gs,
                       const Matrix& psi, const ScoreOptions& opts, CombinedScoreContext* ctx) {
  const std::span<const Matrix> ks(&x_knock, 1);
  check_shapes(x, ks, y);
  check_groups(x, gs);
  const Index p = gs.p();
  LassoFit fit;
  scores_joint_lasso(x, ks, y, opts, &fit);
  const auto pp = static_cast<Eigen::Index>(p);
  const Vector b = fit.coef_std.head(pp), bk = fit.coef_std.tail(pp);
  CombinedScoreContext c;
  c.psi = psi;
  c.gamma_hat = (b + bk) / 2.0;
  c.delta_hat = (b - bk) / 2.0;
  c.g = compute_g(c.gamma_hat, psi, gs);
  if (!c.g.allFinite()) throw NumericalError("non-finite g in combined scores");

  const Scores marginal = scores_marginal(x, ks, y);
  Scores out(p);
  for (Index j = 0; j < p; ++j) {
    const double ag = std::abs(c.g(static_cast<Eigen::Index>(j)));
    out[j] = ScorePair(ag * marginal[j].t(), ag * marginal[j].t_knock());
  }
  if (ctx) *ctx = std::move(c);
  return out;
}

Scores compute_scores(ScoreFamily family, const Matrix& x, std::span<const Matrix> knockoffs, const Vector& y,
                      const GroupStructure& gs, const ScoreOptions& opts, const Matrix* psi) {
  switch (family) {
  case ScoreFamily::marginal: return scores_marginal(x, knockoffs, y);
  case ScoreFamily::joint_lasso: return scores_joint_lasso(x, knockoffs, y, opts);
  case ScoreFamily::residual_corr: return scores_residual_corr(x, knockoffs, y, gs, opts);
  case ScoreFamily::separate_lasso: return scores_separate_lasso(x, knockoffs, y, gs, opts);
  case ScoreFamily::combined:
    require(knockoffs.size() == 1, "combined scores support a single knockoff copy");
    require(psi != nullptr, "combined scores need Psi = Sigma - S/2");
    return scores_combined(x, knockoffs.front(), y, gs, *psi, opts);
  }
  throw ValidationError("unknown score family");
}

namespace {

void check_pair(const ScorePair& s) {
  require(s.values.size() >= 2, "score entry needs the original and at least one knockoff");
  for (double v : s.values) require(std::isfinite(v) && v >= 0.0, "scores must be finite and nonnegative");
}

} // namespace

std::vector<double> w_statistics(const Scores& scores) {
  std::vector<double> w(scores.size());
  for (Index j = 0; j < scores.size(); ++j) {
    check_pair(scores[j]);
    require(scores[j].values.size() == 2, "W statistics need exactly one knockoff copy");
    const double t = scores[j].t(), tk = scores[j].t_knock();
    w[j] = t > tk ? t : (t < tk ? -tk : 0.0);
  }
  return w;
}

KappaTauTable kappa_tau(const Scores& scores, const GroupStructure& gs) {
  require(scores.size() == gs.p(), "score count does not match the group structure");
  require(!scores.empty(), "no scores");
  const Index copies = scores.front().copies();
  std::vector<Index> kappa(scores.size());
  std::vector<double> tau(scores.size());
  std::vector<double> rest;
  for (Index j = 0; j < scores.size(); ++j) {
    check_pair(scores[j]);
    const auto& v = scores[j].values;
    require(v.size() == copies + 1, "inconsistent number of knockoff copies");
    Index best = 0;
    for (Index m = 1; m < v.size(); ++m)
      if (v[m] > v[best]) best = m;
    rest.clear();
    for (Index m = 0; m < v.size(); ++m)
      if (m != best) rest.push_back(v[m]);
    std::sort(rest.begin(), rest.end());
    const Index h = rest.size() / 2;
    const double median = rest.size() % 2 ? rest[h] : (rest[h - 1] + rest[h]) / 2.0;
    kappa[j] = best;
    tau[j] = std::max(0.0, v[best] - median);
  }
  return align_kappa_tau(std::move(kappa), std::move(tau), copies, gs);
}

Scores group_scores(const Scores& scores, const GroupStructure& gs) {
  require(scores.size() == gs.p(), "score count does not match the group structure");
  Scores out(gs.size());
  for (Index k = 0; k < gs.size(); ++k) {
    double t = 0.0, tk = 0.0;
    for (Index j : gs.group(k)) {
      check_pair(scores[j]);
      t += scores[j].t();
      tk += scores[j].t_knock();
    }
    out[k] = ScorePair(t, tk);
  }
  return out;
}

} // namespace fvg
