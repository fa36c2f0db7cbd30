#include "fvg/knockoffs.hpp"

#include <cmath>
#include <random>

#include "fvg/error.hpp"
#include "fvg/rng.hpp"

namespace fvg {

void GaussianModel::validate() const {
  require(sigma.rows() == sigma.cols(), "covariance must be square");
  require(static_cast<Index>(sigma.rows()) == p(), "mean and covariance dimensions differ");
  require(gs.p() == p(), "group structure covers " + std::to_string(gs.p()) + " features, model has " +
                             std::to_string(p()));
  require(mu.allFinite() && sigma.allFinite(), "model has non-finite entries");
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10 * std::max(1.0, sigma.cwiseAbs().maxCoeff()), "covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()(0) > 1e-8))
    throw NumericalError("covariance is not positive definite (lambda_min = " +
                         std::to_string(es.eigenvalues()(0)) + ")");
}

namespace {

Matrix block_diagonal_part(const Matrix& a, const GroupStructure& gs) {
  Matrix b = Matrix::Zero(a.rows(), a.cols());
  for (auto& g : gs.groups())
    for (Index i : g)
      for (Index j : g) b(i, j) = a(i, j);
  return b;
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

} // namespace

SMatrix build_s_equi(const GaussianModel& model, Index copies) {
  model.validate();
  require(copies >= 1, "number of knockoff copies must be >= 1");
  const Matrix blocks = block_diagonal_part(model.sigma, model.gs);
  // Eigenvalues of B^{-1} Sigma, i.e. of B^{-1/2} Sigma B^{-1/2}.
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(model.sigma, blocks, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw NumericalError("generalized eigenproblem for S failed");
  const double lmin = ges.eigenvalues()(0);
  const double factor = static_cast<double>(copies + 1) / static_cast<double>(copies);
  SMatrix out;
  out.gamma = std::min(1.0, factor * lmin) * (1.0 - 1e-6);
  if (!(out.gamma > 0.0)) throw NumericalError("equi construction produced non-positive gamma");
  out.s = out.gamma * blocks;
  validate_s(model, out, copies);
  return out;
}

SMatrix build_s(const GaussianModel& model, SConstruction how, Index copies) {
  switch (how) {
  case SConstruction::equi: return build_s_equi(model, copies);
  }
  throw ValidationError("unknown S construction");
}

void validate_s(const GaussianModel& model, const SMatrix& s, Index copies) {
  const Index p = model.p();
  require(static_cast<Index>(s.s.rows()) == p && static_cast<Index>(s.s.cols()) == p, "S has wrong dimensions");
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      if (model.gs.group_of(i) != model.gs.group_of(j) && s.s(i, j) != 0.0)
        throw NumericalError("S has nonzero entries outside the group blocks");
  if (min_eigenvalue(s.s) < -1e-10) throw NumericalError("S is not positive semidefinite");
  const double factor = static_cast<double>(copies + 1) / static_cast<double>(copies);
  if (min_eigenvalue(factor * model.sigma - s.s) < -1e-10)
    throw NumericalError("(M+1)/M * Sigma - S is not positive semidefinite");
}

Matrix psi_matrix(const GaussianModel& model, const SMatrix& s) {
  Matrix psi = model.sigma - s.s / 2.0;
  if (!(min_eigenvalue(psi) > 0.0)) throw NumericalError("Psi = Sigma - S/2 is not positive definite");
  return psi;
}

Matrix psd_factor(const Matrix& a, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol)
      throw NumericalError("matrix is not positive semidefinite (eigenvalue " + std::to_string(ev(i)) + ")");
    ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal();
}

KnockoffSampler::KnockoffSampler(const GaussianModel& model, const SMatrix& s, Index copies)
    : mu_(model.mu), copies_(copies) {
  model.validate();
  require(copies >= 1, "number of knockoff copies must be >= 1");
  const Index p = model.p();
  require(static_cast<Index>(s.s.rows()) == p && static_cast<Index>(s.s.cols()) == p, "S has wrong dimensions");

  Eigen::LLT<Matrix> llt(model.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance Cholesky failed");
  proj_ = llt.solve(s.s);
  const Matrix s_sinv_s = s.s * proj_;
  const Matrix diag_block = 2.0 * s.s - s_sinv_s;
  const Matrix off_block = s.s - s_sinv_s;

  const Index mp = copies * p;
  Matrix joint(mp, mp);
  for (Index a = 0; a < copies; ++a)
    for (Index b = 0; b < copies; ++b)
      joint.block(a * p, b * p, p, p) = (a == b) ? diag_block : off_block;
  joint = (joint + joint.transpose()) / 2.0;
  factor_ = psd_factor(joint, 1e-8);
}

std::vector<Matrix> KnockoffSampler::sample(const Matrix& x, std::uint64_t seed) const {
  const Index p = static_cast<Index>(mu_.size());
  require(static_cast<Index>(x.cols()) == p, "X has " + std::to_string(x.cols()) + " columns, model has " +
                                                 std::to_string(p));
  const Eigen::Index n = x.rows();
  const Matrix mean = x - (x.rowwise() - mu_.transpose()) * proj_;

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, factor_.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(i, c) = normal(rng);
  const Matrix noise = z * factor_.transpose();

  std::vector<Matrix> out;
  out.reserve(copies_);
  for (Index m = 0; m < copies_; ++m) out.push_back(mean + noise.middleCols(m * p, p));
  return out;
}

Matrix sample_knockoffs(const GaussianModel& model, const SMatrix& s, const Matrix& x, std::uint64_t seed) {
  return KnockoffSampler(model, s, 1).sample(x, seed).front();
}

std::vector<Matrix> sample_multiple_knockoffs(const GaussianModel& model, const SMatrix& s, const Matrix& x,
                                              Index copies, std::uint64_t seed) {
  return KnockoffSampler(model, s, copies).sample(x, seed);
}

ExchangeabilityReport exchangeability_diagnostic(const Matrix& x, const Matrix& x_knock, const GroupStructure& gs,
                                                 const std::vector<Index>& swap_groups) {
  require(x.rows() == x_knock.rows() && x.cols() == x_knock.cols(), "X and knockoffs are not conformable");
  require(static_cast<Index>(x.cols()) == gs.p(), "group structure does not match X");
  require(x.rows() >= 2, "diagnostic needs at least two samples");
  const Index p = gs.p();
  const Eigen::Index n = x.rows();

  // Column permutation of [X, X~] that swaps the chosen groups.
  std::vector<Index> perm(2 * p);
  for (Index j = 0; j < 2 * p; ++j) perm[j] = j;
  for (Index k : swap_groups) {
    require(k < gs.size(), "swap group index out of range");
    for (Index j : gs.group(k)) {
      perm[j] = p + j;
      perm[p + j] = j;
    }
  }

  Matrix joint(n, 2 * p);
  joint << x, x_knock;
  const Vector mean = joint.colwise().mean().transpose();
  joint.rowwise() -= mean.transpose();
  Matrix cov = Matrix::Zero(2 * p, 2 * p);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(joint.transpose(), 1.0 / static_cast<double>(n - 1));
  cov = cov.selfadjointView<Eigen::Lower>();

  ExchangeabilityReport r;
  for (Index a = 0; a < 2 * p; ++a) {
    r.mean_discrepancy = std::max(r.mean_discrepancy, std::abs(mean(perm[a]) - mean(a)));
    for (Index b = 0; b <= a; ++b)
      r.covariance_discrepancy = std::max(r.covariance_discrepancy, std::abs(cov(perm[a], perm[b]) - cov(a, b)));
  }
  return r;
}

Matrix sample_gaussian(const Vector& mu, const Matrix& sigma, Index n, std::uint64_t seed) {
  require(sigma.rows() == sigma.cols() && sigma.rows() == mu.size(), "mean/covariance dimension mismatch");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance Cholesky failed");
  const Matrix l = llt.matrixL();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(static_cast<Eigen::Index>(n), mu.size());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(i, c) = normal(rng);
  Matrix out = z * l.transpose();
  out.rowwise() += mu.transpose();
  return out;
}

} // namespace fvg
