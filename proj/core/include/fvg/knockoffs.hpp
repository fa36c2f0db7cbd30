#pragma once

#include <cstdint>
#include <vector>

#include "fvg/types.hpp"

namespace fvg {

/// Known Gaussian law of the features.
struct GaussianModel {
  Vector mu;
  Matrix sigma;
  GroupStructure gs;

  Index p() const { return static_cast<Index>(mu.size()); }
  /// Symmetry, matching dimensions and lambda_min(sigma) > 1e-8.
  void validate() const;
};

/// Block-diagonal S matrix of a group knockoff construction.
struct SMatrix {
  Matrix s;
  double gamma = 0.0;
};

enum class SConstruction { equi };

/// Equi-correlated group construction S = gamma * blockdiag(Sigma_{B_k}).
///
/// gamma = min(1, c * lambda_min(B^{-1/2} Sigma B^{-1/2})) * (1 - 1e-6) with
/// c = (M+1)/M, so that (M+1)/M * Sigma - S is PSD and M simultaneously
/// exchangeable copies exist. M = 1 gives the usual 2 * Sigma - S >= 0.
SMatrix build_s_equi(const GaussianModel& model, Index copies = 1);

SMatrix build_s(const GaussianModel& model, SConstruction how = SConstruction::equi, Index copies = 1);

/// Eigen-checks S >= 0 and (M+1)/M * Sigma - S >= 0 (tolerance -1e-10) and the
/// block pattern. Throws NumericalError on violation.
void validate_s(const GaussianModel& model, const SMatrix& s, Index copies = 1);

/// Psi = Sigma - S/2, the covariance of (X + X~)/2 used by combined scores.
Matrix psi_matrix(const GaussianModel& model, const SMatrix& s);

/// Precomputed conditional sampler for M copies: the projection Sigma^{-1} S
/// and a square-root factor of the joint conditional covariance.
class KnockoffSampler {
public:
  KnockoffSampler(const GaussianModel& model, const SMatrix& s, Index copies = 1);

  Index copies() const { return copies_; }
  std::vector<Matrix> sample(const Matrix& x, std::uint64_t seed) const;

private:
  Vector mu_;
  Matrix proj_;   // Sigma^{-1} S
  Matrix factor_; // (M p) x (M p)
  Index copies_;
};

/// One knockoff copy per row of `x`, drawn from
/// N(mu + (Sigma - S) Sigma^{-1} (x - mu), 2S - S Sigma^{-1} S).
Matrix sample_knockoffs(const GaussianModel& model, const SMatrix& s, const Matrix& x, std::uint64_t seed);

/// M jointly exchangeable copies. Each copy has the single-copy conditional
/// law; two distinct copies have conditional covariance S - S Sigma^{-1} S.
/// With M = 1 the draws coincide with sample_knockoffs for the same seed.
std::vector<Matrix> sample_multiple_knockoffs(const GaussianModel& model, const SMatrix& s, const Matrix& x,
                                              Index copies, std::uint64_t seed);

struct ExchangeabilityReport {
  double mean_discrepancy = 0.0;       // max |mean(swapped) - mean(original)|
  double covariance_discrepancy = 0.0; // max |cov(swapped) - cov(original)|
  double max_discrepancy() const { return std::max(mean_discrepancy, covariance_discrepancy); }
};

/// Compares the empirical mean and covariance of [X, X~] with those of the
/// sample obtained by swapping the groups in `swap_groups`.
ExchangeabilityReport exchangeability_diagnostic(const Matrix& x, const Matrix& x_knock, const GroupStructure& gs,
                                                 const std::vector<Index>& swap_groups);

/// Draws n rows from N(mu, sigma).
Matrix sample_gaussian(const Vector& mu, const Matrix& sigma, Index n, std::uint64_t seed);

/// Symmetric PSD square root factor L (L L^T = a) with eigenvalues in
/// (-tol, 0) clipped to zero. Throws NumericalError below -tol.
Matrix psd_factor(const Matrix& a, double tol = 1e-8);

} // namespace fvg
