#include "doctest.h"

#include "fvg/error.hpp"
#include "fvg/harness.hpp"
#include "fvg/knockoffs.hpp"

using namespace fvg;

namespace {

GaussianModel block_model(const std::vector<Index>& sizes, double within, double between) {
  const auto gs = GroupStructure::contiguous(sizes);
  return GaussianModel{Vector::Zero(static_cast<Eigen::Index>(gs.p())), block_covariance(sizes, within, between), gs};
}

double min_eigen(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().minCoeff();
}

Matrix sample_cov(const Matrix& x) {
  const Matrix c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

} // namespace

TEST_CASE("model validation") {
  auto m = block_model({2, 2}, 0.5, 0.1);
  CHECK_NOTHROW(m.validate());
  m.sigma(0, 1) = 0.6;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  CHECK_THROWS(block_model({2}, 1.0, 0.0).validate());
}

TEST_CASE("equi S on the identity gives gamma just below one") {
  const GaussianModel m{Vector::Zero(3), Matrix::Identity(3, 3), GroupStructure::singletons(3)};
  const SMatrix s = build_s_equi(m);
  CHECK(s.gamma == doctest::Approx(1.0 - 1e-6).epsilon(1e-12));
  CHECK((s.s - s.gamma * Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("equi S for singleton pairs") {
  for (double rho : {0.0, 0.3, -0.6, 0.9}) {
    Matrix sigma(2, 2);
    sigma << 1, rho, rho, 1;
    const GaussianModel m{Vector::Zero(2), sigma, GroupStructure::singletons(2)};
    const SMatrix s = build_s_equi(m);
    CHECK(s.gamma == doctest::Approx(std::min(1.0, 2.0 * (1.0 - std::abs(rho))) * (1.0 - 1e-6)));
    CHECK(min_eigen(2.0 * sigma - s.s) >= -1e-10);
  }
}

TEST_CASE("equi S is block diagonal and feasible on the block design") {
  const auto m = block_model(std::vector<Index>(10, 5), 0.7, 0.3);
  for (Index copies : {1, 2, 3}) {
    const SMatrix s = build_s_equi(m, copies);
    CHECK_NOTHROW(validate_s(m, s, copies));
    const double c = static_cast<double>(copies + 1) / static_cast<double>(copies);
    CHECK(min_eigen(c * m.sigma - s.s) >= -1e-10);
    CHECK(min_eigen(s.s) >= -1e-10);
    for (Index a = 0; a < 50; ++a)
      for (Index b = 0; b < 50; ++b)
        if (m.gs.group_of(a) != m.gs.group_of(b)) CHECK(s.s(a, b) == 0.0);
  }
}

TEST_CASE("validate_s rejects an infeasible S") {
  const auto m = block_model({2, 2}, 0.5, 0.2);
  SMatrix s{3.0 * m.sigma, 3.0};
  CHECK_THROWS_AS(validate_s(m, s), NumericalError);
}

TEST_CASE("Psi = Sigma - S/2") {
  const auto m = block_model({2, 3}, 0.6, 0.2);
  const SMatrix s = build_s_equi(m);
  CHECK((psi_matrix(m, s) - (m.sigma - 0.5 * s.s)).norm() < 1e-14);
}

TEST_CASE("S = 0 returns the original features") {
  const auto m = block_model({2, 2}, 0.5, 0.1);
  const Matrix x = sample_gaussian(m.mu, m.sigma, 20, 3);
  const SMatrix zero{Matrix::Zero(4, 4), 0.0};
  CHECK((sample_knockoffs(m, zero, x, 9) - x).norm() < 1e-12);
}

TEST_CASE("joint second moments match the knockoff construction") {
  const auto m = block_model({2, 2}, 0.6, 0.2);
  const SMatrix s = build_s_equi(m);
  const Index n = 100000;
  const Matrix x = sample_gaussian(m.mu, m.sigma, n, 17);
  const Matrix xk = sample_knockoffs(m, s, x, 18);
  Matrix joint(static_cast<Eigen::Index>(n), 8);
  joint << x, xk;
  const Matrix cov = sample_cov(joint);
  Matrix want(8, 8);
  want << m.sigma, m.sigma - s.s, m.sigma - s.s, m.sigma;
  CHECK((cov - want).cwiseAbs().maxCoeff() < 0.02);
  CHECK(joint.colwise().mean().cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("multiple copies have the stated pairwise covariance") {
  const auto m = block_model({2, 1}, 0.5, 0.2);
  const SMatrix s = build_s_equi(m, 2);
  const Index n = 100000;
  const Matrix x = sample_gaussian(m.mu, m.sigma, n, 21);
  const auto ks = sample_multiple_knockoffs(m, s, x, 2, 22);
  REQUIRE(ks.size() == 2);
  Matrix joint(static_cast<Eigen::Index>(n), 9);
  joint << x, ks[0], ks[1];
  const Matrix cov = sample_cov(joint);
  const Matrix off = m.sigma - s.s;
  CHECK((cov.block(0, 3, 3, 3) - off).cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov.block(0, 6, 3, 3) - off).cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov.block(3, 6, 3, 3) - off).cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov.block(3, 3, 3, 3) - m.sigma).cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov.block(6, 6, 3, 3) - m.sigma).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("one copy coincides with the single-copy sampler") {
  const auto m = block_model({3, 2}, 0.5, 0.1);
  const SMatrix s = build_s_equi(m);
  const Matrix x = sample_gaussian(m.mu, m.sigma, 30, 5);
  const auto multi = sample_multiple_knockoffs(m, s, x, 1, 44);
  REQUIRE(multi.size() == 1);
  CHECK((multi[0] - sample_knockoffs(m, s, x, 44)).norm() < 1e-12);
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto m = block_model({3, 2}, 0.5, 0.1);
  const SMatrix s = build_s_equi(m);
  const Matrix x = sample_gaussian(m.mu, m.sigma, 30, 5);
  CHECK(sample_knockoffs(m, s, x, 7) == sample_knockoffs(m, s, x, 7));
  CHECK(sample_knockoffs(m, s, x, 7) != sample_knockoffs(m, s, x, 8));
  CHECK(sample_gaussian(m.mu, m.sigma, 5, 1) == sample_gaussian(m.mu, m.sigma, 5, 1));
}

TEST_CASE("exchangeability diagnostic") {
  const auto m = block_model({2, 2, 2}, 0.6, 0.2);
  const SMatrix s = build_s_equi(m);
  const Index n = 50000;
  const Matrix x = sample_gaussian(m.mu, m.sigma, n, 31);
  const Matrix xk = sample_knockoffs(m, s, x, 32);
  CHECK(exchangeability_diagnostic(x, xk, m.gs, {}).max_discrepancy() == 0.0);
  CHECK(exchangeability_diagnostic(x, xk, m.gs, {0}).max_discrepancy() < 0.04);
  CHECK(exchangeability_diagnostic(x, xk, m.gs, {0, 2}).max_discrepancy() < 0.04);

  // Independent copies with the right marginals are not knockoffs.
  const Matrix fake = sample_gaussian(m.mu, m.sigma, n, 33);
  CHECK(exchangeability_diagnostic(x, fake, m.gs, {1}).max_discrepancy() > 0.1);
  CHECK_THROWS_AS(exchangeability_diagnostic(x, xk, m.gs, {5}), ValidationError);
}

TEST_CASE("psd_factor") {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const Matrix l = psd_factor(a);
  CHECK((l * l.transpose() - a).norm() < 1e-12);
  Matrix b(2, 2);
  b << 1, 2, 2, 1;
  CHECK_THROWS_AS(psd_factor(b), NumericalError);
}
