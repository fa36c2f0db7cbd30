#include "fvg/grouping.hpp"

#include <cmath>

#include "fvg/error.hpp"

namespace fvg {

Matrix correlation_from_data(const Matrix& x) {
  require(x.rows() >= 2, "correlation needs at least two samples");
  require(x.allFinite(), "data matrix contains non-finite entries");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Matrix centered = x.rowwise() - mean;
  Vector sd = centered.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < sd.size(); ++j)
    if (!(sd(j) > 0.0)) throw ValidationError("column " + std::to_string(j + 1) + " is constant");
  for (Eigen::Index j = 0; j < sd.size(); ++j) centered.col(j) /= sd(j);
  Matrix c = centered.transpose() * centered;
  c = (c + c.transpose()) / 2.0;
  for (Eigen::Index j = 0; j < c.rows(); ++j) c(j, j) = 1.0;
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

Matrix covariance_to_correlation(const Matrix& sigma) {
  require(sigma.rows() == sigma.cols(), "covariance must be square");
  Vector d = sigma.diagonal();
  for (Eigen::Index j = 0; j < d.size(); ++j)
    if (!(d(j) > 0.0)) throw ValidationError("covariance diagonal entry " + std::to_string(j + 1) + " is not positive");
  Vector inv = d.cwiseSqrt().cwiseInverse();
  Matrix c = inv.asDiagonal() * sigma * inv.asDiagonal();
  for (Eigen::Index j = 0; j < c.rows(); ++j) c(j, j) = 1.0;
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

void validate_correlation(const Matrix& c) {
  require(c.rows() == c.cols() && c.rows() > 0, "correlation matrix must be square and nonempty");
  require(c.allFinite(), "correlation matrix has non-finite entries");
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    require(std::abs(c(i, i) - 1.0) <= 1e-12, "correlation diagonal must be 1");
    for (Eigen::Index j = 0; j < i; ++j) {
      require(std::abs(c(i, j) - c(j, i)) <= 1e-12, "correlation matrix is not symmetric");
      require(std::abs(c(i, j)) <= 1.0 + 1e-12, "correlation entry outside [-1, 1]");
    }
  }
}

namespace {

// Row-wise nearest neighbour restricted to the upper triangle (j > i) so that
// the global minimum with lexicographic tie-breaking is a scan over rows.
struct RowMin {
  double d = kInf;
  Index j = 0;
};

} // namespace

GroupStructure cluster_average_linkage(const Matrix& corr, double cutoff) {
  require(cutoff > 0.0 && cutoff <= 1.0, "cutoff must be in (0, 1]");
  validate_correlation(corr);
  const Index p = static_cast<Index>(corr.rows());

  Matrix dist = (1.0 - corr.array().abs()).matrix();
  std::vector<Index> size(p, 1);
  std::vector<bool> active(p, true);
  std::vector<Index> label(p);
  for (Index j = 0; j < p; ++j) label[j] = j;

  std::vector<RowMin> rmin(p);
  auto recompute = [&](Index i) {
    RowMin r;
    for (Index j = i + 1; j < p; ++j) {
      if (!active[j]) continue;
      if (dist(i, j) < r.d) r = {dist(i, j), j};
    }
    rmin[i] = r;
  };
  for (Index i = 0; i < p; ++i) recompute(i);

  for (Index merges = 0; merges + 1 < p; ++merges) {
    Index a = p;
    double best = kInf;
    for (Index i = 0; i < p; ++i) {
      if (active[i] && rmin[i].d < best) {
        best = rmin[i].d;
        a = i;
      }
    }
    if (a == p || !(best < cutoff)) break;
    const Index b = rmin[a].j;

    // Lance-Williams update for average linkage; cluster b folds into a.
    const double wa = static_cast<double>(size[a]), wb = static_cast<double>(size[b]);
    for (Index k = 0; k < p; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double d = (wa * dist(a, k) + wb * dist(b, k)) / (wa + wb);
      dist(a, k) = d;
      dist(k, a) = d;
    }
    size[a] += size[b];
    active[b] = false;
    for (Index j = 0; j < p; ++j)
      if (label[j] == b) label[j] = a;

    recompute(a);
    for (Index i = 0; i < b; ++i) {
      if (!active[i] || i == a) continue;
      if (rmin[i].j == a || rmin[i].j == b) {
        recompute(i);
      } else if (i < a) {
        const double d = dist(i, a);
        if (d < rmin[i].d || (d == rmin[i].d && a < rmin[i].j)) rmin[i] = {d, a};
      }
    }
  }
  return GroupStructure::from_labels(label);
}

} // namespace fvg
