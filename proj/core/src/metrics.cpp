#include "fvg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fvg/error.hpp"

namespace fvg {

GroundTruth::GroundTruth(std::vector<Index> nonnull, const GroupStructure& gs)
    : nonnull_features(std::move(nonnull)) {
  std::sort(nonnull_features.begin(), nonnull_features.end());
  nonnull_features.erase(std::unique(nonnull_features.begin(), nonnull_features.end()), nonnull_features.end());
  for (Index j : nonnull_features) {
    require(j < gs.p(), "non-null feature index out of range");
    nonnull_groups.push_back(gs.group_of(j));
  }
  std::sort(nonnull_groups.begin(), nonnull_groups.end());
  nonnull_groups.erase(std::unique(nonnull_groups.begin(), nonnull_groups.end()), nonnull_groups.end());
}

GroundTruth GroundTruth::from_beta(const Vector& beta, const GroupStructure& gs) {
  require(static_cast<Index>(beta.size()) == gs.p(), "beta length does not match p");
  std::vector<Index> nz;
  for (Index j = 0; j < gs.p(); ++j)
    if (beta(static_cast<Eigen::Index>(j)) != 0.0) nz.push_back(j);
  return GroundTruth(std::move(nz), gs);
}

bool GroundTruth::is_nonnull(Index j) const {
  return std::binary_search(nonnull_features.begin(), nonnull_features.end(), j);
}

FdpPower fdp_power(const std::vector<Index>& selected, const std::vector<Index>& nonnull) {
  std::vector<Index> sel = selected, truth = nonnull;
  std::sort(sel.begin(), sel.end());
  sel.erase(std::unique(sel.begin(), sel.end()), sel.end());
  std::sort(truth.begin(), truth.end());
  Index hits = 0;
  for (Index j : sel)
    if (std::binary_search(truth.begin(), truth.end(), j)) ++hits;
  FdpPower r;
  r.fdp = static_cast<double>(sel.size() - hits) / static_cast<double>(std::max<Index>(1, sel.size()));
  r.power = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  return r;
}

FdpPower fdp_power(const std::vector<Index>& selected, const GroundTruth& truth) {
  return fdp_power(selected, truth.nonnull_features);
}

std::vector<CatchingSet> catching_sets(const std::vector<Index>& selected, const GroupStructure& gs, Method method) {
  std::vector<CatchingSet> out;
  if (method == Method::group_filter) {
    std::vector<Index> groups = selected;
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    for (Index k : groups) {
      require(k < gs.size(), "rejected group index out of range");
      out.push_back({k, gs.group(k)});
    }
    return out;
  }
  std::vector<std::vector<Index>> per_group(gs.size());
  for (Index j : selected) {
    require(j < gs.p(), "selected feature index out of range");
    per_group[gs.group_of(j)].push_back(j);
  }
  for (Index k = 0; k < gs.size(); ++k) {
    if (per_group[k].empty()) continue;
    std::sort(per_group[k].begin(), per_group[k].end());
    per_group[k].erase(std::unique(per_group[k].begin(), per_group[k].end()), per_group[k].end());
    out.push_back({k, std::move(per_group[k])});
  }
  return out;
}

double purity(const std::vector<Index>& set, const Matrix& corr) {
  require(!set.empty(), "purity of an empty set is undefined");
  double m = 1.0;
  for (Index a = 0; a < set.size(); ++a) {
    require(set[a] < static_cast<Index>(corr.rows()), "feature index outside the correlation matrix");
    for (Index b = a + 1; b < set.size(); ++b)
      m = std::min(m, std::abs(corr(static_cast<Eigen::Index>(set[a]), static_cast<Eigen::Index>(set[b]))));
  }
  return m;
}

CatchingSummary summarize_catching_sets(const std::vector<CatchingSet>& sets, const Matrix& corr) {
  CatchingSummary s;
  s.count = sets.size();
  if (sets.empty()) {
    s.mean_size = s.mean_purity = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double size = 0.0, pur = 0.0;
  for (auto& c : sets) {
    size += static_cast<double>(c.features.size());
    pur += purity(c.features, corr);
  }
  s.mean_size = size / static_cast<double>(sets.size());
  s.mean_purity = pur / static_cast<double>(sets.size());
  return s;
}

} // namespace fvg
