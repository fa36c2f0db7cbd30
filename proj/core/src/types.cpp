#include "fvg/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fvg/error.hpp"

namespace fvg {

GroupStructure::GroupStructure(Index p, std::vector<std::vector<Index>> groups)
    : p_(p), groups_(std::move(groups)), group_of_(p, p) {
  require(p > 0, "group structure needs at least one feature");
  require(!groups_.empty(), "group structure needs at least one group");
  for (Index k = 0; k < groups_.size(); ++k) {
    auto& g = groups_[k];
    require(!g.empty(), "group " + std::to_string(k + 1) + " is empty");
    std::sort(g.begin(), g.end());
    for (Index j : g) {
      require(j < p, "feature index " + std::to_string(j + 1) + " exceeds p=" + std::to_string(p));
      require(group_of_[j] == p, "feature " + std::to_string(j + 1) + " appears in more than one group");
      group_of_[j] = k;
    }
  }
  for (Index j = 0; j < p; ++j)
    require(group_of_[j] != p, "feature " + std::to_string(j + 1) + " is not assigned to any group");
}

GroupStructure GroupStructure::from_labels(const std::vector<Index>& labels) {
  require(!labels.empty(), "empty label vector");
  std::vector<std::vector<Index>> groups;
  std::vector<std::pair<Index, Index>> seen; // label -> group slot
  for (Index j = 0; j < labels.size(); ++j) {
    auto it = std::find_if(seen.begin(), seen.end(), [&](auto& s) { return s.first == labels[j]; });
    if (it == seen.end()) {
      seen.emplace_back(labels[j], groups.size());
      groups.push_back({j});
    } else {
      groups[it->second].push_back(j);
    }
  }
  return GroupStructure(labels.size(), std::move(groups));
}

GroupStructure GroupStructure::singletons(Index p) {
  std::vector<std::vector<Index>> groups(p);
  for (Index j = 0; j < p; ++j) groups[j] = {j};
  return GroupStructure(p, std::move(groups));
}

GroupStructure GroupStructure::contiguous(const std::vector<Index>& sizes) {
  std::vector<std::vector<Index>> groups;
  Index next = 0;
  for (Index s : sizes) {
    require(s > 0, "group sizes must be positive");
    std::vector<Index> g(s);
    std::iota(g.begin(), g.end(), next);
    next += s;
    groups.push_back(std::move(g));
  }
  return GroupStructure(next, std::move(groups));
}

Index GroupStructure::max_group_size() const {
  Index m = 0;
  for (auto& g : groups_) m = std::max(m, g.size());
  return m;
}

void Dataset::validate() const {
  require(x.rows() == y.size(), "X has " + std::to_string(x.rows()) + " rows but y has " +
                                    std::to_string(y.size()) + " entries");
  require(x.rows() > 0 && x.cols() > 0, "empty dataset");
  require(x.allFinite(), "X contains non-finite entries");
  require(y.allFinite(), "y contains non-finite entries");
}

Alignment align_by_magnitude(const std::vector<double>& magnitude, const GroupStructure& gs) {
  require(magnitude.size() == gs.p(), "statistic length " + std::to_string(magnitude.size()) +
                                          " does not match p=" + std::to_string(gs.p()));
  for (double m : magnitude) require(std::isfinite(m), "non-finite feature statistic");

  Alignment a;
  a.columns.resize(gs.size());
  a.row_of.assign(gs.p(), 0);
  a.rows.resize(gs.max_group_size());
  for (Index k = 0; k < gs.size(); ++k) {
    auto col = gs.group(k);
    std::stable_sort(col.begin(), col.end(), [&](Index i, Index j) {
      if (magnitude[i] != magnitude[j]) return magnitude[i] > magnitude[j];
      return i < j;
    });
    for (Index l = 0; l < col.size(); ++l) {
      a.rows[l].push_back(col[l]);
      a.row_of[col[l]] = l;
    }
    a.columns[k] = std::move(col);
  }
  return a;
}

WTable align_w(const std::vector<double>& w, const GroupStructure& gs) {
  std::vector<double> mag(w.size());
  std::transform(w.begin(), w.end(), mag.begin(), [](double v) { return std::abs(v); });
  WTable t{w, gs, align_by_magnitude(mag, gs)};
  return t;
}

KappaTauTable align_kappa_tau(std::vector<Index> kappa, std::vector<double> tau, Index copies,
                              const GroupStructure& gs) {
  require(kappa.size() == tau.size(), "kappa and tau lengths differ");
  require(copies >= 1, "number of knockoff copies must be >= 1");
  for (Index j = 0; j < kappa.size(); ++j) {
    require(kappa[j] <= copies, "kappa out of range");
    require(tau[j] >= 0.0, "tau must be nonnegative");
  }
  auto al = align_by_magnitude(tau, gs);
  return KappaTauTable{std::move(kappa), std::move(tau), copies, gs, std::move(al)};
}

std::string to_string(Method m) {
  switch (m) {
  case Method::naive: return "naive";
  case Method::fvg: return "fvg";
  case Method::multiple: return "multiple";
  case Method::evalue: return "evalue";
  case Method::knockoff_plus: return "knockoff_plus";
  case Method::group_filter: return "group_filter";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "naive") return Method::naive;
  if (s == "fvg") return Method::fvg;
  if (s == "multiple") return Method::multiple;
  if (s == "evalue") return Method::evalue;
  if (s == "knockoff_plus" || s == "knockoff-plus") return Method::knockoff_plus;
  if (s == "group_filter" || s == "group") return Method::group_filter;
  throw ValidationError("unknown filter method '" + s + "'");
}

} // namespace fvg
