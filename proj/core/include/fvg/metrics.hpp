#pragma once

#include <utility>
#include <vector>

#include "fvg/types.hpp"

namespace fvg {

/// Indices with nonzero effect, and the groups that contain them.
struct GroundTruth {
  std::vector<Index> nonnull_features; // ascending
  std::vector<Index> nonnull_groups;   // ascending

  GroundTruth() = default;
  GroundTruth(std::vector<Index> nonnull, const GroupStructure& gs);
  static GroundTruth from_beta(const Vector& beta, const GroupStructure& gs);

  bool is_nonnull(Index j) const;
};

struct FdpPower {
  double fdp = 0.0;
  double power = 0.0;
};

/// fdp = false selections / (1 v |selected|); power = true selections /
/// |nonnull| (0 when there are no non-nulls).
FdpPower fdp_power(const std::vector<Index>& selected, const std::vector<Index>& nonnull);
FdpPower fdp_power(const std::vector<Index>& selected, const GroundTruth& truth);

struct CatchingSet {
  Index group = 0;
  std::vector<Index> features;
};

/// Nonempty catching sets: B_k ∩ R for feature-level methods, the whole B_k
/// for each group rejected by the group filter (selected holds group ids then).
std::vector<CatchingSet> catching_sets(const std::vector<Index>& selected, const GroupStructure& gs, Method method);

/// Minimum |c_ij| over pairs in the set; 1 for a singleton.
double purity(const std::vector<Index>& set, const Matrix& corr);

struct CatchingSummary {
  Index count = 0;
  double mean_size = 0.0;   // NaN when count == 0
  double mean_purity = 0.0; // NaN when count == 0
};

CatchingSummary summarize_catching_sets(const std::vector<CatchingSet>& sets, const Matrix& corr);

} // namespace fvg
