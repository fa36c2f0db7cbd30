#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fvg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Partition of features 0..p-1 into K disjoint, nonempty groups.
///
/// Indices are 0-based in memory; file formats use 1-based ids.
class GroupStructure {
public:
  GroupStructure() = default;

  /// Validates that `groups` is a partition of 0..p-1 with no empty group.
  /// Member order inside each group is normalized to ascending.
  GroupStructure(Index p, std::vector<std::vector<Index>> groups);

  /// Builds from a per-feature group label (labels need not be contiguous;
  /// groups are ordered by smallest member).
  static GroupStructure from_labels(const std::vector<Index>& labels);

  static GroupStructure singletons(Index p);
  static GroupStructure contiguous(const std::vector<Index>& sizes);

  Index p() const { return p_; }
  Index size() const { return groups_.size(); }
  const std::vector<Index>& group(Index k) const { return groups_.at(k); }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  Index group_of(Index j) const { return group_of_.at(j); }
  Index max_group_size() const;

  bool operator==(const GroupStructure&) const = default;

private:
  Index p_ = 0;
  std::vector<std::vector<Index>> groups_;
  std::vector<Index> group_of_;
};

/// Response plus feature matrix (rows are samples).
struct Dataset {
  Matrix x;
  Vector y;

  Index n() const { return static_cast<Index>(x.rows()); }
  Index p() const { return static_cast<Index>(x.cols()); }
  void validate() const;
};

/// Importance of the original feature and of each of its M knockoff copies.
/// For the single-knockoff case `values` = {T_j, T~_j}.
struct ScorePair {
  std::vector<double> values;

  ScorePair() = default;
  ScorePair(double t, double t_knock) : values{t, t_knock} {}
  explicit ScorePair(std::vector<double> v) : values(std::move(v)) {}

  double t() const { return values.at(0); }
  double t_knock() const { return values.at(1); }
  Index copies() const { return values.size() - 1; }
};

using Scores = std::vector<ScorePair>;

/// Group-column / magnitude-row arrangement of per-feature statistics.
///
/// `columns[k]` lists the features of group k by decreasing magnitude (ties by
/// index), and `rows[l]` collects the l-th entry of every column that has one.
struct Alignment {
  std::vector<std::vector<Index>> columns;
  std::vector<std::vector<Index>> rows;
  std::vector<Index> row_of;

  Index row_count() const { return rows.size(); }
};

/// Aligns features of `gs` by descending `magnitude` within each group.
Alignment align_by_magnitude(const std::vector<double>& magnitude, const GroupStructure& gs);

struct WTable {
  std::vector<double> w;
  GroupStructure gs;
  Alignment alignment;

  Index p() const { return w.size(); }
  Index row_count() const { return alignment.row_count(); }
  const std::vector<Index>& row(Index l) const { return alignment.rows.at(l); }
};

/// Signed statistics aligned by |W|.
WTable align_w(const std::vector<double>& w, const GroupStructure& gs);

/// Multiple-knockoff statistics: winning copy (0 = original) and margin.
struct KappaTauTable {
  std::vector<Index> kappa;
  std::vector<double> tau;
  Index copies = 1;
  GroupStructure gs;
  Alignment alignment;

  Index p() const { return tau.size(); }
  Index row_count() const { return alignment.row_count(); }
  const std::vector<Index>& row(Index l) const { return alignment.rows.at(l); }
};

/// Aligns (kappa, tau) by descending tau.
KappaTauTable align_kappa_tau(std::vector<Index> kappa, std::vector<double> tau, Index copies,
                              const GroupStructure& gs);

enum class Method { naive, fvg, multiple, evalue, knockoff_plus, group_filter };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct RejectionSet {
  std::vector<Index> selected;    // sorted ascending; group indices for group_filter
  std::vector<double> thresholds; // one per row (one entry for global thresholds); may be +inf
  double fdp_hat = 0.0;
  Method method = Method::fvg;
  double alpha = 0.0;
  std::vector<double> budgets;
};

} // namespace fvg
