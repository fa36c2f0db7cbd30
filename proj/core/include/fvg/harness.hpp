#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fvg/filters.hpp"
#include "fvg/importance.hpp"
#include "fvg/knockoffs.hpp"
#include "fvg/metrics.hpp"
#include "fvg/types.hpp"

namespace fvg {

enum class BetaPattern { standard, zero, custom };

/// Full description of a synthetic run. Defaults reproduce the 250-feature,
/// 50-group compound-symmetry design with the 28-signal coefficient pattern.
struct ExperimentConfig {
  Index n = 1000;
  std::vector<Index> group_sizes = std::vector<Index>(50, 5);
  double within_corr = 0.7;
  double between_corr = 0.3;
  std::optional<Matrix> sigma; // overrides the block design when set

  BetaPattern beta = BetaPattern::standard;
  Vector beta_custom;
  double noise_sd = 4.0;

  Index replications = 100;
  std::uint64_t seed = 1;
  std::vector<double> alphas{0.05, 0.10, 0.20};
  std::vector<Method> filters{Method::fvg, Method::evalue, Method::naive, Method::knockoff_plus,
                              Method::group_filter};

  ScoreFamily score = ScoreFamily::joint_lasso;
  LambdaRule lambda = LambdaRule::cv(5, 0); // seed replaced per replication
  Index copies = 1;
  BudgetStrategy budget = BudgetStrategy::magnitude;
  double correction = kDefaultCorrection;
  unsigned threads = 0; // 0 = hardware concurrency

  Index p() const;
  void validate() const;
};

/// Covariance of the block design: unit variances, `within` inside groups,
/// `between` across groups.
Matrix block_covariance(const std::vector<Index>& group_sizes, double within, double between);

/// Coefficients for the standard pattern on groups of five: groups 1-2 get
/// (1, 1, -0.2, -0.2, -0.2), groups 3-4 (2.5, -1.2, -1.2, 0, 0), groups 5-10
/// (0.3, 0.3, 0, 0, 0), all later groups 0.
Vector standard_beta(const GroupStructure& gs);

struct SyntheticData {
  Dataset data;
  GaussianModel model;
  GroundTruth truth;
  Vector beta;
};

/// X ~ N(0, Sigma) row-wise, y = X beta + N(0, noise_sd^2).
SyntheticData gen_synthetic(const ExperimentConfig& config, std::uint64_t seed);

struct FilterOutcome {
  Method method = Method::fvg;
  double alpha = 0.0;
  double fdp = 0.0;
  double power = 0.0;
  Index selected = 0;
  Index catch_count = 0;
  double catch_size = 0.0;   // NaN when nothing is selected
  double catch_purity = 0.0; // NaN when nothing is selected
};

struct ReplicationResult {
  Index replication = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<FilterOutcome> outcomes;
  std::vector<double> w;        // single-copy statistics (empty when M > 1)
  std::vector<Index> kappa;     // multiple-knockoff statistics (empty when M = 1)
  std::vector<double> tau;
  double kkt = 0.0;             // KKT violation of the joint lasso fit (lasso families)
  double seconds = 0.0;
};

struct AggregateRow {
  Method method = Method::fvg;
  double alpha = 0.0;
  Index replications = 0;
  double mean_fdr = 0.0;
  double se_fdr = 0.0;
  double mean_power = 0.0;
  double se_power = 0.0;
  double mean_catch_size = 0.0; // over replications with a nonempty selection
  double mean_purity = 0.0;
};

struct ExperimentResult {
  std::vector<ReplicationResult> replications;
  std::vector<AggregateRow> summary;
  Index failures = 0;
};

/// Validated configuration plus everything shared by its replications
/// (model, S matrix, knockoff sampler, Psi, population correlation).
class Experiment {
public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const GaussianModel& model() const { return model_; }
  const SMatrix& s_matrix() const { return s_; }
  const Vector& beta() const { return beta_; }
  const GroundTruth& truth() const { return truth_; }
  const Matrix& correlation() const { return corr_; }

  /// Data for replication `index` (seeded from the master seed).
  SyntheticData synthetic(Index index) const;

  /// Runs one replication; errors are captured in the result, not thrown.
  ReplicationResult run_replication(Index index) const;

  /// All replications on a worker pool, reduced in replication order.
  ExperimentResult run() const;

private:
  ExperimentConfig config_;
  GaussianModel model_;
  SMatrix s_;
  KnockoffSampler sampler_;
  Matrix psi_;
  Matrix corr_;
  Matrix chol_; // lower Cholesky factor of Sigma
  Vector beta_;
  GroundTruth truth_;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<AggregateRow> aggregate(const ExperimentConfig& config, const std::vector<ReplicationResult>& reps);

} // namespace fvg
