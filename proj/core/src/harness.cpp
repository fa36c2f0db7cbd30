#include "fvg/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "fvg/error.hpp"
#include "fvg/grouping.hpp"
#include "fvg/rng.hpp"

namespace fvg {

namespace {

constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kKnockoffStream = 1;
constexpr std::uint64_t kCvStream = 2;

GroupStructure config_groups(const ExperimentConfig& c) { return GroupStructure::contiguous(c.group_sizes); }

Matrix config_sigma(const ExperimentConfig& c) {
  if (c.sigma) return *c.sigma;
  return block_covariance(c.group_sizes, c.within_corr, c.between_corr);
}

Vector config_beta(const ExperimentConfig& c, const GroupStructure& gs) {
  switch (c.beta) {
  case BetaPattern::standard: return standard_beta(gs);
  case BetaPattern::zero: return Vector::Zero(static_cast<Eigen::Index>(gs.p()));
  case BetaPattern::custom: return c.beta_custom;
  }
  return {};
}

GaussianModel config_model(const ExperimentConfig& c) {
  c.validate();
  GaussianModel m{Vector::Zero(static_cast<Eigen::Index>(c.p())), config_sigma(c), config_groups(c)};
  m.validate();
  return m;
}

SyntheticData draw(const GaussianModel& model, const Matrix& chol, const Vector& beta, const GroundTruth& truth,
                   Index n, double noise_sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index p = static_cast<Eigen::Index>(model.p());
  Matrix z(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index c = 0; c < p; ++c) z(i, c) = normal(rng);
  SyntheticData out;
  out.data.x = z * chol.transpose();
  out.data.y = out.data.x * beta;
  for (Eigen::Index i = 0; i < out.data.y.size(); ++i) out.data.y(i) += noise_sd * normal(rng);
  out.model = model;
  out.truth = truth;
  out.beta = beta;
  return out;
}

Matrix lower_cholesky(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance Cholesky failed");
  return llt.matrixL();
}

} // namespace

Index ExperimentConfig::p() const { return std::accumulate(group_sizes.begin(), group_sizes.end(), Index{0}); }

void ExperimentConfig::validate() const {
  require(n >= 2, "n must be at least 2");
  require(!group_sizes.empty(), "at least one group is required");
  for (Index s : group_sizes) require(s > 0, "group sizes must be positive");
  require(replications >= 1, "replications must be positive");
  require(!alphas.empty(), "at least one alpha is required");
  for (double a : alphas) require(a > 0.0 && a <= 1.0, "alpha values must lie in (0, 1]");
  require(!filters.empty(), "at least one filter is required");
  require(copies >= 1, "copies must be >= 1");
  require(noise_sd >= 0.0 && std::isfinite(noise_sd), "noise_sd must be finite and >= 0");
  require(correction > 0.0, "correction must be positive");
  require(std::abs(within_corr) < 1.0 && std::abs(between_corr) < 1.0, "correlations must lie in (-1, 1)");
  if (sigma)
    require(static_cast<Index>(sigma->rows()) == p() && static_cast<Index>(sigma->cols()) == p(),
            "supplied sigma does not match the group sizes");
  if (beta == BetaPattern::custom)
    require(static_cast<Index>(beta_custom.size()) == p(), "custom beta length does not match p");
  if (copies > 1)
    for (Method m : filters)
      require(m == Method::multiple, "only the 'multiple' filter is available with more than one knockoff copy");
  if (score == ScoreFamily::combined) require(copies == 1, "combined scores support a single knockoff copy");
  if (lambda.kind == LambdaRule::Kind::cv) require(lambda.folds >= 2 && lambda.folds <= n, "invalid CV folds");
}

Matrix block_covariance(const std::vector<Index>& group_sizes, double within, double between) {
  const GroupStructure gs = GroupStructure::contiguous(group_sizes);
  const Index p = gs.p();
  Matrix sigma(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          i == j ? 1.0 : (gs.group_of(i) == gs.group_of(j) ? within : between);
  return sigma;
}

Vector standard_beta(const GroupStructure& gs) {
  Vector beta = Vector::Zero(static_cast<Eigen::Index>(gs.p()));
  static const double patterns[3][5] = {
      {1.0, 1.0, -0.2, -0.2, -0.2}, {2.5, -1.2, -1.2, 0.0, 0.0}, {0.3, 0.3, 0.0, 0.0, 0.0}};
  for (Index k = 0; k < std::min<Index>(gs.size(), 10); ++k) {
    const auto& g = gs.group(k);
    require(g.size() == 5, "the standard coefficient pattern needs groups of five for the first ten groups");
    const double* pat = patterns[k < 2 ? 0 : (k < 4 ? 1 : 2)];
    for (Index a = 0; a < 5; ++a) beta(static_cast<Eigen::Index>(g[a])) = pat[a];
  }
  return beta;
}

SyntheticData gen_synthetic(const ExperimentConfig& config, std::uint64_t seed) {
  const GaussianModel model = config_model(config);
  const Vector beta = config_beta(config, model.gs);
  return draw(model, lower_cholesky(model.sigma), beta, GroundTruth::from_beta(beta, model.gs), config.n,
              config.noise_sd, seed);
}

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)),
      model_(config_model(config_)),
      s_(build_s_equi(model_, config_.copies)),
      sampler_(model_, s_, config_.copies),
      psi_(psi_matrix(model_, s_)),
      corr_(covariance_to_correlation(model_.sigma)),
      chol_(lower_cholesky(model_.sigma)),
      beta_(config_beta(config_, model_.gs)),
      truth_(GroundTruth::from_beta(beta_, model_.gs)) {}

SyntheticData Experiment::synthetic(Index index) const {
  return draw(model_, chol_, beta_, truth_, config_.n, config_.noise_sd,
              derive_seed(config_.seed, index, kDataStream));
}

ReplicationResult Experiment::run_replication(Index index) const {
  const auto start = std::chrono::steady_clock::now();
  ReplicationResult r;
  r.replication = index;
  r.seed = derive_seed(config_.seed, index, kDataStream);
  try {
    const SyntheticData sd = synthetic(index);
    const auto knockoffs = sampler_.sample(sd.data.x, derive_seed(config_.seed, index, kKnockoffStream));

    ScoreOptions so;
    so.lambda = config_.lambda;
    so.lambda.seed = derive_seed(config_.seed, index, kCvStream);
    so.family = Family::linear;

    Scores scores;
    const std::span<const Matrix> ks(knockoffs);
    if (config_.score == ScoreFamily::joint_lasso) {
      LassoFit fit;
      scores = scores_joint_lasso(sd.data.x, ks, sd.data.y, so, &fit);
      Matrix design(sd.data.x.rows(), sd.data.x.cols() * static_cast<Eigen::Index>(knockoffs.size() + 1));
      design.leftCols(sd.data.x.cols()) = sd.data.x;
      for (Index m = 0; m < knockoffs.size(); ++m)
        design.middleCols(static_cast<Eigen::Index>(m + 1) * sd.data.x.cols(), sd.data.x.cols()) = knockoffs[m];
      r.kkt = kkt_violation(fit, design, sd.data.y);
    } else {
      scores = compute_scores(config_.score, sd.data.x, ks, sd.data.y, model_.gs, so, &psi_);
    }

    std::optional<WTable> wt;
    std::optional<KappaTauTable> kt;
    if (config_.copies == 1) {
      r.w = w_statistics(scores);
      wt = align_w(r.w, model_.gs);
    }
    bool need_kt = false;
    for (Method m : config_.filters) need_kt |= m == Method::multiple;
    if (need_kt || config_.copies > 1) {
      kt = kappa_tau(scores, model_.gs);
      r.kappa = kt->kappa;
      r.tau = kt->tau;
    }

    std::vector<double> w_group;
    for (Method m : config_.filters)
      if (m == Method::group_filter && w_group.empty()) w_group = w_statistics(group_scores(scores, model_.gs));

    for (Method m : config_.filters) {
      for (double alpha : config_.alphas) {
        RejectionSet rs;
        switch (m) {
        case Method::fvg: rs = fvg_filter(*wt, alpha, budgets(*wt, config_.budget), config_.correction); break;
        case Method::naive: rs = naive_fvg(*wt, alpha); break;
        case Method::evalue: rs = evalue_filter(*wt, alpha); break;
        case Method::knockoff_plus: rs = knockoff_plus(r.w, alpha); break;
        case Method::group_filter: rs = group_filter(w_group, alpha); break;
        case Method::multiple:
          rs = fvg_multiple(*kt, alpha, budgets(*kt, config_.budget), config_.correction);
          break;
        }
        FilterOutcome o;
        o.method = m;
        o.alpha = alpha;
        o.selected = rs.selected.size();
        const FdpPower fp = m == Method::group_filter ? fdp_power(rs.selected, truth_.nonnull_groups)
                                                      : fdp_power(rs.selected, truth_);
        o.fdp = fp.fdp;
        o.power = fp.power;
        const auto cs = summarize_catching_sets(catching_sets(rs.selected, model_.gs, m), corr_);
        o.catch_count = cs.count;
        o.catch_size = cs.mean_size;
        o.catch_purity = cs.mean_purity;
        r.outcomes.push_back(o);
      }
    }
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
    r.outcomes.clear();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<AggregateRow> aggregate(const ExperimentConfig& config, const std::vector<ReplicationResult>& reps) {
  std::vector<AggregateRow> rows;
  for (Method m : config.filters) {
    for (double alpha : config.alphas) {
      AggregateRow row;
      row.method = m;
      row.alpha = alpha;
      std::vector<double> fdp, power, size, pur;
      for (const auto& r : reps) {
        if (!r.ok) continue;
        for (const auto& o : r.outcomes) {
          if (o.method != m || o.alpha != alpha) continue;
          fdp.push_back(o.fdp);
          power.push_back(o.power);
          if (o.catch_count > 0) {
            size.push_back(o.catch_size);
            pur.push_back(o.catch_purity);
          }
        }
      }
      auto mean = [](const std::vector<double>& v) {
        return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      };
      auto se = [&](const std::vector<double>& v) {
        if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
        const double mu = mean(v);
        double ss = 0.0;
        for (double x : v) ss += (x - mu) * (x - mu);
        return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
      };
      row.replications = fdp.size();
      row.mean_fdr = mean(fdp);
      row.se_fdr = se(fdp);
      row.mean_power = mean(power);
      row.se_power = se(power);
      row.mean_catch_size = mean(size);
      row.mean_purity = mean(pur);
      rows.push_back(row);
    }
  }
  return rows;
}

ExperimentResult Experiment::run() const {
  ExperimentResult out;
  out.replications.resize(config_.replications);
  unsigned threads = config_.threads ? config_.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<Index>(threads, config_.replications));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index i = next++; i < config_.replications; i = next++) out.replications[i] = run_replication(i);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& r : out.replications)
    if (!r.ok) ++out.failures;
  out.summary = aggregate(config_, out.replications);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) { return Experiment(config).run(); }

} // namespace fvg
