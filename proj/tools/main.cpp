// fvg: command line front end for clustering, knockoff sampling, scoring,
// filtering and simulation. Exit codes: 0 ok, 1 invalid input, 2 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fvg/error.hpp"
#include "fvg/filters.hpp"
#include "fvg/grouping.hpp"
#include "fvg/harness.hpp"
#include "fvg/importance.hpp"
#include "fvg/io.hpp"
#include "fvg/knockoffs.hpp"

namespace fs = std::filesystem;
using namespace fvg;

namespace {

struct ClusterArgs {
  std::string corr, x, out;
  double cutoff = 0.5;
};

struct KnockoffArgs {
  std::string model, x, out;
  Index m = 1;
  std::uint64_t seed = 1;
};

struct ScoresArgs {
  std::string x, xk, y, groups, out, model;
  std::string family = "joint_lasso";
  std::string response = "linear";
  std::optional<double> lambda;
  Index folds = 5;
  std::uint64_t seed = 1;
};

struct FilterArgs {
  std::string scores, groups, out;
  std::string method = "fvg";
  std::string budget = "magnitude";
  double alpha = 0.1;
  double correction = kDefaultCorrection;
};

struct SimulateArgs {
  std::string config, out;
  std::optional<unsigned> threads;
};

void run_cluster(const ClusterArgs& a) {
  require(a.corr.empty() != a.x.empty(), "give exactly one of --corr or --x");
  Matrix corr;
  if (!a.corr.empty()) {
    corr = io::read_matrix_csv(a.corr);
    validate_correlation(corr);
  } else {
    corr = correlation_from_data(io::read_matrix_csv(a.x));
  }
  const GroupStructure gs = cluster_average_linkage(corr, a.cutoff);
  io::write_groups(a.out, gs);
  std::cerr << "cluster: " << gs.p() << " features in " << gs.size() << " groups\n";
}

void run_knockoff(const KnockoffArgs& a) {
  const GaussianModel model = io::read_model(a.model);
  const Matrix x = io::read_matrix_csv(a.x);
  require(static_cast<Index>(x.cols()) == model.p(), "--x has " + std::to_string(x.cols()) +
                                                         " columns but the model has p = " + std::to_string(model.p()));
  require(a.m >= 1, "--m must be at least 1");
  const SMatrix s = build_s(model, SConstruction::equi, a.m);
  const auto copies = KnockoffSampler(model, s, a.m).sample(x, a.seed);
  const Index p = model.p();
  Matrix out(x.rows(), static_cast<Eigen::Index>(p * a.m));
  std::vector<std::string> header;
  for (Index c = 0; c < a.m; ++c) {
    out.middleCols(static_cast<Eigen::Index>(c * p), static_cast<Eigen::Index>(p)) = copies[c];
    for (Index j = 0; j < p; ++j)
      header.push_back(a.m == 1 ? "xk_" + std::to_string(j + 1)
                                : "xk" + std::to_string(c + 1) + "_" + std::to_string(j + 1));
  }
  io::write_matrix_csv(a.out, out, header);
  std::cerr << "knockoff: " << a.m << " cop" << (a.m == 1 ? "y" : "ies") << ", gamma = " << s.gamma << "\n";
}

void run_scores(const ScoresArgs& a) {
  const Matrix x = io::read_matrix_csv(a.x);
  const Matrix xk_all = io::read_matrix_csv(a.xk);
  const Vector y = io::read_vector_csv(a.y);
  const GroupStructure gs = io::read_groups(a.groups);
  const Index p = static_cast<Index>(x.cols());
  require(gs.p() == p, "groups cover " + std::to_string(gs.p()) + " features but --x has " + std::to_string(p));
  require(xk_all.rows() == x.rows(), "--xk and --x have different row counts");
  require(xk_all.cols() > 0 && static_cast<Index>(xk_all.cols()) % p == 0,
          "--xk must have a multiple of p columns (one block per knockoff copy)");
  const Index m = static_cast<Index>(xk_all.cols()) / p;
  std::vector<Matrix> knockoffs;
  for (Index c = 0; c < m; ++c)
    knockoffs.emplace_back(xk_all.middleCols(static_cast<Eigen::Index>(c * p), static_cast<Eigen::Index>(p)));

  ScoreOptions opts;
  opts.family = family_from_string(a.response);
  opts.lambda = a.lambda ? LambdaRule::fixed(*a.lambda) : LambdaRule::cv(a.folds, a.seed);
  const ScoreFamily family = score_family_from_string(a.family);
  std::optional<Matrix> psi;
  if (family == ScoreFamily::combined) {
    require(!a.model.empty(), "combined scores need --model to form Psi");
    const GaussianModel model = io::read_model(a.model);
    require(model.p() == p && model.gs == gs, "--model does not match --x and --groups");
    psi = psi_matrix(model, build_s(model, SConstruction::equi, 1));
  }
  const Scores scores = compute_scores(family, x, knockoffs, y, gs, opts, psi ? &*psi : nullptr);
  io::write_scores_csv(a.out, scores, gs);
}

void run_filter(const FilterArgs& a) {
  const io::ScoreTable table = io::read_scores_csv(a.scores);
  const GroupStructure gs = io::read_groups(a.groups);
  require(gs.p() == table.scores.size(), "groups cover " + std::to_string(gs.p()) + " features but the scores have " +
                                             std::to_string(table.scores.size()));
  for (Index j = 0; j < table.group_ids.size(); ++j)
    require(table.group_ids[j] == gs.group_of(j),
            "group_id of feature " + std::to_string(j + 1) + " disagrees with --groups");
  require(a.alpha > 0.0 && a.alpha <= 1.0, "--alpha must lie in (0, 1]");
  const Method method = method_from_string(a.method);
  const BudgetStrategy strategy = budget_strategy_from_string(a.budget);
  const Index m = table.scores.front().copies();
  require(m == 1 || method == Method::multiple, "scores with " + std::to_string(m) +
                                                    " knockoff copies can only be filtered with --method multiple");

  RejectionSet rs;
  if (method == Method::multiple) {
    const KappaTauTable kt = kappa_tau(table.scores, gs);
    rs = fvg_multiple(kt, a.alpha, budgets(kt, strategy), a.correction);
  } else if (method == Method::group_filter) {
    rs = group_filter(w_statistics(group_scores(table.scores, gs)), a.alpha);
  } else {
    const std::vector<double> w = w_statistics(table.scores);
    const WTable wt = align_w(w, gs);
    switch (method) {
    case Method::fvg: rs = fvg_filter(wt, a.alpha, budgets(wt, strategy), a.correction); break;
    case Method::naive: rs = naive_fvg(wt, a.alpha); break;
    case Method::evalue: rs = evalue_filter(wt, a.alpha); break;
    case Method::knockoff_plus: rs = knockoff_plus(w, a.alpha); break;
    default: break;
    }
  }
  io::write_text(a.out, io::rejection_to_json(rs) + "\n");
  std::cerr << "filter: " << to_string(method) << " selected " << rs.selected.size() << "\n";
}

void run_simulate(const SimulateArgs& a) {
  ExperimentConfig config = io::read_config(a.config);
  if (a.threads) config.threads = *a.threads;
  fs::create_directories(a.out);
  const ExperimentResult result = run_experiment(config);
  {
    std::ofstream out(fs::path(a.out) / "summary.csv");
    require(static_cast<bool>(out), "cannot write to '" + a.out + "'");
    io::write_summary_csv(out, result.summary);
  }
  {
    std::ofstream out(fs::path(a.out) / "replications.csv");
    io::write_replications_csv(out, result.replications);
  }
  io::write_text(fs::path(a.out) / "config.json", io::config_to_json(config) + "\n");
  for (const auto& r : result.replications)
    if (!r.ok) std::cerr << "replication " << r.replication + 1 << " failed: " << r.error << "\n";
  std::cerr << "simulate: " << config.replications << " replications, " << result.failures << " failed\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-versus-group knockoff filter"};
  app.require_subcommand(1);

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "Average-linkage grouping of a correlation matrix");
  cluster->add_option("--corr", ca.corr, "Correlation matrix CSV");
  cluster->add_option("--x", ca.x, "Data matrix CSV (correlation computed from it)");
  cluster->add_option("--cutoff", ca.cutoff, "Merge while 1 - |corr| is below this")->capture_default_str();
  cluster->add_option("--out", ca.out, "Output groups JSON")->required();

  KnockoffArgs ka;
  auto* knockoff = app.add_subcommand("knockoff", "Sample Gaussian group knockoffs");
  knockoff->add_option("--model", ka.model, "Model JSON (mu, sigma, groups)")->required();
  knockoff->add_option("--x", ka.x, "Data matrix CSV")->required();
  knockoff->add_option("--m", ka.m, "Number of knockoff copies")->capture_default_str();
  knockoff->add_option("--seed", ka.seed, "RNG seed")->capture_default_str();
  knockoff->add_option("--out", ka.out, "Output CSV (M*p columns)")->required();

  ScoresArgs sa;
  auto* scores = app.add_subcommand("scores", "Importance scores for features and knockoffs");
  scores->add_option("--x", sa.x, "Data matrix CSV")->required();
  scores->add_option("--xk", sa.xk, "Knockoff CSV (M*p columns)")->required();
  scores->add_option("--y", sa.y, "Response CSV (one column)")->required();
  scores->add_option("--groups", sa.groups, "Groups JSON")->required();
  scores->add_option("--family", sa.family,
                     "marginal | joint_lasso | residual_corr | separate_lasso | combined")->capture_default_str();
  scores->add_option("--response", sa.response, "linear | logistic")->capture_default_str();
  scores->add_option("--lambda", sa.lambda, "Fixed lasso penalty (default: cross-validated)");
  scores->add_option("--folds", sa.folds, "Cross-validation folds")->capture_default_str();
  scores->add_option("--seed", sa.seed, "Cross-validation fold seed")->capture_default_str();
  scores->add_option("--model", sa.model, "Model JSON (required for combined scores)");
  scores->add_option("--out", sa.out, "Output scores CSV")->required();

  FilterArgs fa;
  auto* filter = app.add_subcommand("filter", "Select features from scores");
  filter->add_option("--scores", fa.scores, "Scores CSV")->required();
  filter->add_option("--groups", fa.groups, "Groups JSON")->required();
  filter->add_option("--method", fa.method, "fvg | naive | multiple | evalue | knockoff-plus | group")
      ->capture_default_str();
  filter->add_option("--alpha", fa.alpha, "Target FDR level")->capture_default_str();
  filter->add_option("--budget", fa.budget, "magnitude | magnitude-over-l | uniform")->capture_default_str();
  filter->add_option("--correction", fa.correction, "Correction constant c")->capture_default_str();
  filter->add_option("--out", fa.out, "Output rejection JSON")->required();

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "Run a synthetic experiment");
  simulate->add_option("--config", ma.config, "Experiment config JSON")->required();
  simulate->add_option("--out", ma.out, "Output directory")->required();
  simulate->add_option("--threads", ma.threads, "Worker threads (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cluster->parsed()) run_cluster(ca);
    else if (knockoff->parsed()) run_knockoff(ka);
    else if (scores->parsed()) run_scores(sa);
    else if (filter->parsed()) run_filter(fa);
    else if (simulate->parsed()) run_simulate(ma);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
