#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fvg/harness.hpp"
#include "fvg/knockoffs.hpp"
#include "fvg/types.hpp"

// File formats. Feature and group ids are 1-based in every file.
namespace fvg::io {

namespace fs = std::filesystem;

/// Dense comma-separated matrix. A first line containing any non-numeric
/// field is treated as a header and skipped.
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const fs::path& path);
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {});
void write_matrix_csv(const fs::path& path, const Matrix& m, const std::vector<std::string>& header = {});

/// A single column (or a single row) of numbers.
Vector read_vector_csv(const fs::path& path);

/// {"p": 6, "groups": [[1, 2], [3, 4, 5], [6]]}
std::string groups_to_json(const GroupStructure& gs);
GroupStructure groups_from_json(const std::string& text);
GroupStructure read_groups(const fs::path& path);
void write_groups(const fs::path& path, const GroupStructure& gs);

/// {"mu": [...], "sigma": [[...], ...], "groups": [[...], ...]}
std::string model_to_json(const GaussianModel& model);
GaussianModel model_from_json(const std::string& text);
GaussianModel read_model(const fs::path& path);
void write_model(const fs::path& path, const GaussianModel& model);

/// Scores as read back from CSV: one ScorePair per feature plus the group
/// id column when present (0-based, empty when absent).
struct ScoreTable {
  Scores scores;
  std::vector<Index> group_ids;
};

/// Columns feature_id,group_id,T,T_knock,W for one copy;
/// feature_id,group_id,T,T_knock_1..T_knock_M,kappa,tau for M copies.
void write_scores_csv(std::ostream& out, const Scores& scores, const GroupStructure& gs);
void write_scores_csv(const fs::path& path, const Scores& scores, const GroupStructure& gs);
ScoreTable read_scores_csv(std::istream& in);
ScoreTable read_scores_csv(const fs::path& path);

/// {method, alpha, selected, thresholds, fdp_hat, budgets}; infinite
/// thresholds are written as null.
std::string rejection_to_json(const RejectionSet& rs);
RejectionSet rejection_from_json(const std::string& text);

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig read_config(const fs::path& path);
std::string config_to_json(const ExperimentConfig& config);

void write_summary_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_replications_csv(std::ostream& out, const std::vector<ReplicationResult>& reps);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

} // namespace fvg::io
