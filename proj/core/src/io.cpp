#include "fvg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fvg/error.hpp"

namespace fvg::io {

using json = nlohmann::json;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r\"");
    const auto e = field.find_last_not_of(" \t\r\"");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  if (s == "inf" || s == "Inf") { v = kInf; return true; }
  if (s == "-inf" || s == "-Inf") { v = -kInf; return true; }
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool all_numeric(const std::vector<std::string>& fields) {
  double v;
  for (const auto& f : fields)
    if (!parse_double(f, v)) return false;
  return true;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

json groups_json(const GroupStructure& gs) {
  json groups = json::array();
  for (const auto& g : gs.groups()) {
    json ids = json::array();
    for (Index j : g) ids.push_back(j + 1);
    groups.push_back(ids);
  }
  return groups;
}

GroupStructure groups_from(const json& groups, Index p) {
  require(groups.is_array(), "'groups' must be an array of arrays");
  std::vector<std::vector<Index>> out;
  for (const auto& g : groups) {
    require(g.is_array(), "'groups' must be an array of arrays");
    std::vector<Index> ids;
    for (const auto& v : g) {
      require(v.is_number_integer() && v.get<long long>() >= 1, "feature ids must be positive integers");
      ids.push_back(static_cast<Index>(v.get<long long>() - 1));
    }
    out.push_back(std::move(ids));
  }
  return GroupStructure(p, std::move(out));
}

template <class T> constexpr bool is_unsigned_list = false;
template <> constexpr bool is_unsigned_list<std::vector<Index>> = true;

template <class T> T get_as(const json& j, const char* key) {
  // nlohmann converts -3 to a huge size_t without complaint.
  auto non_negative = [&](const json& v) {
    require(v.is_number_unsigned(), std::string("field '") + key + "' must be a nonnegative integer");
  };
  try {
    const json& v = j.at(key);
    if constexpr (std::is_unsigned_v<T>) non_negative(v);
    if constexpr (is_unsigned_list<T>)
      if (v.is_array())
        for (const auto& e : v) non_negative(e);
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("missing or malformed field '") + key + "'");
  }
}

Matrix matrix_from(const json& rows, const char* what) {
  require(rows.is_array() && !rows.empty(), std::string(what) + " must be a nonempty array of rows");
  const Index r = rows.size();
  const Index c = rows[0].size();
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Index i = 0; i < r; ++i) {
    require(rows[i].is_array() && rows[i].size() == c, std::string(what) + " rows must have equal length");
    for (Index k = 0; k < c; ++k) {
      require(rows[i][k].is_number(), std::string(what) + " entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    }
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

} // namespace

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (rows.empty() && line_no == 1 && !all_numeric(fields)) continue; // header
    std::vector<double> row(fields.size());
    for (Index k = 0; k < fields.size(); ++k)
      if (!parse_double(fields[k], row[k]))
        throw ValidationError("non-numeric field '" + fields[k] + "' on line " + std::to_string(line_no));
    if (!rows.empty() && row.size() != rows[0].size())
      throw ValidationError("ragged CSV: line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(rows[0].size()));
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "CSV contains no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Index i = 0; i < rows.size(); ++i)
    for (Index k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return m;
}

Matrix read_matrix_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  if (!header.empty()) {
    require(static_cast<Eigen::Index>(header.size()) == m.cols(), "header length does not match column count");
    for (Index k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << fmt(m(i, k));
    out << '\n';
  }
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::vector<std::string>& header) {
  auto out = open_out(path);
  write_matrix_csv(out, m, header);
}

Vector read_vector_csv(const fs::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw ValidationError("'" + path.string() + "' must hold a single column of numbers");
}

std::string groups_to_json(const GroupStructure& gs) {
  json j;
  j["p"] = gs.p();
  j["groups"] = groups_json(gs);
  return j.dump(2);
}

GroupStructure groups_from_json(const std::string& text) {
  const json j = parse(text, "groups");
  require(j.is_object(), "groups JSON must be an object");
  const json& groups = j.contains("groups") ? j.at("groups") : json();
  Index p = 0;
  if (j.contains("p")) {
    p = get_as<Index>(j, "p");
  } else {
    for (const auto& g : groups)
      for (const auto& v : g) p = std::max<Index>(p, v.get<Index>());
  }
  return groups_from(groups, p);
}

GroupStructure read_groups(const fs::path& path) { return groups_from_json(read_text(path)); }

void write_groups(const fs::path& path, const GroupStructure& gs) { write_text(path, groups_to_json(gs) + "\n"); }

std::string model_to_json(const GaussianModel& model) {
  json j;
  j["mu"] = std::vector<double>(model.mu.data(), model.mu.data() + model.mu.size());
  j["sigma"] = matrix_json(model.sigma);
  j["groups"] = groups_json(model.gs);
  return j.dump(2);
}

GaussianModel model_from_json(const std::string& text) {
  const json j = parse(text, "model");
  require(j.is_object() && j.contains("sigma") && j.contains("groups"), "model JSON needs 'sigma' and 'groups'");
  GaussianModel m;
  m.sigma = matrix_from(j.at("sigma"), "sigma");
  const Index p = static_cast<Index>(m.sigma.rows());
  if (j.contains("mu")) {
    const auto mu = get_as<std::vector<double>>(j, "mu");
    m.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Eigen::Index>(mu.size()));
  } else {
    m.mu = Vector::Zero(static_cast<Eigen::Index>(p));
  }
  m.gs = groups_from(j.at("groups"), p);
  m.validate();
  return m;
}

GaussianModel read_model(const fs::path& path) { return model_from_json(read_text(path)); }

void write_model(const fs::path& path, const GaussianModel& model) { write_text(path, model_to_json(model) + "\n"); }

void write_scores_csv(std::ostream& out, const Scores& scores, const GroupStructure& gs) {
  require(scores.size() == gs.p(), "scores do not match the group structure");
  require(!scores.empty(), "no scores to write");
  const Index m = scores[0].copies();
  require(m >= 1, "each score needs at least one knockoff copy");
  out << "feature_id,group_id,T,";
  if (m == 1) {
    out << "T_knock,W\n";
  } else {
    for (Index c = 1; c <= m; ++c) out << "T_knock_" << c << ",";
    out << "kappa,tau\n";
  }
  std::vector<double> w;
  std::optional<KappaTauTable> kt;
  if (m == 1) w = w_statistics(scores);
  else kt = kappa_tau(scores, gs);
  for (Index j = 0; j < scores.size(); ++j) {
    require(scores[j].copies() == m, "all features need the same number of knockoff copies");
    out << j + 1 << ',' << gs.group_of(j) + 1;
    for (double v : scores[j].values) out << ',' << fmt(v);
    if (m == 1) out << ',' << fmt(w[j]) << '\n';
    else out << ',' << kt->kappa[j] << ',' << fmt(kt->tau[j]) << '\n';
  }
}

void write_scores_csv(const fs::path& path, const Scores& scores, const GroupStructure& gs) {
  auto out = open_out(path);
  write_scores_csv(out, scores, gs);
}

ScoreTable read_scores_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "scores CSV is empty");
  const auto header = split_fields(line);
  auto find = [&](const std::string& name) -> long {
    for (Index k = 0; k < header.size(); ++k)
      if (header[k] == name) return static_cast<long>(k);
    return -1;
  };
  const long t_col = find("T");
  const long g_col = find("group_id");
  require(t_col >= 0, "scores CSV needs a 'T' column");
  std::vector<long> knock_cols{t_col}; // T first, then the copies
  if (long c = find("T_knock"); c >= 0) knock_cols.push_back(c);
  for (Index c = 1;; ++c) {
    const long k = find("T_knock_" + std::to_string(c));
    if (k < 0) break;
    knock_cols.push_back(k);
  }
  require(knock_cols.size() > 1, "scores CSV needs 'T_knock' or 'T_knock_1..M' columns");

  ScoreTable table;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_fields(line);
    require(f.size() == header.size(), "scores CSV line " + std::to_string(line_no) + " has the wrong field count");
    std::vector<double> values;
    for (long c : knock_cols) {
      double v;
      if (!parse_double(f[static_cast<Index>(c)], v))
        throw ValidationError("non-numeric score on line " + std::to_string(line_no));
      values.push_back(v);
    }
    for (double v : values) require(std::isfinite(v), "scores must be finite (line " + std::to_string(line_no) + ")");
    table.scores.emplace_back(std::move(values));
    if (g_col >= 0) {
      double g;
      require(parse_double(f[static_cast<Index>(g_col)], g) && g >= 1 && g == std::floor(g),
              "group_id must be a positive integer (line " + std::to_string(line_no) + ")");
      table.group_ids.push_back(static_cast<Index>(g) - 1);
    }
  }
  require(!table.scores.empty(), "scores CSV has no rows");
  return table;
}

ScoreTable read_scores_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_scores_csv(in);
}

std::string rejection_to_json(const RejectionSet& rs) {
  json j;
  j["method"] = to_string(rs.method);
  j["alpha"] = rs.alpha;
  json sel = json::array();
  for (Index s : rs.selected) sel.push_back(s + 1);
  j["selected"] = sel;
  json th = json::array();
  for (double t : rs.thresholds) th.push_back(std::isfinite(t) ? json(t) : json(nullptr));
  j["thresholds"] = th;
  j["fdp_hat"] = rs.fdp_hat;
  j["budgets"] = rs.budgets;
  return j.dump(2);
}

RejectionSet rejection_from_json(const std::string& text) {
  const json j = parse(text, "rejection");
  RejectionSet rs;
  rs.method = method_from_string(get_as<std::string>(j, "method"));
  rs.alpha = get_as<double>(j, "alpha");
  for (Index s : get_as<std::vector<Index>>(j, "selected")) {
    require(s >= 1, "selected ids are 1-based");
    rs.selected.push_back(s - 1);
  }
  for (const auto& t : j.at("thresholds")) rs.thresholds.push_back(t.is_null() ? kInf : t.get<double>());
  rs.fdp_hat = get_as<double>(j, "fdp_hat");
  rs.budgets = get_as<std::vector<double>>(j, "budgets");
  return rs;
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = parse(text, "config");
  require(j.is_object(), "config JSON must be an object");
  static const std::set<std::string> known{
      "n", "p", "K", "group_sizes", "group_size", "within_corr", "between_corr", "sigma", "beta", "noise_sd",
      "replications", "seed", "alphas", "filters", "score", "lambda", "copies", "budget", "correction", "threads"};
  for (const auto& [key, _] : j.items())
    require(known.contains(key), "unknown config field '" + key + "'");

  ExperimentConfig c;
  if (j.contains("n")) c.n = get_as<Index>(j, "n");
  if (j.contains("group_sizes")) {
    c.group_sizes = get_as<std::vector<Index>>(j, "group_sizes");
  } else if (j.contains("K") || j.contains("group_size")) {
    const Index k = j.contains("K") ? get_as<Index>(j, "K") : 50;
    const Index s = j.contains("group_size") ? get_as<Index>(j, "group_size") : 5;
    c.group_sizes.assign(k, s);
  }
  if (j.contains("K")) require(get_as<Index>(j, "K") == c.group_sizes.size(), "K does not match group_sizes");
  if (j.contains("p")) require(get_as<Index>(j, "p") == c.p(), "p does not match the sum of group sizes");
  if (j.contains("within_corr")) c.within_corr = get_as<double>(j, "within_corr");
  if (j.contains("between_corr")) c.between_corr = get_as<double>(j, "between_corr");
  if (j.contains("sigma")) c.sigma = matrix_from(j.at("sigma"), "sigma");
  if (j.contains("beta")) {
    const json& b = j.at("beta");
    if (b.is_string() && b.get<std::string>() == "standard") {
      c.beta = BetaPattern::standard;
    } else if (b.is_string() && b.get<std::string>() == "zero") {
      c.beta = BetaPattern::zero;
    } else if (b.is_array()) {
      c.beta = BetaPattern::custom;
      const auto v = get_as<std::vector<double>>(j, "beta");
      c.beta_custom = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else {
      throw ValidationError("'beta' must be \"standard\", \"zero\" or an array of coefficients");
    }
  }
  if (j.contains("noise_sd")) c.noise_sd = get_as<double>(j, "noise_sd");
  if (j.contains("replications")) c.replications = get_as<Index>(j, "replications");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("alphas")) c.alphas = get_as<std::vector<double>>(j, "alphas");
  if (j.contains("filters")) {
    c.filters.clear();
    for (const auto& f : get_as<std::vector<std::string>>(j, "filters")) c.filters.push_back(method_from_string(f));
  }
  if (j.contains("score")) c.score = score_family_from_string(get_as<std::string>(j, "score"));
  if (j.contains("lambda")) {
    const json& l = j.at("lambda");
    if (l.is_number()) {
      c.lambda = LambdaRule::fixed(l.get<double>());
    } else if (l.is_string() && l.get<std::string>() == "cv") {
      c.lambda = LambdaRule::cv(5, 0);
    } else if (l.is_object()) {
      const std::string rule = l.contains("rule") ? get_as<std::string>(l, "rule") : "cv";
      if (rule == "cv") c.lambda = LambdaRule::cv(l.contains("folds") ? get_as<Index>(l, "folds") : 5, 0);
      else if (rule == "fixed") c.lambda = LambdaRule::fixed(get_as<double>(l, "value"));
      else throw ValidationError("lambda rule must be 'cv' or 'fixed'");
    } else {
      throw ValidationError("'lambda' must be a number, \"cv\" or an object");
    }
    if (c.lambda.kind == LambdaRule::Kind::fixed) require(c.lambda.value > 0.0, "fixed lambda must be positive");
  }
  if (j.contains("copies")) c.copies = get_as<Index>(j, "copies");
  if (j.contains("budget")) c.budget = budget_strategy_from_string(get_as<std::string>(j, "budget"));
  if (j.contains("correction")) c.correction = get_as<double>(j, "correction");
  if (j.contains("threads")) c.threads = get_as<unsigned>(j, "threads");
  c.validate();
  return c;
}

ExperimentConfig read_config(const fs::path& path) { return config_from_json(read_text(path)); }

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["n"] = c.n;
  j["p"] = c.p();
  j["K"] = c.group_sizes.size();
  j["group_sizes"] = c.group_sizes;
  j["within_corr"] = c.within_corr;
  j["between_corr"] = c.between_corr;
  if (c.sigma) j["sigma"] = matrix_json(*c.sigma);
  switch (c.beta) {
  case BetaPattern::standard: j["beta"] = "standard"; break;
  case BetaPattern::zero: j["beta"] = "zero"; break;
  case BetaPattern::custom:
    j["beta"] = std::vector<double>(c.beta_custom.data(), c.beta_custom.data() + c.beta_custom.size());
    break;
  }
  j["noise_sd"] = c.noise_sd;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["alphas"] = c.alphas;
  json filters = json::array();
  for (Method m : c.filters) filters.push_back(to_string(m));
  j["filters"] = filters;
  j["score"] = to_string(c.score);
  if (c.lambda.kind == LambdaRule::Kind::cv) j["lambda"] = {{"rule", "cv"}, {"folds", c.lambda.folds}};
  else j["lambda"] = {{"rule", "fixed"}, {"value", c.lambda.value}};
  j["copies"] = c.copies;
  j["budget"] = to_string(c.budget);
  j["correction"] = c.correction;
  j["threads"] = c.threads;
  return j.dump(2);
}

void write_summary_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "method,alpha,replications,mean_fdr,se_fdr,mean_power,se_power,mean_catch_size,mean_purity\n";
  for (const auto& r : rows)
    out << to_string(r.method) << ',' << fmt(r.alpha) << ',' << r.replications << ',' << fmt(r.mean_fdr) << ','
        << fmt(r.se_fdr) << ',' << fmt(r.mean_power) << ',' << fmt(r.se_power) << ',' << fmt(r.mean_catch_size)
        << ',' << fmt(r.mean_purity) << '\n';
}

void write_replications_csv(std::ostream& out, const std::vector<ReplicationResult>& reps) {
  out << "replication,method,alpha,fdp,power,mean_catch_size,mean_purity\n";
  for (const auto& r : reps)
    for (const auto& o : r.outcomes)
      out << r.replication + 1 << ',' << to_string(o.method) << ',' << fmt(o.alpha) << ',' << fmt(o.fdp) << ','
          << fmt(o.power) << ',' << fmt(o.catch_size) << ',' << fmt(o.catch_purity) << '\n';
}

} // namespace fvg::io
