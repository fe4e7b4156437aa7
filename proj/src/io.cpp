#include "phk/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace phk {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c > 0) os << ',';
    os << (c + 1);
  }
  os << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ',';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

void write_wstats_csv(std::ostream& os, const std::vector<WStatistics>& runs) {
  os << "index,w,run_id\n";
  for (const auto& run : runs)
    for (int i = 0; i < run.p(); ++i)
      os << (i + 1) << ',' << format_double(run.w[i]) << ',' << run.run_id << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    field.erase(0, field.find_first_not_of(" \t\r"));
    field.erase(field.find_last_not_of(" \t\r") + 1);
    out.push_back(field);
  }
  return out;
}

}  // namespace

std::vector<WStatistics> read_wstats_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("w csv: empty input");
  auto header = split_csv_line(line);
  if (header.size() != 3 || header[0] != "index" || header[1] != "w" ||
      header[2] != "run_id")
    throw std::runtime_error("w csv: expected header index,w,run_id");

  std::map<int, std::map<int, double>> by_run;  // run_id -> index -> w
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw std::runtime_error("w csv: bad row at line " + std::to_string(lineno));
    int index = std::stoi(fields[0]);
    double w = std::stod(fields[1]);
    int run = std::stoi(fields[2]);
    if (index < 1)
      throw std::runtime_error("w csv: indices are 1-based (line " +
                               std::to_string(lineno) + ")");
    if (!by_run[run].emplace(index, w).second)
      throw std::runtime_error("w csv: duplicate index in run " + std::to_string(run));
  }
  if (by_run.empty()) throw std::runtime_error("w csv: no rows");

  std::vector<WStatistics> runs;
  for (auto& [run_id, rows] : by_run) {
    WStatistics ws;
    ws.run_id = run_id;
    int expected = 1;
    for (auto& [index, w] : rows) {
      if (index != expected)
        throw std::runtime_error("w csv: run " + std::to_string(run_id) +
                                 " is missing index " + std::to_string(expected));
      ws.w.push_back(w);
      ++expected;
    }
    runs.push_back(std::move(ws));
  }
  for (const auto& r : runs)
    if (r.p() != runs.front().p())
      throw std::runtime_error("w csv: runs have different dimensions");
  return runs;
}

void write_records_csv(std::ostream& os, const std::vector<MetricsRecord>& records) {
  os << "rep_id,method,n_rejections,fdp,alpha,power_contrib,failed\n";
  for (const auto& r : records) {
    os << r.rep_id << ',' << to_string(r.method) << ',' << r.n_rejections << ','
       << format_double(r.fdp) << ',' << format_double(r.alpha) << ','
       << format_double(r.power_contrib) << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<MethodSummary>& summaries) {
  os << "method,power,fdr,avg_fdp_over_alpha,se_ratio,mean_alpha\n";
  for (const auto& s : summaries) {
    os << to_string(s.method) << ',' << format_double(s.power) << ','
       << format_double(s.fdr) << ',' << format_double(s.avg_fdp_over_alpha) << ','
       << format_double(s.se_ratio) << ',' << format_double(s.mean_alpha) << '\n';
  }
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  std::string family = j.value("family", "gaussian");
  if (family == "gaussian") {
    s.family = Family::gaussian;
  } else if (family == "logistic") {
    s.family = Family::logistic;
  } else {
    throw std::runtime_error("scenario: family must be gaussian or logistic");
  }
  s.n = j.at("n").get<int>();
  s.p = j.at("p").get<int>();
  s.p_relevant = j.at("p_relevant").get<int>();
  s.amplitude = j.value("amplitude", 0.0);
  s.rho = j.value("rho", 0.5);
  if (j.contains("spacing") && !j["spacing"].is_null())
    s.spacing = j["spacing"].get<int>();
  s.alpha_kn = j.value("alpha_kn", 0.2);
  s.alpha_ebh = j.value("alpha_ebh", 0.2);
  s.k = j.value("k", 1);
  if (j.contains("nu") && !j["nu"].is_null()) s.nu = j["nu"].get<int>();
  s.reps = j.value("reps", 100);
  s.base_seed = j.value("base_seed", std::uint64_t{1});
  validate(s);
  return s;
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["family"] = s.family == Family::gaussian ? "gaussian" : "logistic";
  j["n"] = s.n;
  j["p"] = s.p;
  j["p_relevant"] = s.p_relevant;
  j["amplitude"] = s.amplitude;
  j["rho"] = s.rho;
  if (s.spacing) j["spacing"] = *s.spacing;
  j["alpha_kn"] = s.alpha_kn;
  j["alpha_ebh"] = s.alpha_ebh;
  j["k"] = s.k;
  if (s.nu) j["nu"] = *s.nu;
  j["reps"] = s.reps;
  j["base_seed"] = s.base_seed;
  return j;
}

namespace {

nlohmann::ordered_json indices_to_json(const std::vector<int>& zero_based) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int i : zero_based) arr.push_back(i + 1);
  return arr;
}

std::vector<int> indices_from_json(const nlohmann::json& arr) {
  std::vector<int> out;
  for (const auto& v : arr) out.push_back(v.get<int>() - 1);
  return out;
}

}  // namespace

nlohmann::ordered_json filter_outcome_to_json(const FilterOutcome& outcome) {
  nlohmann::ordered_json j;
  j["method"] = to_string(outcome.method);
  if (outcome.threshold.finite())
    j["threshold"] = outcome.threshold.value;
  else
    j["threshold"] = nullptr;
  j["branch"] = to_string(outcome.threshold.branch);
  j["rejections"] = indices_to_json(outcome.rejections);
  if (std::isnan(outcome.alpha))
    j["alpha"] = nullptr;
  else
    j["alpha"] = outcome.alpha;
  if (outcome.nu) j["nu"] = *outcome.nu;
  return j;
}

FilterOutcome filter_outcome_from_json(const nlohmann::json& j) {
  FilterOutcome out;
  auto m = method_from_string(j.at("method").get<std::string>());
  if (!m) throw std::runtime_error("filter outcome: unknown method");
  out.method = *m;
  if (j.at("threshold").is_null()) {
    out.threshold.value = std::numeric_limits<double>::infinity();
  } else {
    out.threshold.value = j.at("threshold").get<double>();
  }
  std::string branch = j.at("branch").get<std::string>();
  if (branch == "ratio") out.threshold.branch = StopBranch::ratio;
  else if (branch == "zero_negatives") out.threshold.branch = StopBranch::zero_negatives;
  else if (branch == "pfer_count") out.threshold.branch = StopBranch::pfer_count;
  else out.threshold.branch = StopBranch::none;
  out.rejections = indices_from_json(j.at("rejections"));
  if (j.at("alpha").is_null())
    out.alpha = std::numeric_limits<double>::quiet_NaN();
  else
    out.alpha = j.at("alpha").get<double>();
  if (j.contains("nu")) out.nu = j["nu"].get<int>();
  return out;
}

nlohmann::ordered_json report_to_json(const RejectionReport& report) {
  nlohmann::ordered_json j;
  j["rejections"] = indices_to_json(report.rejections);
  j["alpha_or_eta"] = report.alpha_or_eta;
  nlohmann::ordered_json cert;
  cert["rule"] = to_string(report.certificate.rule);
  cert["index"] = report.certificate.index;
  if (report.certificate.rule == CertificateRule::eta_grid)
    cert["eta"] = report.certificate.eta;
  j["certificate"] = cert;
  return j;
}

nlohmann::ordered_json posthoc_eta_to_json(
    const std::vector<std::pair<double, RejectionReport>>& entries) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [eta, rep] : entries) {
    nlohmann::ordered_json item = report_to_json(rep);
    arr.push_back(item);
  }
  return arr;
}

}  // namespace phk
