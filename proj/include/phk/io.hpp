#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "phk/evalues.hpp"
#include "phk/filters.hpp"
#include "phk/simulate.hpp"

namespace phk {

// Shortest round-trip-exact decimal form.
std::string format_double(double v);

// Row-major debug dump with a header row of 1-based column indices.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

// Columns: index,w,run_id with 1-based variable indices.
void write_wstats_csv(std::ostream& os, const std::vector<WStatistics>& runs);
std::vector<WStatistics> read_wstats_csv(std::istream& is);

void write_records_csv(std::ostream& os, const std::vector<MetricsRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<MethodSummary>& summaries);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const Scenario& s);

nlohmann::ordered_json filter_outcome_to_json(const FilterOutcome& outcome);
FilterOutcome filter_outcome_from_json(const nlohmann::json& j);

nlohmann::ordered_json report_to_json(const RejectionReport& report);
nlohmann::ordered_json posthoc_eta_to_json(
    const std::vector<std::pair<double, RejectionReport>>& entries);

}  // namespace phk
