#pragma once

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "cknscope/criterion.hpp"
#include "cknscope/harness.hpp"

namespace cknscope {

using Json = nlohmann::ordered_json;

// %.17g: value-preserving and byte-stable across runs.
std::string format_double(double v);
// RFC 4180 quoting.
std::string csv_field(const std::string& raw);

void write_functional_reports_csv(std::ostream& out, const std::vector<FunctionalReport>& reports);
Json functional_reports_json(const std::vector<FunctionalReport>& reports);

void write_suite_checks_csv(std::ostream& out, const SuiteReport& report);
Json suite_report_json(const SuiteReport& report);
Json inequality_check_json(const InequalityCheck& chk);

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);
Json scan_json(const std::vector<ScanRow>& rows);

void write_iteration_csv(std::ostream& out, const IterationTrace& trace);
Json iteration_json(const IterationTrace& trace);

void write_epsilon_curve_csv(std::ostream& out, double epsilon, const std::vector<double>& Ms);
Json epsilon_curve_json(double epsilon, const std::vector<double>& Ms);

Json theorem1_trace_json(const Theorem1Trace& trace);
Json theorem2_trace_json(const Theorem2Trace& trace);

}  // namespace cknscope
