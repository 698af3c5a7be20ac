#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "semalloc/allocator.hpp"
#include "semalloc/metrics.hpp"
#include "semalloc/scenario.hpp"

namespace semalloc {

/// Human-readable report: summary, per-user table and objective trace.
std::string result_report(const AllocationResult& result, const Scenario& scenario);

/// Machine-readable per-user CSV (full precision), the input of the audit.
std::string result_csv(const AllocationResult& result);
/// Inverse of result_csv. The objective trace is not carried.
AllocationResult parse_result_csv(std::string_view csv);

/// user_id,method,xi,xi_min,xi_max,satisfied
std::string per_user_csv(const std::vector<UserReportRow>& rows);

struct AuditFinding {
  int user_id = 0;  // 0 for network-wide constraints
  std::string constraint;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditFinding> violations;  // C1-C3, and C4 / C7-lower for satisfied users
  std::vector<AuditFinding> notes;       // C5, C6 and C7-upper, informational
  bool ok() const { return violations.empty(); }
  std::string to_text() const;
};

/// Re-checks the allocation constraints against the scenario from the stored
/// values alone. Throws std::invalid_argument when the result does not belong
/// to the scenario (user ids differ).
AuditReport audit_result(const AllocationResult& result, const Scenario& scenario);

}  // namespace semalloc
