#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semalloc/allocator.hpp"

namespace semalloc {

enum class SimilarityScope { satisfied_only, all_served };

int satisfied_count(const AllocationResult& result);

/// Mean similarity over the scope; nullopt when the scope is empty.
std::optional<double> average_similarity(const AllocationResult& result,
                                         SimilarityScope scope = SimilarityScope::satisfied_only);

struct UserReportRow {
  int user_id = 0;
  std::string method;
  double xi = 0.0;
  double xi_min = 0.0;
  double xi_max = 0.0;
  bool satisfied = false;
};

/// One row per user, aligned by id. Dropped users report xi = 0.
std::vector<UserReportRow> per_user_report(const AllocationResult& result,
                                           std::span<const UserProfile> users);

}  // namespace semalloc
