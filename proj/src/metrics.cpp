#include "semalloc/metrics.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace semalloc {

int satisfied_count(const AllocationResult& result) {
  int n = 0;
  for (const auto& u : result.per_user) n += u.satisfied ? 1 : 0;
  return n;
}

std::optional<double> average_similarity(const AllocationResult& result, SimilarityScope scope) {
  double sum = 0.0;
  int n = 0;
  for (const auto& u : result.per_user) {
    const bool in_scope = scope == SimilarityScope::satisfied_only ? u.satisfied
                                                                    : u.admission == Admission::served;
    if (!in_scope) continue;
    sum += u.similarity;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::vector<UserReportRow> per_user_report(const AllocationResult& result,
                                           std::span<const UserProfile> users) {
  if (users.size() != result.per_user.size()) {
    throw std::invalid_argument("per_user_report: user count does not match the result");
  }
  std::vector<UserReportRow> rows;
  rows.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& ua = result.per_user[i];
    if (ua.id != users[i].id) {
      throw std::invalid_argument(fmt::format("per_user_report: id mismatch ({} vs {})", ua.id, users[i].id));
    }
    const bool served = ua.admission == Admission::served;
    rows.push_back({ua.id, result.method, served ? ua.similarity : 0.0, users[i].xi_min, users[i].xi_max,
                    ua.satisfied});
  }
  return rows;
}

}  // namespace semalloc
