#pragma once

#include <span>
#include <vector>

#include "semalloc/allocator.hpp"

namespace semalloc {

/// Single-channel comparator settings.
struct QoeOptions {
  double channel_width_hz = 1e6;
  double similarity_weight = 0.5;
  double rate_weight = 0.5;
  /// Per-user similarity targets; empty means each user's xi_max.
  std::vector<double> strict_xi_target;

  void validate() const;
};

/// Users with their band collapsed onto a single strict target (xi_max by
/// default).
std::vector<UserProfile> strict_profiles(std::span<const UserProfile> users,
                                         std::span<const double> targets = {});

/// The proposed allocator run on strict-target profiles.
AllocationResult allocate_strict(const ScenarioConfig& config, std::span<const UserProfile> users,
                                 std::span<const double> gains, const SimilarityTable& table,
                                 const AllocatorOptions& options = {});

/// Raw-data transmission: O = 0, similarity 1 when the SNR threshold is met
/// (0 otherwise), satisfied only if the SNR and the delay bound both hold.
AllocationResult allocate_classical(const ScenarioConfig& config, std::span<const UserProfile> users,
                                    std::span<const double> gains,
                                    const AllocatorOptions& options = {});

/// One fixed-width channel per user, best gains first, full power, compression
/// picked against a strict similarity target. Channels of users that cannot
/// use them stay idle.
AllocationResult allocate_qoe(const ScenarioConfig& config, std::span<const UserProfile> users,
                              std::span<const double> gains, const SimilarityTable& table,
                              const QoeOptions& options = {});

}  // namespace semalloc
