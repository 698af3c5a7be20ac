#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semalloc/gp.hpp"
#include "semalloc/scenario.hpp"
#include "semalloc/similarity.hpp"

namespace semalloc {

struct AllocatorOptions {
  int max_iterations = 20;
  double convergence_threshold = 1e-4;  // on |dF| / max(1, |F|)
  std::optional<double> penalty_exponent;  // defaults to the scenario's
  SolverOptions solver;

  void validate() const;
};

enum class Admission { served, dropped_infeasible };
std::string_view to_string(Admission admission);

struct UserAllocation {
  int id = 0;
  double bandwidth_hz = 0.0;
  double power_w = 0.0;
  double compression = 0.0;
  double similarity = 0.0;
  double snr_linear = 0.0;
  double delay_s = 0.0;
  bool satisfied = false;
  Admission admission = Admission::dropped_infeasible;
  bool fallback_used = false;  // C6 could not be met at the iteration SNR
  bool band_met = false;       // xi_min <= xi <= xi_max (C7)
  bool delay_met = false;      // t <= tau (C6)
};

enum class AllocationStatus { ok, solver_failure };

struct AllocationResult {
  std::string method;
  std::vector<UserAllocation> per_user;
  std::vector<double> objective_trace;
  int iterations_used = 0;
  bool converged = false;
  AllocationStatus status = AllocationStatus::ok;
  std::string failure;
  /// User profiles as the method saw them (the strict comparators collapse
  /// the similarity band to a single target).
  std::vector<UserProfile> effective_users;
};

/// (SNR_th/SNR)^a * (xi_min/xi)^a for one served user.
double objective_term(const UserProfile& user, double snr_linear, double xi, double a);

/// Sum of objective_term over served users.
double objective_value(std::span<const UserProfile> users, std::span<const double> snrs,
                       std::span<const double> xis, double a);

/// Objective over a full allocation; dropped users contribute 1 each.
double objective_value(std::span<const UserProfile> users, std::span<const UserAllocation> alloc,
                       double a);

/// SNR and minimum similarity met by a served user (both bounds inclusive).
bool is_satisfied(const UserProfile& user, const UserAllocation& alloc);

struct CompressionChoice {
  double xi = 0.0;
  double compression = 0.0;
  bool fallback_used = false;
  bool band_met = true;
};

/// One user's step of the similarity/compression subproblem: the best
/// candidate at the iteration SNR whose delay fits, else the best in-band
/// entry at the SNR-threshold row.
CompressionChoice select_compression(const UserProfile& user, double snr_it_linear,
                                     double bandwidth_hz, const SimilarityTable& table);

/// Bandwidth admission: drops users with the smallest h/SNR_th (higher id
/// first on ties) until the minimum bandwidths fit in M. Returns indices into
/// `users` (served, dropped), each ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> admit_users(
    const ScenarioConfig& config, std::span<const UserProfile> users, std::span<const double> gains);

/// Users that cannot reach their SNR threshold even at (beta_min, P_tot).
std::vector<std::size_t> unreachable_users(const ScenarioConfig& config,
                                           std::span<const UserProfile> users,
                                           std::span<const double> gains);

/// Alternates compression selection and the bandwidth/power GP until the
/// objective settles or max_iterations is reached.
AllocationResult allocate(const ScenarioConfig& config, std::span<const UserProfile> users,
                          std::span<const double> gains, const SimilarityTable& table,
                          const AllocatorOptions& options = {});

/// Throws TableError when the table starts above some user's SNR threshold.
void require_table_covers(const SimilarityTable& table, std::span<const UserProfile> users);

}  // namespace semalloc
