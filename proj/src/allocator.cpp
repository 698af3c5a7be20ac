#include "semalloc/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace semalloc {

namespace {

// Relative slack for threshold comparisons on recomputed quantities.
constexpr double kRelSlack = 1e-12;

double service_metric(const UserProfile& u, double gain) { return gain / u.snr_threshold_linear; }

// Index of the served user admission would give up first.
std::size_t weakest(std::span<const UserProfile> users, std::span<const double> gains,
                    const std::vector<std::size_t>& served) {
  return *std::min_element(served.begin(), served.end(), [&](std::size_t a, std::size_t b) {
    const double ma = service_metric(users[a], gains[a]);
    const double mb = service_metric(users[b], gains[b]);
    if (ma != mb) return ma < mb;
    return users[a].id > users[b].id;
  });
}

}  // namespace

void AllocatorOptions::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(convergence_threshold > 0.0)) throw std::invalid_argument("convergence_threshold must be positive");
  if (penalty_exponent && !(*penalty_exponent >= 1.0)) {
    throw std::invalid_argument("penalty exponent must be at least 1");
  }
}

std::string_view to_string(Admission admission) {
  return admission == Admission::served ? "served" : "dropped_infeasible";
}

double objective_term(const UserProfile& user, double snr_linear, double xi, double a) {
  if (!(snr_linear > 0.0) || !(xi > 0.0)) {
    throw std::domain_error(fmt::format("user {}: objective needs positive SNR and similarity", user.id));
  }
  return std::pow(user.snr_threshold_linear / snr_linear, a) * std::pow(user.xi_min / xi, a);
}

double objective_value(std::span<const UserProfile> users, std::span<const double> snrs,
                       std::span<const double> xis, double a) {
  if (snrs.size() != users.size() || xis.size() != users.size()) {
    throw std::invalid_argument("objective_value: length mismatch");
  }
  double f = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) f += objective_term(users[i], snrs[i], xis[i], a);
  return f;
}

double objective_value(std::span<const UserProfile> users, std::span<const UserAllocation> alloc,
                       double a) {
  if (alloc.size() != users.size()) throw std::invalid_argument("objective_value: length mismatch");
  double f = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    f += alloc[i].admission == Admission::served
             ? objective_term(users[i], alloc[i].snr_linear, alloc[i].similarity, a)
             : 1.0;
  }
  return f;
}

bool is_satisfied(const UserProfile& user, const UserAllocation& alloc) {
  return alloc.admission == Admission::served &&
         alloc.snr_linear >= user.snr_threshold_linear * (1.0 - kRelSlack) &&
         alloc.similarity >= user.xi_min * (1.0 - kRelSlack);
}

CompressionChoice select_compression(const UserProfile& user, double snr_it_linear,
                                     double bandwidth_hz, const SimilarityTable& table) {
  if (!(bandwidth_hz > 0.0)) throw std::domain_error("select_compression: bandwidth must be positive");
  const bool degenerate = user.xi_min == user.xi_max;
  auto candidates = [&](double snr_linear) {
    const double snr_db = linear_to_db(snr_linear);
    return degenerate ? strict_candidates(table, snr_db, user.xi_min)
                      : candidate_entries(table, snr_db, user.xi_min, user.xi_max);
  };

  const double rate = transmission_rate(bandwidth_hz, snr_it_linear);
  for (const auto& c : candidates(snr_it_linear)) {
    const double payload = user.raw_data_bits * (1.0 - c.compression);
    if (payload <= 0.0 || (rate > 0.0 && payload / rate <= user.delay_bound_s)) {
      return {c.xi, c.compression, false, true};
    }
  }

  // No candidate meets the delay bound: fall back to the threshold row.
  const auto at_threshold = candidates(user.snr_threshold_linear);
  if (!at_threshold.empty()) return {at_threshold.front().xi, at_threshold.front().compression, true, true};
  // Nothing in band even there: clamp to the entry nearest the band from above,
  // or to the row maximum when the whole row sits below it.
  const double threshold_db = linear_to_db(user.snr_threshold_linear);
  const auto above = strict_candidates(table, threshold_db, user.xi_max);
  if (!above.empty()) return {above.front().xi, above.front().compression, true, false};
  const auto best = row_maximum(table, threshold_db);
  return {best.xi, best.compression, true, false};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> admit_users(
    const ScenarioConfig& config, std::span<const UserProfile> users, std::span<const double> gains) {
  if (gains.size() != users.size()) throw std::invalid_argument("admit_users: length mismatch");
  std::vector<std::size_t> served(users.size());
  std::iota(served.begin(), served.end(), 0);
  std::vector<std::size_t> dropped;
  auto demand = [&] {
    double s = 0.0;
    for (auto i : served) s += users[i].min_bandwidth_hz;
    return s;
  };
  while (!served.empty() && demand() > config.total_bandwidth_hz) {
    const auto w = weakest(users, gains, served);
    served.erase(std::find(served.begin(), served.end(), w));
    dropped.push_back(w);
  }
  std::sort(dropped.begin(), dropped.end());
  return {served, dropped};
}

std::vector<std::size_t> unreachable_users(const ScenarioConfig& config,
                                           std::span<const UserProfile> users,
                                           std::span<const double> gains) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const double best = snr(config.max_power_w, gains[i], users[i].min_bandwidth_hz,
                            config.noise_psd_w_per_hz);
    // strict margin so that the SNR floor keeps an interior
    if (!(best > users[i].snr_threshold_linear * (1.0 + 1e-9))) out.push_back(i);
  }
  return out;
}

void require_table_covers(const SimilarityTable& table, std::span<const UserProfile> users) {
  for (const auto& u : users) {
    const double db = linear_to_db(u.snr_threshold_linear);
    if (db + 1e-9 < table.snr_grid_db().front()) {
      throw TableError(fmt::format("user {}: SNR threshold {:.2f} dB below table range (starts at {:.2f} dB)",
                                   u.id, db, table.snr_grid_db().front()));
    }
  }
}

AllocationResult allocate(const ScenarioConfig& config_in, std::span<const UserProfile> users,
                          std::span<const double> gains, const SimilarityTable& table,
                          const AllocatorOptions& options) {
  options.validate();
  if (gains.size() != users.size()) throw std::invalid_argument("allocate: length mismatch");
  require_table_covers(table, users);
  ScenarioConfig config = config_in;
  if (options.penalty_exponent) config.penalty_exponent = *options.penalty_exponent;
  const double a = config.penalty_exponent;
  const std::size_t N = users.size();

  AllocationResult result;
  result.method = "proposed";
  result.effective_users.assign(users.begin(), users.end());
  result.per_user.resize(N);
  for (std::size_t i = 0; i < N; ++i) result.per_user[i].id = users[i].id;

  // Screen out users no allocation can make reliable, then fit the rest into M.
  std::vector<char> active(N, 1);
  for (auto i : unreachable_users(config, users, gains)) active[i] = 0;
  std::vector<UserProfile> pool_users;
  std::vector<double> pool_gains;
  std::vector<std::size_t> pool_index;
  for (std::size_t i = 0; i < N; ++i) {
    if (!active[i]) continue;
    pool_users.push_back(users[i]);
    pool_gains.push_back(gains[i]);
    pool_index.push_back(i);
  }
  std::vector<std::size_t> served;
  for (auto k : admit_users(config, pool_users, pool_gains).first) served.push_back(pool_index[k]);

  std::vector<double> snr_it(N), beta(N), power(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    snr_it[i] = users[i].snr_threshold_linear;
    beta[i] = users[i].min_bandwidth_hz;
  }
  std::vector<CompressionChoice> choice(N);

  auto finalize_user = [&](std::size_t i, bool is_served) {
    auto& ua = result.per_user[i];
    ua = UserAllocation{};
    ua.id = users[i].id;
    // A program that failed before its first solution leaves no allocation to report.
    if (!is_served || power[i] <= 0.0) return;
    ua.admission = Admission::served;
    ua.bandwidth_hz = beta[i];
    ua.power_w = power[i];
    ua.compression = choice[i].compression;
    ua.similarity = choice[i].xi;
    ua.snr_linear = snr(power[i], gains[i], beta[i], config.noise_psd_w_per_hz);
    ua.fallback_used = choice[i].fallback_used;
    ua.band_met = choice[i].xi >= users[i].xi_min && choice[i].xi <= users[i].xi_max;
    ua.delay_s = transmission_delay(users[i].raw_data_bits, ua.compression,
                                    transmission_rate(ua.bandwidth_hz, ua.snr_linear));
    ua.delay_met = ua.delay_s <= users[i].delay_bound_s;
    ua.satisfied = is_satisfied(users[i], ua);
  };
  auto finalize_all = [&] {
    std::vector<char> is_served(N, 0);
    for (auto i : served) is_served[i] = 1;
    for (std::size_t i = 0; i < N; ++i) finalize_user(i, is_served[i] != 0);
  };

  if (served.empty()) {
    finalize_all();
    result.objective_trace.push_back(objective_value(users, result.per_user, a));
    result.iterations_used = 1;
    result.converged = true;
    return result;
  }

  double previous = 0.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (auto i : served) choice[i] = select_compression(users[i], snr_it[i], beta[i], table);

    GpSolution sol;
    while (true) {
      std::vector<UserProfile> su;
      std::vector<double> sg, sx;
      for (auto i : served) {
        su.push_back(users[i]);
        sg.push_back(gains[i]);
        sx.push_back(choice[i].xi);
      }
      const auto gp = build_f1_prime(config, su, sg, sx);
      sol = solve_gp(gp, options.solver, f1_prime_start(config, su));
      if (sol.status != GpStatus::infeasible || served.size() == 1) break;
      // Admission exhausted the easy cases; give up the weakest user and retry.
      const auto w = weakest(users, gains, served);
      served.erase(std::find(served.begin(), served.end(), w));
    }
    if (sol.status != GpStatus::optimal) {
      if (sol.status == GpStatus::infeasible) served.clear();
      else {
        result.status = AllocationStatus::solver_failure;
        result.failure = fmt::format("bandwidth/power program: {}", to_string(sol.status));
        finalize_all();
        result.iterations_used = static_cast<int>(result.objective_trace.size());
        return result;
      }
    }

    const auto S = static_cast<Eigen::Index>(served.size());
    for (Eigen::Index k = 0; k < S; ++k) {
      const auto i = served[static_cast<std::size_t>(k)];
      beta[i] = sol.values[k];
      power[i] = sol.values[S + k];
      snr_it[i] = snr(power[i], gains[i], beta[i], config.noise_psd_w_per_hz);
    }
    finalize_all();
    const double f = objective_value(users, result.per_user, a);
    result.objective_trace.push_back(f);
    if (iter > 0 && std::abs(f - previous) / std::max(1.0, std::abs(f)) < options.convergence_threshold) {
      result.converged = true;
      break;
    }
    previous = f;
    if (served.empty()) {
      result.converged = true;
      break;
    }
  }
  result.iterations_used = static_cast<int>(result.objective_trace.size());
  return result;
}

}  // namespace semalloc
