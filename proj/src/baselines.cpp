#include "semalloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace semalloc {

void QoeOptions::validate() const {
  if (!(channel_width_hz > 0.0)) throw std::invalid_argument("channel width must be positive");
  const bool weights_ok = similarity_weight >= 0.0 && similarity_weight <= 1.0 && rate_weight >= 0.0 &&
                          rate_weight <= 1.0 &&
                          std::abs(similarity_weight + rate_weight - 1.0) < 1e-9;
  if (!weights_ok) throw std::invalid_argument("QoE weights must lie in [0, 1] and sum to 1");
}

std::vector<UserProfile> strict_profiles(std::span<const UserProfile> users,
                                         std::span<const double> targets) {
  if (!targets.empty() && targets.size() != users.size()) {
    throw std::invalid_argument("strict targets must match users");
  }
  std::vector<UserProfile> out(users.begin(), users.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = targets.empty() ? out[i].xi_max : targets[i];
    out[i].xi_min = t;
    out[i].xi_max = t;
    out[i].validate();
  }
  return out;
}

AllocationResult allocate_strict(const ScenarioConfig& config, std::span<const UserProfile> users,
                                 std::span<const double> gains, const SimilarityTable& table,
                                 const AllocatorOptions& options) {
  const auto strict = strict_profiles(users);
  auto result = allocate(config, strict, gains, table, options);
  result.method = "strict";
  return result;
}

AllocationResult allocate_classical(const ScenarioConfig& config_in, std::span<const UserProfile> users,
                                    std::span<const double> gains, const AllocatorOptions& options) {
  options.validate();
  ScenarioConfig config = config_in;
  if (options.penalty_exponent) config.penalty_exponent = *options.penalty_exponent;
  const std::size_t N = users.size();

  AllocationResult result;
  result.method = "classical";
  result.effective_users.assign(users.begin(), users.end());
  result.per_user.resize(N);
  for (std::size_t i = 0; i < N; ++i) result.per_user[i].id = users[i].id;

  std::vector<char> active(N, 1);
  for (auto i : unreachable_users(config, users, gains)) active[i] = 0;
  std::vector<UserProfile> pool;
  std::vector<double> pool_gains;
  std::vector<std::size_t> pool_index;
  for (std::size_t i = 0; i < N; ++i) {
    if (!active[i]) continue;
    pool.push_back(users[i]);
    pool_gains.push_back(gains[i]);
    pool_index.push_back(i);
  }
  std::vector<std::size_t> served;
  for (auto k : admit_users(config, pool, pool_gains).first) served.push_back(pool_index[k]);

  // Similarity is pinned at 1, so one bandwidth/power solve suffices.
  GpSolution sol;
  while (!served.empty()) {
    std::vector<UserProfile> su;
    std::vector<double> sg;
    for (auto i : served) {
      su.push_back(users[i]);
      sg.push_back(gains[i]);
    }
    const std::vector<double> ones(served.size(), 1.0);
    sol = solve_gp(build_f1_prime(config, su, sg, ones), options.solver, f1_prime_start(config, su));
    if (sol.status != GpStatus::infeasible) break;
    auto weakest = std::min_element(served.begin(), served.end(), [&](std::size_t a, std::size_t b) {
      const double ma = gains[a] / users[a].snr_threshold_linear;
      const double mb = gains[b] / users[b].snr_threshold_linear;
      return ma != mb ? ma < mb : users[a].id > users[b].id;
    });
    served.erase(weakest);
  }
  if (!served.empty() && sol.status != GpStatus::optimal) {
    result.status = AllocationStatus::solver_failure;
    result.failure = fmt::format("bandwidth/power program: {}", to_string(sol.status));
    return result;
  }

  const auto S = static_cast<Eigen::Index>(served.size());
  for (Eigen::Index k = 0; k < S; ++k) {
    const auto i = served[static_cast<std::size_t>(k)];
    auto& ua = result.per_user[i];
    ua.admission = Admission::served;
    ua.bandwidth_hz = sol.values[k];
    ua.power_w = sol.values[S + k];
    ua.snr_linear = snr(ua.power_w, gains[i], ua.bandwidth_hz, config.noise_psd_w_per_hz);
    ua.compression = 0.0;
    const bool reliable = ua.snr_linear >= users[i].snr_threshold_linear * (1.0 - 1e-12);
    ua.similarity = reliable ? 1.0 : 0.0;
    ua.band_met = ua.similarity >= users[i].xi_min && ua.similarity <= users[i].xi_max;
    ua.delay_s = transmission_delay(users[i].raw_data_bits, 0.0,
                                    transmission_rate(ua.bandwidth_hz, ua.snr_linear));
    ua.delay_met = ua.delay_s <= users[i].delay_bound_s;
    ua.satisfied = reliable && ua.delay_met;
  }

  double f = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& ua = result.per_user[i];
    f += (ua.admission == Admission::served && ua.similarity > 0.0)
             ? objective_term(users[i], ua.snr_linear, ua.similarity, config.penalty_exponent)
             : 1.0;
  }
  result.objective_trace.push_back(f);
  result.iterations_used = 1;
  result.converged = true;
  return result;
}

AllocationResult allocate_qoe(const ScenarioConfig& config, std::span<const UserProfile> users,
                              std::span<const double> gains, const SimilarityTable& table,
                              const QoeOptions& options) {
  options.validate();
  if (options.channel_width_hz > config.total_bandwidth_hz * (1.0 + 1e-12)) {
    throw std::invalid_argument("channel width exceeds the total bandwidth");
  }
  const std::size_t N = users.size();
  if (gains.size() != N) throw std::invalid_argument("allocate_qoe: length mismatch");

  AllocationResult result;
  result.method = "qoe";
  result.effective_users = strict_profiles(users, options.strict_xi_target);
  result.per_user.resize(N);
  for (std::size_t i = 0; i < N; ++i) result.per_user[i].id = users[i].id;

  const auto channels = static_cast<std::size_t>(
      std::floor(config.total_bandwidth_hz / options.channel_width_hz + 1e-9));
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gains[a] != gains[b] ? gains[a] > gains[b] : users[a].id < users[b].id;
  });

  const double width = options.channel_width_hz;
  for (std::size_t rank = 0; rank < std::min(channels, N); ++rank) {
    const auto i = order[rank];
    const auto& u = result.effective_users[i];
    auto& ua = result.per_user[i];
    ua.bandwidth_hz = width;
    ua.power_w = config.max_power_w;
    ua.snr_linear = snr(ua.power_w, gains[i], width, config.noise_psd_w_per_hz);
    if (width < u.min_bandwidth_hz) continue;  // channel too narrow: assigned but unusable
    ua.admission = Admission::served;

    const double snr_db = linear_to_db(ua.snr_linear);
    const double rate = transmission_rate(width, ua.snr_linear);
    if (snr_db + 1e-9 < table.snr_grid_db().front()) {
      ua.similarity = 0.0;
      ua.compression = table.compression_grid().back();
    } else {
      std::vector<TableEntry> cands;
      for (const auto& c : strict_candidates(table, snr_db, u.xi_min)) {
        if (c.compression < 1.0) cands.push_back(c);
      }
      if (cands.empty()) {
        // target unreachable on this channel; the channel idles
        const auto best = row_maximum(table, snr_db);
        ua.similarity = best.xi;
        ua.compression = best.compression;
      } else {
        auto semantic_rate = [rate](const TableEntry& c) { return rate * c.xi / (1.0 - c.compression); };
        double best_rate = 0.0;
        for (const auto& c : cands) best_rate = std::max(best_rate, semantic_rate(c));
        const TableEntry* pick = nullptr;
        double pick_score = -1.0;
        for (const auto& c : cands) {
          const double score = options.similarity_weight * c.xi +
                               options.rate_weight * (best_rate > 0.0 ? semantic_rate(c) / best_rate : 0.0);
          const bool better = !pick || score > pick_score ||
                              (score == pick_score && (c.xi > pick->xi ||
                                                       (c.xi == pick->xi && c.compression > pick->compression)));
          if (better) {
            pick = &c;
            pick_score = score;
          }
        }
        ua.similarity = pick->xi;
        ua.compression = pick->compression;
      }
    }
    ua.band_met = ua.similarity >= u.xi_min && ua.similarity <= u.xi_max;
    ua.delay_s = transmission_delay(u.raw_data_bits, ua.compression, rate);
    ua.delay_met = ua.delay_s <= u.delay_bound_s;
    ua.satisfied = is_satisfied(u, ua);
  }

  double f = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& ua = result.per_user[i];
    f += (ua.admission == Admission::served && ua.similarity > 0.0)
             ? objective_term(result.effective_users[i], ua.snr_linear, ua.similarity, config.penalty_exponent)
             : 1.0;
  }
  result.objective_trace.push_back(f);
  result.iterations_used = 1;
  result.converged = true;
  return result;
}

}  // namespace semalloc
