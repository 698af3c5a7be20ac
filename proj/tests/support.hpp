#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "semalloc/allocator.hpp"
#include "semalloc/scenario.hpp"
#include "semalloc/similarity.hpp"

namespace semalloc::test {

/// A table whose every SNR row is the same list of similarities.
inline SimilarityTable flat_table(std::vector<double> snr_grid_db, std::vector<double> o_grid,
                                  const std::vector<double>& row) {
  std::vector<double> xi;
  for (std::size_t r = 0; r < snr_grid_db.size(); ++r) xi.insert(xi.end(), row.begin(), row.end());
  return SimilarityTable(std::move(snr_grid_db), std::move(o_grid), std::move(xi));
}

/// A user whose fields are all set explicitly; ids start at 1.
inline UserProfile make_user(int id, double snr_th_linear, double xi_min, double xi_max,
                             double beta_min_hz = 1e6, double d0_bits = 4e6, double tau_s = 0.5e-3) {
  UserProfile u;
  u.id = id;
  u.distance_m = 50.0;
  u.raw_data_bits = d0_bits;
  u.snr_threshold_linear = snr_th_linear;
  u.xi_min = xi_min;
  u.xi_max = xi_max;
  u.delay_bound_s = tau_s;
  u.min_bandwidth_hz = beta_min_hz;
  return u;
}

/// Linear gain that puts SNR(P_tot, beta) at `snr_linear`.
inline double gain_for_snr(double snr_linear, double beta_hz, const ScenarioConfig& c) {
  return snr_linear * beta_hz * c.noise_psd_w_per_hz / c.max_power_w;
}

/// Seeded uniform draws for property tests.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace semalloc::test
