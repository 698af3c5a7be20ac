#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semalloc {

/// Raised for malformed or invariant-violating scenario input. The message
/// always names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Range {
  double lo;
  double hi;
};

/// Per-user parameter ranges used when users are sampled rather than listed.
struct UserSampling {
  Range raw_data_bits{3e6, 5e6};
  Range delay_bound_s{0.4e-3, 0.6e-3};
  Range snr_threshold_db{20.0, 25.0};
  Range xi{0.6, 0.9};
  Range min_bandwidth_hz{0.5e6, 2.0e6};
};

struct ScenarioConfig {
  int user_count = 10;
  double total_bandwidth_hz = 10e6;
  double max_power_w = 0.5;
  double noise_psd_w_per_hz = 5.011872336272715e-21;  // -173 dBm/Hz
  double penalty_exponent = 2.0;
  double cell_radius_m = 100.0;
  double min_user_distance_m = 1.0;
  double pathloss_exponent = 3.76;
  double pathloss_ref_gain = 1e-4;
  std::uint64_t rng_seed = 1;
  UserSampling sampling;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

struct UserProfile {
  int id = 0;
  double distance_m = 0.0;
  double raw_data_bits = 0.0;
  double snr_threshold_linear = 0.0;
  double xi_min = 0.0;
  double xi_max = 0.0;
  double delay_bound_s = 0.0;
  double min_bandwidth_hz = 0.0;

  void validate() const;
  bool operator==(const UserProfile&) const = default;
};

struct ChannelRealization {
  std::vector<double> gains_linear;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<UserProfile> users;
  ChannelRealization channel;
};

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_per_hz_to_w_per_hz(double dbm_per_hz);
double w_per_hz_to_dbm_per_hz(double w_per_hz);

/// Log-distance path loss: ref_gain * d^(-exponent).
double channel_gain(double distance_m, const ScenarioConfig& config);

/// Received SNR P*h / (beta*N0).
double snr(double power_w, double gain, double bandwidth_hz, double noise_psd);

/// beta * log2(1 + snr), in bits/s.
double transmission_rate(double bandwidth_hz, double snr_linear);

/// d0 * (1 - O) / R. Throws std::domain_error ("undeliverable") when R = 0 and
/// there is payload left to send.
double transmission_delay(double raw_data_bits, double compression_rate, double rate_bps);

/// Samples users for config.rng_seed: area-uniform distances over the annulus
/// [min_user_distance_m, cell_radius_m], the remaining fields uniform over
/// config.sampling. Deterministic in the seed.
std::vector<UserProfile> sample_users(const ScenarioConfig& config);

ChannelRealization realize_channel(const ScenarioConfig& config,
                                   const std::vector<UserProfile>& users);

/// Builds a complete scenario from a config: samples users and derives gains.
Scenario make_scenario(const ScenarioConfig& config);

/// Parses the key-value scenario format. Users are sampled from the config
/// seed (or `seed_override`), then `[user N]` blocks override individual
/// fields.
Scenario load_scenario(std::string_view text, std::optional<std::uint64_t> seed_override = {});
Scenario load_scenario_file(const std::string& path, std::optional<std::uint64_t> seed_override = {});

/// Writes a scenario with every user listed explicitly, so that loading the
/// output reproduces it exactly.
std::string save_scenario(const Scenario& scenario);

}  // namespace semalloc
