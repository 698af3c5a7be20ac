#include "semalloc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "semalloc/rng.hpp"

namespace semalloc {

namespace {

// Streams of the counter RNG; one per sampled quantity.
enum Stream : std::uint64_t {
  kDistance = 1,
  kRawData = 2,
  kDelay = 3,
  kSnrThreshold = 4,
  kXi = 5,
  kMinBandwidth = 6,
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_range(const Range& r, const char* name, bool positive) {
  require(std::isfinite(r.lo) && std::isfinite(r.hi), fmt::format("{}: non-finite bound", name));
  require(r.lo <= r.hi, fmt::format("{}: lower bound exceeds upper bound", name));
  if (positive) require(r.lo > 0.0, fmt::format("{} must be positive", name));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view expected_unit(std::string_view key) {
  auto ends = [&](std::string_view suffix) {
    return key.size() >= suffix.size() && key.substr(key.size() - suffix.size()) == suffix;
  };
  if (ends("_dbm_per_hz")) return "dBm/Hz";
  if (ends("_w_per_hz")) return "W/Hz";
  if (ends("_db") || ends("_db_range")) return "dB";
  if (ends("_hz") || ends("_hz_range")) return "Hz";
  if (ends("_m")) return "m";
  if (ends("_w")) return "W";
  if (ends("_s") || ends("_s_range")) return "s";
  if (ends("_bits") || ends("_bits_range")) return "bit";
  return {};
}

// Parses "<number> [unit]". The unit, if present, must match the key suffix.
double parse_number(std::string_view key, std::string_view text, int line) {
  text = trim(text);
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr == first) {
    throw ConfigError(fmt::format("line {}: {}: not a number: '{}'", line, key, text));
  }
  std::string_view unit = trim(std::string_view(ptr, static_cast<size_t>(last - ptr)));
  if (!unit.empty()) {
    std::string_view want = expected_unit(key);
    bool ok = !want.empty() && (iequals(unit, want) || (want == "bit" && iequals(unit, "bits")));
    if (!ok) throw ConfigError(fmt::format("line {}: {}: unexpected unit '{}'", line, key, unit));
  }
  if (!std::isfinite(value)) {
    throw ConfigError(fmt::format("line {}: {}: non-finite value", line, key));
  }
  return value;
}

Range parse_range(std::string_view key, std::string_view text, int line) {
  auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw ConfigError(fmt::format("line {}: {}: expected 'lo, hi'", line, key));
  }
  return {parse_number(key, text.substr(0, comma), line),
          parse_number(key, text.substr(comma + 1), line)};
}

int parse_int(std::string_view key, std::string_view text, int line) {
  double v = parse_number(key, text, line);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError(fmt::format("line {}: {}: expected an integer", line, key));
  }
  return static_cast<int>(v);
}

std::uint64_t parse_seed(std::string_view key, std::string_view text, int line) {
  text = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("line {}: {}: expected an unsigned integer", line, key));
  }
  return v;
}

using UserOverrides = std::map<std::string, std::pair<double, int>>;

void apply_user_override(UserProfile& u, const std::string& key, double v, int line) {
  if (key == "distance_m") u.distance_m = v;
  else if (key == "raw_data_bits") u.raw_data_bits = v;
  else if (key == "snr_threshold_db") u.snr_threshold_linear = db_to_linear(v);
  else if (key == "snr_threshold_linear") u.snr_threshold_linear = v;
  else if (key == "xi_min") u.xi_min = v;
  else if (key == "xi_max") u.xi_max = v;
  else if (key == "delay_bound_s") u.delay_bound_s = v;
  else if (key == "delay_bound_ms") u.delay_bound_s = v * 1e-3;
  else if (key == "min_bandwidth_hz") u.min_bandwidth_hz = v;
  else throw ConfigError(fmt::format("line {}: unknown user key '{}'", line, key));
}

}  // namespace

void ScenarioConfig::validate() const {
  require(user_count > 0, "user_count must be positive");
  require(total_bandwidth_hz > 0.0, "total_bandwidth_hz must be positive");
  require(max_power_w > 0.0, "max_power_w must be positive");
  require(noise_psd_w_per_hz > 0.0, "noise_psd_w_per_hz must be positive");
  require(penalty_exponent >= 1.0, "penalty_exponent must be at least 1");
  require(min_user_distance_m > 0.0, "min_user_distance_m must be positive");
  require(cell_radius_m > min_user_distance_m, "cell_radius_m must exceed min_user_distance_m");
  require(pathloss_exponent > 0.0, "pathloss_exponent must be positive");
  require(pathloss_ref_gain > 0.0, "pathloss_ref_gain must be positive");
  require_range(sampling.raw_data_bits, "raw_data_bits_range", true);
  require_range(sampling.delay_bound_s, "delay_bound_s_range", true);
  require_range(sampling.snr_threshold_db, "snr_threshold_db_range", false);
  require_range(sampling.xi, "xi_range", true);
  require(sampling.xi.hi <= 1.0, "xi_range must lie in (0, 1]");
  require_range(sampling.min_bandwidth_hz, "min_bandwidth_hz_range", true);
}

void UserProfile::validate() const {
  auto where = [this](const char* what) { return fmt::format("user {}: {}", id, what); };
  require(std::isfinite(distance_m) && distance_m > 0.0, where("distance_m must be positive"));
  require(raw_data_bits > 0.0, where("raw_data_bits must be positive"));
  require(snr_threshold_linear > 0.0, where("snr_threshold must be positive"));
  require(xi_min > 0.0, where("xi_min must be positive"));
  require(xi_max <= 1.0, where("xi_max must not exceed 1"));
  require(xi_min <= xi_max, where("xi_min exceeds xi_max"));
  require(delay_bound_s > 0.0, where("delay_bound_s must be positive"));
  require(min_bandwidth_hz > 0.0, where("min_bandwidth_hz must be positive"));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_per_hz_to_w_per_hz(double dbm_per_hz) { return std::pow(10.0, (dbm_per_hz - 30.0) / 10.0); }
double w_per_hz_to_dbm_per_hz(double w_per_hz) { return 10.0 * std::log10(w_per_hz) + 30.0; }

double channel_gain(double distance_m, const ScenarioConfig& config) {
  if (!(distance_m >= config.min_user_distance_m)) {
    throw std::domain_error(fmt::format("distance {} m is below the minimum {} m", distance_m,
                                        config.min_user_distance_m));
  }
  return config.pathloss_ref_gain * std::pow(distance_m, -config.pathloss_exponent);
}

double snr(double power_w, double gain, double bandwidth_hz, double noise_psd) {
  if (!(power_w > 0.0 && gain > 0.0 && bandwidth_hz > 0.0 && noise_psd > 0.0)) {
    throw std::domain_error("snr: arguments must be strictly positive");
  }
  return power_w * gain / (bandwidth_hz * noise_psd);
}

double transmission_rate(double bandwidth_hz, double snr_linear) {
  if (!(bandwidth_hz > 0.0) || !(snr_linear >= 0.0)) {
    throw std::domain_error("transmission_rate: bandwidth must be positive and snr non-negative");
  }
  return bandwidth_hz * std::log2(1.0 + snr_linear);
}

double transmission_delay(double raw_data_bits, double compression_rate, double rate_bps) {
  if (compression_rate >= 1.0) return 0.0;
  if (!(rate_bps > 0.0)) throw std::domain_error("undeliverable: zero rate with payload to send");
  return raw_data_bits * (1.0 - compression_rate) / rate_bps;
}

std::vector<UserProfile> sample_users(const ScenarioConfig& config) {
  config.validate();
  const CounterRng rng(config.rng_seed);
  const auto& s = config.sampling;
  const double r0 = config.min_user_distance_m;
  const double r1 = config.cell_radius_m;

  std::vector<UserProfile> users;
  users.reserve(static_cast<size_t>(config.user_count));
  for (int i = 0; i < config.user_count; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    UserProfile u;
    u.id = i + 1;
    // area-uniform over the annulus
    const double a = rng.uniform(kDistance, idx, 0);
    u.distance_m = std::sqrt(r0 * r0 + a * (r1 * r1 - r0 * r0));
    u.raw_data_bits = rng.uniform(s.raw_data_bits.lo, s.raw_data_bits.hi, kRawData, idx, 0);
    u.delay_bound_s = rng.uniform(s.delay_bound_s.lo, s.delay_bound_s.hi, kDelay, idx, 0);
    u.snr_threshold_linear =
        db_to_linear(rng.uniform(s.snr_threshold_db.lo, s.snr_threshold_db.hi, kSnrThreshold, idx, 0));
    const double x1 = rng.uniform(s.xi.lo, s.xi.hi, kXi, idx, 0);
    const double x2 = rng.uniform(s.xi.lo, s.xi.hi, kXi, idx, 1);
    u.xi_min = std::min(x1, x2);
    u.xi_max = std::max(x1, x2);
    u.min_bandwidth_hz =
        rng.uniform(s.min_bandwidth_hz.lo, s.min_bandwidth_hz.hi, kMinBandwidth, idx, 0);
    users.push_back(u);
  }
  return users;
}

ChannelRealization realize_channel(const ScenarioConfig& config,
                                   const std::vector<UserProfile>& users) {
  ChannelRealization ch;
  ch.gains_linear.reserve(users.size());
  for (const auto& u : users) ch.gains_linear.push_back(channel_gain(u.distance_m, config));
  return ch;
}

Scenario make_scenario(const ScenarioConfig& config) {
  Scenario s{config, sample_users(config), {}};
  s.channel = realize_channel(config, s.users);
  return s;
}

Scenario load_scenario(std::string_view text, std::optional<std::uint64_t> seed_override) {
  ScenarioConfig cfg;
  std::map<int, UserOverrides> overrides;
  int current_user = 0;  // 0 = global section

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: unterminated section", line_no));
      std::string_view inner = trim(line.substr(1, line.size() - 2));
      if (inner.substr(0, 4) != "user") {
        throw ConfigError(fmt::format("line {}: unknown section '{}'", line_no, inner));
      }
      current_user = parse_int("user", inner.substr(4), line_no);
      if (current_user < 1) throw ConfigError(fmt::format("line {}: user ids start at 1", line_no));
      overrides[current_user];
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    if (current_user > 0) {
      auto& block = overrides[current_user];
      if (block.count(key)) throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
      block[key] = {parse_number(key, value, line_no), line_no};
      continue;
    }

    if (key == "user_count") cfg.user_count = parse_int(key, value, line_no);
    else if (key == "total_bandwidth_hz") cfg.total_bandwidth_hz = parse_number(key, value, line_no);
    else if (key == "total_bandwidth_mhz") cfg.total_bandwidth_hz = 1e6 * parse_number(key, value, line_no);
    else if (key == "max_power_w") cfg.max_power_w = parse_number(key, value, line_no);
    else if (key == "noise_psd_dbm_per_hz") cfg.noise_psd_w_per_hz = dbm_per_hz_to_w_per_hz(parse_number(key, value, line_no));
    else if (key == "noise_psd_w_per_hz") cfg.noise_psd_w_per_hz = parse_number(key, value, line_no);
    else if (key == "penalty_exponent") cfg.penalty_exponent = parse_number(key, value, line_no);
    else if (key == "cell_radius_m") cfg.cell_radius_m = parse_number(key, value, line_no);
    else if (key == "min_user_distance_m") cfg.min_user_distance_m = parse_number(key, value, line_no);
    else if (key == "pathloss_exponent") cfg.pathloss_exponent = parse_number(key, value, line_no);
    else if (key == "pathloss_ref_gain") cfg.pathloss_ref_gain = parse_number(key, value, line_no);
    else if (key == "rng_seed") cfg.rng_seed = parse_seed(key, value, line_no);
    else if (key == "raw_data_bits_range") cfg.sampling.raw_data_bits = parse_range(key, value, line_no);
    else if (key == "delay_bound_s_range") cfg.sampling.delay_bound_s = parse_range(key, value, line_no);
    else if (key == "snr_threshold_db_range") cfg.sampling.snr_threshold_db = parse_range(key, value, line_no);
    else if (key == "xi_range") cfg.sampling.xi = parse_range(key, value, line_no);
    else if (key == "min_bandwidth_hz_range") cfg.sampling.min_bandwidth_hz = parse_range(key, value, line_no);
    else throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
  }

  if (seed_override) cfg.rng_seed = *seed_override;
  cfg.validate();
  Scenario s{cfg, sample_users(cfg), {}};
  for (const auto& [id, block] : overrides) {
    if (id > cfg.user_count) {
      throw ConfigError(fmt::format("user {} exceeds user_count {}", id, cfg.user_count));
    }
    auto& u = s.users[static_cast<size_t>(id - 1)];
    for (const auto& [key, entry] : block) apply_user_override(u, key, entry.first, entry.second);
  }
  for (const auto& u : s.users) {
    u.validate();
    if (u.distance_m < cfg.min_user_distance_m) {
      throw ConfigError(fmt::format("user {}: distance_m below min_user_distance_m", u.id));
    }
  }
  s.channel = realize_channel(cfg, s.users);
  return s;
}

Scenario load_scenario_file(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open scenario file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str(), seed_override);
}

std::string save_scenario(const Scenario& scenario) {
  const auto& c = scenario.config;
  std::string out;
  auto line = [&out](std::string_view key, auto value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  auto range = [&out](std::string_view key, const Range& r) {
    out += fmt::format("{} = {:.17g}, {:.17g}\n", key, r.lo, r.hi);
  };
  line("user_count", c.user_count);
  line("total_bandwidth_hz", fmt::format("{:.17g}", c.total_bandwidth_hz));
  line("max_power_w", fmt::format("{:.17g}", c.max_power_w));
  line("noise_psd_w_per_hz", fmt::format("{:.17g}", c.noise_psd_w_per_hz));
  line("penalty_exponent", fmt::format("{:.17g}", c.penalty_exponent));
  line("cell_radius_m", fmt::format("{:.17g}", c.cell_radius_m));
  line("min_user_distance_m", fmt::format("{:.17g}", c.min_user_distance_m));
  line("pathloss_exponent", fmt::format("{:.17g}", c.pathloss_exponent));
  line("pathloss_ref_gain", fmt::format("{:.17g}", c.pathloss_ref_gain));
  line("rng_seed", c.rng_seed);
  range("raw_data_bits_range", c.sampling.raw_data_bits);
  range("delay_bound_s_range", c.sampling.delay_bound_s);
  range("snr_threshold_db_range", c.sampling.snr_threshold_db);
  range("xi_range", c.sampling.xi);
  range("min_bandwidth_hz_range", c.sampling.min_bandwidth_hz);
  for (const auto& u : scenario.users) {
    out += fmt::format("\n[user {}]\n", u.id);
    line("distance_m", fmt::format("{:.17g}", u.distance_m));
    line("raw_data_bits", fmt::format("{:.17g}", u.raw_data_bits));
    line("snr_threshold_linear", fmt::format("{:.17g}", u.snr_threshold_linear));
    line("xi_min", fmt::format("{:.17g}", u.xi_min));
    line("xi_max", fmt::format("{:.17g}", u.xi_max));
    line("delay_bound_s", fmt::format("{:.17g}", u.delay_bound_s));
    line("min_bandwidth_hz", fmt::format("{:.17g}", u.min_bandwidth_hz));
  }
  return out;
}

}  // namespace semalloc
