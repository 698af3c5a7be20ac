#include <doctest.h>

#include <cmath>
#include <string>

#include "semalloc/rng.hpp"
#include "semalloc/scenario.hpp"

using namespace semalloc;

TEST_CASE("unit conversions") {
  CHECK(dbm_per_hz_to_w_per_hz(-173.0) == doctest::Approx(5.0119e-21).epsilon(1e-4));
  CHECK(db_to_linear(20.0) == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(linear_to_db(1000.0) == doctest::Approx(30.0).epsilon(1e-15));
  CHECK(w_per_hz_to_dbm_per_hz(dbm_per_hz_to_w_per_hz(-173.0)) == doctest::Approx(-173.0));
}

TEST_CASE("channel gain follows the log-distance law") {
  ScenarioConfig c;
  c.pathloss_ref_gain = 1e-6;
  c.pathloss_exponent = 3.76;
  CHECK(channel_gain(1.0, c) == doctest::Approx(1e-6).epsilon(1e-15));
  CHECK(channel_gain(10.0, c) == doctest::Approx(1.7378e-10).epsilon(1e-4));
  CHECK(channel_gain(20.0, c) < channel_gain(10.0, c));
  CHECK_THROWS_AS(channel_gain(0.5, c), std::domain_error);
}

TEST_CASE("snr, rate and delay") {
  SUBCASE("balanced numerator and denominator gives 0 dB") {
    CHECK(snr(2.0, 3e-10, 1e6, 6e-16) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("received snr oracle") {
    CHECK(snr(0.5, 1e-10, 1e6, 5.0119e-21) == doctest::Approx(9976.25).epsilon(1e-5));
    CHECK(linear_to_db(snr(0.5, 1e-10, 1e6, 5.0119e-21)) == doctest::Approx(39.99).epsilon(1e-3));
  }
  SUBCASE("non-positive inputs are rejected") {
    CHECK_THROWS(snr(0.0, 1e-10, 1e6, 1e-21));
    CHECK_THROWS(snr(1.0, 1e-10, 0.0, 1e-21));
  }
  SUBCASE("rate") {
    CHECK(transmission_rate(1e6, 3.0) == doctest::Approx(2e6).epsilon(1e-15));
    CHECK(transmission_rate(1e6, 0.0) == 0.0);
    CHECK(transmission_rate(5e6, 1.0) == doctest::Approx(5e6).epsilon(1e-15));
  }
  SUBCASE("delay") {
    CHECK(transmission_delay(4e6, 0.5, 2e6) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(transmission_delay(4e6, 1.0, 2e6) == 0.0);
    CHECK(transmission_delay(4e6, 1.0, 0.0) == 0.0);
    CHECK(transmission_delay(4e6, 0.75, 5e6) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(transmission_delay(4e6, 0.5, 0.0), doctest::Contains("undeliverable"),
                         std::domain_error);
  }
}

TEST_CASE("counter rng is a pure function of its coordinates") {
  CounterRng a(42), b(42), c(43);
  CHECK(a.bits(1, 2, 3) == b.bits(1, 2, 3));
  CHECK(a.bits(1, 2, 3) != c.bits(1, 2, 3));
  CHECK(a.bits(1, 2, 3) != a.bits(1, 2, 4));
  CHECK(a.bits(1, 2, 3) != a.bits(2, 2, 3));
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform(7, static_cast<std::uint64_t>(i), 0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("user sampling") {
  ScenarioConfig c;
  SUBCASE("same seed twice gives identical users") {
    CHECK(sample_users(c) == sample_users(c));
    CHECK(save_scenario(make_scenario(c)) == save_scenario(make_scenario(c)));
  }
  SUBCASE("different seeds differ") {
    ScenarioConfig d = c;
    d.rng_seed = 2;
    CHECK_FALSE(sample_users(c) == sample_users(d));
  }
  SUBCASE("fields stay inside their ranges") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      c.rng_seed = seed;
      const auto users = sample_users(c);
      REQUIRE(users.size() == 10);
      for (std::size_t i = 0; i < users.size(); ++i) {
        const auto& u = users[i];
        CHECK(u.id == static_cast<int>(i) + 1);
        CHECK(u.distance_m >= 1.0);
        CHECK(u.distance_m <= 100.0);
        CHECK(u.xi_min >= 0.6);
        CHECK(u.xi_min <= u.xi_max);
        CHECK(u.xi_max <= 0.9);
        CHECK(u.snr_threshold_linear >= db_to_linear(20.0) * (1 - 1e-12));
        CHECK(u.snr_threshold_linear <= db_to_linear(25.0) * (1 + 1e-12));
        CHECK(u.min_bandwidth_hz >= 0.5e6);
        CHECK(u.min_bandwidth_hz <= 2.0e6);
      }
    }
  }
  SUBCASE("statistics of a large population") {
    c.user_count = 1000;
    const auto users = sample_users(c);
    double xi_min_mean = 0.0, r2_mean = 0.0;
    for (const auto& u : users) {
      xi_min_mean += u.xi_min;
      r2_mean += u.distance_m * u.distance_m;
    }
    xi_min_mean /= 1000.0;
    r2_mean /= 1000.0;
    CHECK(xi_min_mean >= 0.6);
    CHECK(xi_min_mean <= 0.9);
    // The smaller of two uniform draws on [0.6, 0.9] has mean 0.6 + 0.3/3.
    CHECK(xi_min_mean == doctest::Approx(0.7).epsilon(0.02));
    // Area-uniform distance: E[d^2] = (R^2 + r^2) / 2.
    CHECK(r2_mean == doctest::Approx((100.0 * 100.0 + 1.0) / 2.0).epsilon(0.05));
  }
  SUBCASE("adding users keeps existing ones") {
    ScenarioConfig more = c;
    more.user_count = 12;
    const auto a = sample_users(c);
    const auto b = sample_users(more);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("scenario text format") {
  SUBCASE("units are converted") {
    const auto s = load_scenario(
        "user_count = 2\n"
        "noise_psd_dbm_per_hz = -173 dBm/Hz\n"
        "total_bandwidth_mhz = 8\n"
        "[user 1]\n"
        "snr_threshold_db = 20 dB\n"
        "delay_bound_ms = 0.5\n");
    CHECK(s.config.noise_psd_w_per_hz == doctest::Approx(5.0119e-21).epsilon(1e-4));
    CHECK(s.config.total_bandwidth_hz == 8e6);
    CHECK(s.users[0].snr_threshold_linear == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(s.users[0].delay_bound_s == doctest::Approx(0.5e-3).epsilon(1e-15));
  }
  SUBCASE("an inverted similarity band is rejected") {
    CHECK_THROWS_WITH_AS(load_scenario("[user 1]\nxi_min = 0.95\nxi_max = 0.9\n"),
                         doctest::Contains("xi_min exceeds xi_max"), ConfigError);
  }
  SUBCASE("errors name the field") {
    CHECK_THROWS_WITH_AS(load_scenario("max_power_w = -1\n"), doctest::Contains("max_power_w"), ConfigError);
    CHECK_THROWS_WITH_AS(load_scenario("max_power_w = 1 Hz\n"), doctest::Contains("unit"), ConfigError);
    CHECK_THROWS_WITH_AS(load_scenario("bogus = 1\n"), doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(load_scenario("[user 11]\nxi_min = 0.7\n"), doctest::Contains("user 11"),
                         ConfigError);
    CHECK_THROWS_AS(load_scenario("[user 1]\ndistance_m = 0.1\n"), ConfigError);
  }
  SUBCASE("comments and blank lines are ignored") {
    const auto s = load_scenario("# header\n\nrng_seed = 5  # trailing\n");
    CHECK(s.config.rng_seed == 5);
  }
  SUBCASE("seed override") {
    const auto a = load_scenario("rng_seed = 5\n", 9);
    ScenarioConfig c;
    c.rng_seed = 9;
    CHECK(a.users == sample_users(c));
  }
  SUBCASE("save then load reproduces the scenario exactly") {
    ScenarioConfig c;
    c.rng_seed = 77;
    c.total_bandwidth_hz = 13e6;
    const auto s = make_scenario(c);
    const auto text = save_scenario(s);
    const auto back = load_scenario(text);
    CHECK(back.users == s.users);
    CHECK(back.channel.gains_linear == s.channel.gains_linear);
    CHECK(save_scenario(back) == text);
  }
}
