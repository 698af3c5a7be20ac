#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "semalloc/gp.hpp"
#include "support.hpp"

using namespace semalloc;
using semalloc::test::Draws;

namespace {

Monomial mono(double c, std::vector<double> e) { return Monomial::from_coefficient(c, std::move(e)); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Posynomial random_posynomial(Draws& d, int vars, int terms) {
  Posynomial p;
  for (int k = 0; k < terms; ++k) {
    std::vector<double> e(static_cast<std::size_t>(vars));
    for (auto& x : e) x = d.uniform(-3.0, 3.0);
    p.terms.push_back(Monomial{d.uniform(-5.0, 5.0), e});
  }
  return p;
}

// Independent evaluation of the bandwidth/power objective.
double direct_objective(const ScenarioConfig& c, const std::vector<UserProfile>& users,
                        const std::vector<double>& gains, const std::vector<double>& xi,
                        const std::vector<double>& beta, const std::vector<double>& power) {
  double f = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const double ratio = users[i].snr_threshold_linear * users[i].xi_min * c.noise_psd_w_per_hz * beta[i] /
                         (xi[i] * power[i] * gains[i]);
    f += std::pow(ratio, c.penalty_exponent);
  }
  return f;
}

}  // namespace

TEST_CASE("analytic toy programs") {
  SUBCASE("min x s.t. 2/x <= 1") {
    GeometricProgram gp{{"x"}, {{mono(1.0, {1.0})}}, {{{mono(2.0, {-1.0})}}}, {"floor"}};
    const auto s = solve_gp(gp);
    REQUIRE(s.status == GpStatus::optimal);
    CHECK(rel(s.values[0], 2.0) < 1e-6);
    CHECK(rel(s.objective_value, 2.0) < 1e-6);
  }
  SUBCASE("min x + 1/x inside a box") {
    GeometricProgram gp{{"x"},
                        {{mono(1.0, {1.0}), mono(1.0, {-1.0})}},
                        {{{mono(1e-6, {-1.0})}}, {{mono(1e-6, {1.0})}}},
                        {"lower", "upper"}};
    const auto s = solve_gp(gp);
    REQUIRE(s.status == GpStatus::optimal);
    CHECK(rel(s.values[0], 1.0) < 1e-6);
    CHECK(rel(s.objective_value, 2.0) < 1e-6);
  }
  SUBCASE("contradictory constraints are infeasible") {
    GeometricProgram gp{{"x"}, {{mono(1.0, {1.0})}}, {{{mono(2.0, {-1.0})}}, {{mono(1.0, {1.0})}}}, {"lo", "hi"}};
    CHECK(solve_gp(gp).status == GpStatus::infeasible);
  }
  SUBCASE("infeasible start point goes through phase one") {
    GeometricProgram gp{{"x"}, {{mono(1.0, {1.0})}}, {{{mono(2.0, {-1.0})}}}, {"floor"}};
    Eigen::VectorXd start(1);
    start << 0.5;
    const auto s = solve_gp(gp, {}, start);
    REQUIRE(s.status == GpStatus::optimal);
    CHECK(rel(s.values[0], 2.0) < 1e-6);
  }
}

TEST_CASE("program validation") {
  GeometricProgram gp{{"x", "y"}, {{mono(1.0, {1.0})}}, {}, {}};
  CHECK_THROWS_AS(gp.validate(), GpError);
  CHECK_THROWS_AS(Monomial::from_coefficient(-1.0, {1.0}), GpError);
  CHECK_THROWS_AS(Monomial::from_coefficient(0.0, {1.0}), GpError);
}

TEST_CASE("log evaluation") {
  SUBCASE("a monomial is affine in log space") {
    Posynomial p{{mono(3.0, {2.0, -1.5})}};
    Eigen::VectorXd y(2);
    y << 0.3, -1.2;
    const auto e = eval_log(p, y);
    CHECK(e.value == doctest::Approx(std::log(3.0) + 2.0 * 0.3 + 1.5 * 1.2).epsilon(1e-14));
    CHECK(e.gradient[0] == doctest::Approx(2.0));
    CHECK(e.gradient[1] == doctest::Approx(-1.5));
    CHECK(e.hessian.cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("gradients match central differences; hessians are PSD") {
    Draws d(7);
    for (int k = 0; k < 100; ++k) {
      const int vars = 1 + k % 4;
      const auto p = random_posynomial(d, vars, 1 + k % 5);
      Eigen::VectorXd y(vars);
      for (int i = 0; i < vars; ++i) y[i] = d.uniform(-2.0, 2.0);
      const auto e = eval_log(p, y);
      const double h = 1e-6;
      for (int i = 0; i < vars; ++i) {
        Eigen::VectorXd yp = y, ym = y;
        yp[i] += h;
        ym[i] -= h;
        const double fd = (eval_log(p, yp).value - eval_log(p, ym).value) / (2.0 * h);
        CHECK(std::abs(fd - e.gradient[i]) <= 1e-5 * std::max(1.0, std::abs(e.gradient[i])));
        const Eigen::VectorXd gd = (eval_log(p, yp).gradient - eval_log(p, ym).gradient) / (2.0 * h);
        CHECK((gd - e.hessian.col(i)).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, e.hessian.cwiseAbs().maxCoeff()));
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e.hessian);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
  }
  SUBCASE("extreme coefficients stay finite") {
    Posynomial p{{Monomial{-800.0, {2.0}}, Monomial{-790.0, {-2.0}}}};
    Eigen::VectorXd y(1);
    y << 1.0;
    const auto e = eval_log(p, y);
    CHECK(std::isfinite(e.value));
    CHECK(std::isfinite(e.gradient[0]));
  }
}

TEST_CASE("bandwidth/power program structure") {
  ScenarioConfig c;
  SUBCASE("single user") {
    const std::vector<UserProfile> users{test::make_user(1, 100.0, 0.6, 0.9)};
    const std::vector<double> gains{1e-10}, xi{0.8};
    const auto gp = build_f1_prime(c, users, gains, xi);
    REQUIRE(gp.objective.terms.size() == 1);
    CHECK(gp.objective.terms[0].exponents == std::vector<double>{2.0, -2.0});
    CHECK(gp.constraints.size() == 4);
    CHECK(gp.variable_count() == 2);
    // (SNR_th * xi_min / xi * N0 / h)^a
    CHECK(gp.objective.terms[0].coefficient() == doctest::Approx(1.4130e-17).epsilon(1e-4));
    const double oracle = std::pow(100.0 * 0.6 / 0.8 * c.noise_psd_w_per_hz / 1e-10, 2.0);
    CHECK(rel(gp.objective.terms[0].coefficient(), oracle) < 1e-12);
  }
  SUBCASE("three users") {
    std::vector<UserProfile> users;
    for (int i = 1; i <= 3; ++i) users.push_back(test::make_user(i, 100.0, 0.6, 0.9));
    const auto gp = build_f1_prime(c, users, std::vector<double>(3, 1e-10), std::vector<double>(3, 0.8));
    CHECK(gp.constraints.size() == 10);
    CHECK(gp.objective.terms.size() == 3);
    CHECK(gp.constraint_names.front() == "C1'");
    CHECK_FALSE(gp.dump().empty());
  }
  SUBCASE("mismatched lengths are rejected") {
    const std::vector<UserProfile> users{test::make_user(1, 100.0, 0.6, 0.9)};
    CHECK_THROWS(build_f1_prime(c, users, std::vector<double>{}, std::vector<double>{0.8}));
  }
}

TEST_CASE("feasibility report") {
  ScenarioConfig c;
  const std::vector<UserProfile> users{test::make_user(1, 100.0, 0.6, 0.9)};
  const std::vector<double> gains{1e-10}, xi{0.8};
  const auto gp = build_f1_prime(c, users, gains, xi);
  Eigen::VectorXd corner(2);
  corner << users[0].min_bandwidth_hz, c.max_power_w;
  const auto ok = check_feasibility(gp, corner);
  CHECK(ok.feasible);
  for (double v : ok.constraint_values) CHECK(v <= 1.0 + 1e-12);

  Eigen::VectorXd wide(2);
  wide << 2.0 * c.total_bandwidth_hz, c.max_power_w;
  const auto bad = check_feasibility(gp, wide);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.constraint_values[0] == doctest::Approx(2.0));

  GeometricProgram free{{"x"}, {{mono(1.0, {1.0})}}, {}, {}};
  Eigen::VectorXd x(1);
  x << 3.0;
  CHECK(check_feasibility(free, x).feasible);
}

TEST_CASE("bandwidth/power program optimum sits at the corner") {
  ScenarioConfig c;
  const auto u = test::make_user(1, db_to_linear(22.0), 0.7, 0.8, 1.2e6);
  const double h = test::gain_for_snr(db_to_linear(30.0), u.min_bandwidth_hz, c);
  const std::vector<UserProfile> users{u};
  const std::vector<double> gains{h}, xi{0.75};
  const auto gp = build_f1_prime(c, users, gains, xi);
  const auto s = solve_gp(gp, {}, f1_prime_start(c, users));
  REQUIRE(s.status == GpStatus::optimal);
  CHECK(rel(s.values[0], u.min_bandwidth_hz) < 1e-6);
  CHECK(rel(s.values[1], c.max_power_w) < 1e-6);

  // Brute force over a 200 x 200 log grid spanning [beta_min, M] x [P/1e4, P].
  const int n = 200;
  const double lb0 = std::log(u.min_bandwidth_hz), lb1 = std::log(c.total_bandwidth_hz);
  const double lp0 = std::log(c.max_power_w * 1e-4), lp1 = std::log(c.max_power_w);
  double best = std::numeric_limits<double>::infinity();
  double best_lb = 0.0, best_lp = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double lb = lb0 + (lb1 - lb0) * i / (n - 1);
      const double lp = lp0 + (lp1 - lp0) * j / (n - 1);
      Eigen::VectorXd v(2);
      v << std::exp(lb), std::exp(lp);
      if (!check_feasibility(gp, v, 1e-12).feasible) continue;
      const double f = direct_objective(c, users, gains, xi, {v[0]}, {v[1]});
      if (f < best) {
        best = f;
        best_lb = lb;
        best_lp = lp;
      }
    }
  }
  REQUIRE(std::isfinite(best));
  CHECK(std::abs(std::log(s.values[0]) - best_lb) <= (lb1 - lb0) / (n - 1) + 1e-12);
  CHECK(std::abs(std::log(s.values[1]) - best_lp) <= (lp1 - lp0) / (n - 1) + 1e-12);
  CHECK(s.objective_value <= best * (1.0 + 1e-9));
}

TEST_CASE("interior optimum is resolved") {
  // min x/y + y with x >= 1 and y boxed: x = 1, then 1/y + y is smallest at y = 1.
  GeometricProgram gp{{"x", "y"},
                      {{mono(1.0, {1.0, -1.0}), mono(1.0, {0.0, 1.0})}},
                      {{{mono(1.0, {-1.0, 0.0})}}, {{mono(1e-3, {0.0, 1.0})}}, {{mono(1e-3, {0.0, -1.0})}}},
                      {"x floor", "y cap", "y floor"}};
  const auto s = solve_gp(gp);
  REQUIRE(s.status == GpStatus::optimal);
  CHECK(rel(s.values[0], 1.0) < 1e-6);
  CHECK(rel(s.values[1], 1.0) < 1e-6);
  CHECK(rel(s.objective_value, 2.0) < 1e-6);
  CHECK(s.kkt_residual < 1e-4);
}
