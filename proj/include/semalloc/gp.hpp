#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semalloc/scenario.hpp"

namespace semalloc {

class GpError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// c * prod_i x_i^e_i with c > 0. The coefficient is held as log(c) so that
/// programs with large penalty exponents do not underflow.
struct Monomial {
  double log_coefficient = 0.0;
  std::vector<double> exponents;

  static Monomial from_coefficient(double coefficient, std::vector<double> exponents);
  double coefficient() const;
};

struct Posynomial {
  std::vector<Monomial> terms;

  std::size_t variable_count() const { return terms.empty() ? 0 : terms.front().exponents.size(); }
  double evaluate(std::span<const double> x) const;
  Posynomial scaled(double factor) const;
};

/// minimize objective(x) subject to constraint_j(x) <= 1, x > 0.
struct GeometricProgram {
  std::vector<std::string> variable_names;
  Posynomial objective;
  std::vector<Posynomial> constraints;
  std::vector<std::string> constraint_names;

  std::size_t variable_count() const { return variable_names.size(); }
  void validate() const;
  /// Human-readable listing of variables and monomials, stable for diffing.
  std::string dump() const;
};

enum class GpStatus { optimal, infeasible, max_iterations, numerical_failure };
std::string_view to_string(GpStatus status);

struct GpSolution {
  Eigen::VectorXd values;
  double objective_value = 0.0;
  GpStatus status = GpStatus::numerical_failure;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double gap_tolerance = 1e-8;     // on the log-objective
  double newton_tolerance = 1e-10; // lambda^2 / 2
  double barrier_growth = 10.0;
  double initial_t = 1.0;
  int max_newton_steps = 200;      // per centering
  double kkt_tolerance = 1e-4;
  // Coordinate line searches to the constraint boundary after the barrier
  // phase; pins variables whose objective weight is too small for the barrier
  // gap to resolve.
  bool polish = true;
};

/// log(posynomial) as a function of log-variables, with exact derivatives.
struct LogEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Throws std::overflow_error if the value is not finite after the max-shift.
LogEval eval_log(const Posynomial& posy, const Eigen::VectorXd& log_values);

/// Log-barrier interior point in log variables. `start` (positive values) is
/// used when strictly feasible; otherwise a Phase-I solve finds a start.
GpSolution solve_gp(const GeometricProgram& gp, const SolverOptions& options = {},
                    const std::optional<Eigen::VectorXd>& start = std::nullopt);

struct FeasibilityReport {
  std::vector<double> constraint_values;
  double max_violation = 0.0;  // max(0, max_j value_j - 1)
  bool feasible = true;
};

FeasibilityReport check_feasibility(const GeometricProgram& gp, const Eigen::VectorXd& values,
                                    double tolerance = 1e-8);

/// Bandwidth/power subproblem with per-user similarity fixed. Variables are
/// ordered (beta_1..beta_N, P_1..P_N); constraints are the bandwidth budget,
/// then per-user minimum bandwidth, power cap and SNR floor.
GeometricProgram build_f1_prime(const ScenarioConfig& config, std::span<const UserProfile> users,
                                std::span<const double> gains, std::span<const double> xi_fixed);

/// beta_i = beta_min (1 + eps), P_i = P_tot (1 - eps).
Eigen::VectorXd f1_prime_start(const ScenarioConfig& config, std::span<const UserProfile> users,
                               double eps = 1e-3);

}  // namespace semalloc
