#include "semalloc/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace semalloc {

Monomial Monomial::from_coefficient(double coefficient, std::vector<double> exponents) {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) {
    throw GpError("monomial coefficient must be positive and finite");
  }
  return {std::log(coefficient), std::move(exponents)};
}

double Monomial::coefficient() const { return std::exp(log_coefficient); }

double Posynomial::evaluate(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& m : terms) {
    double log_term = m.log_coefficient;
    for (std::size_t i = 0; i < m.exponents.size(); ++i) {
      if (m.exponents[i] != 0.0) log_term += m.exponents[i] * std::log(x[i]);
    }
    sum += std::exp(log_term);
  }
  return sum;
}

Posynomial Posynomial::scaled(double factor) const {
  if (!(factor > 0.0)) throw GpError("posynomial scale factor must be positive");
  Posynomial out = *this;
  for (auto& m : out.terms) m.log_coefficient += std::log(factor);
  return out;
}

void GeometricProgram::validate() const {
  const std::size_t n = variable_count();
  if (n == 0) throw GpError("program has no variables");
  auto check = [n](const Posynomial& p, const std::string& what) {
    if (p.terms.empty()) throw GpError(what + ": empty posynomial");
    for (const auto& m : p.terms) {
      if (m.exponents.size() != n) throw GpError(what + ": exponent vector length mismatch");
      if (!std::isfinite(m.log_coefficient)) throw GpError(what + ": non-finite coefficient");
      for (double e : m.exponents) {
        if (!std::isfinite(e)) throw GpError(what + ": non-finite exponent");
      }
    }
  };
  check(objective, "objective");
  if (!constraint_names.empty() && constraint_names.size() != constraints.size()) {
    throw GpError("constraint_names must match constraints");
  }
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    check(constraints[j], fmt::format("constraint {}", j));
  }
}

std::string GeometricProgram::dump() const {
  std::string out = "variables:";
  for (const auto& v : variable_names) out += " " + v;
  out += '\n';
  auto posy = [&](const Posynomial& p) {
    for (const auto& m : p.terms) {
      out += fmt::format("  {:.10e}", m.coefficient());
      for (std::size_t i = 0; i < m.exponents.size(); ++i) {
        if (m.exponents[i] != 0.0) out += fmt::format(" {}^{:g}", variable_names[i], m.exponents[i]);
      }
      out += '\n';
    }
  };
  out += "minimize:\n";
  posy(objective);
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    out += fmt::format("subject to {} <= 1:\n",
                       constraint_names.empty() ? fmt::format("#{}", j) : constraint_names[j]);
    posy(constraints[j]);
  }
  return out;
}

std::string_view to_string(GpStatus status) {
  switch (status) {
    case GpStatus::optimal: return "optimal";
    case GpStatus::infeasible: return "infeasible";
    case GpStatus::max_iterations: return "max_iterations";
    case GpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

// log sum_k exp(A_k . z + b_k)
struct Lse {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  struct Eval {
    double value = 0.0;
    Eigen::VectorXd weights;  // softmax of A z + b
    Eigen::VectorXd gradient;
  };

  bool affine() const { return A.rows() == 1; }

  Eval eval(const Eigen::VectorXd& z) const {
    Eval e;
    Eigen::VectorXd u = A * z + b;
    const double m = u.maxCoeff();
    e.weights = (u.array() - m).exp();
    const double s = e.weights.sum();
    e.value = m + std::log(s);
    e.weights /= s;
    e.gradient = A.transpose() * e.weights;
    if (!std::isfinite(e.value) || !e.gradient.allFinite()) {
      throw std::overflow_error("log-sum-exp evaluation is not finite");
    }
    return e;
  }

  double value(const Eigen::VectorXd& z) const {
    Eigen::VectorXd u = A * z + b;
    const double m = u.maxCoeff();
    return m + std::log((u.array() - m).exp().sum());
  }

  // Adds w * hessian into H.
  void add_hessian(const Eval& e, double w, Eigen::MatrixXd& H) const {
    if (affine()) return;
    Eigen::MatrixXd weighted = A.transpose() * e.weights.asDiagonal();
    H.noalias() += w * (weighted * A);
    H.noalias() -= w * (e.gradient * e.gradient.transpose());
  }

  // value(z + dz) - value(z), accurate when the change is small relative to
  // the value.
  double delta(const Eval& at, const Eigen::VectorXd& dz) const {
    Eigen::VectorXd u = A * dz;
    const double m = u.maxCoeff();
    if (std::abs(m) < 0.5 && std::abs(u.minCoeff()) < 0.5) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < u.size(); ++k) acc += at.weights[k] * std::expm1(u[k]);
      return std::log1p(acc);
    }
    return m + std::log((at.weights.array() * (u.array() - m).exp()).sum());
  }
};

Lse compile(const Posynomial& p, std::size_t n) {
  Lse l;
  l.A.resize(static_cast<Eigen::Index>(p.terms.size()), static_cast<Eigen::Index>(n));
  l.b.resize(static_cast<Eigen::Index>(p.terms.size()));
  for (std::size_t k = 0; k < p.terms.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      l.A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = p.terms[k].exponents[i];
    }
    l.b[static_cast<Eigen::Index>(k)] = p.terms[k].log_coefficient;
  }
  return l;
}

struct BarrierProblem {
  Lse objective;
  std::vector<Lse> constraints;
};

enum class CenterOutcome { centered, stopped, max_steps, failed };

struct BarrierState {
  Eigen::VectorXd z;
  double t = 1.0;
  int newton_steps = 0;
  double kkt_residual = 0.0;
};

// Newton direction for H d = -g, regularizing H when it is not positive
// definite enough to give a descent direction.
bool newton_direction(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, Eigen::VectorXd& d) {
  const double scale = 1.0 + H.diagonal().cwiseAbs().maxCoeff();
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd Hs = H;
    if (shift > 0.0) Hs.diagonal().array() += shift;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      d = ldlt.solve(-g);
      if (d.allFinite() && g.dot(d) <= 0.0) return true;
    }
    shift = (shift == 0.0) ? 1e-14 * scale : shift * 100.0;
  }
  return false;
}

template <class Stop>
CenterOutcome center(const BarrierProblem& prob, BarrierState& st, const SolverOptions& opt,
                     Stop&& stop) {
  const auto n = st.z.size();
  const std::size_t m = prob.constraints.size();
  std::vector<Lse::Eval> cons(m);
  std::vector<double> deltas(m);

  for (int step = 0; step < opt.max_newton_steps; ++step) {
    const Lse::Eval obj = prob.objective.eval(st.z);
    Eigen::VectorXd g = st.t * obj.gradient;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    prob.objective.add_hessian(obj, st.t, H);
    for (std::size_t j = 0; j < m; ++j) {
      cons[j] = prob.constraints[j].eval(st.z);
      const double slack = -cons[j].value;
      g += cons[j].gradient / slack;
      prob.constraints[j].add_hessian(cons[j], 1.0 / slack, H);
      H.noalias() += (cons[j].gradient * cons[j].gradient.transpose()) / (slack * slack);
    }
    st.kkt_residual = g.cwiseAbs().maxCoeff() / st.t;

    Eigen::VectorXd d;
    if (!newton_direction(H, g, d)) return CenterOutcome::failed;
    const double slope = g.dot(d);
    const double lambda2 = -slope;
    if (lambda2 / 2.0 <= opt.newton_tolerance) return CenterOutcome::centered;

    constexpr double kArmijo = 0.01;
    double s = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls, s *= 0.5) {
      const Eigen::VectorXd step_dz = s * d;
      bool feasible = true;
      double dphi = 0.0;
      for (std::size_t j = 0; j < m && feasible; ++j) {
        deltas[j] = prob.constraints[j].delta(cons[j], step_dz);
        const double ratio = deltas[j] / cons[j].value;  // g_j < 0
        if (!std::isfinite(ratio) || !(ratio > -1.0)) feasible = false;
        else dphi -= std::log1p(ratio);
      }
      if (!feasible) continue;
      dphi += st.t * prob.objective.delta(obj, step_dz);
      if (std::isfinite(dphi) && dphi <= kArmijo * s * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No measurable decrease: the iterate is as centered as double
      // precision allows.
      return lambda2 < 1e-6 ? CenterOutcome::centered : CenterOutcome::failed;
    }
    const Eigen::VectorXd before = st.z;
    st.z += s * d;
    if (st.z == before) {
      // The step vanished in rounding: no further progress is possible.
      return lambda2 < 1e-6 ? CenterOutcome::centered : CenterOutcome::failed;
    }
    ++st.newton_steps;
    if (!st.z.allFinite()) return CenterOutcome::failed;
    if (stop(st.z)) return CenterOutcome::stopped;
  }
  return CenterOutcome::max_steps;
}

struct BarrierOutcome {
  GpStatus status;
  bool stopped_early = false;
};

template <class Stop>
BarrierOutcome run_barrier(const BarrierProblem& prob, BarrierState& st, const SolverOptions& opt,
                           Stop&& stop) {
  const double m = static_cast<double>(prob.constraints.size());
  st.t = opt.initial_t;
  while (true) {
    CenterOutcome c;
    try {
      c = center(prob, st, opt, stop);
    } catch (const std::overflow_error&) {
      return {GpStatus::numerical_failure};
    }
    if (c == CenterOutcome::stopped) return {GpStatus::optimal, true};
    if (c == CenterOutcome::failed) return {GpStatus::numerical_failure};
    if (c == CenterOutcome::max_steps) return {GpStatus::max_iterations};
    if (m == 0.0 || m / st.t <= opt.gap_tolerance) return {GpStatus::optimal};
    st.t *= opt.barrier_growth;
  }
}

bool strictly_feasible(const std::vector<Lse>& cons, const Eigen::VectorXd& y) {
  return std::all_of(cons.begin(), cons.end(), [&](const Lse& c) { return c.value(y) < 0.0; });
}

// Finds a strictly feasible log-point by minimizing s subject to
// g_j(y) <= s inside a box around y0. Returns nullopt when the minimum
// slack is nonnegative (infeasible).
std::optional<Eigen::VectorXd> phase_one(const std::vector<Lse>& cons, const Eigen::VectorXd& y0,
                                         const SolverOptions& opt, int& newton_steps,
                                         GpStatus& status) {
  constexpr double kBox = 60.0;
  const auto n = y0.size();
  BarrierProblem p;
  p.objective.A = Eigen::MatrixXd::Zero(1, n + 1);
  p.objective.A(0, n) = 1.0;
  p.objective.b = Eigen::VectorXd::Zero(1);

  double s0 = -std::numeric_limits<double>::infinity();
  for (const auto& c : cons) {
    Lse aug;
    aug.A.resize(c.A.rows(), n + 1);
    aug.A << c.A, Eigen::VectorXd::Constant(c.A.rows(), -1.0);
    aug.b = c.b;
    p.constraints.push_back(std::move(aug));
    s0 = std::max(s0, c.value(y0));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Lse up, down;
    up.A = Eigen::MatrixXd::Zero(1, n + 1);
    up.A(0, i) = 1.0;
    up.b = Eigen::VectorXd::Constant(1, -(y0[i] + kBox));
    down.A = Eigen::MatrixXd::Zero(1, n + 1);
    down.A(0, i) = -1.0;
    down.b = Eigen::VectorXd::Constant(1, y0[i] - kBox);
    p.constraints.push_back(std::move(up));
    p.constraints.push_back(std::move(down));
  }
  Lse floor_s;
  floor_s.A = Eigen::MatrixXd::Zero(1, n + 1);
  floor_s.A(0, n) = -1.0;
  floor_s.b = Eigen::VectorXd::Constant(1, -1.0);
  p.constraints.push_back(std::move(floor_s));

  BarrierState st;
  st.z.resize(n + 1);
  st.z << y0, std::max(s0 + 1.0, 0.0);
  constexpr double kEnoughSlack = -1e-3;
  auto outcome = run_barrier(p, st, opt, [&](const Eigen::VectorXd& z) { return z[n] < kEnoughSlack; });
  newton_steps += st.newton_steps;
  if (outcome.status == GpStatus::numerical_failure) {
    status = GpStatus::numerical_failure;
    return std::nullopt;
  }
  Eigen::VectorXd y = st.z.head(n);
  if (st.z[n] < 0.0 && strictly_feasible(cons, y)) return y;
  status = outcome.status == GpStatus::max_iterations ? GpStatus::max_iterations : GpStatus::infeasible;
  return std::nullopt;
}

// Moves one coordinate at a time to the minimizer of the (convex) objective
// along that axis within the feasible set.
void polish(const Lse& obj, const std::vector<Lse>& cons, Eigen::VectorXd& y) {
  const auto n = y.size();
  std::vector<std::vector<std::size_t>> touching(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < cons.size(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((cons[j].A.col(i).array() != 0.0).any()) touching[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  constexpr double kReach = 60.0;
  constexpr int kBisections = 64;

  for (int pass = 0; pass < 50; ++pass) {
    bool moved = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d0 = obj.eval(y).gradient[i];
      if (d0 == 0.0) continue;
      const double dir = d0 > 0.0 ? -1.0 : 1.0;
      const auto& idx = touching[static_cast<std::size_t>(i)];
      auto feasible_at = [&](double step) {
        Eigen::VectorXd trial = y;
        trial[i] += dir * step;
        return std::all_of(idx.begin(), idx.end(), [&](std::size_t j) { return cons[j].value(trial) <= 0.0; });
      };
      auto slope_at = [&](double step) {
        Eigen::VectorXd trial = y;
        trial[i] += dir * step;
        return dir * obj.eval(trial).gradient[i];
      };
      double hi = kReach;
      if (!feasible_at(hi)) {
        double lo = 0.0;
        for (int k = 0; k < kBisections; ++k) {
          const double mid = 0.5 * (lo + hi);
          (feasible_at(mid) ? lo : hi) = mid;
        }
        hi = lo;
      }
      double step = hi;
      if (hi > 0.0 && slope_at(hi) > 0.0) {
        double lo = 0.0;
        double up = hi;
        for (int k = 0; k < kBisections; ++k) {
          const double mid = 0.5 * (lo + up);
          (slope_at(mid) > 0.0 ? up : lo) = mid;
        }
        step = lo;
      }
      if (step > 1e-15 * (1.0 + std::abs(y[i]))) {
        y[i] += dir * step;
        moved = true;
      }
    }
    if (!moved) break;
  }
}

}  // namespace

LogEval eval_log(const Posynomial& posy, const Eigen::VectorXd& log_values) {
  if (!log_values.allFinite()) throw std::domain_error("eval_log: non-finite point");
  const Lse l = compile(posy, static_cast<std::size_t>(log_values.size()));
  const auto e = l.eval(log_values);
  LogEval out;
  out.value = e.value;
  out.gradient = e.gradient;
  out.hessian = Eigen::MatrixXd::Zero(log_values.size(), log_values.size());
  Eigen::MatrixXd weighted = l.A.transpose() * e.weights.asDiagonal();
  out.hessian.noalias() += weighted * l.A;
  out.hessian.noalias() -= e.gradient * e.gradient.transpose();
  return out;
}

GpSolution solve_gp(const GeometricProgram& gp, const SolverOptions& options,
                    const std::optional<Eigen::VectorXd>& start) {
  gp.validate();
  const std::size_t n = gp.variable_count();
  BarrierProblem prob;
  prob.objective = compile(gp.objective, n);
  for (const auto& c : gp.constraints) prob.constraints.push_back(compile(c, n));

  GpSolution sol;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (start) {
    if (start->size() != static_cast<Eigen::Index>(n) || !(start->array() > 0.0).all()) {
      throw GpError("start point must be positive with one entry per variable");
    }
    y = start->array().log();
  }

  if (!strictly_feasible(prob.constraints, y)) {
    GpStatus status = GpStatus::infeasible;
    auto found = phase_one(prob.constraints, y, options, sol.iterations, status);
    if (!found) {
      sol.status = status;
      sol.values = y.array().exp();
      sol.objective_value = std::exp(prob.objective.value(y));
      return sol;
    }
    y = *found;
  }

  BarrierState st;
  st.z = y;
  auto outcome = run_barrier(prob, st, options, [](const Eigen::VectorXd&) { return false; });
  sol.iterations += st.newton_steps;
  sol.kkt_residual = st.kkt_residual;
  y = st.z;
  sol.status = outcome.status;
  if (sol.status == GpStatus::optimal && sol.kkt_residual > options.kkt_tolerance) {
    sol.status = GpStatus::numerical_failure;
  }
  if (sol.status == GpStatus::optimal && options.polish) polish(prob.objective, prob.constraints, y);
  sol.values = y.array().exp();
  sol.objective_value = std::exp(prob.objective.value(y));
  return sol;
}

FeasibilityReport check_feasibility(const GeometricProgram& gp, const Eigen::VectorXd& values,
                                    double tolerance) {
  FeasibilityReport r;
  std::span<const double> x(values.data(), static_cast<std::size_t>(values.size()));
  for (const auto& c : gp.constraints) {
    const double v = c.evaluate(x);
    r.constraint_values.push_back(v);
    r.max_violation = std::max(r.max_violation, v - 1.0);
  }
  r.feasible = r.max_violation <= tolerance;
  return r;
}

GeometricProgram build_f1_prime(const ScenarioConfig& config, std::span<const UserProfile> users,
                                std::span<const double> gains, std::span<const double> xi_fixed) {
  const std::size_t N = users.size();
  if (gains.size() != N || xi_fixed.size() != N) {
    throw GpError("build_f1_prime: users, gains and xi must have equal length");
  }
  if (N == 0) throw GpError("build_f1_prime: no users");
  const double a = config.penalty_exponent;
  const double log_n0 = std::log(config.noise_psd_w_per_hz);

  GeometricProgram gp;
  for (const auto& u : users) gp.variable_names.push_back(fmt::format("beta_{}", u.id));
  for (const auto& u : users) gp.variable_names.push_back(fmt::format("P_{}", u.id));
  const std::size_t n = 2 * N;
  auto unit = [n](std::initializer_list<std::pair<std::size_t, double>> entries) {
    std::vector<double> e(n, 0.0);
    for (auto [i, v] : entries) e[i] = v;
    return e;
  };

  for (std::size_t i = 0; i < N; ++i) {
    if (!(xi_fixed[i] > 0.0)) throw GpError(fmt::format("user {}: similarity must be positive", users[i].id));
    if (!(gains[i] > 0.0)) throw GpError(fmt::format("user {}: channel gain must be positive", users[i].id));
    const double log_c = a * (std::log(users[i].snr_threshold_linear) + std::log(users[i].xi_min) -
                              std::log(xi_fixed[i]) + log_n0 - std::log(gains[i]));
    gp.objective.terms.push_back({log_c, unit({{i, a}, {N + i, -a}})});
  }

  Posynomial budget;
  for (std::size_t i = 0; i < N; ++i) {
    budget.terms.push_back({-std::log(config.total_bandwidth_hz), unit({{i, 1.0}})});
  }
  gp.constraints.push_back(std::move(budget));
  gp.constraint_names.push_back("C1'");
  for (std::size_t i = 0; i < N; ++i) {
    gp.constraints.push_back({{{std::log(users[i].min_bandwidth_hz), unit({{i, -1.0}})}}});
    gp.constraint_names.push_back(fmt::format("C2'[{}]", users[i].id));
  }
  for (std::size_t i = 0; i < N; ++i) {
    gp.constraints.push_back({{{-std::log(config.max_power_w), unit({{N + i, 1.0}})}}});
    gp.constraint_names.push_back(fmt::format("C3'[{}]", users[i].id));
  }
  for (std::size_t i = 0; i < N; ++i) {
    const double log_c = std::log(users[i].snr_threshold_linear) + log_n0 - std::log(gains[i]);
    gp.constraints.push_back({{{log_c, unit({{i, 1.0}, {N + i, -1.0}})}}});
    gp.constraint_names.push_back(fmt::format("C4'[{}]", users[i].id));
  }
  return gp;
}

Eigen::VectorXd f1_prime_start(const ScenarioConfig& config, std::span<const UserProfile> users,
                               double eps) {
  const auto N = static_cast<Eigen::Index>(users.size());
  Eigen::VectorXd x(2 * N);
  for (Eigen::Index i = 0; i < N; ++i) {
    x[i] = users[static_cast<std::size_t>(i)].min_bandwidth_hz * (1.0 + eps);
    x[N + i] = config.max_power_w * (1.0 - eps);
  }
  return x;
}

}  // namespace semalloc
