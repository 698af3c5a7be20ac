#include "semalloc/report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace semalloc {

namespace {

constexpr char kResultHeader[] =
    "method,user_id,admission,bandwidth_hz,power_w,compression,similarity,snr_linear,delay_s,"
    "satisfied,fallback_used,band_met,delay_met";
constexpr double kAuditSlack = 1e-9;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto p = line.find(sep, start);
    out.push_back(line.substr(start, p == std::string_view::npos ? line.npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

double to_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument(fmt::format("result csv line {}: bad number '{}'", line, s));
  }
  return v;
}

bool to_bool(std::string_view s, std::size_t line) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw std::invalid_argument(fmt::format("result csv line {}: expected 0/1, got '{}'", line, s));
}

}  // namespace

std::string result_report(const AllocationResult& result, const Scenario& scenario) {
  const auto& c = scenario.config;
  std::string out;
  out += fmt::format("method: {}\n", result.method);
  out += fmt::format("status: {}\n", result.status == AllocationStatus::ok ? "ok" : "solver_failure");
  if (!result.failure.empty()) out += fmt::format("failure: {}\n", result.failure);
  out += fmt::format("users: {}\ntotal_bandwidth_hz: {:.6g}\nmax_power_w: {:.6g}\nseed: {}\n", c.user_count,
                     c.total_bandwidth_hz, c.max_power_w, c.rng_seed);
  int satisfied = 0;
  double used = 0.0;
  for (const auto& u : result.per_user) {
    satisfied += u.satisfied;
    if (u.admission == Admission::served) used += u.bandwidth_hz;
  }
  out += fmt::format("satisfied: {}/{}\nbandwidth_used_hz: {:.6g}\n", satisfied, result.per_user.size(), used);
  out += fmt::format("iterations: {}\nconverged: {}\n", result.iterations_used, result.converged ? "yes" : "no");
  out += "\n  id  admission            beta_MHz    P_W  O      xi      xi_band        SNR_dB  SNRth_dB  delay_ms   sat  flags\n";
  for (std::size_t i = 0; i < result.per_user.size(); ++i) {
    const auto& a = result.per_user[i];
    const auto& u = i < result.effective_users.size() ? result.effective_users[i] : scenario.users[i];
    const std::string snr_db = a.snr_linear > 0 ? fmt::format("{:6.2f}", linear_to_db(a.snr_linear)) : "     -";
    std::string flags;
    if (a.fallback_used) flags += " fallback";
    if (a.admission == Admission::served && !a.band_met) flags += " band-unmet";
    if (a.admission == Admission::served && !a.delay_met) flags += " delay-unmet";
    out += fmt::format("{:4d}  {:<19}  {:8.4f}  {:5.3f}  {:5.2f}  {:6.4f}  [{:.3f},{:.3f}]  {}  {:8.2f}  {:9.4g}  {:>4} {}\n",
                       a.id, to_string(a.admission), a.bandwidth_hz / 1e6, a.power_w, a.compression,
                       a.similarity, u.xi_min, u.xi_max, snr_db, linear_to_db(u.snr_threshold_linear),
                       a.delay_s * 1e3, a.satisfied ? "yes" : "no", flags);
  }
  out += "\nobjective trace:\n";
  for (std::size_t k = 0; k < result.objective_trace.size(); ++k) {
    out += fmt::format("  {:3d}  {:.12g}\n", k + 1, result.objective_trace[k]);
  }
  return out;
}

std::string result_csv(const AllocationResult& result) {
  std::string out = kResultHeader;
  out += '\n';
  for (const auto& a : result.per_user) {
    out += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:d},{:d},{:d},{:d}\n",
                       result.method, a.id, to_string(a.admission), a.bandwidth_hz, a.power_w, a.compression,
                       a.similarity, a.snr_linear, a.delay_s, a.satisfied, a.fallback_used, a.band_met,
                       a.delay_met);
  }
  return out;
}

AllocationResult parse_result_csv(std::string_view csv) {
  AllocationResult r;
  std::size_t pos = 0, line_no = 0;
  bool header = false;
  while (pos < csv.size()) {
    auto nl = csv.find('\n', pos);
    std::string_view line = csv.substr(pos, nl == std::string_view::npos ? csv.npos : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != kResultHeader) throw std::invalid_argument("result csv: unexpected header");
      header = true;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() != 13) throw std::invalid_argument(fmt::format("result csv line {}: expected 13 fields", line_no));
    if (r.method.empty()) r.method = std::string(f[0]);
    else if (r.method != f[0]) throw std::invalid_argument("result csv: mixed methods");
    UserAllocation a;
    a.id = static_cast<int>(to_double(f[1], line_no));
    if (f[2] == "served") a.admission = Admission::served;
    else if (f[2] == "dropped_infeasible") a.admission = Admission::dropped_infeasible;
    else throw std::invalid_argument(fmt::format("result csv line {}: bad admission '{}'", line_no, f[2]));
    a.bandwidth_hz = to_double(f[3], line_no);
    a.power_w = to_double(f[4], line_no);
    a.compression = to_double(f[5], line_no);
    a.similarity = to_double(f[6], line_no);
    a.snr_linear = to_double(f[7], line_no);
    a.delay_s = to_double(f[8], line_no);
    a.satisfied = to_bool(f[9], line_no);
    a.fallback_used = to_bool(f[10], line_no);
    a.band_met = to_bool(f[11], line_no);
    a.delay_met = to_bool(f[12], line_no);
    r.per_user.push_back(a);
  }
  if (!header) throw std::invalid_argument("result csv: empty");
  r.iterations_used = 0;
  return r;
}

std::string per_user_csv(const std::vector<UserReportRow>& rows) {
  std::string out = "user_id,method,xi,xi_min,xi_max,satisfied\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:d}\n", r.user_id, r.method, r.xi, r.xi_min, r.xi_max,
                       r.satisfied);
  }
  return out;
}

std::string AuditReport::to_text() const {
  std::string out;
  for (const auto& v : violations) {
    out += fmt::format("VIOLATION {} user {}: {}\n", v.constraint, v.user_id, v.detail);
  }
  for (const auto& n : notes) out += fmt::format("note {} user {}: {}\n", n.constraint, n.user_id, n.detail);
  out += ok() ? "audit: ok\n" : fmt::format("audit: {} violation(s)\n", violations.size());
  return out;
}

AuditReport audit_result(const AllocationResult& result, const Scenario& scenario) {
  const auto& cfg = scenario.config;
  const auto& users = scenario.users;
  if (result.per_user.size() != users.size()) {
    throw std::invalid_argument(fmt::format("result has {} users, scenario has {}", result.per_user.size(),
                                            users.size()));
  }
  AuditReport rep;
  auto violate = [&](int id, const char* c, std::string d) { rep.violations.push_back({id, c, std::move(d)}); };
  auto note = [&](int id, const char* c, std::string d) { rep.notes.push_back({id, c, std::move(d)}); };

  double total = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& a = result.per_user[i];
    const auto& u = users[i];
    if (a.id != u.id) throw std::invalid_argument(fmt::format("user id mismatch: {} vs {}", a.id, u.id));
    if (!std::isfinite(a.bandwidth_hz) || a.bandwidth_hz < 0.0) {
      violate(a.id, "C1", fmt::format("bandwidth {} is not a valid allocation", a.bandwidth_hz));
      continue;
    }
    total += a.bandwidth_hz;
    if (a.admission != Admission::served) {
      if (a.satisfied) violate(a.id, "admission", "dropped user marked satisfied");
      continue;
    }
    if (!(a.bandwidth_hz >= u.min_bandwidth_hz * (1.0 - kAuditSlack))) {
      violate(a.id, "C2", fmt::format("beta {:.9g} < beta_min {:.9g}", a.bandwidth_hz, u.min_bandwidth_hz));
    }
    if (!(a.power_w > 0.0 && a.power_w <= cfg.max_power_w * (1.0 + kAuditSlack))) {
      violate(a.id, "C3", fmt::format("power {:.9g} outside (0, {:.9g}]", a.power_w, cfg.max_power_w));
    }
    if (!(a.compression > 0.0 && a.compression <= 1.0)) {
      note(a.id, "C5", fmt::format("compression {:.6g} outside (0, 1]", a.compression));
    }
    const double h = scenario.channel.gains_linear[i];
    const double snr_now = (a.power_w > 0.0 && a.bandwidth_hz > 0.0)
                               ? snr(a.power_w, h, a.bandwidth_hz, cfg.noise_psd_w_per_hz)
                               : 0.0;
    const double rate = a.bandwidth_hz > 0.0 ? transmission_rate(a.bandwidth_hz, snr_now) : 0.0;
    const double payload = u.raw_data_bits * (1.0 - std::min(1.0, a.compression));
    if (payload > 0.0 && !(rate > 0.0 && payload / rate <= u.delay_bound_s * (1.0 + kAuditSlack))) {
      note(a.id, "C6", fmt::format("delay {:.6g} s exceeds {:.6g} s", rate > 0 ? payload / rate : INFINITY,
                                   u.delay_bound_s));
    }
    if (a.similarity > u.xi_max * (1.0 + kAuditSlack)) {
      note(a.id, "C7", fmt::format("similarity {:.6f} above xi_max {:.6f}", a.similarity, u.xi_max));
    }
    if (a.satisfied) {
      if (!(snr_now >= u.snr_threshold_linear * (1.0 - kAuditSlack))) {
        violate(a.id, "C4", fmt::format("SNR {:.6g} below threshold {:.6g}", snr_now, u.snr_threshold_linear));
      }
      if (!(a.similarity >= u.xi_min * (1.0 - kAuditSlack))) {
        violate(a.id, "C7", fmt::format("similarity {:.6f} below xi_min {:.6f}", a.similarity, u.xi_min));
      }
    }
  }
  if (!(total <= cfg.total_bandwidth_hz * (1.0 + kAuditSlack))) {
    violate(0, "C1", fmt::format("total bandwidth {:.9g} exceeds M = {:.9g}", total, cfg.total_bandwidth_hz));
  }
  return rep;
}

}  // namespace semalloc
