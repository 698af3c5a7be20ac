#include "semalloc/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include <fmt/format.h>

#include "semalloc/metrics.hpp"

namespace semalloc {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::proposed: return "proposed";
    case Method::strict: return "strict";
    case Method::classical: return "classical";
    case Method::qoe: return "qoe";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument(fmt::format("unknown method '{}'", name));
}

std::vector<Method> all_methods() { return {Method::proposed, Method::strict, Method::classical, Method::qoe}; }

AllocationResult run_method(Method method, const Scenario& scenario, const SimilarityTable& table,
                            const AllocatorOptions& options, const QoeOptions& qoe) {
  const auto& users = scenario.users;
  const auto& gains = scenario.channel.gains_linear;
  switch (method) {
    case Method::proposed: return allocate(scenario.config, users, gains, table, options);
    case Method::strict: return allocate_strict(scenario.config, users, gains, table, options);
    case Method::classical: return allocate_classical(scenario.config, users, gains, options);
    case Method::qoe: {
      QoeOptions q = qoe;
      q.channel_width_hz = std::min(q.channel_width_hz, scenario.config.total_bandwidth_hz);
      return allocate_qoe(scenario.config, users, gains, table, q);
    }
  }
  throw std::invalid_argument("unknown method");
}

SweepSpec SweepSpec::defaults() {
  SweepSpec s;
  for (int mhz = 8; mhz <= 25; ++mhz) s.bandwidths_hz.push_back(mhz * 1e6);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) s.seeds.push_back(seed);
  s.methods = all_methods();
  return s;
}

void SweepSpec::validate() const {
  if (bandwidths_hz.empty() || seeds.empty() || methods.empty()) {
    throw std::invalid_argument("sweep needs at least one bandwidth, seed and method");
  }
  for (double b : bandwidths_hz) {
    if (!(b > 0.0)) throw std::invalid_argument("sweep bandwidths must be positive");
  }
  base.validate();
  options.validate();
  qoe.validate();
}

Scenario SweepSpec::scenario(double bandwidth_hz, std::uint64_t seed) const {
  ScenarioConfig c = base;
  c.total_bandwidth_hz = bandwidth_hz;
  c.rng_seed = seed;
  return make_scenario(c);
}

namespace {

struct CellKey {
  std::size_t bandwidth;
  std::size_t seed;
  std::size_t method;
};

std::vector<CellKey> enumerate(const SweepSpec& spec) {
  std::vector<CellKey> keys;
  for (std::size_t m = 0; m < spec.methods.size(); ++m)
    for (std::size_t b = 0; b < spec.bandwidths_hz.size(); ++b)
      for (std::size_t s = 0; s < spec.seeds.size(); ++s) keys.push_back({b, s, m});
  return keys;
}

SweepCell run_cell(const SweepSpec& spec, const SimilarityTable& table, const CellKey& key) {
  SweepCell cell;
  auto& row = cell.row;
  row.bandwidth_hz = spec.bandwidths_hz[key.bandwidth];
  row.seed = spec.seeds[key.seed];
  const Method method = spec.methods[key.method];
  row.method = std::string(to_string(method));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Scenario sc = spec.scenario(row.bandwidth_hz, row.seed);
    cell.result = run_method(method, sc, table, spec.options, spec.qoe);
    row.satisfied_count = satisfied_count(cell.result);
    row.average_similarity = average_similarity(cell.result);
    row.objective_value = cell.result.objective_trace.empty() ? 0.0 : cell.result.objective_trace.back();
    if (cell.result.status != AllocationStatus::ok) row.status = "solver_failure";
  } catch (const std::exception& e) {
    row.status = fmt::format("error: {}", e.what());
    std::replace(row.status.begin(), row.status.end(), ',', ';');
    std::replace(row.status.begin(), row.status.end(), '\n', ' ');
  }
  row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

void sort_cells(std::vector<SweepCell>& cells) {
  std::stable_sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
    if (a.row.method != b.row.method) return a.row.method < b.row.method;
    if (a.row.bandwidth_hz != b.row.bandwidth_hz) return a.row.bandwidth_hz < b.row.bandwidth_hz;
    return a.row.seed < b.row.seed;
  });
}

std::vector<SweepRow> rows_of(const std::vector<SweepCell>& cells) {
  std::vector<SweepRow> rows;
  rows.reserve(cells.size());
  for (const auto& c : cells) rows.push_back(c.row);
  return rows;
}

}  // namespace

std::vector<SweepCell> run_sweep_cells_serial(const SweepSpec& spec, const SimilarityTable& table) {
  spec.validate();
  const auto keys = enumerate(spec);
  std::vector<SweepCell> cells;
  cells.reserve(keys.size());
  for (const auto& k : keys) cells.push_back(run_cell(spec, table, k));
  sort_cells(cells);
  return cells;
}

std::vector<SweepCell> run_sweep_cells(const SweepSpec& spec, const SimilarityTable& table) {
  spec.validate();
  const auto keys = enumerate(spec);
  std::vector<SweepCell> cells(keys.size());
  const auto n = static_cast<std::ptrdiff_t>(keys.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    cells[static_cast<std::size_t>(i)] = run_cell(spec, table, keys[static_cast<std::size_t>(i)]);
  }
  sort_cells(cells);
  return cells;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SimilarityTable& table) {
  return rows_of(run_sweep_cells(spec, table));
}

std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec, const SimilarityTable& table) {
  return rows_of(run_sweep_cells_serial(spec, table));
}

std::string fig1_csv(const std::vector<SweepRow>& rows) {
  std::string out = "bandwidth_hz,method,seed,satisfied_count,status\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.17g},{},{},{},{}\n", r.bandwidth_hz, r.method, r.seed, r.satisfied_count, r.status);
  }
  return out;
}

std::string fig3_csv(const std::vector<SweepRow>& rows) {
  std::string out = "bandwidth_hz,method,seed,avg_similarity,status\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.17g},{},{},{},{}\n", r.bandwidth_hz, r.method, r.seed,
                       r.average_similarity ? fmt::format("{:.6f}", *r.average_similarity) : "", r.status);
  }
  return out;
}

}  // namespace semalloc
