#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semalloc/allocator.hpp"
#include "semalloc/baselines.hpp"
#include "semalloc/scenario.hpp"
#include "semalloc/similarity.hpp"

namespace semalloc {

enum class Method { proposed, strict, classical, qoe };

std::string_view to_string(Method method);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

AllocationResult run_method(Method method, const Scenario& scenario, const SimilarityTable& table,
                            const AllocatorOptions& options = {}, const QoeOptions& qoe = {});

struct SweepSpec {
  std::vector<double> bandwidths_hz;  // default 8..25 MHz, 1 MHz step
  std::vector<std::uint64_t> seeds;   // default 1..20
  std::vector<Method> methods;        // default all four
  ScenarioConfig base;                // bandwidth and seed are overridden per cell
  AllocatorOptions options;
  QoeOptions qoe;

  static SweepSpec defaults();
  void validate() const;
  /// The scenario of one (bandwidth, seed) cell.
  Scenario scenario(double bandwidth_hz, std::uint64_t seed) const;
};

struct SweepRow {
  double bandwidth_hz = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  int satisfied_count = 0;
  std::optional<double> average_similarity;  // over satisfied users
  double objective_value = 0.0;
  double runtime_ms = 0.0;
  std::string status = "ok";
};

struct SweepCell {
  SweepRow row;
  AllocationResult result;
};

/// Every (bandwidth, seed, method) cell, sorted by (method, bandwidth, seed).
/// Cells run on an OpenMP worker pool; the output is identical to the serial
/// version apart from runtime_ms.
std::vector<SweepCell> run_sweep_cells(const SweepSpec& spec, const SimilarityTable& table);
std::vector<SweepCell> run_sweep_cells_serial(const SweepSpec& spec, const SimilarityTable& table);

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SimilarityTable& table);
std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec, const SimilarityTable& table);

/// bandwidth_hz,method,seed,satisfied_count,status
std::string fig1_csv(const std::vector<SweepRow>& rows);
/// bandwidth_hz,method,seed,avg_similarity,status (empty when no user is satisfied)
std::string fig3_csv(const std::vector<SweepRow>& rows);

}  // namespace semalloc
