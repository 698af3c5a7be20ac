#include <doctest.h>

#include <algorithm>
#include <tuple>

#include "semalloc/report.hpp"
#include "semalloc/sweep.hpp"

using namespace semalloc;

namespace {

SweepSpec small_spec() {
  auto spec = SweepSpec::defaults();
  spec.bandwidths_hz = {8e6, 14e6, 25e6};
  spec.seeds = {1, 2, 3};
  return spec;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK(all_methods().size() == 4);
  CHECK_THROWS_AS(parse_method("unknown"), std::invalid_argument);
}

TEST_CASE("sweep spec") {
  const auto spec = SweepSpec::defaults();
  CHECK(spec.bandwidths_hz.size() == 18);
  CHECK(spec.bandwidths_hz.front() == 8e6);
  CHECK(spec.bandwidths_hz.back() == 25e6);
  CHECK(spec.seeds.size() == 20);
  CHECK(spec.methods.size() == 4);
  CHECK_NOTHROW(spec.validate());

  auto bad = spec;
  bad.seeds.clear();
  CHECK_THROWS(bad.validate());
  bad = spec;
  bad.bandwidths_hz.push_back(-1.0);
  CHECK_THROWS(bad.validate());

  const auto s = spec.scenario(12e6, 4);
  CHECK(s.config.total_bandwidth_hz == 12e6);
  CHECK(s.config.rng_seed == 4);
  // Bandwidth does not change who the users are.
  CHECK(spec.scenario(20e6, 4).users == s.users);
}

TEST_CASE("sweep rows") {
  const auto spec = small_spec();
  const auto table = default_table();
  const auto rows = run_sweep(spec, table);
  CHECK(rows.size() == spec.bandwidths_hz.size() * spec.seeds.size() * spec.methods.size());
  CHECK(std::is_sorted(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.method, a.bandwidth_hz, a.seed) < std::tie(b.method, b.bandwidth_hz, b.seed);
  }));
  for (const auto& r : rows) CHECK(r.status == "ok");

  const auto f1 = fig1_csv(rows);
  const auto f3 = fig3_csv(rows);
  CHECK(f1.rfind("bandwidth_hz,method,seed,satisfied_count,status\n", 0) == 0);
  CHECK(f3.rfind("bandwidth_hz,method,seed,avg_similarity,status\n", 0) == 0);
  CHECK(std::count(f1.begin(), f1.end(), '\n') == static_cast<long>(rows.size()) + 1);
}

TEST_CASE("parallel sweep matches the serial reference") {
  const auto spec = small_spec();
  const auto table = default_table();
  const auto par = run_sweep_cells(spec, table);
  const auto ser = run_sweep_cells_serial(spec, table);
  REQUIRE(par.size() == ser.size());
  for (std::size_t k = 0; k < par.size(); ++k) {
    CHECK(par[k].row.method == ser[k].row.method);
    CHECK(par[k].row.bandwidth_hz == ser[k].row.bandwidth_hz);
    CHECK(par[k].row.seed == ser[k].row.seed);
    CHECK(result_csv(par[k].result) == result_csv(ser[k].result));
    CHECK(par[k].result.objective_trace == ser[k].result.objective_trace);
  }
  std::vector<SweepRow> pr, sr;
  for (const auto& c : par) pr.push_back(c.row);
  for (const auto& c : ser) sr.push_back(c.row);
  CHECK(fig1_csv(pr) == fig1_csv(sr));
  CHECK(fig3_csv(pr) == fig3_csv(sr));
}

TEST_CASE("every sweep result passes the audit") {
  const auto spec = small_spec();
  const auto table = default_table();
  for (const auto& cell : run_sweep_cells(spec, table)) {
    const auto rep = audit_result(cell.result, spec.scenario(cell.row.bandwidth_hz, cell.row.seed));
    CHECK_MESSAGE(rep.ok(), cell.row.method, " ", cell.row.bandwidth_hz, " ", cell.row.seed, "\n", rep.to_text());
  }
}
