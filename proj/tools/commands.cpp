#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "semalloc/metrics.hpp"
#include "semalloc/report.hpp"

namespace semalloc::cli {
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError(fmt::format("{}: '{}' is not a number", what, s));
  }
  return v;
}

std::uint64_t to_seed(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(fmt::format("--seeds: '{}' is not a non-negative integer", s));
  }
  return v;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  f << content;
  if (!f) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", dir, ec.message()));
  return p;
}

SimilarityTable resolve_table(const SolveArgs& args) {
  return args.table ? load_table_file(*args.table) : default_table();
}

AllocatorOptions allocator_options(const SolveArgs& args) {
  AllocatorOptions o;
  o.max_iterations = args.iter_max;
  o.convergence_threshold = args.delta;
  o.penalty_exponent = args.penalty_exponent;
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return o;
}

QoeOptions qoe_options(const SolveArgs& args) {
  QoeOptions q;
  q.channel_width_hz = args.qoe_channel_width_hz;
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return q;
}

bool infeasible(const AllocationResult& r) {
  if (r.status != AllocationStatus::ok) return true;
  return !r.per_user.empty() && std::none_of(r.per_user.begin(), r.per_user.end(), [](const auto& u) {
    return u.admission == Admission::served;
  });
}

}  // namespace

std::vector<double> parse_bandwidths_mhz(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("--bandwidths: expected lo:hi:step");
    const double lo = to_double(parts[0], "--bandwidths");
    const double hi = to_double(parts[1], "--bandwidths");
    const double step = to_double(parts[2], "--bandwidths");
    if (!(step > 0.0) || hi < lo) throw UsageError("--bandwidths: need lo <= hi and step > 0");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back((lo + static_cast<double>(k) * step) * 1e6);
  } else {
    for (auto part : split(text, ',')) out.push_back(to_double(part, "--bandwidths") * 1e6);
  }
  for (double b : out) {
    if (!(b > 0.0)) throw UsageError("--bandwidths: values must be positive");
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (auto part : split(text, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(to_seed(part));
      continue;
    }
    const auto lo = to_seed(trim(part.substr(0, dash)));
    const auto hi = to_seed(trim(part.substr(dash + 1)));
    if (hi < lo) throw UsageError(fmt::format("--seeds: empty range '{}'", part));
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

std::vector<Method> parse_methods(std::string_view text) {
  if (trim(text) == "all") return all_methods();
  std::vector<Method> out;
  for (auto part : split(text, ',')) {
    try {
      const Method m = parse_method(part);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

int cmd_gen_table(const GenTableArgs& args, std::ostream& out) {
  std::vector<double> snr_grid, o_grid;
  try {
    args.surrogate.validate();
    snr_grid = args.grid.snr_grid();
    o_grid = args.grid.compression_grid();
  } catch (const TableError& e) {
    throw UsageError(e.what());
  }
  const auto table = generate_table(snr_grid, o_grid, args.surrogate);
  const auto path = prepare_dir(args.out_dir) / args.out_file;
  write_file(path, save_table(table));
  out << fmt::format("wrote {} ({} SNR rows x {} compression columns)\n", path.string(), table.rows(),
                     table.cols());
  return kExitOk;
}

int cmd_run(const RunArgs& args, std::ostream& out) {
  const auto methods = parse_methods(args.method);
  const auto options = allocator_options(args.solve);
  const auto qoe = qoe_options(args.solve);
  Scenario scenario;
  if (args.solve.config) {
    scenario = load_scenario_file(*args.solve.config, args.seed);
  } else {
    ScenarioConfig cfg;
    if (args.seed) cfg.rng_seed = *args.seed;
    scenario = make_scenario(cfg);
  }
  const auto table = resolve_table(args.solve);
  const auto dir = prepare_dir(args.out_dir);
  write_file(dir / "scenario.txt", save_scenario(scenario));

  int code = kExitOk;
  std::vector<UserReportRow> fig2;
  for (Method m : methods) {
    const auto result = run_method(m, scenario, table, options, qoe);
    const std::string name(to_string(m));
    write_file(dir / fmt::format("report_{}.txt", name), result_report(result, scenario));
    write_file(dir / fmt::format("result_{}.csv", name), result_csv(result));
    const auto rows = per_user_report(result, scenario.users);
    fig2.insert(fig2.end(), rows.begin(), rows.end());

    const auto avg = average_similarity(result);
    out << fmt::format("{:<9} satisfied {}/{}  avg similarity {}  iterations {}{}\n", name,
                       satisfied_count(result), result.per_user.size(),
                       avg ? fmt::format("{:.4f}", *avg) : std::string("-"), result.iterations_used,
                       result.status == AllocationStatus::ok ? "" : "  FAILED: " + result.failure);
    if (infeasible(result)) code = kExitInfeasible;
  }
  write_file(dir / "fig2.csv", per_user_csv(fig2));
  return code;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out) {
  SweepSpec spec = SweepSpec::defaults();
  spec.bandwidths_hz = parse_bandwidths_mhz(args.bandwidths_mhz);
  spec.seeds = parse_seeds(args.seeds);
  spec.methods = parse_methods(args.methods);
  spec.options = allocator_options(args.solve);
  spec.qoe = qoe_options(args.solve);
  if (args.solve.config) spec.base = load_scenario_file(*args.solve.config).config;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto table = resolve_table(args.solve);
  const auto rows = args.serial ? run_sweep_serial(spec, table) : run_sweep(spec, table);
  const auto dir = prepare_dir(args.out_dir);
  write_file(dir / "fig1.csv", fig1_csv(rows));
  write_file(dir / "fig3.csv", fig3_csv(rows));
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status != "ok"; });
  out << fmt::format("{} rows ({} failed) -> {}, {}\n", rows.size(), failed, (dir / "fig1.csv").string(),
                     (dir / "fig3.csv").string());
  return kExitOk;
}

int cmd_validate(const ValidateArgs& args, std::ostream& out) {
  std::ifstream f(args.result, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot open result file '{}'", args.result));
  std::stringstream buf;
  buf << f.rdbuf();
  const auto result = parse_result_csv(buf.str());
  const auto scenario = load_scenario_file(args.scenario);
  const auto report = audit_result(result, scenario);
  out << report.to_text();
  return report.ok() ? kExitOk : kExitFailure;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic-aware uplink resource allocation"};
  app.require_subcommand(1);

  auto add_solve = [](CLI::App* cmd, SolveArgs& s) {
    cmd->add_option("--config", s.config, "Scenario file (defaults: built-in parameters)");
    cmd->add_option("--table", s.table, "Similarity table CSV (default: surrogate table)");
    cmd->add_option("--iter-max", s.iter_max, "Maximum alternation iterations");
    cmd->add_option("--delta", s.delta, "Relative objective change that stops the alternation");
    cmd->add_option("--a", s.penalty_exponent, "Penalty exponent of the objective");
    cmd->add_option("--qoe-width", s.qoe_channel_width_hz, "Channel width of the QoE comparator (Hz)");
  };

  GenTableArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-table", "Write the surrogate similarity table");
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory");
  gen_cmd->add_option("--out", gen.out_file, "Output file name");
  gen_cmd->add_option("--snr-min", gen.grid.snr_min_db, "Lowest SNR row (dB)");
  gen_cmd->add_option("--snr-max", gen.grid.snr_max_db, "Highest SNR row (dB)");
  gen_cmd->add_option("--snr-step", gen.grid.snr_step_db, "SNR grid step (dB)");
  gen_cmd->add_option("--o-min", gen.grid.o_min, "Smallest compression rate (> 0)");
  gen_cmd->add_option("--o-max", gen.grid.o_max, "Largest compression rate (<= 1)");
  gen_cmd->add_option("--o-step", gen.grid.o_step, "Compression grid step");
  gen_cmd->add_option("--p", gen.surrogate.compression_power, "Surrogate compression power");
  gen_cmd->add_option("--x0", gen.surrogate.snr_midpoint_db, "Surrogate SNR midpoint (dB)");
  gen_cmd->add_option("--w", gen.surrogate.snr_scale_db, "Surrogate SNR scale (dB)");
  gen_cmd->add_option("--floor", gen.surrogate.floor, "Surrogate similarity floor");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Allocate one scenario with one or all methods");
  add_solve(run_cmd, run.solve);
  run_cmd->add_option("--method", run.method, "proposed, strict, classical, qoe or all");
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Bandwidth sweep over seeds and methods");
  add_solve(sweep_cmd, sweep.solve);
  sweep_cmd->add_option("--method", sweep.methods, "Comma-separated methods or all");
  sweep_cmd->add_option("--bandwidths", sweep.bandwidths_mhz, "MHz: list 8,10,12 or range lo:hi:step");
  sweep_cmd->add_option("--seeds", sweep.seeds, "List 1,2,3 or range 1-20");
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory");
  sweep_cmd->add_flag("--serial", sweep.serial, "Run cells on one thread");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Audit a result CSV against its scenario");
  val_cmd->add_option("--result", val.result, "Result CSV written by run")->required();
  val_cmd->add_option("--scenario", val.scenario, "scenario.txt written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_table(gen, out);
    if (run_cmd->parsed()) return cmd_run(run, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out);
    return cmd_validate(val, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace semalloc::cli
