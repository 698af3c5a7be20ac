#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semalloc/similarity.hpp"
#include "semalloc/sweep.hpp"

namespace semalloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // validation failure or runtime error
inline constexpr int kExitInfeasible = 2;  // scenario-level infeasibility
inline constexpr int kExitUsage = 64;

/// Bad command-line input (unknown method, malformed list, invalid grid).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GenTableArgs {
  std::string out_dir = ".";
  std::string out_file = "similarity_table.csv";
  GridSpec grid;
  SurrogateParams surrogate;
};

struct SolveArgs {
  std::optional<std::string> config;
  std::optional<std::string> table;
  int iter_max = 20;
  double delta = 1e-4;
  std::optional<double> penalty_exponent;
  double qoe_channel_width_hz = 1e6;
};

struct RunArgs {
  SolveArgs solve;
  std::string method = "proposed";  // a method name or "all"
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

struct SweepArgs {
  SolveArgs solve;
  std::string methods = "all";
  std::string bandwidths_mhz = "8:25:1";
  std::string seeds = "1-20";
  std::string out_dir = ".";
  bool serial = false;
};

struct ValidateArgs {
  std::string result;
  std::string scenario;
};

/// "8,10,12.5" or "lo:hi:step", in MHz; returned in Hz.
std::vector<double> parse_bandwidths_mhz(std::string_view text);
/// "1,2,7" or "1-20".
std::vector<std::uint64_t> parse_seeds(std::string_view text);
/// Comma-separated method names, or "all".
std::vector<Method> parse_methods(std::string_view text);

int cmd_gen_table(const GenTableArgs& args, std::ostream& out);
int cmd_run(const RunArgs& args, std::ostream& out);
int cmd_sweep(const SweepArgs& args, std::ostream& out);
int cmd_validate(const ValidateArgs& args, std::ostream& out);

/// Parses argv and dispatches; maps every failure to an exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semalloc::cli
