#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace refresh::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDomain = 3,  // domain, infeasibility and unreachable-target errors
  kNumeric = 4,
};

// Everything a subcommand needs, after defaults, --config and explicit flags
// have been merged (flags win).
struct RunConfig {
  std::string command;
  double alpha = 2.7737e-7;
  double beta = 1.9508;
  int bits = 8;
  double delta = 0.064;
  std::optional<double> budget;
  std::optional<double> target_mse;
  std::optional<double> target_psnr;
  std::vector<int> gammas;
  std::optional<int> z_cap;
  std::string budgets = "1:125:200";
  std::string measurements;
  std::string input;
  std::string output;
  std::string format;
};

// Parses a budget grid: `min:max:count` (log-spaced; a trailing "-log"
// on count is accepted) or a path to a file with one budget per line.
std::vector<double> parse_budgets(const std::string& grid);

// Runs one subcommand. `args` excludes the program name. Machine-readable
// output goes to `out` (or --output), the human summary to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace refresh::cli
