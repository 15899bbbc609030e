#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace insens::cli {

enum class Subcommand { Solve, VerifyBalance, Simulate, Experiment, Control };

enum ExitStatus : int {
  kPass = 0,
  kVerdictFail = 1,
  kConfigError = 2,
  kNumericalError = 3,
};

struct Command {
  Subcommand sub = Subcommand::Solve;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> events;
  std::optional<std::vector<int>> truncation;
  std::optional<double> threshold_tv;
  // "auto" solves analytically; anything else is an occupancy table path.
  std::string pi = "auto";
  double rho = 0.8;
  // Default report directory when --out is absent; empty means beside the config.
  std::filesystem::path report_dir;
};

// Largest relative partial-balance residual accepted by verify-balance.
inline constexpr double kBalanceTolerance = 1e-9;

// Runs one command. Human-readable output goes to `out`, diagnostics to
// `err`; reports are written to files. Returns an ExitStatus.
int dispatch(const Command& cmd, std::ostream& out, std::ostream& err);

// Parses argv (reading INSENS_REPORT_DIR) and dispatches.
int run(int argc, char** argv);

// Report location: --out if given, otherwise
// <dir>/<config stem>.<command>.<timestamp><extension>.
std::filesystem::path report_path(const Command& cmd, const std::string& extension);

}  // namespace insens::cli
