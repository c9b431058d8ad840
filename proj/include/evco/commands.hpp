#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "evco/admm.hpp"
#include "evco/scenario.hpp"

// Command implementations behind the CLI. Factored out of main() so the
// test suites can drive full runs in-process.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 selftest
// failure.

namespace evco::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitSelftest = 4;

int run_generate(const GenConfig& config, const std::filesystem::path& out_dir,
                 std::ostream& log);

struct SolveArgs {
  std::filesystem::path scenario_dir;
  std::filesystem::path out_dir;
  AdmmOptions options;
  double violation_threshold_mw = 0.1;
};

int run_solve(const SolveArgs& args, std::ostream& log);

struct BaselineArgs {
  std::filesystem::path scenario_dir;
  std::filesystem::path out_dir;
  double violation_threshold_mw = 0.1;
};

int run_baseline(const BaselineArgs& args, std::ostream& log);

int run_compare(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                const std::filesystem::path& out_path, std::ostream& log);

/// level is "quick" or "full". Prints one line per check; returns
/// kExitSelftest if any check fails.
int run_selftest(const std::string& level, int threads, std::ostream& log);

/// FNV-1a hash of the canonical key=value description, hex-encoded.
std::string config_hash(const GenConfig& config);

}  // namespace evco::cli
