#pragma once

// Command-line front end: eig, lyap, bench and selftest.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rprecon/solver.hpp"
#include "rprecon/types.hpp"

namespace rprecon::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kStalled = 3 };

struct RunConfig {
  std::string command; // eig | lyap | bench | selftest
  std::string problem = "eig"; // bench only: eig | lyap
  Index n = 500;
  Index r = 5;
  std::string metric;   // empty: command default
  std::string metric_b; // bench: second metric
  double omega = 0.0;
  std::string schedule; // empty: command default
  SolverConfig solver;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out;
  std::string matrix_a, matrix_b, matrix_c;
  int jobs = 1;
  double target = 0.0; // bench: 0 picks 1e-4 (eig) or 1e-3 (lyap)
  int instances = 20;  // selftest
};

struct ParseOutcome {
  std::optional<RunConfig> config;
  int exit_code = kOk;
};

/// Parses arguments (without the program name). Flags override config-file
/// values, which override built-in defaults.
ParseOutcome parse_args(const std::vector<std::string> &args, std::ostream &out,
                        std::ostream &err);

/// Effective configuration in the `key = value` format --config reads.
std::string to_key_values(const RunConfig &cfg);

int run_eig(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int run_lyap(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int run_bench(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int run_selftest(const RunConfig &cfg, std::ostream &out, std::ostream &err);

int run(const RunConfig &cfg, std::ostream &out, std::ostream &err);
int main_entry(const std::vector<std::string> &args, std::ostream &out,
               std::ostream &err);

/// Output file names used by eig and lyap.
std::filesystem::path trace_path(const RunConfig &cfg, std::uint64_t seed);
std::filesystem::path final_point_path(const RunConfig &cfg,
                                       std::uint64_t seed);
std::filesystem::path summary_path(const RunConfig &cfg);
std::filesystem::path sidecar_path(const RunConfig &cfg);

} // namespace rprecon::cli
