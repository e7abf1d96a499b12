#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tglab/config.hpp"
#include "tglab/error.hpp"

namespace tglab {

enum class Command { Calibrate, EfsqSurface, FidelityHist, Compare, Grow, Verify };

const std::vector<std::string>& command_names();
Command parse_command(const std::string& name);  // Config error if unknown

// 1 = config, 2 = numeric / graph / exhausted, 3 = verification
int exit_code_for(ErrorKind kind);

struct CommandOutput {
  std::vector<std::string> files;  // written, relative to the output directory
  std::string report;              // human-readable summary for stdout
  int exit_code = 0;
};

// Runs one command and writes its CSV files into out_dir (created if needed).
// Module errors propagate as exceptions; the tool maps them with exit_code_for.
CommandOutput run_command(Command cmd, const ExperimentConfig& cfg, const std::string& out_dir);

// CSV bodies, exposed so callers can check them without touching the disk.
std::string efsq_surface_csv(const ExperimentConfig& cfg);
std::string fidelity_hist_csv(const ExperimentConfig& cfg);
std::string compare_csv(const ExperimentConfig& cfg);

struct OracleCheck {
  std::string name;
  int cases = 0;
  int skipped = 0;  // random configurations the rewrite rules refuse
  double max_discrepancy = 0.0;
};

struct OracleSuiteReport {
  std::vector<OracleCheck> checks;
  double max_discrepancy() const;
  std::string csv() const;
};

// Graph rewrites and procedures against dense state vectors on random inputs.
OracleSuiteReport run_oracle_suite(int cases, std::uint64_t seed);

}  // namespace tglab
