#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "riplab/report_io.hpp"
#include "riplab/scenario.hpp"

namespace riplab {

enum class OutputFormat { Csv, Json, Svg };

struct CommandOptions {
  std::optional<int> scale;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  unsigned workers = 1;
};

// Worker count from RIPLAB_WORKERS, or 1.
unsigned default_workers();

struct Artifact {
  std::string name;
  std::string content;
};

struct CommandResult {
  int exit_code = 0;
  // Primary output in the requested format.
  std::string output;
  // Extra files for --out-dir, such as per-trial samples.
  std::vector<Artifact> extras;
};

// Builds the kernel and sweep from the scenario file and describes S*, m*
// and the chain classification. Exit code 1 on any validation error.
CommandResult cmd_validate(const std::filesystem::path& scenario_path);

// Sweep tables, one row per (N, d_N) in scenario order. A point that fails
// gets a row whose status names the error, and the exit code becomes 1.
Table capacity_table(const Scenario& scenario, const CommandOptions& options, int& exit_code);
Table hitting_table(const Scenario& scenario, const CommandOptions& options, int& exit_code);
Table simulate_table(const Scenario& scenario, const CommandOptions& options, int& exit_code,
                     std::vector<Artifact>* per_trial = nullptr);
Table predict_table(const Scenario& scenario, const CommandOptions& options, int& exit_code);

CommandResult cmd_capacity(const Scenario& scenario, const CommandOptions& options, OutputFormat format);
CommandResult cmd_hitting(const Scenario& scenario, const CommandOptions& options, OutputFormat format);
CommandResult cmd_simulate(const Scenario& scenario, const CommandOptions& options, OutputFormat format);
CommandResult cmd_predict(const Scenario& scenario, const CommandOptions& options, OutputFormat format);

struct CriterionOutcome {
  std::string name;
  bool passed = false;
  std::string measured;
};

// The verification battery of a time-scale on the scenario's sweep. Throws
// ScaleNotApplicable when the kernel does not have the scale's shape.
std::vector<CriterionOutcome> verify_scale(const Scenario& scenario, int scale, const CommandOptions& options);

CommandResult cmd_verify(const Scenario& scenario, int scale, const CommandOptions& options, OutputFormat format);

}  // namespace riplab
