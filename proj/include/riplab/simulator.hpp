#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "riplab/generator.hpp"
#include "riplab/model.hpp"

namespace riplab {

// Independent mt19937_64 stream for one trial, keyed by (seed, trial).
std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial);

struct SimulationOptions {
  // Jumps allowed per trial before HorizonExceeded.
  std::uint64_t event_cap = 10'000'000'000ULL;
  unsigned workers = 1;
};

struct CondensateJump {
  std::size_t trial = 0;
  Site from = 0;
  Site to = 0;
  // Trace clock at the jump divided by θ_N.
  double time = 0.0;
};

struct TrajectorySummary {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<double> hitting_times;
  std::vector<std::uint64_t> events;
  std::vector<CondensateJump> condensate_jumps;
  // Per trial: time spent in E* and in Δ; their sum is the real clock.
  std::vector<double> trace_time;
  std::vector<double> delta_time;
  double wall_seconds = 0.0;

  double mean_hitting_time() const;
  double standard_error() const;
  // Δ time over real time, pooled across trials.
  double delta_fraction() const;
};

// Exact jump chain from start until the first entry into B, per trial.
// Throws BadSets when start lies in B, BadParameter for zero trials and
// HorizonExceeded when a trial reaches the event cap.
TrajectorySummary simulate_hitting(const SparseGenerator& gen, Index start, const std::vector<Index>& b,
                                   std::size_t trials, std::uint64_t seed,
                                   const SimulationOptions& options = {});

// Runs the full process from E^start_site until the time spent in
// E* = ∪_{x∈S*} E^x reaches horizon·θ. Jumps of the condensate label are
// recorded on the trace clock in units of θ.
TrajectorySummary simulate_condensate_path(const SparseGenerator& gen, const SiteKernel& kernel,
                                           Site start_site, double horizon, double theta,
                                           std::uint64_t seed, std::size_t trials = 1,
                                           const SimulationOptions& options = {});

// Time spent in each state by one trajectory of length horizon.
std::vector<double> simulate_occupation(const SparseGenerator& gen, Index start, double horizon,
                                        std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace riplab
