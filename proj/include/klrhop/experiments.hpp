#pragma once

// Seeded, trial-averaged retrieval experiments. Each trial draws a fresh
// random pattern set, trains a network, corrupts one stored pattern and runs
// the requested update schemes from the same corrupted state.
//
// Every random stream is derived from (master_seed, n, P, trial, purpose),
// so trial k's result never depends on which other trials were run or on
// how trials were scheduled over threads.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "klrhop/dynamics.hpp"

namespace klrhop {

struct ExperimentConfig {
  std::size_t n = 50;
  double load = 3.0;  // P = round(load * n)
  double gamma = 0.1;
  TrainConfig train;
  double noise_fraction = 0.2;
  int trials = 50;
  std::vector<UpdateScheme> schemes{UpdateScheme::Synchronous, UpdateScheme::Asynchronous};
  int max_epochs = 100;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0: OpenMP default
  bool check_cache = false;

  std::size_t patterns() const;
  void validate() const;
};

/// One retrieval run: one trial under one scheme.
struct TrialResult {
  int trial = 0;
  UpdateScheme scheme = UpdateScheme::Synchronous;
  std::size_t target_index = 0;
  std::size_t initial_hamming = 0;
  bool success = false;  // final state equals the target exactly
  std::size_t total_events = 0;
  std::vector<double> overlaps;
  std::vector<double> energies;
  int epochs_run = 0;
  Convergence outcome = Convergence::None;
};

struct EpochStats {
  double overlap_mean = 0.0;
  double overlap_std = 0.0;
  double energy_mean = 0.0;
};

struct SchemeAggregate {
  UpdateScheme scheme = UpdateScheme::Synchronous;
  std::vector<EpochStats> epochs;  // epoch 0 (initial state) .. horizon
  std::size_t trials = 0;
  std::size_t successes = 0;
  double accuracy = 0.0;
  double accuracy_std = 0.0;
  double events_mean = 0.0;
  double events_std = 0.0;
  double initial_hamming_mean = 0.0;
  double initial_hamming_std = 0.0;
};

struct AggregateResult {
  ExperimentConfig config;
  std::vector<SchemeAggregate> schemes;
  std::vector<TrialResult> trials;  // ordered by (trial, scheme)

  const SchemeAggregate& at(UpdateScheme scheme) const;
};

class TrialError : public std::runtime_error {
 public:
  TrialError(int trial, const std::string& what);
  int trial() const { return trial_; }

 private:
  int trial_;
};

/// splitmix64-style mixing of a seed with a list of tags.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

/// Flips exactly round(fraction * N) distinct positions chosen uniformly.
std::pair<BipolarVector, std::size_t> inject_noise(const BipolarVector& pattern, double fraction,
                                                   std::mt19937_64& rng);

/// Value of a trace at `epoch`, extending a finished run past its last
/// epoch: fixed points repeat, two-cycles alternate.
double trace_value_at(const std::vector<double>& values, Convergence outcome, int epoch);

/// Runs cfg.trials trials of one condition and aggregates per scheme.
AggregateResult run_condition(const ExperimentConfig& cfg);

/// Overlap trajectories under both schemes from identical corrupted states.
AggregateResult run_dynamics_experiment(const ExperimentConfig& cfg);

struct CapacityCell {
  std::size_t n = 0;
  double load = 0.0;
  AggregateResult result;
};

/// Recall accuracy over a (size, load) grid; loads must be ascending.
std::vector<CapacityCell> run_capacity_experiment(const ExperimentConfig& base,
                                                  const std::vector<std::size_t>& sizes,
                                                  const std::vector<double>& loads);

struct EfficiencyPoint {
  double noise_fraction = 0.0;
  SchemeAggregate stats;
};

struct EfficiencyResult {
  ExperimentConfig config;
  std::vector<EfficiencyPoint> points;
  std::vector<TrialResult> trials;  // ordered by (noise index, trial)
};

/// Asynchronous event counts versus noise. Trial k uses the same trained
/// network at every noise level; only the corruption differs.
EfficiencyResult run_efficiency_experiment(const ExperimentConfig& base,
                                           const std::vector<double>& noise_grid);

/// Default capacity load grid.
std::vector<double> default_load_grid();

/// "a:b:step" inclusive grid, e.g. "0.05:0.40:0.05".
std::vector<double> parse_grid(const std::string& spec);

}  // namespace klrhop
