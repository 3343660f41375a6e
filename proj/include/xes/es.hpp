#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "xes/benchmarks.hpp"
#include "xes/rng.hpp"
#include "xes/run_log.hpp"

namespace xes::es {

/// Settings for a sigma-self-adaptive (mu + lambda)-ES run. Defaults match
/// the workbench protocol: a 10-dimensional problem started at (1, ..., 1),
/// at most 10,000 iterations, 1e-5 fitness threshold, a log record every 30
/// iterations, and a restart after 120 iterations without improvement.
struct ESConfig {
  int mu = 5;
  int lambda = 35;
  int dimension = 10;
  std::optional<double> tau;          // self-adaptation rate; default 1/sqrt(2 n)
  double sigma0 = 0.5;                // initial step size
  std::vector<double> initial_point;  // empty means (1, ..., 1)
  long max_iterations = 10000;
  double fitness_threshold = 1e-5;
  int stagnation_window = 120;        // iterations without improvement before a restart
  double stagnation_epsilon = 1e-8;   // minimum decrease that counts as improvement
  int log_interval = 30;
  std::uint64_t seed = 0;
  bool uniform_restart = false;       // restart uniformly in the box instead of around initial_point

  double effective_tau() const;
  std::vector<double> start_point() const;
  void validate() const;  // throws std::invalid_argument
};

/// One candidate: solution vector, its own mutation step size, and the
/// cached objective value for the vector.
struct Individual {
  std::vector<double> x;
  double sigma = 0.0;
  double fitness = 0.0;
};

enum class StopReason { MaxIterations, FitnessThreshold, IterationCap };

struct RunResult {
  double best_so_far = 0.0;
  long total_iterations = 0;
  int restart_count = 0;
  StopReason terminated_by = StopReason::MaxIterations;
};

struct RunState {
  long iteration = 0;
  std::vector<Individual> population;  // sorted by fitness ascending
  double best_so_far = 0.0;
  double best_in_segment = 0.0;  // stagnation reference; moves only on super-epsilon improvement
  long iterations_since_improvement = 0;
  int restart_count = 0;
  Rng rng;
};

using LogSink = std::function<void(const runlog::LogEntry&)>;

/// Log-normal self-adaptation: sigma' = sigma * exp(tau * N(0,1)), then
/// x' = x + sigma' * N(0, I). The child is evaluated before returning.
Individual mutate(const Individual& parent, double tau, Rng& rng,
                  const bench::ObjectiveFunction& objective);

/// Plus selection: the mu lowest-fitness individuals of parents U offspring,
/// ascending. Fitness ties prefer offspring, then the earlier list index.
std::vector<Individual> select_plus(const std::vector<Individual>& parents,
                                    const std::vector<Individual>& offspring, int mu);

bool detect_stagnation(long iterations_since_improvement, long window);

/// Fresh state: population sampled around the start point with sigma0,
/// counters zeroed, best trackers set to the initial population best.
RunState init_state(const ESConfig& config, const bench::ObjectiveFunction& objective);

/// Reinitializes population and step sizes in place. Keeps the iteration
/// counter and never loses best_so_far; increments restart_count.
void restart(RunState& state, const ESConfig& config, const bench::ObjectiveFunction& objective);

/// Full loop: per iteration lambda offspring, plus selection, stagnation
/// bookkeeping, an IterationRecord every log_interval iterations and a
/// RestartRecord (followed by a restart) when stagnation fires. Stops at the
/// fitness threshold, max_iterations, or iteration_cap. Deterministic in
/// (config, objective, iteration_cap).
RunResult run(const ESConfig& config, const bench::ObjectiveFunction& objective,
              const LogSink& sink, std::optional<long> iteration_cap = std::nullopt);

}  // namespace xes::es
