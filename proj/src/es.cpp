#include "xes/es.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace xes::es {

double ESConfig::effective_tau() const {
  if (tau) return *tau;
  return 1.0 / std::sqrt(2.0 * static_cast<double>(dimension));
}

std::vector<double> ESConfig::start_point() const {
  if (!initial_point.empty()) return initial_point;
  return std::vector<double>(static_cast<std::size_t>(dimension), 1.0);
}

void ESConfig::validate() const {
  if (mu < 1) throw std::invalid_argument("ESConfig: mu must be >= 1");
  if (lambda < mu) throw std::invalid_argument("ESConfig: lambda must be >= mu");
  if (dimension < 1) throw std::invalid_argument("ESConfig: dimension must be >= 1");
  if (tau && *tau < 0.0) throw std::invalid_argument("ESConfig: tau must be nonnegative");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("ESConfig: sigma0 must be positive");
  if (!initial_point.empty() && initial_point.size() != static_cast<std::size_t>(dimension)) {
    throw std::invalid_argument("ESConfig: initial_point length does not match dimension");
  }
  if (max_iterations < 1) throw std::invalid_argument("ESConfig: max_iterations must be >= 1");
  if (fitness_threshold < 0.0) {
    throw std::invalid_argument("ESConfig: fitness_threshold must be nonnegative");
  }
  if (stagnation_window < 1) {
    throw std::invalid_argument("ESConfig: stagnation_window must be >= 1");
  }
  if (stagnation_epsilon < 0.0) {
    throw std::invalid_argument("ESConfig: stagnation_epsilon must be nonnegative");
  }
  if (log_interval < 1) throw std::invalid_argument("ESConfig: log_interval must be >= 1");
}

Individual mutate(const Individual& parent, double tau, Rng& rng,
                  const bench::ObjectiveFunction& objective) {
  Individual child;
  child.sigma = parent.sigma * std::exp(tau * rng.normal());
  child.x.resize(parent.x.size());
  for (std::size_t i = 0; i < parent.x.size(); ++i) {
    child.x[i] = parent.x[i] + child.sigma * rng.normal();
  }
  child.fitness = objective.evaluate(child.x);
  return child;
}

std::vector<Individual> select_plus(const std::vector<Individual>& parents,
                                    const std::vector<Individual>& offspring, int mu) {
  if (mu < 1) throw std::invalid_argument("select_plus: mu must be >= 1");
  if (parents.size() + offspring.size() < static_cast<std::size_t>(mu)) {
    throw std::invalid_argument("select_plus: union smaller than mu");
  }
  struct Ref {
    const Individual* ind;
    int group;  // offspring 0, parents 1: offspring win fitness ties
    std::size_t index;
  };
  std::vector<Ref> refs;
  refs.reserve(parents.size() + offspring.size());
  for (std::size_t i = 0; i < offspring.size(); ++i) refs.push_back({&offspring[i], 0, i});
  for (std::size_t i = 0; i < parents.size(); ++i) refs.push_back({&parents[i], 1, i});
  std::sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
    return std::tie(a.ind->fitness, a.group, a.index) < std::tie(b.ind->fitness, b.group, b.index);
  });
  std::vector<Individual> selected;
  selected.reserve(static_cast<std::size_t>(mu));
  for (int i = 0; i < mu; ++i) selected.push_back(*refs[static_cast<std::size_t>(i)].ind);
  return selected;
}

bool detect_stagnation(long iterations_since_improvement, long window) {
  if (iterations_since_improvement < 0 || window < 0) {
    throw std::invalid_argument("detect_stagnation: arguments must be nonnegative");
  }
  return iterations_since_improvement >= window;
}

namespace {

// Shared by initialization and restart: individuals around the anchor point
// (or uniform in the box), all with step size sigma0, sorted by fitness.
std::vector<Individual> make_population(const ESConfig& config,
                                        const bench::ObjectiveFunction& objective, Rng& rng,
                                        bool uniform) {
  const std::vector<double> anchor = config.start_point();
  std::vector<Individual> population(static_cast<std::size_t>(config.mu));
  for (Individual& ind : population) {
    ind.x.resize(static_cast<std::size_t>(config.dimension));
    for (std::size_t i = 0; i < ind.x.size(); ++i) {
      ind.x[i] = uniform ? rng.uniform(objective.lower_bound, objective.upper_bound)
                         : anchor[i] + config.sigma0 * rng.normal();
    }
    ind.sigma = config.sigma0;
    ind.fitness = objective.evaluate(ind.x);
  }
  std::stable_sort(population.begin(), population.end(),
                   [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });
  return population;
}

// One generation: lambda offspring from uniformly chosen parents, then plus
// selection and the improvement bookkeeping.
void step(RunState& state, const ESConfig& config, const bench::ObjectiveFunction& objective) {
  const double tau = config.effective_tau();
  std::vector<Individual> offspring;
  offspring.reserve(static_cast<std::size_t>(config.lambda));
  for (int k = 0; k < config.lambda; ++k) {
    const Individual& parent = state.population[state.rng.pick_index(state.population.size())];
    offspring.push_back(mutate(parent, tau, state.rng, objective));
  }
  state.population = select_plus(state.population, offspring, config.mu);
  ++state.iteration;

  const double population_best = state.population.front().fitness;
  state.best_so_far = std::min(state.best_so_far, population_best);
  if (population_best < state.best_in_segment - config.stagnation_epsilon) {
    state.best_in_segment = population_best;
    state.iterations_since_improvement = 0;
  } else {
    ++state.iterations_since_improvement;
  }
}

}  // namespace

RunState init_state(const ESConfig& config, const bench::ObjectiveFunction& objective) {
  RunState state;
  state.rng = Rng(config.seed);
  state.population = make_population(config, objective, state.rng, false);
  state.best_so_far = state.population.front().fitness;
  state.best_in_segment = state.best_so_far;
  return state;
}

void restart(RunState& state, const ESConfig& config, const bench::ObjectiveFunction& objective) {
  state.population = make_population(config, objective, state.rng, config.uniform_restart);
  const double population_best = state.population.front().fitness;
  state.best_so_far = std::min(state.best_so_far, population_best);
  state.best_in_segment = population_best;
  state.iterations_since_improvement = 0;
  ++state.restart_count;
}

RunResult run(const ESConfig& config, const bench::ObjectiveFunction& objective,
              const LogSink& sink, std::optional<long> iteration_cap) {
  config.validate();
  if (objective.dimension != config.dimension) {
    throw std::invalid_argument("run: objective dimension does not match config");
  }
  if (!objective.evaluate) throw std::invalid_argument("run: objective has no evaluate function");
  if (iteration_cap && *iteration_cap < 1) {
    throw std::invalid_argument("run: iteration_cap must be positive");
  }

  RunState state = init_state(config, objective);
  const long cap = iteration_cap.value_or(std::numeric_limits<long>::max());

  StopReason reason;
  for (;;) {
    if (state.best_so_far <= config.fitness_threshold) {
      reason = StopReason::FitnessThreshold;
      break;
    }
    if (state.iteration >= cap) {
      reason = StopReason::IterationCap;
      break;
    }
    if (state.iteration >= config.max_iterations) {
      reason = StopReason::MaxIterations;
      break;
    }

    step(state, config, objective);

    if (state.iteration % config.log_interval == 0 && sink) {
      sink(runlog::IterationRecord{state.iteration, state.population.front().fitness,
                                   state.population.front().sigma});
    }

    // Restart only when the run is going to continue.
    const bool stopping = state.best_so_far <= config.fitness_threshold ||
                          state.iteration >= cap || state.iteration >= config.max_iterations;
    if (!stopping && detect_stagnation(state.iterations_since_improvement,
                                       config.stagnation_window)) {
      if (sink) sink(runlog::RestartRecord{state.iteration});
      restart(state, config, objective);
    }
  }

  return {state.best_so_far, state.iteration, state.restart_count, reason};
}

}  // namespace xes::es
