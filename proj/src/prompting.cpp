#include "xes/prompting.hpp"

#include <stdexcept>

namespace xes::prompt {

namespace {

// Instruction texts for the two base strategies. The few-shot variants reuse
// them; only the zero-shot row carries the "Concentrate on ..." sentence.
constexpr std::string_view kZeroShotInstruction =
    "Provide a summary of insights derived from the log file below, delimited by triple "
    "backticks, representing a minimization problem. Concentrate on best, worst, and mean "
    "fitness values, as well as convergence behavior and local optima. Ensure accurate "
    "identification of the best and worst fitness values and calculate the mean fitness over "
    "all iterations. Remember, in this context, the lowest value denotes the best fitness, "
    "while the highest value represents the worst fitness.";

constexpr std::string_view kCoTInstruction =
    "Provide a summary of insights derived from the log file below, delimited by triple "
    "backticks, representing a minimization problem. Ensure accurate identification of the "
    "best and worst fitness values and calculate the mean fitness over all iterations. "
    "Remember, in this context, the lowest value denotes the best fitness, while the highest "
    "value represents the worst fitness.\n"
    "1. Begin by extracting the best fitness value achieved.\n"
    "2. Next, extract the worst fitness value achieved during the optimization process.\n"
    "3. Calculate the average fitness value across all iterations.\n"
    "4. Analyze the convergence behavior, including trends or patterns indicating convergence "
    "behavior.\n"
    "5. Lastly, determine if there are any instances of reaching local optima or encountering "
    "plateaus.";

std::string wrap(std::string_view instruction, std::string_view log_text) {
  if (log_text.empty()) throw std::invalid_argument("prompt template: log text is empty");
  std::string out;
  out.reserve(instruction.size() + log_text.size() + 8);
  out += instruction;
  out += "\n```";
  out += log_text;
  out += "```";
  return out;
}

std::string sandwich(std::string (*base)(std::string_view), const Exemplar& exemplar,
                     std::string_view target_log) {
  return base(exemplar.log_text) + "\n" + exemplar.correct_answer + "\n" + base(target_log);
}

void check_exemplar(const Exemplar& exemplar) {
  if (exemplar.log_text.empty()) {
    throw std::invalid_argument("build_prompt: exemplar log is empty");
  }
  const runlog::GroundTruth truth =
      runlog::derive_ground_truth(runlog::parse_log(exemplar.log_text));
  const std::string best = runlog::format_fitness(truth.best_fitness);
  const std::string worst = runlog::format_fitness(truth.worst_fitness);
  if (exemplar.correct_answer.find(best) == std::string::npos ||
      exemplar.correct_answer.find(worst) == std::string::npos) {
    throw std::invalid_argument(
        "build_prompt: exemplar answer does not state the exemplar log's best and worst "
        "fitness");
  }
}

}  // namespace

std::string_view strategy_name(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::ZeroShot: return "zero_shot";
    case PromptStrategy::FewShot: return "few_shot";
    case PromptStrategy::CoT: return "cot";
    case PromptStrategy::FewShotCoT: return "few_shot_cot";
  }
  throw std::invalid_argument("strategy_name: unknown strategy");
}

std::string_view strategy_display_name(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::ZeroShot: return "Zero-Shot";
    case PromptStrategy::FewShot: return "Few-Shot";
    case PromptStrategy::CoT: return "CoT";
    case PromptStrategy::FewShotCoT: return "Few-Shot CoT";
  }
  throw std::invalid_argument("strategy_display_name: unknown strategy");
}

std::optional<PromptStrategy> strategy_from_name(std::string_view name) {
  for (PromptStrategy strategy : kAllStrategies) {
    if (name == strategy_name(strategy) || name == strategy_display_name(strategy)) {
      return strategy;
    }
  }
  return std::nullopt;
}

bool needs_exemplar(PromptStrategy strategy) {
  return strategy == PromptStrategy::FewShot || strategy == PromptStrategy::FewShotCoT;
}

std::string_view zero_shot_instruction() { return kZeroShotInstruction; }
std::string_view cot_instruction() { return kCoTInstruction; }

std::string zero_shot_template(std::string_view log_text) {
  return wrap(kZeroShotInstruction, log_text);
}

std::string cot_template(std::string_view log_text) { return wrap(kCoTInstruction, log_text); }

PromptBundle build_prompt(PromptStrategy strategy, std::string_view target_log,
                          const std::optional<Exemplar>& exemplar) {
  if (needs_exemplar(strategy) != exemplar.has_value()) {
    throw std::invalid_argument(needs_exemplar(strategy)
                                    ? "build_prompt: strategy requires an exemplar"
                                    : "build_prompt: strategy does not take an exemplar");
  }
  if (exemplar) check_exemplar(*exemplar);

  PromptBundle bundle;
  bundle.strategy = strategy;
  switch (strategy) {
    case PromptStrategy::ZeroShot: bundle.text = zero_shot_template(target_log); break;
    case PromptStrategy::CoT: bundle.text = cot_template(target_log); break;
    case PromptStrategy::FewShot: bundle.text = sandwich(zero_shot_template, *exemplar, target_log); break;
    case PromptStrategy::FewShotCoT: bundle.text = sandwich(cot_template, *exemplar, target_log); break;
  }
  bundle.token_estimate = estimate_tokens(bundle.text);
  return bundle;
}

std::string render_correct_answer(const runlog::GroundTruth& truth, const runlog::RunLog&) {
  std::string out = "The best fitness value achieved was " +
                    runlog::format_fitness(truth.best_fitness) +
                    ". The worst fitness value observed was " +
                    runlog::format_fitness(truth.worst_fitness) +
                    ". The mean fitness over all logged iterations was " +
                    runlog::format_fitness(truth.mean_fitness) + ". ";
  const bool flat = truth.worst_fitness <= truth.best_fitness;
  out += flat ? "The fitness remained unchanged across the logged iterations. "
              : "The fitness values varied over the course of the run, and the search "
                "converged toward the best observed value. ";
  if (truth.restart_count == 0) {
    out += "The search encountered no restarts and showed no signs of being trapped in local "
           "optima.";
  } else {
    out += "The search stagnated in a local optimum and restarted " +
           std::to_string(truth.restart_count) + (truth.restart_count == 1 ? " time." : " times.");
  }
  return out;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 2) / 3; }

}  // namespace xes::prompt
