#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "xes/run_log.hpp"

namespace xes::prompt {

enum class PromptStrategy { ZeroShot, FewShot, CoT, FewShotCoT };

inline constexpr PromptStrategy kAllStrategies[] = {
    PromptStrategy::ZeroShot, PromptStrategy::FewShot, PromptStrategy::CoT,
    PromptStrategy::FewShotCoT};

std::string_view strategy_name(PromptStrategy strategy);          // "zero_shot", ...
std::string_view strategy_display_name(PromptStrategy strategy);  // "Zero-Shot", ...
std::optional<PromptStrategy> strategy_from_name(std::string_view name);
bool needs_exemplar(PromptStrategy strategy);

/// A worked example for the few-shot sandwiches: a complete log file plus a
/// reference summary that states its true best/worst/mean and restarts.
struct Exemplar {
  std::string log_text;
  std::string correct_answer;
};

/// A fully assembled prompt, sent as a single user-role message.
struct PromptBundle {
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  std::string text;
  std::size_t token_estimate = 0;
};

// Instruction wording. Kept byte-stable; the golden tests pin it.
std::string_view zero_shot_instruction();
std::string_view cot_instruction();

/// Instruction, newline, then the log wrapped in triple backticks. The log
/// text is embedded verbatim; an empty log is an error.
std::string zero_shot_template(std::string_view log_text);
std::string cot_template(std::string_view log_text);

/// Assembles the prompt for a strategy. Few-shot strategies sandwich the
/// exemplar block and its correct answer before the target block and require
/// an exemplar; the plain strategies must not get one.
PromptBundle build_prompt(PromptStrategy strategy, std::string_view target_log,
                          const std::optional<Exemplar>& exemplar = std::nullopt);

/// Deterministic reference summary for a log: best/worst/mean at the
/// four-decimal rendering plus convergence and restart sentences. Scoring
/// this text against its own log is fully correct by construction.
std::string render_correct_answer(const runlog::GroundTruth& truth, const runlog::RunLog& log);

/// Conservative upper bound: ceil(len / 3).
std::size_t estimate_tokens(std::string_view text);

}  // namespace xes::prompt
