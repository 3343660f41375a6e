#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xes/run_log.hpp"

namespace xes::eval {

/// Numbers found in a response, bucketed by the fitness keyword (if any)
/// sharing their sentence. Candidate lists are subsets of all_numbers.
struct ExtractedClaims {
  std::vector<double> best_candidates;
  std::vector<double> worst_candidates;
  std::vector<double> all_numbers;
};

/// Sentence split on '.', '!', '?' and newlines; a dot between two digits
/// stays inside its number. Keyword matching is case-insensitive; best
/// keywords are "best", "lowest", "minimum", "optimal fitness"; worst
/// keywords are "worst", "highest", "maximum".
ExtractedClaims extract_numeric_claims(std::string_view text);

/// Relative tolerance 1e-3, or exact match of the four-decimal rendering.
bool value_matches(double claimed, double truth);

struct NumericVerdict {
  bool best_ok = false;
  bool worst_ok = false;
};

/// A criterion passes when some candidate matches the true value; an empty
/// candidate list fails it. Adding candidates can never un-pass a criterion.
NumericVerdict score_numeric(const ExtractedClaims& claims, const runlog::GroundTruth& truth);

enum class Criterion { Convergence, LocalOptima };
enum class Verdict { True, False, Pending };

std::string_view criterion_name(Criterion criterion);
std::string_view verdict_name(Verdict verdict);
std::optional<Criterion> criterion_from_name(std::string_view name);
std::optional<Verdict> verdict_from_name(std::string_view name);

/// Per-response score: one point per correct statement, normalized by 4.
/// normalized is meaningful only once both qualitative verdicts are resolved.
struct EvaluationScore {
  bool best_ok = false;
  bool worst_ok = false;
  Verdict convergence_ok = Verdict::Pending;
  Verdict local_optima_ok = Verdict::Pending;
  double normalized = 0.0;
};

/// Throws std::logic_error when a verdict is still pending.
EvaluationScore finalize_score(bool best_ok, bool worst_ok, Verdict convergence,
                               Verdict local_optima);

/// One qualitative judgment awaiting a (usually human) verdict.
struct ReviewItem {
  std::string id;
  std::string run_key;
  std::string response_text;
  runlog::GroundTruth ground_truth;
  Criterion criterion = Criterion::Convergence;
  Verdict verdict = Verdict::Pending;
};

std::string review_item_id(std::string_view run_key, Criterion criterion);

/// Appends two pending items (convergence, local optima) for the response to
/// a JSON-lines queue file and returns them.
std::vector<ReviewItem> enqueue_manual(const std::filesystem::path& queue_file,
                                       std::string_view response_text,
                                       const runlog::GroundTruth& truth, std::string_view run_key);

/// Whole-file load/save for the JSON-lines review queue. Loading a missing
/// file yields an empty queue.
std::vector<ReviewItem> load_review_queue(const std::filesystem::path& queue_file);
void save_review_queue(const std::filesystem::path& queue_file,
                       const std::vector<ReviewItem>& items);

std::string review_item_to_json(const ReviewItem& item);
ReviewItem review_item_from_json(const std::string& line);

/// Keyword heuristic that can stand in for manual review (off by default in
/// the pipeline). LocalOptima: a non-negated mention of local optima,
/// restarts, stagnation or plateaus must agree with restart_count.
/// Convergence: the claimed fitness trend must agree with whether the logged
/// values actually varied.
bool auto_judge(std::string_view response_text, const runlog::GroundTruth& truth,
                Criterion criterion);

}  // namespace xes::eval
