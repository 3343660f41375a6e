#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "xes/es.hpp"
#include "xes/evaluation.hpp"
#include "xes/llm_client.hpp"
#include "xes/prompting.hpp"

namespace xes::experiment {

/// One fixed-length log to generate and explain: the run is cut off at
/// iteration_cap so the file documents exactly that many iterations.
struct LogSpec {
  std::string label;
  long iteration_cap = 0;
  std::uint64_t seed = 0;
};

/// The full grid: models x strategies x logs, each repeated `repetitions`
/// times. Defaults: all four strategies, the short/middle/long logs, ten
/// repetitions.
struct ExperimentConfig {
  std::vector<llm::ModelSpec> models;
  std::vector<prompt::PromptStrategy> strategies;
  std::vector<LogSpec> log_specs;
  int repetitions = 10;
  es::ESConfig es_config;
  std::string benchmark = "rastrigin";
  std::filesystem::path output_dir = "out";
  int concurrency_limit = 2;
  bool auto_judge = false;  // resolve qualitative criteria heuristically instead of queueing

  static ExperimentConfig defaults();
  void validate() const;
};

/// JSON round-trip for config files; load applies file values over defaults.
ExperimentConfig load_config(const std::filesystem::path& file);
std::string config_to_json(const ExperimentConfig& config);

struct GridKey {
  std::string model_name;
  prompt::PromptStrategy strategy;
  std::string log_label;
};

/// Run key "{model}|{strategy}|{log}|rep{k}"; review item ids append the criterion.
std::string run_key(const GridKey& key, int rep);

/// Creates the client used for one grid cell. Called once per cell, so a
/// scripted mock cycles deterministically within that cell's repetitions.
using ClientFactory =
    std::function<std::unique_ptr<llm::ChatClient>(const llm::ModelSpec&, const GridKey&)>;

ClientFactory http_client_factory();

/// Outcome of one repetition. Qualitative verdicts stay Pending until a
/// reviewer (or the auto judge) resolves them.
struct RepScore {
  int rep = 0;
  bool failed = false;
  std::string error;
  bool best_ok = false;
  bool worst_ok = false;
  eval::Verdict convergence = eval::Verdict::Pending;
  eval::Verdict local_optima = eval::Verdict::Pending;
  bool mean_mentioned = false;  // diagnostic only; not part of the score
};

struct CellResult {
  std::string model_name;
  prompt::PromptStrategy strategy;
  std::string log_label;
  std::vector<RepScore> reps;

  int n_scored() const;
  int n_failed() const;
  int pending_reviews() const;
  /// Sum of points (0..4 per scored rep); average = quarters_sum / (4 * n_scored).
  long quarters_sum() const;
};

/// Mean normalized score across the scored repetitions. Throws
/// std::logic_error while reviews are pending or when nothing was scored.
double aggregate(const CellResult& cell);

/// "0.33"-style rendering: two decimals, round half up, exact in integers.
std::string format_average(long quarters_sum, int n_scored);

/// Writes {output_dir}/logs/{label}.log for every log spec by running the ES
/// with the spec's seed and iteration cap. Deterministic per seed.
std::vector<std::filesystem::path> generate_logs(const ExperimentConfig& config);

/// Runs the whole grid. Responses are persisted verbatim under
/// {output_dir}/responses/{model}/{strategy}/{log}/rep{k}.txt before being
/// scored; repetitions with persisted responses are not re-requested.
/// Numeric criteria are scored immediately; qualitative criteria go to the
/// review queue unless auto_judge is set. Failures are recorded per
/// repetition and do not abort the grid. Writes scores.jsonl and
/// review_queue.jsonl (existing verdicts are preserved).
std::vector<CellResult> run_grid(const ExperimentConfig& config, const ClientFactory& factory);

/// Rebuilds cell results from scores.jsonl, joining any verdicts resolved in
/// the review queue. Throws when the persisted grid is incomplete.
std::vector<CellResult> load_cells(const ExperimentConfig& config);

/// Aligned text table in the results-matrix layout: one row group per model
/// with one sub-row per log, one column per strategy. Requires a complete,
/// fully reviewed grid.
std::string render_text_table(const std::vector<CellResult>& cells,
                              const ExperimentConfig& config);

/// CSV with columns model,log,strategy,average,n_scored,n_failed; averages at
/// full precision.
std::string render_csv(const std::vector<CellResult>& cells, const ExperimentConfig& config);

std::filesystem::path scores_path(const ExperimentConfig& config);
std::filesystem::path review_queue_path(const ExperimentConfig& config);
std::filesystem::path results_csv_path(const ExperimentConfig& config);
std::filesystem::path log_path(const ExperimentConfig& config, const std::string& label);

}  // namespace xes::experiment
