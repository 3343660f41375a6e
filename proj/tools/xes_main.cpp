// Command-line front end for the workbench: run the optimizer, generate the
// benchmark logs, ask a model to explain one, score responses, resolve
// reviews, and drive the full experiment grid.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "xes/benchmarks.hpp"
#include "xes/es.hpp"
#include "xes/evaluation.hpp"
#include "xes/experiment.hpp"
#include "xes/llm_client.hpp"
#include "xes/prompting.hpp"
#include "xes/run_log.hpp"

namespace {

namespace fs = std::filesystem;
using namespace xes;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path == "-") {
    std::cout << content;
    return;
  }
  const fs::path path(out_path);
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << content;
}

const char* stop_reason_name(es::StopReason reason) {
  switch (reason) {
    case es::StopReason::MaxIterations: return "max_iterations";
    case es::StopReason::FitnessThreshold: return "fitness_threshold";
    case es::StopReason::IterationCap: return "iteration_cap";
  }
  return "unknown";
}

struct EsOptions {
  std::string function = "rastrigin";
  es::ESConfig config;
  double tau = -1.0;  // negative means default 1/sqrt(2n)
  long cap = 0;       // 0 means no cap

  void add_to(CLI::App& cmd) {
    cmd.add_option("--function", function, "Objective: rastrigin or sphere");
    cmd.add_option("--dimension", config.dimension, "Problem dimension");
    cmd.add_option("--mu", config.mu, "Number of parents");
    cmd.add_option("--lambda", config.lambda, "Number of offspring");
    cmd.add_option("--sigma0", config.sigma0, "Initial step size");
    cmd.add_option("--tau", tau, "Self-adaptation rate (default 1/sqrt(2n))");
    cmd.add_option("--seed", config.seed, "Random seed");
    cmd.add_option("--max-iterations", config.max_iterations, "Iteration budget");
    cmd.add_option("--threshold", config.fitness_threshold, "Stop when best fitness reaches this");
    cmd.add_option("--stagnation-window", config.stagnation_window,
                   "Iterations without improvement before a restart");
    cmd.add_option("--stagnation-epsilon", config.stagnation_epsilon,
                   "Minimum decrease that counts as improvement");
    cmd.add_option("--log-interval", config.log_interval, "Iterations between log records");
    cmd.add_option("--cap", cap, "Cut the run (and log) at this iteration; 0 = no cap");
    cmd.add_flag("--uniform-restart", config.uniform_restart,
                 "Restart uniformly in the box instead of around the initial point");
  }

  es::ESConfig resolved() const {
    es::ESConfig resolved_config = config;
    if (tau >= 0.0) resolved_config.tau = tau;
    return resolved_config;
  }
};

int cmd_optimize(const EsOptions& options, const std::string& out_path) {
  const es::ESConfig config = options.resolved();
  const bench::ObjectiveFunction objective = bench::lookup(options.function, config.dimension);
  runlog::RunLog log;
  const std::optional<long> cap =
      options.cap > 0 ? std::optional<long>(options.cap) : std::nullopt;
  const es::RunResult result = es::run(
      config, objective, [&](const runlog::LogEntry& entry) { log.entries.push_back(entry); },
      cap);
  write_output(out_path, runlog::write_log(log));
  std::cerr << "terminated by " << stop_reason_name(result.terminated_by) << " after "
            << result.total_iterations << " iterations; best fitness "
            << runlog::format_fitness(result.best_so_far) << "; " << result.restart_count
            << " restart(s)\n";
  return 0;
}

experiment::ExperimentConfig config_for(const std::string& config_path,
                                        const std::string& output_dir) {
  experiment::ExperimentConfig config = config_path.empty()
                                            ? experiment::ExperimentConfig::defaults()
                                            : experiment::load_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  return config;
}

int cmd_gen_logs(const std::string& config_path, const std::string& output_dir) {
  const experiment::ExperimentConfig config = config_for(config_path, output_dir);
  for (const fs::path& path : experiment::generate_logs(config)) {
    std::cout << path.string() << "\n";
  }
  return 0;
}

int cmd_explain(const std::string& log_path, const std::string& strategy_name,
                const llm::ModelSpec& spec, long timeout_ms, const std::string& exemplar_path,
                const std::string& out_path, bool dry_run) {
  const auto strategy = prompt::strategy_from_name(strategy_name);
  if (!strategy) throw std::runtime_error("unknown strategy: " + strategy_name);

  std::optional<prompt::Exemplar> exemplar;
  if (prompt::needs_exemplar(*strategy)) {
    if (exemplar_path.empty()) {
      throw std::runtime_error("strategy " + strategy_name +
                               " needs --exemplar-log (e.g. the generated short log)");
    }
    const std::string exemplar_text = read_file(exemplar_path);
    const runlog::RunLog exemplar_log = runlog::parse_log(exemplar_text);
    exemplar = prompt::Exemplar{
        exemplar_text,
        prompt::render_correct_answer(runlog::derive_ground_truth(exemplar_log), exemplar_log)};
  }

  const prompt::PromptBundle bundle =
      prompt::build_prompt(*strategy, read_file(log_path), exemplar);
  if (dry_run) {
    write_output(out_path, bundle.text);
    return 0;
  }

  llm::ModelSpec resolved = spec;
  resolved.request_timeout = std::chrono::milliseconds(timeout_ms);
  llm::HttpChatClient client;
  const llm::ChatResponse response = client.complete(resolved, bundle);
  write_output(out_path, response.text);
  std::cerr << "model " << response.model_name << " answered in " << response.latency.count()
            << " ms\n";
  return 0;
}

void print_numeric(const eval::NumericVerdict& numeric, bool mean_mentioned) {
  std::cout << "best_ok: " << (numeric.best_ok ? "true" : "false") << "\n"
            << "worst_ok: " << (numeric.worst_ok ? "true" : "false") << "\n"
            << "mean_mentioned (diagnostic): " << (mean_mentioned ? "true" : "false") << "\n";
}

int cmd_score(const std::string& response_path, const std::string& log_path, bool auto_judge,
              const std::string& queue_path, std::string run_key) {
  const std::string response_text = read_file(response_path);
  const runlog::RunLog log = runlog::parse_log(read_file(log_path));
  const runlog::GroundTruth truth = runlog::derive_ground_truth(log);
  if (run_key.empty()) run_key = fs::path(response_path).stem().string();

  const eval::ExtractedClaims claims = eval::extract_numeric_claims(response_text);
  const eval::NumericVerdict numeric = eval::score_numeric(claims, truth);
  bool mean_mentioned = false;
  for (double v : claims.all_numbers) mean_mentioned |= eval::value_matches(v, truth.mean_fitness);
  print_numeric(numeric, mean_mentioned);

  if (auto_judge) {
    const bool convergence = eval::auto_judge(response_text, truth, eval::Criterion::Convergence);
    const bool local_optima = eval::auto_judge(response_text, truth, eval::Criterion::LocalOptima);
    const eval::EvaluationScore score = eval::finalize_score(
        numeric.best_ok, numeric.worst_ok,
        convergence ? eval::Verdict::True : eval::Verdict::False,
        local_optima ? eval::Verdict::True : eval::Verdict::False);
    std::cout << "convergence_ok (auto): " << (convergence ? "true" : "false") << "\n"
              << "local_optima_ok (auto): " << (local_optima ? "true" : "false") << "\n"
              << "normalized: " << score.normalized << "\n";
  } else {
    eval::enqueue_manual(queue_path, response_text, truth, run_key);
    std::cout << "queued 2 review items under key " << run_key << " in " << queue_path << "\n";
  }
  return 0;
}

int cmd_review(const std::string& queue_path, bool list_only, bool auto_resolve) {
  std::vector<eval::ReviewItem> items = eval::load_review_queue(queue_path);
  if (items.empty()) {
    std::cout << "review queue is empty\n";
    return 0;
  }

  int pending = 0;
  for (const eval::ReviewItem& item : items) {
    pending += static_cast<int>(item.verdict == eval::Verdict::Pending);
  }
  if (list_only) {
    std::cout << items.size() << " item(s), " << pending << " pending\n";
    for (const eval::ReviewItem& item : items) {
      std::cout << "  [" << eval::verdict_name(item.verdict) << "] " << item.id << "\n";
    }
    return 0;
  }

  for (eval::ReviewItem& item : items) {
    if (item.verdict != eval::Verdict::Pending) continue;
    if (auto_resolve) {
      item.verdict = eval::auto_judge(item.response_text, item.ground_truth, item.criterion)
                         ? eval::Verdict::True
                         : eval::Verdict::False;
      continue;
    }
    const runlog::GroundTruth& truth = item.ground_truth;
    std::cout << "\n== " << item.id << " ==\n"
              << "criterion: " << eval::criterion_name(item.criterion) << "\n"
              << "ground truth: best " << runlog::format_fitness(truth.best_fitness) << ", worst "
              << runlog::format_fitness(truth.worst_fitness) << ", mean "
              << runlog::format_fitness(truth.mean_fitness) << ", restarts "
              << truth.restart_count << "\n"
              << "response:\n" << item.response_text << "\n"
              << "correct? [y/n/s(kip)/q(uit)] " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer)) break;
    if (answer == "y" || answer == "Y") {
      item.verdict = eval::Verdict::True;
    } else if (answer == "n" || answer == "N") {
      item.verdict = eval::Verdict::False;
    } else if (answer == "q" || answer == "Q") {
      break;
    }
  }
  eval::save_review_queue(queue_path, items);

  pending = 0;
  for (const eval::ReviewItem& item : items) {
    pending += static_cast<int>(item.verdict == eval::Verdict::Pending);
  }
  std::cout << "saved " << queue_path << "; " << pending << " still pending\n";
  return 0;
}

// Demo factory: each cell's mock answers with the reference summary for the
// cell's log, so the whole pipeline scores 1.0 without any endpoint.
experiment::ClientFactory mock_factory(const experiment::ExperimentConfig& config) {
  return [config](const llm::ModelSpec&, const experiment::GridKey& key) {
    const std::string text = read_file(experiment::log_path(config, key.log_label));
    const runlog::RunLog log = runlog::parse_log(text);
    return std::make_unique<llm::MockChatClient>(std::vector<std::string>{
        prompt::render_correct_answer(runlog::derive_ground_truth(log), log)});
  };
}

int report_results(const experiment::ExperimentConfig& config,
                   const std::vector<experiment::CellResult>& cells) {
  int pending = 0;
  for (const experiment::CellResult& cell : cells) pending += cell.pending_reviews();
  if (pending > 0) {
    std::cout << pending
              << " qualitative verdict(s) pending; resolve them with\n  xes review --queue "
              << experiment::review_queue_path(config).string() << "\nthen run: xes report\n";
    return 2;
  }
  const std::string table = experiment::render_text_table(cells, config);
  const std::string csv = experiment::render_csv(cells, config);
  write_output(experiment::results_csv_path(config).string(), csv);
  std::cout << table << "\nwrote " << experiment::results_csv_path(config).string() << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& output_dir, bool mock,
                   const std::string& dump_config_path) {
  if (!dump_config_path.empty()) {
    experiment::ExperimentConfig defaults = experiment::ExperimentConfig::defaults();
    llm::ModelSpec example;
    example.model_name = "llama3:70b";
    example.base_url = "http://localhost:11434/v1";
    defaults.models.push_back(example);
    write_output(dump_config_path, experiment::config_to_json(defaults));
    return 0;
  }

  experiment::ExperimentConfig config = config_for(config_path, output_dir);
  if (mock) {
    config.auto_judge = true;
    if (config.models.empty()) {
      llm::ModelSpec mock_model;
      mock_model.model_name = "mock-model";
      config.models.push_back(mock_model);
    }
    return report_results(config, experiment::run_grid(config, mock_factory(config)));
  }
  if (config.models.empty()) {
    throw std::runtime_error("config has no models; add one or use --mock for a dry run");
  }
  return report_results(config, experiment::run_grid(config, experiment::http_client_factory()));
}

int cmd_report(const std::string& config_path, const std::string& output_dir) {
  const experiment::ExperimentConfig config = config_for(config_path, output_dir);
  if (config.models.empty()) {
    throw std::runtime_error(
        "config has no models; pass the --config used for the experiment (mock runs write "
        "results.csv directly)");
  }
  return report_results(config, experiment::load_cells(config));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xes - evolution-strategy runs explained and scored with LLMs"};
  app.require_subcommand(1);

  auto* optimize = app.add_subcommand("optimize", "Run the ES and write its log");
  EsOptions es_options;
  es_options.add_to(*optimize);
  std::string optimize_out = "-";
  optimize->add_option("--out", optimize_out, "Log file path, or - for stdout");

  auto* gen_logs = app.add_subcommand("gen-logs", "Generate the configured benchmark logs");
  std::string gen_config, gen_output_dir;
  gen_logs->add_option("--config", gen_config, "Experiment config JSON");
  gen_logs->add_option("--output-dir", gen_output_dir, "Override the configured output dir");

  auto* explain = app.add_subcommand("explain", "Summarize one log with one model");
  std::string explain_log, explain_strategy = "zero_shot", explain_exemplar, explain_out = "-";
  llm::ModelSpec explain_spec;
  explain_spec.base_url = "http://localhost:11434/v1";
  long explain_timeout_ms = 60000;
  bool explain_dry_run = false;
  explain->add_option("--log", explain_log, "Log file to explain")->required();
  explain->add_option("--strategy", explain_strategy,
                      "zero_shot, few_shot, cot, or few_shot_cot");
  explain->add_option("--model", explain_spec.model_name, "Model name")->required();
  explain->add_option("--base-url", explain_spec.base_url, "OpenAI-compatible endpoint base URL");
  explain->add_option("--api-key-env", explain_spec.api_key_env,
                      "Environment variable holding the API key");
  explain->add_option("--temperature", explain_spec.temperature, "Sampling temperature");
  explain->add_option("--max-output-tokens", explain_spec.max_output_tokens, "Completion budget");
  explain->add_option("--context-length", explain_spec.context_length, "Model context length");
  explain->add_option("--timeout-ms", explain_timeout_ms, "Request timeout in milliseconds");
  explain->add_option("--max-retries", explain_spec.max_retries, "Retries for transient failures");
  explain->add_option("--exemplar-log", explain_exemplar, "Exemplar log for few-shot strategies");
  explain->add_option("--out", explain_out, "Response file path, or - for stdout");
  explain->add_flag("--dry-run", explain_dry_run, "Print the assembled prompt and exit");

  auto* score = app.add_subcommand("score", "Score a response against a log");
  std::string score_response, score_log, score_queue = "review_queue.jsonl", score_key;
  bool score_auto = false;
  score->add_option("--response", score_response, "Response text file")->required();
  score->add_option("--log", score_log, "Log file the response describes")->required();
  score->add_option("--queue", score_queue, "Review queue for the qualitative criteria");
  score->add_option("--run-key", score_key, "Key for the queued review items");
  score->add_flag("--auto", score_auto, "Judge qualitative criteria heuristically, no queue");

  auto* review = app.add_subcommand("review", "Resolve pending qualitative verdicts");
  std::string review_queue = "review_queue.jsonl";
  bool review_list = false, review_auto = false;
  review->add_option("--queue", review_queue, "Review queue file");
  review->add_flag("--list", review_list, "Show the queue and exit");
  review->add_flag("--auto", review_auto, "Resolve pending items with the heuristic judge");

  auto* experiment_cmd = app.add_subcommand("experiment", "Run the model x strategy x log grid");
  std::string exp_config, exp_output_dir, exp_dump_config;
  bool exp_mock = false;
  experiment_cmd->add_option("--config", exp_config, "Experiment config JSON");
  experiment_cmd->add_option("--output-dir", exp_output_dir, "Override the configured output dir");
  experiment_cmd->add_flag("--mock", exp_mock,
                           "Smoke-test the pipeline with a built-in correct-answer mock");
  experiment_cmd->add_option("--write-default-config", exp_dump_config,
                             "Write an example config to this path and exit");

  auto* report = app.add_subcommand("report", "Render the results table from persisted scores");
  std::string report_config, report_output_dir;
  report->add_option("--config", report_config, "Experiment config JSON");
  report->add_option("--output-dir", report_output_dir, "Override the configured output dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed()) return cmd_optimize(es_options, optimize_out);
    if (gen_logs->parsed()) return cmd_gen_logs(gen_config, gen_output_dir);
    if (explain->parsed()) {
      return cmd_explain(explain_log, explain_strategy, explain_spec, explain_timeout_ms,
                         explain_exemplar, explain_out, explain_dry_run);
    }
    if (score->parsed()) {
      return cmd_score(score_response, score_log, score_auto, score_queue, score_key);
    }
    if (review->parsed()) return cmd_review(review_queue, review_list, review_auto);
    if (experiment_cmd->parsed()) {
      return cmd_experiment(exp_config, exp_output_dir, exp_mock, exp_dump_config);
    }
    if (report->parsed()) return cmd_report(report_config, report_output_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
