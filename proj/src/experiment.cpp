#include "xes/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "xes/benchmarks.hpp"
#include "xes/errors.hpp"

namespace xes::experiment {

using nlohmann::json;

namespace {

// Default seeds for the three log specs, chosen so the short log stagnates
// once (restart at iteration 149), the middle log restarts twice, and the
// long log accumulates the most restarts (verified in tests).
constexpr std::uint64_t kShortSeed = 254;
constexpr std::uint64_t kMiddleSeed = 63;
constexpr std::uint64_t kLongSeed = 0;

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig config;
  config.strategies.assign(std::begin(prompt::kAllStrategies), std::end(prompt::kAllStrategies));
  config.log_specs = {{"short", 150, kShortSeed},
                      {"middle", 420, kMiddleSeed},
                      {"long", 1260, kLongSeed}};
  return config;
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw std::invalid_argument("config: no prompt strategies");
  if (log_specs.empty()) throw std::invalid_argument("config: no log specs");
  for (const LogSpec& spec : log_specs) {
    if (spec.label.empty()) throw std::invalid_argument("config: log spec without label");
    if (spec.iteration_cap < 1) {
      throw std::invalid_argument("config: log spec " + spec.label + " needs a positive cap");
    }
  }
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (concurrency_limit < 1) throw std::invalid_argument("config: concurrency_limit must be >= 1");
  es_config.validate();
}

namespace {

json model_to_json(const llm::ModelSpec& m) {
  return {{"model_name", m.model_name},
          {"base_url", m.base_url},
          {"api_key_env", m.api_key_env},
          {"temperature", m.temperature},
          {"max_output_tokens", m.max_output_tokens},
          {"context_length", m.context_length},
          {"request_timeout_ms", m.request_timeout.count()},
          {"max_retries", m.max_retries}};
}

llm::ModelSpec model_from_json(const json& j) {
  llm::ModelSpec m;
  m.model_name = j.at("model_name").get<std::string>();
  m.base_url = j.value("base_url", m.base_url);
  m.api_key_env = j.value("api_key_env", m.api_key_env);
  m.temperature = j.value("temperature", m.temperature);
  m.max_output_tokens = j.value("max_output_tokens", m.max_output_tokens);
  m.context_length = j.value("context_length", m.context_length);
  m.request_timeout = std::chrono::milliseconds(
      j.value("request_timeout_ms", m.request_timeout.count()));
  m.max_retries = j.value("max_retries", m.max_retries);
  return m;
}

json es_to_json(const es::ESConfig& c) {
  json j = {{"mu", c.mu},
            {"lambda", c.lambda},
            {"dimension", c.dimension},
            {"sigma0", c.sigma0},
            {"max_iterations", c.max_iterations},
            {"fitness_threshold", c.fitness_threshold},
            {"stagnation_window", c.stagnation_window},
            {"stagnation_epsilon", c.stagnation_epsilon},
            {"log_interval", c.log_interval},
            {"seed", c.seed},
            {"uniform_restart", c.uniform_restart}};
  if (c.tau) j["tau"] = *c.tau;
  if (!c.initial_point.empty()) j["initial_point"] = c.initial_point;
  return j;
}

es::ESConfig es_from_json(const json& j) {
  es::ESConfig c;
  c.mu = j.value("mu", c.mu);
  c.lambda = j.value("lambda", c.lambda);
  c.dimension = j.value("dimension", c.dimension);
  if (j.contains("tau")) c.tau = j.at("tau").get<double>();
  c.sigma0 = j.value("sigma0", c.sigma0);
  if (j.contains("initial_point")) {
    c.initial_point = j.at("initial_point").get<std::vector<double>>();
  }
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.fitness_threshold = j.value("fitness_threshold", c.fitness_threshold);
  c.stagnation_window = j.value("stagnation_window", c.stagnation_window);
  c.stagnation_epsilon = j.value("stagnation_epsilon", c.stagnation_epsilon);
  c.log_interval = j.value("log_interval", c.log_interval);
  c.seed = j.value("seed", c.seed);
  c.uniform_restart = j.value("uniform_restart", c.uniform_restart);
  return c;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& file) {
  const json j = json::parse(read_file(file));
  ExperimentConfig config = ExperimentConfig::defaults();
  if (j.contains("models")) {
    config.models.clear();
    for (const json& m : j.at("models")) config.models.push_back(model_from_json(m));
  }
  if (j.contains("strategies")) {
    config.strategies.clear();
    for (const json& s : j.at("strategies")) {
      const auto strategy = prompt::strategy_from_name(s.get<std::string>());
      if (!strategy) {
        throw std::invalid_argument("config: unknown strategy " + s.get<std::string>());
      }
      config.strategies.push_back(*strategy);
    }
  }
  if (j.contains("log_specs")) {
    config.log_specs.clear();
    for (const json& s : j.at("log_specs")) {
      config.log_specs.push_back({s.at("label").get<std::string>(),
                                  s.at("iteration_cap").get<long>(),
                                  s.value("seed", std::uint64_t{0})});
    }
  }
  config.repetitions = j.value("repetitions", config.repetitions);
  if (j.contains("es")) config.es_config = es_from_json(j.at("es"));
  config.benchmark = j.value("benchmark", config.benchmark);
  if (j.contains("output_dir")) {
    config.output_dir = std::filesystem::path(j.at("output_dir").get<std::string>());
  }
  config.concurrency_limit = j.value("concurrency_limit", config.concurrency_limit);
  config.auto_judge = j.value("auto_judge", config.auto_judge);
  config.validate();
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  json j;
  j["models"] = json::array();
  for (const llm::ModelSpec& m : config.models) j["models"].push_back(model_to_json(m));
  j["strategies"] = json::array();
  for (prompt::PromptStrategy s : config.strategies) {
    j["strategies"].push_back(std::string(prompt::strategy_name(s)));
  }
  j["log_specs"] = json::array();
  for (const LogSpec& s : config.log_specs) {
    j["log_specs"].push_back(
        {{"label", s.label}, {"iteration_cap", s.iteration_cap}, {"seed", s.seed}});
  }
  j["repetitions"] = config.repetitions;
  j["es"] = es_to_json(config.es_config);
  j["benchmark"] = config.benchmark;
  j["output_dir"] = config.output_dir.string();
  j["concurrency_limit"] = config.concurrency_limit;
  j["auto_judge"] = config.auto_judge;
  return j.dump(2) + "\n";
}

std::string run_key(const GridKey& key, int rep) {
  return key.model_name + "|" + std::string(prompt::strategy_name(key.strategy)) + "|" +
         key.log_label + "|rep" + std::to_string(rep);
}

ClientFactory http_client_factory() {
  return [](const llm::ModelSpec&, const GridKey&) {
    return std::make_unique<llm::HttpChatClient>();
  };
}

int CellResult::n_scored() const {
  return static_cast<int>(std::count_if(reps.begin(), reps.end(),
                                        [](const RepScore& r) { return !r.failed; }));
}

int CellResult::n_failed() const { return static_cast<int>(reps.size()) - n_scored(); }

int CellResult::pending_reviews() const {
  int pending = 0;
  for (const RepScore& r : reps) {
    if (r.failed) continue;
    pending += static_cast<int>(r.convergence == eval::Verdict::Pending);
    pending += static_cast<int>(r.local_optima == eval::Verdict::Pending);
  }
  return pending;
}

long CellResult::quarters_sum() const {
  long sum = 0;
  for (const RepScore& r : reps) {
    if (r.failed) continue;
    sum += static_cast<int>(r.best_ok) + static_cast<int>(r.worst_ok) +
           static_cast<int>(r.convergence == eval::Verdict::True) +
           static_cast<int>(r.local_optima == eval::Verdict::True);
  }
  return sum;
}

double aggregate(const CellResult& cell) {
  if (cell.pending_reviews() > 0) {
    throw std::logic_error("aggregate: cell " + cell.model_name + "/" + cell.log_label +
                           " has pending reviews");
  }
  if (cell.n_scored() == 0) {
    throw std::logic_error("aggregate: cell " + cell.model_name + "/" + cell.log_label +
                           " has no scored repetitions");
  }
  return static_cast<double>(cell.quarters_sum()) / (4.0 * cell.n_scored());
}

std::string format_average(long quarters_sum, int n_scored) {
  if (n_scored < 1) throw std::invalid_argument("format_average: nothing scored");
  // hundredths of the mean, rounded half up: floor((50 S + n) / (2 n))
  const long hundredths = (50 * quarters_sum + n_scored) / (2 * n_scored);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%ld.%02ld", hundredths / 100, hundredths % 100);
  return buf;
}

std::filesystem::path scores_path(const ExperimentConfig& config) {
  return config.output_dir / "scores.jsonl";
}

std::filesystem::path review_queue_path(const ExperimentConfig& config) {
  return config.output_dir / "review_queue.jsonl";
}

std::filesystem::path results_csv_path(const ExperimentConfig& config) {
  return config.output_dir / "results.csv";
}

std::filesystem::path log_path(const ExperimentConfig& config, const std::string& label) {
  return config.output_dir / "logs" / (sanitize(label) + ".log");
}

namespace {

std::filesystem::path response_path(const ExperimentConfig& config, const GridKey& key, int rep) {
  return config.output_dir / "responses" / sanitize(key.model_name) /
         std::string(prompt::strategy_name(key.strategy)) / sanitize(key.log_label) /
         ("rep" + std::to_string(rep) + ".txt");
}

struct PreparedLog {
  LogSpec spec;
  std::string text;
  runlog::GroundTruth truth;
};

std::vector<PreparedLog> prepare_logs(const ExperimentConfig& config) {
  generate_logs(config);
  std::vector<PreparedLog> logs;
  for (const LogSpec& spec : config.log_specs) {
    PreparedLog prepared;
    prepared.spec = spec;
    prepared.text = read_file(log_path(config, spec.label));
    runlog::RunLog parsed = runlog::parse_log(prepared.text);
    parsed.source_label = spec.label;
    prepared.truth = runlog::derive_ground_truth(parsed);
    logs.push_back(std::move(prepared));
  }
  return logs;
}

// The few-shot exemplar is the "short" log (first spec as fallback) with a
// rendered reference answer.
prompt::Exemplar make_exemplar(const std::vector<PreparedLog>& logs) {
  const PreparedLog* chosen = &logs.front();
  for (const PreparedLog& log : logs) {
    if (log.spec.label == "short") {
      chosen = &log;
      break;
    }
  }
  runlog::RunLog parsed = runlog::parse_log(chosen->text);
  return {chosen->text, prompt::render_correct_answer(chosen->truth, parsed)};
}

struct CellTask {
  llm::ModelSpec model;
  GridKey key;
  const PreparedLog* log = nullptr;
};

RepScore score_response(const std::string& response_text, const runlog::GroundTruth& truth,
                        int rep, bool auto_judge) {
  RepScore score;
  score.rep = rep;
  const eval::ExtractedClaims claims = eval::extract_numeric_claims(response_text);
  const eval::NumericVerdict numeric = eval::score_numeric(claims, truth);
  score.best_ok = numeric.best_ok;
  score.worst_ok = numeric.worst_ok;
  score.mean_mentioned =
      std::any_of(claims.all_numbers.begin(), claims.all_numbers.end(),
                  [&](double v) { return eval::value_matches(v, truth.mean_fitness); });
  if (auto_judge) {
    score.convergence = eval::auto_judge(response_text, truth, eval::Criterion::Convergence)
                            ? eval::Verdict::True
                            : eval::Verdict::False;
    score.local_optima = eval::auto_judge(response_text, truth, eval::Criterion::LocalOptima)
                             ? eval::Verdict::True
                             : eval::Verdict::False;
  }
  return score;
}

CellResult run_cell(const ExperimentConfig& config, const CellTask& task,
                    const ClientFactory& factory, const prompt::Exemplar& exemplar) {
  CellResult cell;
  cell.model_name = task.key.model_name;
  cell.strategy = task.key.strategy;
  cell.log_label = task.key.log_label;

  std::unique_ptr<llm::ChatClient> client;
  std::string cell_error;
  try {
    client = factory(task.model, task.key);
    if (!client) throw std::runtime_error("client factory returned null");
  } catch (const std::exception& e) {
    cell_error = e.what();
  }

  for (int rep = 0; rep < config.repetitions; ++rep) {
    RepScore score;
    score.rep = rep;
    const std::filesystem::path path = response_path(config, task.key, rep);
    try {
      std::string response_text;
      if (std::filesystem::exists(path)) {
        response_text = read_file(path);
      } else {
        if (!cell_error.empty()) throw std::runtime_error(cell_error);
        const std::optional<prompt::Exemplar> maybe_exemplar =
            prompt::needs_exemplar(task.key.strategy) ? std::optional(exemplar) : std::nullopt;
        const prompt::PromptBundle bundle =
            prompt::build_prompt(task.key.strategy, task.log->text, maybe_exemplar);
        response_text = client->complete(task.model, bundle).text;
        write_file(path, response_text);
      }
      score = score_response(response_text, task.log->truth, rep, config.auto_judge);
    } catch (const std::exception& e) {
      score.failed = true;
      score.error = e.what();
    }
    cell.reps.push_back(std::move(score));
  }
  return cell;
}

json rep_to_json(const CellResult& cell, const RepScore& rep) {
  return {{"model", cell.model_name},
          {"strategy", prompt::strategy_name(cell.strategy)},
          {"log", cell.log_label},
          {"rep", rep.rep},
          {"failed", rep.failed},
          {"error", rep.error},
          {"best_ok", rep.best_ok},
          {"worst_ok", rep.worst_ok},
          {"convergence", eval::verdict_name(rep.convergence)},
          {"local_optima", eval::verdict_name(rep.local_optima)},
          {"mean_mentioned", rep.mean_mentioned}};
}

void write_scores(const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  std::string out;
  for (const CellResult& cell : cells) {
    for (const RepScore& rep : cell.reps) {
      out += rep_to_json(cell, rep).dump();
      out += '\n';
    }
  }
  write_file(scores_path(config), out);
}

// Adds pending review items for unresolved repetitions, keeping verdicts
// already present in the queue, and folds resolved verdicts back into cells.
void sync_review_queue(const ExperimentConfig& config, std::vector<CellResult>& cells,
                       const std::vector<PreparedLog>& logs) {
  std::map<std::string, eval::ReviewItem> queue;
  for (eval::ReviewItem& item : eval::load_review_queue(review_queue_path(config))) {
    queue.emplace(item.id, std::move(item));
  }

  std::map<std::string, const runlog::GroundTruth*> truths;
  for (const PreparedLog& log : logs) truths[log.spec.label] = &log.truth;

  for (CellResult& cell : cells) {
    for (RepScore& rep : cell.reps) {
      if (rep.failed) continue;
      const std::string key =
          run_key({cell.model_name, cell.strategy, cell.log_label}, rep.rep);
      const auto sync_one = [&](eval::Criterion criterion, eval::Verdict& verdict) {
        if (verdict != eval::Verdict::Pending) return;  // auto judge already ruled
        const std::string id = eval::review_item_id(key, criterion);
        auto found = queue.find(id);
        if (found == queue.end()) {
          eval::ReviewItem item;
          item.id = id;
          item.run_key = key;
          item.response_text = read_file(
              response_path(config, {cell.model_name, cell.strategy, cell.log_label}, rep.rep));
          item.ground_truth = *truths.at(cell.log_label);
          item.criterion = criterion;
          found = queue.emplace(id, std::move(item)).first;
        }
        verdict = found->second.verdict;
      };
      sync_one(eval::Criterion::Convergence, rep.convergence);
      sync_one(eval::Criterion::LocalOptima, rep.local_optima);
    }
  }

  std::vector<eval::ReviewItem> items;
  items.reserve(queue.size());
  for (auto& [id, item] : queue) items.push_back(std::move(item));
  eval::save_review_queue(review_queue_path(config), items);
}

std::vector<CellTask> make_tasks(const ExperimentConfig& config,
                                 const std::vector<PreparedLog>& logs) {
  std::vector<CellTask> tasks;
  for (const llm::ModelSpec& model : config.models) {
    for (const PreparedLog& log : logs) {
      for (prompt::PromptStrategy strategy : config.strategies) {
        tasks.push_back({model, {model.model_name, strategy, log.spec.label}, &log});
      }
    }
  }
  return tasks;
}

}  // namespace

std::vector<std::filesystem::path> generate_logs(const ExperimentConfig& config) {
  config.validate();
  const bench::ObjectiveFunction objective =
      bench::lookup(config.benchmark, config.es_config.dimension);
  std::vector<std::filesystem::path> paths;
  for (const LogSpec& spec : config.log_specs) {
    es::ESConfig run_config = config.es_config;
    run_config.seed = spec.seed;
    runlog::RunLog log;
    log.source_label = spec.label;
    es::run(run_config, objective,
            [&](const runlog::LogEntry& entry) { log.entries.push_back(entry); },
            spec.iteration_cap);
    const std::filesystem::path path = log_path(config, spec.label);
    write_file(path, runlog::write_log(log));
    paths.push_back(path);
  }
  return paths;
}

std::vector<CellResult> run_grid(const ExperimentConfig& config, const ClientFactory& factory) {
  config.validate();
  if (config.models.empty()) throw std::invalid_argument("run_grid: no models configured");

  const std::vector<PreparedLog> logs = prepare_logs(config);
  const prompt::Exemplar exemplar = make_exemplar(logs);
  const std::vector<CellTask> tasks = make_tasks(config, logs);

  std::vector<CellResult> cells(tasks.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::min(static_cast<std::size_t>(config.concurrency_limit), tasks.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) break;
        cells[i] = run_cell(config, tasks[i], factory, exemplar);
      }
    });
  }
  for (std::thread& t : pool) t.join();

  if (!config.auto_judge) sync_review_queue(config, cells, logs);
  write_scores(config, cells);
  return cells;
}

std::vector<CellResult> load_cells(const ExperimentConfig& config) {
  std::map<std::string, RepScore> records;
  std::map<std::string, std::pair<bool, std::string>> keys_seen;  // id -> (failed, error)
  {
    std::ifstream in(scores_path(config));
    if (!in) throw std::runtime_error("cannot read " + scores_path(config).string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line);
      RepScore rep;
      rep.rep = j.at("rep").get<int>();
      rep.failed = j.at("failed").get<bool>();
      rep.error = j.at("error").get<std::string>();
      rep.best_ok = j.at("best_ok").get<bool>();
      rep.worst_ok = j.at("worst_ok").get<bool>();
      rep.convergence = *eval::verdict_from_name(j.at("convergence").get<std::string>());
      rep.local_optima = *eval::verdict_from_name(j.at("local_optima").get<std::string>());
      rep.mean_mentioned = j.value("mean_mentioned", false);
      const GridKey key{j.at("model").get<std::string>(),
                        *prompt::strategy_from_name(j.at("strategy").get<std::string>()),
                        j.at("log").get<std::string>()};
      records.emplace(run_key(key, rep.rep), std::move(rep));
    }
  }

  std::map<std::string, eval::Verdict> reviewed;
  for (const eval::ReviewItem& item : eval::load_review_queue(review_queue_path(config))) {
    reviewed.emplace(item.id, item.verdict);
  }

  std::vector<CellResult> cells;
  for (const llm::ModelSpec& model : config.models) {
    for (const LogSpec& spec : config.log_specs) {
      for (prompt::PromptStrategy strategy : config.strategies) {
        CellResult cell;
        cell.model_name = model.model_name;
        cell.strategy = strategy;
        cell.log_label = spec.label;
        for (int rep = 0; rep < config.repetitions; ++rep) {
          const std::string key = run_key({model.model_name, strategy, spec.label}, rep);
          const auto found = records.find(key);
          if (found == records.end()) {
            throw std::logic_error("load_cells: grid incomplete, missing " + key);
          }
          RepScore score = found->second;
          const auto apply = [&](eval::Criterion criterion, eval::Verdict& verdict) {
            if (verdict != eval::Verdict::Pending) return;
            const auto ruled = reviewed.find(eval::review_item_id(key, criterion));
            if (ruled != reviewed.end()) verdict = ruled->second;
          };
          apply(eval::Criterion::Convergence, score.convergence);
          apply(eval::Criterion::LocalOptima, score.local_optima);
          cell.reps.push_back(std::move(score));
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

namespace {

const CellResult& find_cell(const std::vector<CellResult>& cells, const std::string& model,
                            prompt::PromptStrategy strategy, const std::string& log_label) {
  for (const CellResult& cell : cells) {
    if (cell.model_name == model && cell.strategy == strategy && cell.log_label == log_label) {
      return cell;
    }
  }
  throw std::logic_error("results grid incomplete: missing " + model + "/" +
                         std::string(prompt::strategy_name(strategy)) + "/" + log_label);
}

std::string cell_text(const CellResult& cell) {
  if (cell.pending_reviews() > 0) {
    throw std::logic_error("results not ready: " + std::to_string(cell.pending_reviews()) +
                           " pending reviews in " + cell.model_name + "/" + cell.log_label);
  }
  if (cell.n_scored() == 0) return "--";
  return format_average(cell.quarters_sum(), cell.n_scored());
}

}  // namespace

std::string render_text_table(const std::vector<CellResult>& cells,
                              const ExperimentConfig& config) {
  std::vector<std::string> headers = {"Model", "Log"};
  for (prompt::PromptStrategy strategy : config.strategies) {
    headers.push_back(std::string(prompt::strategy_display_name(strategy)));
  }

  std::vector<std::vector<std::string>> rows;
  for (const llm::ModelSpec& model : config.models) {
    bool first = true;
    for (const LogSpec& spec : config.log_specs) {
      std::vector<std::string> row = {first ? model.model_name : "", spec.label};
      for (prompt::PromptStrategy strategy : config.strategies) {
        row.push_back(cell_text(find_cell(cells, model.model_name, strategy, spec.label)));
      }
      rows.push_back(std::move(row));
      first = false;
    }
  }

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }

  const auto emit_row = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += row[c];
      line.append(widths[c] - row[c].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };

  std::string out = emit_row(headers);
  std::size_t total = headers.size() > 0 ? 2 * (headers.size() - 1) : 0;
  for (std::size_t w : widths) total += w;
  out += std::string(total, '-') + "\n";
  for (const auto& row : rows) out += emit_row(row);
  return out;
}

std::string render_csv(const std::vector<CellResult>& cells, const ExperimentConfig& config) {
  std::string out = "model,log,strategy,average,n_scored,n_failed\n";
  for (const llm::ModelSpec& model : config.models) {
    for (const LogSpec& spec : config.log_specs) {
      for (prompt::PromptStrategy strategy : config.strategies) {
        const CellResult& cell = find_cell(cells, model.model_name, strategy, spec.label);
        if (cell.pending_reviews() > 0) {
          throw std::logic_error("results not ready: pending reviews in " + cell.model_name +
                                 "/" + cell.log_label);
        }
        std::string average;
        if (cell.n_scored() > 0) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.17g", aggregate(cell));
          average = buf;
        }
        out += model.model_name + "," + spec.label + "," +
               std::string(prompt::strategy_name(strategy)) + "," + average + "," +
               std::to_string(cell.n_scored()) + "," + std::to_string(cell.n_failed()) + "\n";
      }
    }
  }
  return out;
}

}  // namespace xes::experiment
