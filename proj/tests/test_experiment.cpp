#include "xes/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <variant>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "test_util.hpp"
#include "xes/errors.hpp"
#include "xes/run_log.hpp"

using namespace xes;
using experiment::CellResult;
using experiment::ExperimentConfig;

namespace {

llm::ModelSpec mock_model(const std::string& name) {
  llm::ModelSpec model;
  model.model_name = name;
  return model;
}

ExperimentConfig small_config(const std::filesystem::path& dir, int repetitions = 3) {
  ExperimentConfig config = ExperimentConfig::defaults();
  config.models = {mock_model("mock-a"), mock_model("mock-b")};
  config.repetitions = repetitions;
  config.output_dir = dir;
  config.auto_judge = true;
  return config;
}

std::string correct_answer_for(const ExperimentConfig& config, const std::string& label) {
  const runlog::RunLog log =
      runlog::parse_log(testutil::read_file(experiment::log_path(config, label)));
  return prompt::render_correct_answer(runlog::derive_ground_truth(log), log);
}

// Factory whose mock always answers with the reference summary for the
// cell's log; optionally counts completions via an external counter.
experiment::ClientFactory correct_factory(const ExperimentConfig& config,
                                          std::atomic<int>* calls = nullptr) {
  return [&config, calls](const llm::ModelSpec&, const experiment::GridKey& key) {
    if (calls) calls->fetch_add(1);
    return std::make_unique<llm::MockChatClient>(
        std::vector<std::string>{correct_answer_for(config, key.log_label)});
  };
}

// Same qualitative sentences, but best and worst values exchanged.
experiment::ClientFactory swapped_factory(const ExperimentConfig& config) {
  return [&config](const llm::ModelSpec&, const experiment::GridKey& key) {
    const runlog::RunLog log = runlog::parse_log(
        testutil::read_file(experiment::log_path(config, key.log_label)));
    const runlog::GroundTruth truth = runlog::derive_ground_truth(log);
    const std::string text =
        "The best fitness value achieved was " + runlog::format_fitness(truth.worst_fitness) +
        ". The worst fitness value observed was " + runlog::format_fitness(truth.best_fitness) +
        ". The fitness values varied over the course of the run, and the search converged toward "
        "the best observed value. The search stagnated in a local optimum and restarted " +
        std::to_string(truth.restart_count) + " times.";
    return std::make_unique<llm::MockChatClient>(std::vector<std::string>{text});
  };
}

double cell_average(const std::vector<CellResult>& cells, const std::string& model,
                    prompt::PromptStrategy strategy, const std::string& label) {
  for (const CellResult& cell : cells) {
    if (cell.model_name == model && cell.strategy == strategy && cell.log_label == label) {
      return experiment::aggregate(cell);
    }
  }
  FAIL("cell not found");
  return -1.0;
}

}  // namespace

TEST_CASE("default config covers the full grid protocol") {
  const ExperimentConfig config = ExperimentConfig::defaults();
  CHECK(config.strategies.size() == 4);
  REQUIRE(config.log_specs.size() == 3);
  CHECK(config.log_specs[0].label == "short");
  CHECK(config.log_specs[0].iteration_cap == 150);
  CHECK(config.log_specs[1].label == "middle");
  CHECK(config.log_specs[1].iteration_cap == 420);
  CHECK(config.log_specs[2].label == "long");
  CHECK(config.log_specs[2].iteration_cap == 1260);
  CHECK(config.repetitions == 10);
  CHECK(config.es_config.max_iterations == 10000);
  CHECK(config.es_config.fitness_threshold == 1e-5);
  CHECK(config.es_config.log_interval == 30);
  CHECK(config.es_config.dimension == 10);
}

TEST_CASE("generate_logs writes deterministic fixed-length logs") {
  testutil::TempDir tmp;
  ExperimentConfig config = ExperimentConfig::defaults();
  config.output_dir = tmp.path;

  const auto paths = experiment::generate_logs(config);
  REQUIRE(paths.size() == 3);

  const std::string short_text = testutil::read_file(paths[0]);
  const std::string long_text = testutil::read_file(paths[2]);

  int short_records = 0, short_restarts = 0, long_records = 0, long_restarts = 0;
  for (const auto& e : runlog::parse_log(short_text).entries) {
    std::holds_alternative<runlog::IterationRecord>(e) ? ++short_records : ++short_restarts;
  }
  for (const auto& e : runlog::parse_log(long_text).entries) {
    std::holds_alternative<runlog::IterationRecord>(e) ? ++long_records : ++long_restarts;
  }
  CHECK(short_records == 150 / 30);
  CHECK(long_records == 1260 / 30);
  CHECK(short_restarts == 1);
  CHECK(long_restarts > short_restarts);  // the long log holds the most restarts

  // regenerating produces identical bytes
  experiment::generate_logs(config);
  CHECK(testutil::read_file(paths[0]) == short_text);
  CHECK(testutil::read_file(paths[2]) == long_text);
}

TEST_CASE("config json round-trip") {
  testutil::TempDir tmp;
  ExperimentConfig config = ExperimentConfig::defaults();
  config.models = {mock_model("llama3:70b")};
  config.models[0].base_url = "http://localhost:11434/v1";
  config.models[0].api_key_env = "XES_LLM_API_KEY";
  config.repetitions = 4;
  config.auto_judge = true;
  config.es_config.seed = 99;
  config.output_dir = tmp.path / "out";

  const auto file = tmp.path / "config.json";
  testutil::write_file(file, experiment::config_to_json(config));
  const ExperimentConfig loaded = experiment::load_config(file);

  REQUIRE(loaded.models.size() == 1);
  CHECK(loaded.models[0].model_name == "llama3:70b");
  CHECK(loaded.models[0].base_url == "http://localhost:11434/v1");
  CHECK(loaded.models[0].api_key_env == "XES_LLM_API_KEY");
  CHECK(loaded.models[0].temperature == 0.0);
  CHECK(loaded.repetitions == 4);
  CHECK(loaded.auto_judge);
  CHECK(loaded.es_config.seed == 99);
  CHECK(loaded.strategies == config.strategies);
  REQUIRE(loaded.log_specs.size() == 3);
  CHECK(loaded.log_specs[2].seed == config.log_specs[2].seed);
  CHECK(loaded.output_dir == config.output_dir);
}

TEST_CASE("average formatting rounds half up at two decimals") {
  CHECK(experiment::format_average(13, 10) == "0.33");   // 0.325 rounds up
  CHECK(experiment::format_average(40, 10) == "1.00");
  CHECK(experiment::format_average(20, 10) == "0.50");
  CHECK(experiment::format_average(0, 10) == "0.00");
  CHECK(experiment::format_average(169, 50) == "0.85");  // 0.845 rounds up
  CHECK_THROWS_AS(experiment::format_average(0, 0), std::invalid_argument);
}

TEST_CASE("aggregate averages scored repetitions and rejects pending cells") {
  CellResult cell;
  cell.model_name = "m";
  cell.log_label = "short";
  for (int i = 0; i < 10; ++i) {
    experiment::RepScore rep;
    rep.rep = i;
    rep.best_ok = rep.worst_ok = true;
    rep.convergence = rep.local_optima = eval::Verdict::True;
    cell.reps.push_back(rep);
  }
  CHECK(experiment::aggregate(cell) == 1.0);

  CellResult two;
  for (int i = 0; i < 2; ++i) {
    experiment::RepScore rep;
    rep.rep = i;
    rep.best_ok = true;
    rep.worst_ok = (i == 1);
    rep.convergence = (i == 1) ? eval::Verdict::True : eval::Verdict::False;
    rep.local_optima = eval::Verdict::False;
    two.reps.push_back(rep);  // scores 0.25 and 0.75
  }
  CHECK(experiment::aggregate(two) == 0.5);

  CellResult pending = two;
  pending.reps[0].convergence = eval::Verdict::Pending;
  CHECK(pending.pending_reviews() == 1);
  CHECK_THROWS_AS(experiment::aggregate(pending), std::logic_error);
}

TEST_CASE("grid with always-correct mocks scores 1.0 everywhere") {
  testutil::TempDir tmp;
  const ExperimentConfig config = small_config(tmp.path);
  experiment::generate_logs(config);

  std::atomic<int> factory_calls{0};
  const auto cells = experiment::run_grid(config, correct_factory(config, &factory_calls));
  REQUIRE(cells.size() == 2 * 4 * 3);
  CHECK(factory_calls.load() == 2 * 4 * 3);  // one client per cell

  for (const CellResult& cell : cells) {
    CHECK(cell.n_scored() == config.repetitions);
    CHECK(cell.n_failed() == 0);
    CHECK(cell.pending_reviews() == 0);
    CHECK(experiment::aggregate(cell) == 1.0);
    for (const auto& rep : cell.reps) CHECK(rep.mean_mentioned);
  }

  // every response was persisted before scoring
  CHECK(std::filesystem::exists(tmp.path / "responses" / "mock-a" / "few_shot_cot" / "long" /
                                "rep2.txt"));
  CHECK(std::filesystem::exists(experiment::scores_path(config)));
}

TEST_CASE("the full protocol requests 480 completions") {
  testutil::TempDir tmp;
  ExperimentConfig config = ExperimentConfig::defaults();
  config.models = {mock_model("m1"), mock_model("m2"), mock_model("m3"), mock_model("m4")};
  config.repetitions = 10;
  config.output_dir = tmp.path;
  config.auto_judge = true;
  experiment::generate_logs(config);

  // wrapper that counts every completion before delegating to the mock
  struct CountingClient : llm::ChatClient {
    llm::MockChatClient inner;
    std::atomic<int>& counter;
    CountingClient(std::string answer, std::atomic<int>& c)
        : inner(std::vector<std::string>{std::move(answer)}), counter(c) {}
    llm::ChatResponse complete(const llm::ModelSpec& spec,
                               const prompt::PromptBundle& bundle) override {
      counter.fetch_add(1);
      return inner.complete(spec, bundle);
    }
  };

  std::atomic<int> completions{0};
  const auto cells = experiment::run_grid(
      config, [&](const llm::ModelSpec&, const experiment::GridKey& key) {
        return std::make_unique<CountingClient>(correct_answer_for(config, key.log_label),
                                                completions);
      });
  CHECK(completions.load() == 4 * 4 * 3 * 10);
  CHECK(cells.size() == 4 * 4 * 3);

  // four model groups of three log rows each
  const std::string table = experiment::render_text_table(cells, config);
  int data_rows = -2;  // header and rule
  for (char c : table) data_rows += (c == '\n');
  CHECK(data_rows == 4 * 3);
}

TEST_CASE("grid with swapped extremes scores 0.5 everywhere") {
  testutil::TempDir tmp;
  const ExperimentConfig config = small_config(tmp.path);
  experiment::generate_logs(config);

  const auto cells = experiment::run_grid(config, swapped_factory(config));
  for (const CellResult& cell : cells) {
    CHECK(experiment::aggregate(cell) == 0.5);
    for (const auto& rep : cell.reps) {
      CHECK_FALSE(rep.best_ok);
      CHECK_FALSE(rep.worst_ok);
      CHECK(rep.convergence == eval::Verdict::True);
      CHECK(rep.local_optima == eval::Verdict::True);
    }
  }
}

TEST_CASE("grid runs are byte-reproducible") {
  testutil::TempDir tmp;
  ExperimentConfig first = small_config(tmp.path / "a");
  ExperimentConfig second = small_config(tmp.path / "b");
  experiment::generate_logs(first);
  experiment::generate_logs(second);
  experiment::run_grid(first, correct_factory(first));
  experiment::run_grid(second, correct_factory(second));

  CHECK(testutil::read_file(experiment::scores_path(first)) ==
        testutil::read_file(experiment::scores_path(second)));
  CHECK(testutil::read_file(experiment::log_path(first, "long")) ==
        testutil::read_file(experiment::log_path(second, "long")));
  CHECK(testutil::read_file(tmp.path / "a" / "responses" / "mock-b" / "cot" / "middle" /
                            "rep1.txt") ==
        testutil::read_file(tmp.path / "b" / "responses" / "mock-b" / "cot" / "middle" /
                            "rep1.txt"));
}

TEST_CASE("rerunning skips repetitions whose responses are on disk") {
  testutil::TempDir tmp;
  const ExperimentConfig config = small_config(tmp.path);
  experiment::generate_logs(config);
  experiment::run_grid(config, correct_factory(config));

  // all responses persisted: a factory whose clients must not be used succeeds
  const experiment::ClientFactory poisoned = [](const llm::ModelSpec&,
                                                const experiment::GridKey&) {
    return std::make_unique<llm::MockChatClient>(
        std::vector<std::string>{"WRONG: clients must not be asked again"});
  };
  const auto cells = experiment::run_grid(config, poisoned);
  for (const CellResult& cell : cells) CHECK(experiment::aggregate(cell) == 1.0);
}

TEST_CASE("manual mode queues reviews and report picks up the verdicts") {
  testutil::TempDir tmp;
  ExperimentConfig config = small_config(tmp.path, 2);
  config.models = {mock_model("mock-a")};
  config.auto_judge = false;
  experiment::generate_logs(config);

  const auto cells = experiment::run_grid(config, correct_factory(config));
  int pending = 0;
  for (const CellResult& cell : cells) pending += cell.pending_reviews();
  CHECK(pending == 4 * 3 * 2 * 2);  // strategies x logs x reps x two criteria
  CHECK_THROWS_AS(experiment::aggregate(cells.front()), std::logic_error);
  CHECK_THROWS_AS(experiment::render_csv(cells, config), std::logic_error);

  auto queue = eval::load_review_queue(experiment::review_queue_path(config));
  REQUIRE(static_cast<int>(queue.size()) == pending);
  for (auto& item : queue) item.verdict = eval::Verdict::True;
  eval::save_review_queue(experiment::review_queue_path(config), queue);

  const auto reloaded = experiment::load_cells(config);
  REQUIRE(reloaded.size() == cells.size());
  for (const CellResult& cell : reloaded) {
    CHECK(cell.pending_reviews() == 0);
    CHECK(experiment::aggregate(cell) == 1.0);  // numeric criteria were already correct
  }
}

TEST_CASE("failing cells are recorded without aborting the grid") {
  testutil::TempDir tmp;
  const ExperimentConfig config = small_config(tmp.path);
  experiment::generate_logs(config);

  const experiment::ClientFactory flaky = [&config](const llm::ModelSpec& model,
                                                    const experiment::GridKey& key)
      -> std::unique_ptr<llm::ChatClient> {
    if (model.model_name == "mock-b") throw std::runtime_error("endpoint down");
    return std::make_unique<llm::MockChatClient>(
        std::vector<std::string>{correct_answer_for(config, key.log_label)});
  };

  const auto cells = experiment::run_grid(config, flaky);
  for (const CellResult& cell : cells) {
    if (cell.model_name == "mock-b") {
      CHECK(cell.n_scored() == 0);
      CHECK(cell.n_failed() == config.repetitions);
      CHECK(cell.reps[0].error.find("endpoint down") != std::string::npos);
    } else {
      CHECK(experiment::aggregate(cell) == 1.0);
    }
  }

  // the table renders failed cells as placeholders instead of throwing
  const std::string table = experiment::render_text_table(cells, config);
  CHECK(table.find("--") != std::string::npos);
  const std::string csv = experiment::render_csv(cells, config);
  CHECK(csv.find("mock-b,short,zero_shot,,0,3") != std::string::npos);
}

TEST_CASE("text table has the results-matrix shape") {
  testutil::TempDir tmp;
  const ExperimentConfig config = small_config(tmp.path);
  experiment::generate_logs(config);
  const auto cells = experiment::run_grid(config, correct_factory(config));

  const std::string table = experiment::render_text_table(cells, config);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < table.size()) {
    const std::size_t end = table.find('\n', start);
    lines.push_back(table.substr(start, end - start));
    start = end + 1;
  }
  REQUIRE(lines.size() == 2 + 2 * 3);  // header + rule + (models x logs)
  CHECK(lines[0].find("Model") == 0);
  CHECK(lines[0].find("Zero-Shot") != std::string::npos);
  CHECK(lines[0].find("Few-Shot") != std::string::npos);
  CHECK(lines[0].find("CoT") != std::string::npos);
  CHECK(lines[0].find("Few-Shot CoT") != std::string::npos);
  CHECK(lines[2].find("mock-a") == 0);  // model name on the first sub-row
  CHECK(lines[3].find("mock-a") == std::string::npos);
  CHECK(lines[3].find("middle") != std::string::npos);
  CHECK(lines[5].find("mock-b") == 0);

  // a one-cell grid renders a single data row
  ExperimentConfig tiny = config;
  tiny.models = {mock_model("mock-a")};
  tiny.strategies = {prompt::PromptStrategy::ZeroShot};
  tiny.log_specs = {config.log_specs[0]};
  std::vector<CellResult> one;
  for (const CellResult& cell : cells) {
    if (cell.model_name == "mock-a" && cell.strategy == prompt::PromptStrategy::ZeroShot &&
        cell.log_label == "short") {
      one.push_back(cell);
    }
  }
  const std::string tiny_table = experiment::render_text_table(one, tiny);
  int newlines = 0;
  for (char c : tiny_table) newlines += (c == '\n');
  CHECK(newlines == 3);

  // an incomplete grid is an error
  std::vector<CellResult> incomplete(cells.begin(), cells.end() - 1);
  CHECK_THROWS_AS(experiment::render_text_table(incomplete, config), std::logic_error);
}

TEST_CASE("the grid also runs over a real chat endpoint") {
  testutil::TempDir tmp;
  ExperimentConfig config = ExperimentConfig::defaults();
  config.output_dir = tmp.path;
  config.repetitions = 2;
  config.strategies = {prompt::PromptStrategy::ZeroShot, prompt::PromptStrategy::FewShot};
  config.log_specs = {config.log_specs[0]};  // short only
  config.auto_judge = true;
  experiment::generate_logs(config);
  const std::string answer = correct_answer_for(config, "short");

  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                hits.fetch_add(1);
                const auto request = nlohmann::json::parse(req.body);
                CHECK(request.at("temperature").get<double>() == 0.0);
                CHECK(request.at("messages")[0].at("role") == "user");
                res.set_content(
                    nlohmann::json{
                        {"model", "served-model"},
                        {"choices",
                         nlohmann::json::array(
                             {{{"message", {{"role", "assistant"}, {"content", answer}}}}})}}
                        .dump(),
                    "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  llm::ModelSpec served;
  served.model_name = "served-model";
  served.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  served.request_timeout = std::chrono::milliseconds(5000);
  config.models = {served};

  const auto cells = experiment::run_grid(config, experiment::http_client_factory());
  server.stop();
  listener.join();

  CHECK(hits.load() == 2 * 2);  // strategies x repetitions
  REQUIRE(cells.size() == 2);
  for (const CellResult& cell : cells) CHECK(experiment::aggregate(cell) == 1.0);
  CHECK(testutil::read_file(tmp.path / "responses" / "served-model" / "zero_shot" / "short" /
                            "rep0.txt") == answer);
}

TEST_CASE("csv round-trips the averages exactly") {
  testutil::TempDir tmp;
  const ExperimentConfig config = small_config(tmp.path);
  experiment::generate_logs(config);
  const auto cells = experiment::run_grid(config, swapped_factory(config));

  const std::string csv = experiment::render_csv(cells, config);
  std::size_t start = csv.find('\n') + 1;  // skip header
  int rows = 0;
  while (start < csv.size()) {
    const std::size_t end = csv.find('\n', start);
    const std::string line = csv.substr(start, end - start);
    start = end + 1;
    ++rows;

    std::vector<std::string> fields;
    std::size_t field_start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(field_start, i - field_start));
        field_start = i + 1;
      }
    }
    REQUIRE(fields.size() == 6);
    const auto strategy = prompt::strategy_from_name(fields[2]);
    REQUIRE(strategy.has_value());
    const double parsed = std::strtod(fields[3].c_str(), nullptr);
    CHECK(parsed == cell_average(cells, fields[0], *strategy, fields[1]));
    CHECK(fields[4] == std::to_string(config.repetitions));
    CHECK(fields[5] == "0");
  }
  CHECK(rows == 2 * 4 * 3);
}
