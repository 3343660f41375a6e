#include "xes/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace xes::eval {

using nlohmann::json;

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// '.' between two digits belongs to a number, not a sentence boundary.
std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool decimal_point = c == '.' && i > 0 && i + 1 < text.size() && is_digit(text[i - 1]) &&
                               is_digit(text[i + 1]);
    if ((c == '.' && !decimal_point) || c == '!' || c == '?' || c == '\n') {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

// Decimal or scientific literals, e.g. "1.9899", "8.5475e-07", ".5", "-3".
std::vector<double> extract_numbers(std::string_view sentence) {
  std::vector<double> numbers;
  std::size_t i = 0;
  while (i < sentence.size()) {
    const char c = sentence[i];
    const bool sign_start = (c == '-' || c == '+') && i + 1 < sentence.size() &&
                            (is_digit(sentence[i + 1]) || sentence[i + 1] == '.');
    const bool dot_start = c == '.' && i + 1 < sentence.size() && is_digit(sentence[i + 1]);
    if (is_digit(c) || sign_start || dot_start) {
      double value = 0.0;
      const char* begin = sentence.data() + i;
      const char* end = sentence.data() + sentence.size();
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec == std::errc{} && ptr != begin) {
        numbers.push_back(value);
        i += static_cast<std::size_t>(ptr - begin);
        continue;
      }
    }
    ++i;
  }
  return numbers;
}

bool contains_any(const std::string& lower_sentence, std::initializer_list<const char*> keywords) {
  for (const char* keyword : keywords) {
    if (lower_sentence.find(keyword) != std::string::npos) return true;
  }
  return false;
}

constexpr std::initializer_list<const char*> kBestKeywords = {"best", "lowest", "minimum",
                                                              "optimal fitness"};
constexpr std::initializer_list<const char*> kWorstKeywords = {"worst", "highest", "maximum"};
constexpr std::initializer_list<const char*> kOptimaKeywords = {"local optim", "restart",
                                                                "stagnat", "plateau"};
constexpr std::initializer_list<const char*> kImproveKeywords = {"improv", "converg", "decreas",
                                                                 "progress", "reduc"};
constexpr std::initializer_list<const char*> kFlatKeywords = {
    "never changed", "no improvement",   "did not improve", "remained constant",
    "unchanged",     "stayed the same",  "no change",       "remained flat"};
constexpr std::initializer_list<const char*> kNegations = {"no ", "not ", "without", "never",
                                                           "none"};

bool values_varied(const runlog::GroundTruth& truth) {
  return truth.worst_fitness > truth.best_fitness;
}

}  // namespace

ExtractedClaims extract_numeric_claims(std::string_view text) {
  ExtractedClaims claims;
  for (const std::string& sentence : split_sentences(text)) {
    const std::vector<double> numbers = extract_numbers(sentence);
    if (numbers.empty()) continue;
    const std::string lower = to_lower(sentence);
    const bool best = contains_any(lower, kBestKeywords);
    const bool worst = contains_any(lower, kWorstKeywords);
    for (double value : numbers) {
      claims.all_numbers.push_back(value);
      if (best) claims.best_candidates.push_back(value);
      if (worst) claims.worst_candidates.push_back(value);
    }
  }
  return claims;
}

bool value_matches(double claimed, double truth) {
  if (runlog::format_fitness(claimed) == runlog::format_fitness(truth)) return true;
  return std::abs(claimed - truth) <= 1e-3 * std::abs(truth);
}

NumericVerdict score_numeric(const ExtractedClaims& claims, const runlog::GroundTruth& truth) {
  NumericVerdict verdict;
  verdict.best_ok = std::any_of(claims.best_candidates.begin(), claims.best_candidates.end(),
                                [&](double v) { return value_matches(v, truth.best_fitness); });
  verdict.worst_ok = std::any_of(claims.worst_candidates.begin(), claims.worst_candidates.end(),
                                 [&](double v) { return value_matches(v, truth.worst_fitness); });
  return verdict;
}

std::string_view criterion_name(Criterion criterion) {
  return criterion == Criterion::Convergence ? "convergence" : "local_optima";
}

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Pending: return "pending";
  }
  throw std::invalid_argument("verdict_name: unknown verdict");
}

std::optional<Criterion> criterion_from_name(std::string_view name) {
  if (name == "convergence") return Criterion::Convergence;
  if (name == "local_optima") return Criterion::LocalOptima;
  return std::nullopt;
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
  if (name == "true") return Verdict::True;
  if (name == "false") return Verdict::False;
  if (name == "pending") return Verdict::Pending;
  return std::nullopt;
}

EvaluationScore finalize_score(bool best_ok, bool worst_ok, Verdict convergence,
                               Verdict local_optima) {
  if (convergence == Verdict::Pending || local_optima == Verdict::Pending) {
    throw std::logic_error("finalize_score: a qualitative verdict is still pending");
  }
  EvaluationScore score;
  score.best_ok = best_ok;
  score.worst_ok = worst_ok;
  score.convergence_ok = convergence;
  score.local_optima_ok = local_optima;
  const int points = static_cast<int>(best_ok) + static_cast<int>(worst_ok) +
                     static_cast<int>(convergence == Verdict::True) +
                     static_cast<int>(local_optima == Verdict::True);
  score.normalized = static_cast<double>(points) / 4.0;
  return score;
}

std::string review_item_id(std::string_view run_key, Criterion criterion) {
  return std::string(run_key) + ":" + std::string(criterion_name(criterion));
}

namespace {

json truth_to_json(const runlog::GroundTruth& truth) {
  return {{"best_fitness", truth.best_fitness},
          {"worst_fitness", truth.worst_fitness},
          {"mean_fitness", truth.mean_fitness},
          {"restart_count", truth.restart_count},
          {"restart_iterations", truth.restart_iterations},
          {"record_count", truth.record_count}};
}

runlog::GroundTruth truth_from_json(const json& j) {
  runlog::GroundTruth truth;
  truth.best_fitness = j.at("best_fitness").get<double>();
  truth.worst_fitness = j.at("worst_fitness").get<double>();
  truth.mean_fitness = j.at("mean_fitness").get<double>();
  truth.restart_count = j.at("restart_count").get<int>();
  truth.restart_iterations = j.at("restart_iterations").get<std::vector<long>>();
  truth.record_count = j.at("record_count").get<std::size_t>();
  return truth;
}

}  // namespace

std::string review_item_to_json(const ReviewItem& item) {
  const json j = {{"id", item.id},
                  {"run_key", item.run_key},
                  {"response_text", item.response_text},
                  {"ground_truth", truth_to_json(item.ground_truth)},
                  {"criterion", criterion_name(item.criterion)},
                  {"verdict", verdict_name(item.verdict)}};
  return j.dump();
}

ReviewItem review_item_from_json(const std::string& line) {
  const json j = json::parse(line);
  ReviewItem item;
  item.id = j.at("id").get<std::string>();
  item.run_key = j.at("run_key").get<std::string>();
  item.response_text = j.at("response_text").get<std::string>();
  item.ground_truth = truth_from_json(j.at("ground_truth"));
  const auto criterion = criterion_from_name(j.at("criterion").get<std::string>());
  const auto verdict = verdict_from_name(j.at("verdict").get<std::string>());
  if (!criterion || !verdict) throw std::invalid_argument("review item: bad criterion or verdict");
  item.criterion = *criterion;
  item.verdict = *verdict;
  return item;
}

std::vector<ReviewItem> enqueue_manual(const std::filesystem::path& queue_file,
                                       std::string_view response_text,
                                       const runlog::GroundTruth& truth,
                                       std::string_view run_key) {
  std::vector<ReviewItem> items;
  for (Criterion criterion : {Criterion::Convergence, Criterion::LocalOptima}) {
    ReviewItem item;
    item.id = review_item_id(run_key, criterion);
    item.run_key = std::string(run_key);
    item.response_text = std::string(response_text);
    item.ground_truth = truth;
    item.criterion = criterion;
    items.push_back(std::move(item));
  }
  if (!queue_file.parent_path().empty()) std::filesystem::create_directories(queue_file.parent_path());
  std::ofstream out(queue_file, std::ios::app);
  if (!out) throw std::runtime_error("cannot open review queue: " + queue_file.string());
  for (const ReviewItem& item : items) out << review_item_to_json(item) << '\n';
  if (!out.flush()) throw std::runtime_error("failed writing review queue: " + queue_file.string());
  return items;
}

std::vector<ReviewItem> load_review_queue(const std::filesystem::path& queue_file) {
  std::vector<ReviewItem> items;
  std::ifstream in(queue_file);
  if (!in) return items;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    items.push_back(review_item_from_json(line));
  }
  return items;
}

void save_review_queue(const std::filesystem::path& queue_file,
                       const std::vector<ReviewItem>& items) {
  if (!queue_file.parent_path().empty()) std::filesystem::create_directories(queue_file.parent_path());
  std::ofstream out(queue_file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open review queue: " + queue_file.string());
  for (const ReviewItem& item : items) out << review_item_to_json(item) << '\n';
  if (!out.flush()) throw std::runtime_error("failed writing review queue: " + queue_file.string());
}

bool auto_judge(std::string_view response_text, const runlog::GroundTruth& truth,
                Criterion criterion) {
  const std::vector<std::string> sentences = split_sentences(response_text);

  if (criterion == Criterion::LocalOptima) {
    bool positive_mention = false;
    for (const std::string& sentence : sentences) {
      const std::string lower = to_lower(sentence);
      if (contains_any(lower, kOptimaKeywords) && !contains_any(lower, kNegations)) {
        positive_mention = true;
        break;
      }
    }
    return truth.restart_count > 0 ? positive_mention : !positive_mention;
  }

  bool claims_improvement = false;
  bool claims_flat = false;
  for (const std::string& sentence : sentences) {
    const std::string lower = to_lower(sentence);
    if (contains_any(lower, kFlatKeywords)) claims_flat = true;
    if (contains_any(lower, kImproveKeywords) && !contains_any(lower, kNegations)) {
      claims_improvement = true;
    }
  }
  if (values_varied(truth)) return claims_improvement;
  return claims_flat && !claims_improvement;
}

}  // namespace xes::eval
