#include "xes/run_log.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "xes/errors.hpp"

namespace xes::runlog {

namespace {

constexpr double kScientificBelow = 1e-3;

std::string printf_double(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

// Consumes an exact literal prefix; returns false if `text` does not start with it.
bool eat(std::string_view& text, std::string_view literal) {
  if (!text.starts_with(literal)) return false;
  text.remove_prefix(literal.size());
  return true;
}

bool eat_long(std::string_view& text, long& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr == text.data()) return false;
  text.remove_prefix(static_cast<std::size_t>(ptr - text.data()));
  return true;
}

bool eat_double(std::string_view& text, double& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr == text.data()) return false;
  text.remove_prefix(static_cast<std::size_t>(ptr - text.data()));
  return true;
}

bool parse_iteration_line(std::string_view line, IterationRecord& out) {
  return eat(line, "Iteration ") && eat_long(line, out.iteration) && eat(line, ": Fitness: ") &&
         eat_double(line, out.fitness) && eat(line, ", Step size: ") &&
         eat_double(line, out.step_size) && line.empty();
}

bool parse_restart_line(std::string_view line, RestartRecord& out) {
  return eat(line, "Restarting at iteration ") && eat_long(line, out.iteration) &&
         eat(line, " due to stagnation") && line.empty();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

long entry_iteration(const LogEntry& entry) {
  return std::visit([](const auto& e) { return e.iteration; }, entry);
}

std::string format_fitness(double value) { return printf_double("%.4f", value); }

std::string format_step_size(double value) {
  if (value < kScientificBelow) return printf_double("%.4e", value);
  return printf_double("%.4f", value);
}

std::string format_entry(const LogEntry& entry) {
  if (const auto* rec = std::get_if<IterationRecord>(&entry)) {
    return "Iteration " + std::to_string(rec->iteration) + ": Fitness: " +
           format_fitness(rec->fitness) + ", Step size: " + format_step_size(rec->step_size);
  }
  const auto& restart = std::get<RestartRecord>(entry);
  return "Restarting at iteration " + std::to_string(restart.iteration) + " due to stagnation";
}

std::string write_log(const RunLog& log) {
  std::string out;
  for (const LogEntry& entry : log.entries) {
    out += format_entry(entry);
    out += '\n';
  }
  return out;
}

RunLog parse_log(std::string_view text) {
  RunLog log;
  std::size_t line_no = 0;
  long last_iteration = -1;
  while (!text.empty()) {
    ++line_no;
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) continue;

    LogEntry entry;
    if (IterationRecord rec; parse_iteration_line(line, rec)) {
      entry = rec;
    } else if (RestartRecord restart; parse_restart_line(line, restart)) {
      entry = restart;
    } else {
      throw ParseError(line_no, "unrecognized log line: " + std::string(line));
    }
    const long iteration = entry_iteration(entry);
    if (iteration < last_iteration) {
      throw ParseError(line_no, "iteration " + std::to_string(iteration) +
                                    " is lower than the preceding entry's " +
                                    std::to_string(last_iteration));
    }
    last_iteration = iteration;
    log.entries.push_back(entry);
  }
  return log;
}

GroundTruth derive_ground_truth(const RunLog& log) {
  GroundTruth truth;
  double sum = 0.0;
  for (const LogEntry& entry : log.entries) {
    if (const auto* rec = std::get_if<IterationRecord>(&entry)) {
      if (truth.record_count == 0) {
        truth.best_fitness = truth.worst_fitness = rec->fitness;
      } else {
        truth.best_fitness = std::min(truth.best_fitness, rec->fitness);
        truth.worst_fitness = std::max(truth.worst_fitness, rec->fitness);
      }
      sum += rec->fitness;
      ++truth.record_count;
    } else {
      ++truth.restart_count;
      truth.restart_iterations.push_back(std::get<RestartRecord>(entry).iteration);
    }
  }
  if (truth.record_count == 0) {
    throw std::invalid_argument("derive_ground_truth: log has no iteration record");
  }
  truth.mean_fitness = sum / static_cast<double>(truth.record_count);
  return truth;
}

}  // namespace xes::runlog
