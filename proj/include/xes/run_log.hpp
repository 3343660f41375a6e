#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace xes::runlog {

struct IterationRecord {
  long iteration = 0;
  double fitness = 0.0;
  double step_size = 0.0;
};

struct RestartRecord {
  long iteration = 0;
};

using LogEntry = std::variant<IterationRecord, RestartRecord>;

long entry_iteration(const LogEntry& entry);

struct RunLog {
  std::vector<LogEntry> entries;
  std::string source_label;  // e.g. "short", "middle", "long"
};

/// Fixed-point with exactly four decimals ("1.9899").
std::string format_fitness(double value);

/// Scientific with a four-decimal mantissa below 1e-3 ("8.5475e-07"),
/// otherwise fixed-point with four decimals ("0.4503").
std::string format_step_size(double value);

/// "Iteration 30: Fitness: 1.9899, Step size: 8.5475e-07" or
/// "Restarting at iteration 149 due to stagnation".
std::string format_entry(const LogEntry& entry);

/// Newline-joined entries with a single trailing newline; "" for an empty log.
/// This text form is the public log-file contract.
std::string write_log(const RunLog& log);

/// Inverse of write_log at the printed precision. Blank lines are skipped;
/// any other unrecognized line raises ParseError with its line number, as
/// does a decrease in iteration numbers.
RunLog parse_log(std::string_view text);

/// Statistics a summary is scored against. Fitness aggregates cover the
/// iteration records only; restart data comes from the restart records.
struct GroundTruth {
  double best_fitness = 0.0;
  double worst_fitness = 0.0;
  double mean_fitness = 0.0;
  int restart_count = 0;
  std::vector<long> restart_iterations;
  std::size_t record_count = 0;
};

/// Throws std::invalid_argument when the log has no iteration record.
GroundTruth derive_ground_truth(const RunLog& log);

}  // namespace xes::runlog
