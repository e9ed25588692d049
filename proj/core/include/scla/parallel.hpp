#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scla/instance.hpp"
#include "scla/multipliers.hpp"
#include "scla/random.hpp"
#include "scla/subproblem.hpp"

namespace scla {

struct PartitionSpec {
  std::string name;
  int worker_count = 1;
  std::optional<double> time_limit_seconds;  ///< per task, nullopt = unlimited
};

struct PartitionReport {
  std::string name;
  std::vector<std::size_t> assigned;
  std::vector<std::size_t> completed;
  std::vector<std::size_t> failed;  ///< timed out, then resubmitted
  double wall_seconds = 0.0;
};

struct ScheduleReport {
  std::vector<PartitionReport> partitions;
  std::vector<std::size_t> resubmitted;
  /// Where resubmitted tasks ran: an unlimited partition's name, or
  /// "master" when every partition has a time limit.
  std::string resubmission_target;
  double wall_seconds = 0.0;
};

/// Seeded random split proportional to worker counts (largest remainder).
std::vector<std::vector<std::size_t>> partition_tasks(std::vector<std::size_t> station_ids,
                                                      const std::vector<PartitionSpec>& partitions,
                                                      Rng& rng);

/// Sort by size descending (ties by id), then deal round-robin to workers.
std::vector<std::vector<std::size_t>> balance_within_partition(
    const std::vector<std::size_t>& tasks, const std::vector<std::size_t>& sizes, int worker_count);

struct ExecutionOptions {
  std::vector<PartitionSpec> partitions{{"group", 1, std::nullopt}};
  std::uint64_t seed = 1;
  /// OS threads shared by all logical workers; 0 means hardware concurrency.
  unsigned max_threads = 0;
  SubproblemOptions subproblem;
  /// Fault injection for tests: return true to make the task time out on a
  /// time-limited partition.
  std::function<bool(std::size_t station, const std::string& partition)> inject_timeout;
};

struct IterationResult {
  std::vector<SubproblemSolution> solutions;  ///< indexed by station
  ScheduleReport report;
};

/// Solves every station subproblem under the partition scheme. Tasks that
/// time out on a limited partition are rerun without a limit. Results are
/// ordered by station, so they do not depend on completion order.
IterationResult execute_iteration(const Instance& instance, const Multipliers& multipliers,
                                  const ExecutionOptions& options);

}  // namespace scla
