#include "scla/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace scla {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs job(n) for n in [0, count) on up to `threads` OS threads.
template <class Job>
void run_pool(std::size_t count, unsigned threads, Job job) {
  if (count == 0) return;
  const std::size_t t = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t n = next++; n < count; n = next++) job(n);
  };
  if (t == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t n = 0; n < t; ++n) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<std::vector<std::size_t>> partition_tasks(std::vector<std::size_t> station_ids,
                                                      const std::vector<PartitionSpec>& partitions,
                                                      Rng& rng) {
  if (partitions.empty()) throw std::invalid_argument("partition_tasks: no partitions");
  double workers = 0.0;
  for (const auto& p : partitions) {
    if (p.worker_count < 1) {
      throw std::invalid_argument("partition '" + p.name + "': worker count must be >= 1");
    }
    workers += p.worker_count;
  }
  const std::size_t n = station_ids.size();
  std::vector<std::size_t> quota(partitions.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t given = 0;
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    const double exact = static_cast<double>(n) * partitions[p].worker_count / workers;
    quota[p] = static_cast<std::size_t>(std::floor(exact));
    given += quota[p];
    remainder.emplace_back(exact - std::floor(exact), p);
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; given < n; ++r, ++given) ++quota[remainder[r % remainder.size()].second];

  rng.shuffle(std::span<std::size_t>(station_ids));
  std::vector<std::vector<std::size_t>> out(partitions.size());
  std::size_t pos = 0;
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    out[p].assign(station_ids.begin() + static_cast<std::ptrdiff_t>(pos),
                  station_ids.begin() + static_cast<std::ptrdiff_t>(pos + quota[p]));
    pos += quota[p];
  }
  return out;
}

std::vector<std::vector<std::size_t>> balance_within_partition(
    const std::vector<std::size_t>& tasks, const std::vector<std::size_t>& sizes, int worker_count) {
  if (worker_count < 1) throw std::invalid_argument("balance_within_partition: worker_count < 1");
  if (sizes.size() != tasks.size()) {
    throw std::invalid_argument("balance_within_partition: one size per task required");
  }
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
    return tasks[a] < tasks[b];
  });
  std::vector<std::vector<std::size_t>> batches(static_cast<std::size_t>(worker_count));
  for (std::size_t n = 0; n < order.size(); ++n) {
    batches[n % batches.size()].push_back(tasks[order[n]]);
  }
  return batches;
}

IterationResult execute_iteration(const Instance& instance, const Multipliers& multipliers,
                                  const ExecutionOptions& options) {
  const auto t0 = Clock::now();
  const std::size_t nj = instance.num_stations();
  const unsigned threads = options.max_threads > 0
                               ? options.max_threads
                               : std::max(1u, std::thread::hardware_concurrency());
  auto catalog = std::make_shared<const ConfigCatalog>(instance.charger_types(),
                                                       options.subproblem.max_configs);

  std::vector<std::size_t> ids(nj);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng(options.seed);
  const auto split = partition_tasks(ids, options.partitions, rng);

  struct Job {
    std::size_t partition;
    std::vector<std::size_t> batch;
  };
  std::vector<Job> jobs;
  IterationResult result;
  result.solutions.resize(nj);
  result.report.partitions.resize(options.partitions.size());
  for (std::size_t p = 0; p < options.partitions.size(); ++p) {
    auto& pr = result.report.partitions[p];
    pr.name = options.partitions[p].name;
    pr.assigned = split[p];
    std::sort(pr.assigned.begin(), pr.assigned.end());
    std::vector<std::size_t> sizes;
    for (std::size_t j : split[p]) sizes.push_back(instance.households_of(j).size());
    for (auto& b : balance_within_partition(split[p], sizes, options.partitions[p].worker_count)) {
      if (!b.empty()) jobs.push_back({p, std::move(b)});
    }
  }

  std::mutex mu;
  std::exception_ptr error;
  std::size_t error_station = nj;
  auto record_error = [&](std::size_t station) {
    std::lock_guard<std::mutex> lock(mu);
    if (station < error_station) {
      error_station = station;
      error = std::current_exception();
    }
  };
  auto solve = [&](std::size_t j, std::optional<Clock::time_point> deadline) {
    SubproblemInput in = make_subproblem_input(instance, j, multipliers);
    in.catalog = catalog;
    SubproblemOptions so = options.subproblem;
    so.deadline = deadline;
    return solve_station_subproblem(in, so);
  };

  std::vector<double> partition_end(options.partitions.size(), 0.0);
  run_pool(jobs.size(), threads, [&](std::size_t n) {
    const Job& job = jobs[n];
    const PartitionSpec& spec = options.partitions[job.partition];
    std::vector<std::size_t> done;
    std::vector<std::size_t> failed;
    for (std::size_t j : job.batch) {
      try {
        if (spec.time_limit_seconds && options.inject_timeout && options.inject_timeout(j, spec.name)) {
          throw DeadlineExceeded("injected timeout");
        }
        std::optional<Clock::time_point> deadline;
        if (spec.time_limit_seconds) {
          deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                        std::chrono::duration<double>(*spec.time_limit_seconds));
        }
        result.solutions[j] = solve(j, deadline);
        done.push_back(j);
      } catch (const DeadlineExceeded&) {
        failed.push_back(j);
      } catch (...) {
        if (spec.time_limit_seconds) {
          failed.push_back(j);  // gets a second chance without a limit
        } else {
          record_error(j);
        }
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    auto& pr = result.report.partitions[job.partition];
    pr.completed.insert(pr.completed.end(), done.begin(), done.end());
    pr.failed.insert(pr.failed.end(), failed.begin(), failed.end());
    partition_end[job.partition] = std::max(partition_end[job.partition], seconds_since(t0));
  });
  if (error) std::rethrow_exception(error);

  std::vector<std::size_t> retry;
  for (auto& pr : result.report.partitions) {
    std::sort(pr.completed.begin(), pr.completed.end());
    std::sort(pr.failed.begin(), pr.failed.end());
    retry.insert(retry.end(), pr.failed.begin(), pr.failed.end());
  }
  std::sort(retry.begin(), retry.end());
  if (!retry.empty()) {
    std::size_t target = options.partitions.size();
    for (std::size_t p = 0; p < options.partitions.size(); ++p) {
      if (!options.partitions[p].time_limit_seconds) {
        target = p;
        break;
      }
    }
    if (target == options.partitions.size()) {
      result.report.partitions.push_back({"master", {}, {}, {}, 0.0});
      partition_end.push_back(0.0);
    }
    auto& tr = result.report.partitions[target];
    result.report.resubmission_target = tr.name;
    const unsigned retry_threads =
        target < options.partitions.size()
            ? static_cast<unsigned>(std::min<long>(threads, options.partitions[target].worker_count))
            : 1u;
    run_pool(retry.size(), retry_threads, [&](std::size_t n) {
      try {
        result.solutions[retry[n]] = solve(retry[n], std::nullopt);
      } catch (...) {
        record_error(retry[n]);
      }
    });
    if (error) std::rethrow_exception(error);
    tr.assigned.insert(tr.assigned.end(), retry.begin(), retry.end());
    tr.completed.insert(tr.completed.end(), retry.begin(), retry.end());
    std::sort(tr.assigned.begin(), tr.assigned.end());
    std::sort(tr.completed.begin(), tr.completed.end());
    partition_end[target] = seconds_since(t0);
    result.report.resubmitted = retry;
  }
  for (std::size_t p = 0; p < result.report.partitions.size(); ++p) {
    result.report.partitions[p].wall_seconds = partition_end[p];
  }
  result.report.wall_seconds = seconds_since(t0);
  return result;
}

}  // namespace scla
