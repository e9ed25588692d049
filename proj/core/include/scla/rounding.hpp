#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scla/instance.hpp"
#include "scla/random.hpp"
#include "scla/solution.hpp"
#include "scla/subproblem.hpp"

namespace scla {

enum class RoundingMode { deterministic, probabilistic };

std::string to_string(RoundingMode mode);
RoundingMode parse_rounding_mode(const std::string& text);

/// Aggregated fractional point of one dual iteration, indexed like the
/// instance: y per station, s and W per (station, type), x per household and
/// neighborhood slot and type.
struct FractionalPoint {
  std::size_t num_types = 0;
  std::vector<std::uint8_t> open;
  std::vector<int> chargers;  ///< [station * K + type]
  std::vector<double> wait;  ///< [station * K + type]
  /// x[i][m * K + k] for station stations_of(i)[m].
  std::vector<std::vector<double>> x;

  /// All zero: no station open, nothing assigned.
  static FractionalPoint empty(const Instance& instance);
  /// Scatter per-station subproblem solutions (one per station, in order).
  static FractionalPoint from_subproblems(const Instance& instance,
                                          std::span<const SubproblemSolution> solutions);

  [[nodiscard]] double x_at(const Instance& instance, std::size_t i, std::size_t j,
                            std::size_t k) const;
};

struct OpeningResult {
  std::vector<std::uint8_t> open;
  std::vector<std::size_t> uncovered;  ///< household indices, empty on success
};

/// Coverage step: opens unopened stations one at a time, drawn with
/// probability proportional to the number of uncovered households they reach.
OpeningResult adaptive_station_opening(const Instance& instance,
                                       std::span<const std::uint8_t> seed_open, Rng& rng);

/// Running state of one assignment pass.
struct AssignmentState {
  std::size_t num_types = 0;
  std::vector<double> demand;  ///< D per (station, type)
  std::vector<int> chargers;  ///< s'
  std::vector<double> wait;  ///< W'
  std::vector<int> usage;  ///< households assigned per (station, type)
  /// (station, type, fraction) per household
  std::vector<std::vector<AssignmentShare>> assignment;

  AssignmentState(const Instance& instance, const FractionalPoint& point);
};

/// Tries to add household i (scaled by `weight`) to pair (j, k): grows the
/// charger count from max(s', s_req) until the waiting bound holds. Commits
/// and returns true on success, leaves the state untouched otherwise.
bool check_and_assign(const Instance& instance, std::size_t i, std::size_t j, std::size_t k,
                      AssignmentState& state, double weight = 1.0);

struct AssignmentPass {
  AssignmentState state;
  std::vector<std::uint8_t> used;  ///< stations that received demand
  std::vector<std::size_t> unassigned;
  /// Pairs that could not be sized in probabilistic mode.
  std::vector<std::size_t> unsizable_pairs;
};

/// One household assignment iteration over the stations marked in `open`.
AssignmentPass assignment_iteration(const Instance& instance, const FractionalPoint& point,
                                    std::span<const std::uint8_t> open, RoundingMode mode,
                                    Rng& rng);

/// Opens the closed station reaching the most unassigned households, lowest
/// index on ties. Returns the index, or nullopt when nothing can be opened.
std::optional<std::size_t> add_overload_station(const Instance& instance,
                                                std::span<const std::size_t> unassigned,
                                                std::vector<std::uint8_t>& open);

struct RoundingOptions {
  RoundingMode mode = RoundingMode::deterministic;
  /// Re-pick each used pair's charger count to minimize charger plus waiting
  /// cost at the final load, keeping the charger budget if it held before.
  bool refit_chargers = true;
};

struct RoundingResult {
  bool success = false;
  std::string failure;  ///< reason when !success
  std::optional<FeasibleSolution> solution;
  std::optional<SolutionReport> report;
  int passes = 0;
  std::vector<std::size_t> overload_opened;

  /// Success, every constraint holds, and the solution is integral.
  [[nodiscard]] bool usable_as_upper_bound() const {
    return success && report && report->accepted() && solution && !solution->probabilistic;
  }
};

/// Coverage, assignment passes with overload repair until everyone is
/// assigned or no station can be added, then evaluation.
RoundingResult primal_heuristic(const Instance& instance, const FractionalPoint& point, Rng& rng,
                                const RoundingOptions& options = {});

}  // namespace scla
