#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scla/instance.hpp"

namespace scla {

/// Share of household i's demand sent to charger type `type` at station
/// index `station`. Deterministic solutions carry a single share of 1.
struct AssignmentShare {
  std::size_t station = 0;
  std::size_t type = 0;
  double fraction = 1.0;

  friend bool operator==(const AssignmentShare&, const AssignmentShare&) = default;
};

/// Objective terms in USD/day.
struct CostBreakdown {
  double opening = 0.0;
  double chargers = 0.0;
  double detour = 0.0;
  double waiting = 0.0;

  [[nodiscard]] double total() const { return opening + chargers + detour + waiting; }
};

struct BudgetFlags {
  bool station_budget = true;
  bool charger_budget = true;
  bool station_count = true;

  [[nodiscard]] bool all() const { return station_budget && charger_budget && station_count; }
};

/// A primal solution of the full model. Station and type fields are indices
/// into the instance vectors.
struct FeasibleSolution {
  std::size_t num_types = 0;
  std::vector<std::uint8_t> open;  ///< y per station
  std::vector<int> chargers;  ///< s, [station * num_types + type]
  std::vector<double> wait;  ///< W in minutes, same layout, 0 where s = 0
  std::vector<std::vector<AssignmentShare>> assignment;  ///< per household
  bool probabilistic = false;
  CostBreakdown cost;
  BudgetFlags budget;

  FeasibleSolution() = default;
  FeasibleSolution(std::size_t households, std::size_t stations, std::size_t types);

  [[nodiscard]] int charger(std::size_t j, std::size_t k) const { return chargers[j * num_types + k]; }
  [[nodiscard]] double wait_at(std::size_t j, std::size_t k) const { return wait[j * num_types + k]; }
  [[nodiscard]] double objective() const { return cost.total(); }
};

struct ConstraintCheck {
  std::string name;
  bool passed = true;
  std::string detail;  ///< first violation, empty when passed
};

struct SolutionReport {
  CostBreakdown cost;
  BudgetFlags budget;
  std::vector<ConstraintCheck> checks;
  /// Erlang-C time in system at the effective rates, [station * K + type].
  std::vector<double> recomputed_wait;
  std::vector<double> load;  ///< effective arrival rate per day, same layout
  bool constraints_ok = true;  ///< every check except the three budget rows

  [[nodiscard]] bool accepted() const { return constraints_ok && budget.all(); }
  [[nodiscard]] std::string summary() const;
};

/// Recomputes waiting times from the assignment and checks every constraint
/// of the model. Never throws on an infeasible solution; shape errors (wrong
/// vector sizes, out-of-range indices) are reported as failed checks too.
SolutionReport evaluate_solution(const FeasibleSolution& solution, const Instance& instance);

/// Stores the evaluated cost and budget flags on the solution.
SolutionReport refresh_solution(FeasibleSolution& solution, const Instance& instance);

/// Solution JSON: open stations with chargers and W per type, assignments,
/// cost breakdown and feasibility flags.
std::string solution_to_json(const FeasibleSolution& solution, const Instance& instance,
                             const SolutionReport& report);
FeasibleSolution solution_from_json(const std::string& text, const Instance& instance);

/// FeatureCollection of opened stations with their charger mix.
std::string stations_geojson(const FeasibleSolution& solution, const Instance& instance);

}  // namespace scla
