#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>

#include "scla/instance.hpp"
#include "scla/solution.hpp"

namespace scla {

struct OracleLimits {
  std::size_t max_households = 6;
  std::size_t max_stations = 3;
  std::size_t max_charger_types = 2;
  int max_chargers_per_type = 3;
  double max_enumeration = 1e8;
};

struct OracleOptions {
  /// Cut branches whose running cost already exceeds the incumbent.
  bool pruning = true;
};

class OracleRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  bool feasible = false;
  double optimum = 0.0;  ///< USD/day, meaningful when feasible
  std::optional<FeasibleSolution> solution;
  std::size_t assignments_visited = 0;  ///< complete assignments evaluated
};

/// Size of the full y / s / x enumeration the instance implies.
double oracle_enumeration_count(const Instance& instance);

/// Exact optimum of the full model by exhaustive enumeration, with Erlang-C
/// waiting times at the realized rates. Throws OracleRefusal when the
/// instance exceeds the limits.
OracleResult solve_exact(const Instance& instance, const OracleLimits& limits = {},
                         const OracleOptions& options = {});

}  // namespace scla
