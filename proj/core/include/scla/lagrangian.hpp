#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scla/instance.hpp"
#include "scla/multipliers.hpp"
#include "scla/parallel.hpp"
#include "scla/rounding.hpp"
#include "scla/solution.hpp"
#include "scla/subproblem.hpp"

namespace scla {

/// Multiplier groups that carry their own step length.
enum class MultiplierGroup : std::size_t { zeta = 0, beta_phi = 1, beta_xi = 2, nu = 3 };
inline constexpr std::size_t kGroups = 4;

enum class StepColor { red, yellow, green };

struct Subgradients {
  std::vector<double> zeta;
  double beta_phi = 0.0;
  double beta_xi = 0.0;
  double nu = 0.0;

  /// Squared norm and inner product restricted to one group.
  [[nodiscard]] double norm2(MultiplierGroup g) const;
  [[nodiscard]] double dot(const Subgradients& other, MultiplierGroup g) const;
};

struct IterationRecord {
  int iteration = 0;
  double lagrangian = 0.0;
  double best_lower_bound = 0.0;
  double upper_bound = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();  ///< 1 - best LB / UB
  std::array<double, kGroups> step_length{};
  double seconds = 0.0;
  bool upper_bound_improved = false;
  std::size_t resubmissions = 0;
};

struct DualState {
  Multipliers multipliers;
  Multipliers best_multipliers;
  double best_lower_bound = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();
  std::array<double, kGroups> step_length{0.1, 0.1, 0.1, 0.1};
  std::optional<Subgradients> aggregated;
  int iteration = 0;
  std::vector<IterationRecord> history;
};

/// Cost no feasible solution can exceed: every station open with every
/// charger at its cap, each household on its longest detour and waiting at
/// the limit. Serves as the upper bound before an incumbent exists.
double feasible_cost_ceiling(const Instance& instance);

/// Sum of subproblem optima plus the constant multiplier terms.
double lagrangian_value(std::span<const double> subproblem_objectives,
                        const Multipliers& multipliers, const GlobalParams& params);

/// Constraint violations of the aggregated subproblem solutions.
Subgradients subgradients(std::span<const SubproblemSolution> solutions, const Instance& instance);

struct MultiplierUpdate {
  Multipliers multipliers;
  bool frozen = false;  ///< the bound difference was not positive
};

/// Projected subgradient step per group with s = lambda * (UB - best L) / |g|^2.
MultiplierUpdate update_multipliers(const DualState& state, const Subgradients& g,
                                    double upper_bound);

/// Red / yellow / green step length adaptation for the subgradient `g` that
/// produced the multipliers just evaluated. Also folds `g` into the
/// aggregated subgradient.
std::array<StepColor, kGroups> adapt_step_lengths(DualState& state, const Subgradients& g,
                                                  double lagrangian_new);

struct DualConfig {
  double tolerance = 0.01;  ///< stop once 1 - LB/UB falls to this
  int max_iterations = 200;
  double time_limit_seconds = 600.0;
  RoundingMode rounding = RoundingMode::deterministic;
  RoundingOptions rounding_options;
  std::uint64_t seed = 1;
  ExecutionOptions execution;
  std::function<void(const IterationRecord&)> on_iteration;
};

struct DualResult {
  DualState state;
  std::optional<FeasibleSolution> best_solution;  ///< incumbent behind the UB
  std::optional<SolutionReport> best_report;
  /// Most recent successful rounding in the configured mode.
  std::optional<FeasibleSolution> last_rounding;
  std::vector<std::string> warnings;
  std::string stop_reason;

  [[nodiscard]] double lower_bound() const { return state.best_lower_bound; }
  [[nodiscard]] double upper_bound() const { return state.upper_bound; }
  /// |UB - LB| / UB, infinite without an upper bound.
  [[nodiscard]] double model_gap() const;
};

DualResult run_dual_loop(const Instance& instance, const DualConfig& config);

/// iter,L,UB,gap,seconds
std::string bounds_csv(std::span<const IterationRecord> history);
/// iteration,L,best_L,UB,gap,lambda_zeta,lambda_beta_phi,lambda_beta_xi,lambda_nu,seconds
std::string dual_log_csv(std::span<const IterationRecord> history);

}  // namespace scla
