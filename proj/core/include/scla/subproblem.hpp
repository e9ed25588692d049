#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "scla/instance.hpp"
#include "scla/multipliers.hpp"
#include "scla/queueing.hpp"

namespace scla {

/// Every nonzero charger vector s with 0 <= s_k <= max_k, ordered by
/// installation cost, then total charger count, then lexicographically.
class ConfigCatalog {
 public:
  ConfigCatalog(std::span<const ChargerType> types, std::size_t cap);

  [[nodiscard]] std::size_t size() const { return cost_.size(); }
  [[nodiscard]] std::size_t num_types() const { return k_; }
  [[nodiscard]] std::span<const int> config(std::size_t n) const {
    return {counts_.data() + n * k_, k_};
  }
  /// Sum of install_cost * s_k.
  [[nodiscard]] double install_cost(std::size_t n) const { return cost_[n]; }
  [[nodiscard]] int total(std::size_t n) const { return total_[n]; }

 private:
  std::size_t k_ = 0;
  std::vector<int> counts_;
  std::vector<double> cost_;
  std::vector<int> total_;
};

/// Everything SP_j needs, detached from the instance so it can travel to a
/// worker by value.
struct SubproblemInput {
  std::size_t station = 0;
  double open_cost = 0.0;
  std::vector<double> lambda;  ///< per household of I_j, charges/day
  std::vector<double> detour;  ///< per household of I_j, minutes
  std::vector<double> zeta;  ///< per household of I_j
  std::vector<ChargerType> types;
  double beta_phi = 0.0;
  double beta_xi = 0.0;
  double nu = 0.0;
  GlobalParams params;
  std::shared_ptr<const ConfigCatalog> catalog;  ///< built on demand when null
};

SubproblemInput make_subproblem_input(const Instance& instance, std::size_t station,
                                      const Multipliers& multipliers);

struct SubproblemOptions {
  std::size_t max_configs = 30000;
  int max_cuts = 50;
  double cut_tolerance = 1e-6;
  bool pruning = true;
  /// Checked between configurations.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct SubproblemSolution {
  std::size_t station = 0;
  double objective_value = 0.0;
  bool open = false;
  std::vector<int> chargers;  ///< per type
  /// Row-major [household of I_j][type].
  std::vector<double> x;
  std::vector<double> wait;  ///< minutes per type, 0 where no charger
  int cuts_used = 0;
  bool converged = true;
  std::size_t configs_evaluated = 0;

  [[nodiscard]] double x_at(std::size_t local, std::size_t k) const {
    return x[local * chargers.size() + k];
  }
};

class SubproblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeadlineExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact optimum of the partially relaxed station subproblem, by enumeration
/// of charger configurations with a cutting-plane LP per configuration.
/// Throws SubproblemError when the configuration count exceeds the cap and
/// DeadlineExceeded when the deadline passes between configurations.
SubproblemSolution solve_station_subproblem(const SubproblemInput& input,
                                            const SubproblemOptions& options = {});

/// One supporting cut of type k's waiting-time curve.
struct TypedCut {
  std::size_t type = 0;
  queueing::CutCoefficients cut;
};

struct InnerResult {
  bool feasible = false;
  double value = 0.0;  ///< includes the fixed charges of the configuration
  std::vector<double> x;  ///< [household][type], zero for unused types
  std::vector<double> q;  ///< same layout, linearized W * x
  std::vector<double> wait;  ///< per type, minutes
};

/// The LP for a fixed charger vector (at least one positive entry) under the
/// given cuts.
InnerResult inner_congestion_lp(const SubproblemInput& input, std::span<const int> chargers,
                                std::span<const TypedCut> cuts);

/// Adjusted fixed charge (1+beta_phi) C_phi + nu + (1+beta_xi) sum C_xi s.
double configuration_fixed_charge(const SubproblemInput& input, std::span<const int> chargers);

/// True time in system (minutes) of type k at station load `load` per day.
double station_wait_minutes(const ChargerType& type, int servers, double load_per_day);

}  // namespace scla
