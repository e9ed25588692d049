#pragma once

#include <cstddef>
#include <vector>

namespace scla {

/// Lagrange multipliers of the relaxed coupling constraints: assignment
/// coverage per household, the two budgets and the station count cap.
struct Multipliers {
  std::vector<double> zeta;
  double beta_phi = 0.0;
  double beta_xi = 0.0;
  double nu = 0.0;

  Multipliers() = default;
  explicit Multipliers(std::size_t households) : zeta(households, 0.0) {}

  friend bool operator==(const Multipliers&, const Multipliers&) = default;
};

}  // namespace scla
