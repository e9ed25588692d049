#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

// Small dense bounded-variable simplex. Sized for the station subproblem
// relaxations (tens to a few thousand columns), not for general use.
namespace scla::lp {

inline constexpr double kBig = 1e9;

enum class Relation { less_equal, equal, greater_equal };

struct Row {
  std::vector<double> coefficients;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

/// minimize objective . x  s.t. rows, lower <= x <= upper.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Row> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  LinearProgram() = default;
  explicit LinearProgram(std::size_t num_vars)
      : objective(num_vars, 0.0), lower(num_vars, 0.0), upper(num_vars, kBig) {}

  [[nodiscard]] std::size_t num_vars() const { return objective.size(); }

  /// Appends a variable and returns its index; existing rows are padded.
  std::size_t add_variable(double cost, double lo = 0.0, double hi = kBig);
  void add_row(std::vector<double> coefficients, Relation relation, double rhs);
};

enum class Status { optimal, infeasible, unbounded };

struct LpSolution {
  Status status = Status::infeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  int iterations = 0;
  /// Some variable with the default upper bound ended at kBig.
  bool touches_big = false;
  double max_residual = 0.0;
};

/// Residuals above the acceptance threshold after refinement.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument for malformed programs and NumericError when
/// the final residual exceeds 1e-5 or the iteration cap is hit.
LpSolution solve_lp(const LinearProgram& program);

/// Line-oriented text dump: objective line, one line per row, then bounds.
std::string dump_lp(const LinearProgram& program);

std::string to_string(Status status);

}  // namespace scla::lp
