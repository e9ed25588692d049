#include "scla/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace scla::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kBoundTol = 1e-9;
constexpr int kDegenerateBeforeBland = 50;
constexpr int kRefactorEvery = 50;

enum class Place : unsigned char { basic, at_lower, at_upper };

// Standard form after shifting every variable to a zero lower bound:
// T x = b, 0 <= x <= range, with one basic variable per row.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), a0_(rows * cols, 0.0), rhs0_(rows, 0.0), t_(rows * cols, 0.0),
        b_(rows, 0.0), range_(cols, kInf), cost_(cols, 0.0), place_(cols, Place::at_lower),
        basis_(rows, 0), frozen_(cols, 0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * n_ + c]; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return t_[r * n_ + c]; }

  std::size_t m_, n_;
  std::vector<double> a0_;  // original standard-form matrix
  std::vector<double> rhs0_;
  std::vector<double> t_;  // B^-1 A
  std::vector<double> b_;  // current values of the basic variables
  std::vector<double> range_;
  std::vector<double> cost_;
  std::vector<double> d_;  // reduced costs
  std::vector<Place> place_;
  std::vector<std::size_t> basis_;
  std::vector<char> frozen_;  // columns that may never enter
  int iterations = 0;

  void price() {
    d_ = cost_;
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = cost_[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &t_[r * n_];
      for (std::size_t c = 0; c < n_; ++c) d_[c] -= cb * row[c];
    }
  }

  /// Rebuilds the tableau, basic values and reduced costs from the original
  /// data to shed accumulated rounding error.
  bool refactor() {
    const std::size_t m = m_;
    if (m == 0) {
      price();
      return true;
    }
    std::vector<double> binv(m * m, 0.0);
    std::vector<double> bm(m * m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t q = 0; q < m; ++q) bm[r * m + q] = a0_[r * n_ + basis_[q]];
      binv[r * m + r] = 1.0;
    }
    for (std::size_t col = 0; col < m; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m; ++r) {
        if (std::abs(bm[r * m + col]) > std::abs(bm[piv * m + col])) piv = r;
      }
      if (std::abs(bm[piv * m + col]) < 1e-14) return false;
      if (piv != col) {
        for (std::size_t k = 0; k < m; ++k) {
          std::swap(bm[piv * m + k], bm[col * m + k]);
          std::swap(binv[piv * m + k], binv[col * m + k]);
        }
      }
      const double inv = 1.0 / bm[col * m + col];
      for (std::size_t k = 0; k < m; ++k) {
        bm[col * m + k] *= inv;
        binv[col * m + k] *= inv;
      }
      for (std::size_t r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = bm[r * m + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) {
          bm[r * m + k] -= f * bm[col * m + k];
          binv[r * m + k] -= f * binv[col * m + k];
        }
      }
    }
    std::fill(t_.begin(), t_.end(), 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      double* out = &t_[r * n_];
      for (std::size_t k = 0; k < m; ++k) {
        const double f = binv[r * m + k];
        if (f == 0.0) continue;
        const double* src = &a0_[k * n_];
        for (std::size_t c = 0; c < n_; ++c) out[c] += f * src[c];
      }
    }
    std::vector<double> rhs = rhs0_;
    for (std::size_t c = 0; c < n_; ++c) {
      if (place_[c] != Place::at_upper) continue;
      for (std::size_t r = 0; r < m; ++r) rhs[r] -= a0_[r * n_ + c] * range_[c];
    }
    for (std::size_t r = 0; r < m; ++r) {
      double v = 0.0;
      for (std::size_t k = 0; k < m; ++k) v += binv[r * m + k] * rhs[k];
      b_[r] = v;
    }
    for (std::size_t q = 0; q < m; ++q) {
      for (std::size_t r = 0; r < m; ++r) t_[r * n_ + basis_[q]] = r == q ? 1.0 : 0.0;
    }
    price();
    return true;
  }

  void pivot(std::size_t r, std::size_t c) {
    double* prow = &t_[r * n_];
    const double inv = 1.0 / prow[c];
    for (std::size_t k = 0; k < n_; ++k) prow[k] *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * n_];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n_; ++k) row[k] -= f * prow[k];
      row[c] = 0.0;
    }
    const double f = d_[c];
    if (f != 0.0) {
      for (std::size_t k = 0; k < n_; ++k) d_[k] -= f * prow[k];
      d_[c] = 0.0;
    }
  }

  /// Returns false when the objective is unbounded below.
  bool optimize(int max_iterations) {
    int degenerate_run = 0;
    int since_refactor = 0;
    bool bland = false;
    while (true) {
      if (++iterations > max_iterations) {
        throw NumericError("lp: iteration limit reached (" + std::to_string(max_iterations) + ")");
      }
      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
      std::size_t enter = n_;
      double best = 0.0;
      for (std::size_t c = 0; c < n_; ++c) {
        if (place_[c] == Place::basic || frozen_[c]) continue;
        double score = 0.0;
        if (place_[c] == Place::at_lower && d_[c] < -kCostTol) score = -d_[c];
        if (place_[c] == Place::at_upper && d_[c] > kCostTol) score = d_[c];
        if (score <= 0.0) continue;
        if (bland) {
          enter = c;
          break;
        }
        if (score > best) {
          best = score;
          enter = c;
        }
      }
      if (enter == n_) {
        // confirm optimality on a fresh factorization
        if (since_refactor == 0) return true;
        refactor();
        since_refactor = 0;
        bool still_optimal = true;
        for (std::size_t c = 0; c < n_ && still_optimal; ++c) {
          if (place_[c] == Place::basic || frozen_[c]) continue;
          if ((place_[c] == Place::at_lower && d_[c] < -kCostTol) ||
              (place_[c] == Place::at_upper && d_[c] > kCostTol)) {
            still_optimal = false;
          }
        }
        if (still_optimal) return true;
        continue;
      }

      const double dir = place_[enter] == Place::at_lower ? 1.0 : -1.0;
      // Harris two-pass ratio test: find the largest step allowed when every
      // bound is relaxed by a small tolerance, then among the rows blocking
      // within that step take the one with the largest pivot.
      double relaxed = range_[enter];
      for (std::size_t r = 0; r < m_; ++r) {
        const double alpha = dir * at(r, enter);
        if (alpha > kPivotTol) {
          relaxed = std::min(relaxed, (b_[r] + kBoundTol) / alpha);
        } else if (alpha < -kPivotTol && range_[basis_[r]] < kInf) {
          relaxed = std::min(relaxed, (range_[basis_[r]] - b_[r] + kBoundTol) / -alpha);
        }
      }
      if (relaxed == kInf) return false;
      double step = range_[enter];
      std::size_t leave_row = m_;  // m_ means a bound flip
      bool leave_to_upper = false;
      double leave_pivot = 0.0;
      if (bland) {
        // textbook minimum ratio, ties to the smallest basic index
        double min_ratio = kInf;
        for (std::size_t r = 0; r < m_; ++r) {
          const double alpha = dir * at(r, enter);
          if (alpha > kPivotTol) {
            min_ratio = std::min(min_ratio, std::max(0.0, b_[r]) / alpha);
          } else if (alpha < -kPivotTol && range_[basis_[r]] < kInf) {
            min_ratio = std::min(min_ratio, std::max(0.0, range_[basis_[r]] - b_[r]) / -alpha);
          }
        }
        relaxed = min_ratio + 1e-12 * (1.0 + min_ratio);
      }
      for (std::size_t r = 0; r < m_; ++r) {
        const double alpha = dir * at(r, enter);
        double limit;
        bool to_upper;
        if (alpha > kPivotTol) {
          limit = std::max(0.0, b_[r]) / alpha;
          to_upper = false;
        } else if (alpha < -kPivotTol && range_[basis_[r]] < kInf) {
          limit = std::max(0.0, range_[basis_[r]] - b_[r]) / -alpha;
          to_upper = true;
        } else {
          continue;
        }
        if (limit > relaxed) continue;
        bool take;
        if (leave_row == m_) {
          take = true;
        } else if (bland) {
          take = basis_[r] < basis_[leave_row];
        } else {
          take = std::abs(alpha) > leave_pivot;
        }
        if (take) {
          step = limit;
          leave_row = r;
          leave_to_upper = to_upper;
          leave_pivot = std::abs(alpha);
        }
      }
      if (leave_row != m_ && range_[enter] <= step) {
        leave_row = m_;  // the entering variable reaches its other bound first
        step = range_[enter];
      }
      if (step == kInf) return false;

      degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
      if (degenerate_run > kDegenerateBeforeBland) bland = true;

      for (std::size_t r = 0; r < m_; ++r) b_[r] -= dir * step * at(r, enter);
      const double enter_value = (place_[enter] == Place::at_lower ? 0.0 : range_[enter]) + dir * step;

      if (leave_row == m_) {
        place_[enter] = place_[enter] == Place::at_lower ? Place::at_upper : Place::at_lower;
        continue;
      }
      const std::size_t leaving = basis_[leave_row];
      place_[leaving] = leave_to_upper ? Place::at_upper : Place::at_lower;
      pivot(leave_row, enter);
      basis_[leave_row] = enter;
      place_[enter] = Place::basic;
      b_[leave_row] = enter_value;
    }
  }
};

double row_activity(const Row& row, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) s += row.coefficients[c] * x[c];
  return s;
}

double row_violation(const Row& row, double activity) {
  switch (row.relation) {
    case Relation::less_equal:
      return std::max(0.0, activity - row.rhs);
    case Relation::greater_equal:
      return std::max(0.0, row.rhs - activity);
    case Relation::equal:
      return std::abs(activity - row.rhs);
  }
  return 0.0;
}

void validate(const LinearProgram& p) {
  const std::size_t n = p.num_vars();
  if (p.lower.size() != n || p.upper.size() != n) {
    throw std::invalid_argument("lp: bound vectors must match the objective dimension");
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (!std::isfinite(p.lower[c]) || !std::isfinite(p.upper[c])) {
      throw std::invalid_argument("lp: variable " + std::to_string(c) + " has a non-finite bound");
    }
    if (p.lower[c] > p.upper[c]) {
      throw std::invalid_argument("lp: variable " + std::to_string(c) + " has lower > upper");
    }
    if (!std::isfinite(p.objective[c])) {
      throw std::invalid_argument("lp: objective coefficient " + std::to_string(c) + " is not finite");
    }
  }
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    if (p.rows[r].coefficients.size() != n) {
      throw std::invalid_argument("lp: row " + std::to_string(r) + " has " +
                                  std::to_string(p.rows[r].coefficients.size()) +
                                  " coefficients, expected " + std::to_string(n));
    }
    if (!std::isfinite(p.rows[r].rhs)) {
      throw std::invalid_argument("lp: row " + std::to_string(r) + " has a non-finite rhs");
    }
  }
}

}  // namespace

std::size_t LinearProgram::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& row : rows) row.coefficients.push_back(0.0);
  return objective.size() - 1;
}

void LinearProgram::add_row(std::vector<double> coefficients, Relation relation, double rhs) {
  rows.push_back(Row{std::move(coefficients), relation, rhs});
}

std::string to_string(Status status) {
  switch (status) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
  }
  return "unknown";
}

LpSolution solve_lp(const LinearProgram& program) {
  validate(program);
  const std::size_t n = program.num_vars();
  const std::size_t m = program.rows.size();

  // Column layout: structurals, one slack per inequality row, then one
  // artificial per row that has no usable slack for the starting basis.
  // Rows are flipped to a nonnegative right-hand side and scaled so their
  // largest structural coefficient is 1.
  std::vector<std::size_t> slack_col(m, SIZE_MAX);
  std::size_t cols = n;
  for (std::size_t r = 0; r < m; ++r) {
    if (program.rows[r].relation != Relation::equal) slack_col[r] = cols++;
  }
  std::vector<double> rhs(m);
  std::vector<double> factor(m, 1.0);
  for (std::size_t r = 0; r < m; ++r) {
    const Row& row = program.rows[r];
    double b = row.rhs;
    double biggest = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      b -= row.coefficients[c] * program.lower[c];
      biggest = std::max(biggest, std::abs(row.coefficients[c]));
    }
    factor[r] = (b < 0.0 ? -1.0 : 1.0) / (biggest > 0.0 ? biggest : 1.0);
    rhs[r] = factor[r] * b;
  }
  std::vector<std::size_t> art_col(m, SIZE_MAX);
  for (std::size_t r = 0; r < m; ++r) {
    const Relation rel = program.rows[r].relation;
    const double slack_sign = rel == Relation::less_equal ? 1.0 : -1.0;
    const bool slack_usable = rel != Relation::equal && slack_sign * factor[r] > 0.0;
    if (!slack_usable) art_col[r] = cols++;
  }

  Tableau tab(m, cols);
  for (std::size_t c = 0; c < n; ++c) tab.range_[c] = program.upper[c] - program.lower[c];
  for (std::size_t r = 0; r < m; ++r) {
    const Row& row = program.rows[r];
    for (std::size_t c = 0; c < n; ++c) tab.a0_[r * cols + c] = factor[r] * row.coefficients[c];
    if (slack_col[r] != SIZE_MAX) {
      tab.a0_[r * cols + slack_col[r]] =
          (factor[r] > 0 ? 1.0 : -1.0) * (row.relation == Relation::less_equal ? 1.0 : -1.0);
    }
    tab.rhs0_[r] = rhs[r];
    if (art_col[r] != SIZE_MAX) {
      tab.a0_[r * cols + art_col[r]] = 1.0;
      tab.basis_[r] = art_col[r];
    } else {
      tab.basis_[r] = slack_col[r];
    }
    tab.place_[tab.basis_[r]] = Place::basic;
  }
  tab.t_ = tab.a0_;
  tab.b_ = tab.rhs0_;

  const int max_iterations = static_cast<int>(50 * (m + cols) + 1000);
  double scale = 1.0;
  for (double v : rhs) scale = std::max(scale, std::abs(v));

  LpSolution out;
  bool any_artificial = false;
  for (std::size_t r = 0; r < m; ++r) {
    if (art_col[r] != SIZE_MAX) {
      tab.cost_[art_col[r]] = 1.0;
      any_artificial = true;
    }
  }
  if (any_artificial) {
    tab.price();
    tab.optimize(max_iterations);
    tab.refactor();
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.cost_[tab.basis_[r]] > 0.0) infeasibility += std::max(0.0, tab.b_[r]);
    }
    if (infeasibility > 1e-9 * scale) {
      out.status = Status::infeasible;
      out.iterations = tab.iterations;
      return out;
    }
    // Drive zero-level artificials out of the basis where possible. A pivot
    // at zero level leaves every basic value unchanged.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.cost_[tab.basis_[r]] == 0.0) continue;
      std::size_t best_c = cols;
      double best_a = 1e-7;
      for (std::size_t c = 0; c < cols; ++c) {
        if (tab.place_[c] == Place::basic || tab.cost_[c] > 0.0) continue;
        if (std::abs(tab.at(r, c)) > best_a) {
          best_a = std::abs(tab.at(r, c));
          best_c = c;
        }
      }
      if (best_c == cols) continue;  // redundant row; the artificial stays at zero
      const double entering_value = tab.place_[best_c] == Place::at_upper ? tab.range_[best_c] : 0.0;
      tab.place_[tab.basis_[r]] = Place::at_lower;
      tab.pivot(r, best_c);
      tab.basis_[r] = best_c;
      tab.place_[best_c] = Place::basic;
      tab.b_[r] = entering_value;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (art_col[r] != SIZE_MAX) {
        tab.range_[art_col[r]] = 0.0;
        tab.frozen_[art_col[r]] = 1;
        tab.cost_[art_col[r]] = 0.0;
      }
    }
  }

  for (std::size_t c = 0; c < n; ++c) tab.cost_[c] = program.objective[c];
  if (!tab.refactor()) throw NumericError("lp: singular basis after phase one");
  const bool bounded = tab.optimize(max_iterations);
  out.iterations = tab.iterations;
  if (!bounded) {
    out.status = Status::unbounded;
    return out;
  }
  if (!tab.refactor()) throw NumericError("lp: singular final basis");

  std::vector<double> full(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    if (tab.place_[c] == Place::at_upper) full[c] = tab.range_[c];
  }
  for (std::size_t q = 0; q < m; ++q) full[tab.basis_[q]] = tab.b_[q];

  out.values.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = std::clamp(program.lower[c] + full[c], program.lower[c], program.upper[c]);
  }
  double residual = 0.0;
  for (const Row& row : program.rows) {
    residual = std::max(residual, row_violation(row, row_activity(row, out.values)));
  }
  out.max_residual = residual;
  if (residual > 1e-5) {
    std::ostringstream msg;
    msg << "lp: numeric instability, max constraint residual " << residual << " exceeds 1e-5";
    throw NumericError(msg.str());
  }
  double obj = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    obj += program.objective[c] * out.values[c];
    if (program.upper[c] >= kBig && out.values[c] >= kBig - 1e-6) out.touches_big = true;
  }
  out.objective_value = obj;
  out.status = Status::optimal;
  return out;
}

std::string dump_lp(const LinearProgram& program) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto terms = [&](const std::vector<double>& coef) {
    bool first = true;
    for (std::size_t c = 0; c < coef.size(); ++c) {
      if (coef[c] == 0.0) continue;
      os << (first ? "" : " ") << (coef[c] < 0 ? "- " : (first ? "" : "+ ")) << std::abs(coef[c])
         << " x" << c;
      first = false;
    }
    if (first) os << "0";
  };
  os << "min: ";
  terms(program.objective);
  os << "\n";
  for (std::size_t r = 0; r < program.rows.size(); ++r) {
    const Row& row = program.rows[r];
    os << "r" << r << ": ";
    terms(row.coefficients);
    switch (row.relation) {
      case Relation::less_equal:
        os << " <= ";
        break;
      case Relation::equal:
        os << " = ";
        break;
      case Relation::greater_equal:
        os << " >= ";
        break;
    }
    os << row.rhs << "\n";
  }
  for (std::size_t c = 0; c < program.num_vars(); ++c) {
    os << "bound x" << c << " " << program.lower[c] << " " << program.upper[c] << "\n";
  }
  return os.str();
}

}  // namespace scla::lp
