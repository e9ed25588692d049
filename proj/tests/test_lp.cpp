#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "scla/lp.hpp"
#include "scla/random.hpp"

using namespace scla::lp;

namespace {

std::vector<double> unit(std::size_t n, std::size_t c, double v = 1.0) {
  std::vector<double> row(n, 0.0);
  row[c] = v;
  return row;
}

bool feasible(const LinearProgram& p, const std::vector<double>& x, double tol) {
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (x[c] < p.lower[c] - tol || x[c] > p.upper[c] + tol) return false;
  }
  for (const auto& row : p.rows) {
    double a = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) a += row.coefficients[c] * x[c];
    if (row.relation == Relation::less_equal && a > row.rhs + tol) return false;
    if (row.relation == Relation::greater_equal && a < row.rhs - tol) return false;
    if (row.relation == Relation::equal && std::abs(a - row.rhs) > tol) return false;
  }
  return true;
}

double objective(const LinearProgram& p, const std::vector<double>& x) {
  double v = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) v += p.objective[c] * x[c];
  return v;
}

bool gauss(std::vector<double> a, std::vector<double>& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-10) return false;
    for (std::size_t k = 0; k < n; ++k) std::swap(a[piv * n + k], a[col * n + k]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t k = 0; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r * n + r];
  return true;
}

// Brute-force basis enumeration over inequality-only programs. Each row gets
// a slack in [0, inf). For every choice of m basic columns the nonbasic
// columns are put at the bound their reduced cost prefers; a basis that is
// then primal feasible is optimal. Returns the best optimum found.
std::optional<double> basis_enumeration_optimum(const LinearProgram& p) {
  const std::size_t n = p.num_vars();
  const std::size_t m = p.rows.size();
  const std::size_t cols = n + m;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> a(m * cols, 0.0), lo(cols, 0.0), hi(cols, inf), cost(cols, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r * cols + c] = p.rows[r].coefficients[c];
    a[r * cols + n + r] = p.rows[r].relation == Relation::less_equal ? 1.0 : -1.0;
  }
  for (std::size_t c = 0; c < n; ++c) {
    lo[c] = p.lower[c];
    hi[c] = p.upper[c];
    cost[c] = p.objective[c];
  }
  std::optional<double> best;
  std::vector<int> pick(cols, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(m), 1);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<std::size_t> basic;
    for (std::size_t c = 0; c < cols; ++c) {
      if (pick[c]) basic.push_back(c);
    }
    std::vector<double> bmat(m * m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t q = 0; q < m; ++q) bmat[r * m + q] = a[r * cols + basic[q]];
    }
    // duals: B^T y = c_B
    std::vector<double> bt(m * m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t q = 0; q < m; ++q) bt[r * m + q] = bmat[q * m + r];
    }
    std::vector<double> y(m);
    for (std::size_t q = 0; q < m; ++q) y[q] = cost[basic[q]];
    if (!gauss(bt, y, m)) continue;
    std::vector<double> x(cols, 0.0);
    bool ok = true;
    for (std::size_t c = 0; c < cols && ok; ++c) {
      if (pick[c]) continue;
      double d = cost[c];
      for (std::size_t r = 0; r < m; ++r) d -= y[r] * a[r * cols + c];
      if (d >= 0.0) {
        x[c] = lo[c];
      } else if (hi[c] < inf) {
        x[c] = hi[c];
      } else {
        ok = false;
      }
    }
    if (!ok) continue;
    std::vector<double> rhs(m);
    for (std::size_t r = 0; r < m; ++r) {
      double v = p.rows[r].rhs;
      for (std::size_t c = 0; c < cols; ++c) {
        if (!pick[c]) v -= a[r * cols + c] * x[c];
      }
      rhs[r] = v;
    }
    if (!gauss(bmat, rhs, m)) continue;
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t c = basic[q];
      if (rhs[q] < lo[c] - 1e-9 || rhs[q] > hi[c] + 1e-9) ok = false;
      x[c] = rhs[q];
    }
    if (!ok) continue;
    double v = 0.0;
    for (std::size_t c = 0; c < cols; ++c) v += cost[c] * x[c];
    if (!best || v < *best) best = v;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

LinearProgram random_program(scla::Rng& rng, std::size_t n, std::size_t m) {
  LinearProgram p(n);
  std::vector<double> x0(n);
  for (std::size_t c = 0; c < n; ++c) {
    p.lower[c] = rng.uniform() < 0.3 ? rng.uniform(-2.0, 0.0) : 0.0;
    p.upper[c] = p.lower[c] + rng.uniform(0.5, 4.0);
    p.objective[c] = rng.uniform(-3.0, 3.0);
    x0[c] = rng.uniform(p.lower[c], p.upper[c]);
  }
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<double> row(n);
    double act = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = rng.uniform() < 0.3 ? 0.0 : rng.uniform(-2.0, 2.0);
      act += row[c] * x0[c];
    }
    if (rng.uniform() < 0.5) {
      p.add_row(row, Relation::less_equal, act + rng.uniform(0.0, 1.0));
    } else {
      p.add_row(row, Relation::greater_equal, act - rng.uniform(0.0, 1.0));
    }
  }
  return p;
}

}  // namespace

TEST_CASE("single variable with a lower row") {
  LinearProgram p(1);
  p.objective = {1.0};
  p.upper = {10.0};
  p.add_row({1.0}, Relation::greater_equal, 3.0);
  const auto s = solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.values[0] == doctest::Approx(3.0));
  CHECK(s.objective_value == doctest::Approx(3.0));
}

TEST_CASE("textbook two-variable maximization") {
  LinearProgram p(2);
  p.objective = {-1.0, -1.0};
  p.upper = {1.0, 1.0};
  p.add_row({1.0, 1.0}, Relation::less_equal, 1.0);
  const auto s = solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective_value == doctest::Approx(-1.0));
  CHECK(s.values[0] + s.values[1] == doctest::Approx(1.0));
}

TEST_CASE("equality rows, negative right-hand sides and shifted bounds") {
  LinearProgram p(3);
  p.objective = {2.0, -1.0, 0.5};
  p.lower = {-5.0, 1.0, -2.0};
  p.upper = {5.0, 4.0, 2.0};
  p.add_row({1.0, 1.0, 1.0}, Relation::equal, -1.0);
  p.add_row({1.0, -1.0, 0.0}, Relation::greater_equal, -6.0);
  const auto s = solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  // x1 wants to be large (cost -1), x0 small (cost 2); x0 >= x1 - 6
  const auto oracle = basis_enumeration_optimum(
      [&] {
        LinearProgram q = p;
        q.rows[0].relation = Relation::less_equal;
        q.add_row({1.0, 1.0, 1.0}, Relation::greater_equal, -1.0);
        return q;
      }());
  REQUIRE(oracle);
  CHECK(s.objective_value == doctest::Approx(*oracle).epsilon(1e-9));
  CHECK(s.values[0] + s.values[1] + s.values[2] == doctest::Approx(-1.0));
}

TEST_CASE("infeasible program is reported") {
  LinearProgram p(2);
  p.upper = {1.0, 1.0};
  p.add_row({1.0, 1.0}, Relation::greater_equal, 3.0);
  CHECK(solve_lp(p).status == Status::infeasible);

  LinearProgram q(1);
  q.add_row({1.0}, Relation::equal, -2.0);
  CHECK(solve_lp(q).status == Status::infeasible);
}

TEST_CASE("default upper bound is BIG and is diagnosed") {
  LinearProgram p(1);
  p.objective = {-1.0};
  const auto s = solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.values[0] == kBig);
  CHECK(s.touches_big);
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram p(2);
  p.add_row({1.0}, Relation::less_equal, 1.0);
  CHECK_THROWS_AS(solve_lp(p), std::invalid_argument);
  LinearProgram q(1);
  q.lower = {2.0};
  q.upper = {1.0};
  CHECK_THROWS_AS(solve_lp(q), std::invalid_argument);
}

TEST_CASE("degenerate program that cycles under naive pricing") {
  // Beale's example, as a minimization with an added bound row.
  LinearProgram p(4);
  p.objective = {-0.75, 150.0, -0.02, 6.0};
  p.add_row({0.25, -60.0, -0.04, 9.0}, Relation::less_equal, 0.0);
  p.add_row({0.5, -90.0, -0.02, 3.0}, Relation::less_equal, 0.0);
  p.add_row({0.0, 0.0, 1.0, 0.0}, Relation::less_equal, 1.0);
  const auto s = solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective_value == doctest::Approx(-0.05));
}

TEST_CASE("add_variable pads existing rows") {
  LinearProgram p(1);
  p.add_row({1.0}, Relation::less_equal, 2.0);
  const auto v = p.add_variable(-1.0, 0.0, 5.0);
  CHECK(v == 1);
  CHECK(p.rows[0].coefficients.size() == 2);
  p.rows[0].coefficients[1] = 1.0;
  p.objective[0] = -2.0;
  const auto s = solve_lp(p);
  CHECK(s.objective_value == doctest::Approx(-4.0));
}

TEST_CASE("dump_lp is line oriented") {
  LinearProgram p(2);
  p.objective = {1.0, -2.5};
  p.add_row({1.0, 1.0}, Relation::less_equal, 4.0);
  p.add_row({0.0, 3.0}, Relation::equal, 1.0);
  const std::string text = dump_lp(p);
  CHECK(text.find("min: 1 x0 - 2.5 x1\n") == 0);
  CHECK(text.find("r0: 1 x0 + 1 x1 <= 4\n") != std::string::npos);
  CHECK(text.find("r1: 3 x1 = 1\n") != std::string::npos);
  CHECK(text.find("bound x1 0 1000000000\n") != std::string::npos);
}

TEST_CASE("random 20-variable programs agree with basis enumeration") {
  scla::Rng rng(101);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 6);
    LinearProgram p = random_program(rng, 20, m);
    const auto s = solve_lp(p);
    const auto oracle = basis_enumeration_optimum(p);
    REQUIRE(oracle);
    REQUIRE(s.status == Status::optimal);
    CHECK_MESSAGE(std::abs(s.objective_value - *oracle) <= 1e-6 * (1.0 + std::abs(*oracle)),
                  "trial " << trial << " lp " << s.objective_value << " oracle " << *oracle);
    CHECK(feasible(p, s.values, 1e-7));
  }
}

TEST_CASE("property: weak duality spot checks and determinism") {
  scla::Rng rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    const std::size_t m = 1 + rng.below(20);
    LinearProgram p = random_program(rng, n, m);
    const auto s = solve_lp(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(feasible(p, s.values, 1e-7));
    int found = 0;
    for (int k = 0; k < 4000 && found < 50; ++k) {
      std::vector<double> x(n);
      for (std::size_t c = 0; c < n; ++c) x[c] = rng.uniform(p.lower[c], p.upper[c]);
      if (!feasible(p, x, 0.0)) continue;
      ++found;
      CHECK(objective(p, x) >= s.objective_value - 1e-7);
    }
    const auto again = solve_lp(p);
    CHECK(again.values == s.values);
    CHECK(again.iterations == s.iterations);
  }
}
