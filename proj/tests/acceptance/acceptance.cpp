// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "scla/lagrangian.hpp"
#include "scla/oracle.hpp"
#include "scla/parallel.hpp"
#include "scla/queueing.hpp"
#include "scla/rounding.hpp"
#include "scla_cli/cli.hpp"

using namespace scla;
using scla::testing::oracle_scenario;
using scla::testing::random_tiny_spec;
using scla::testing::tiny_instance;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

/// Collects failures without stopping at the first one.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_++ == 0) first_ = what;
  }
  [[nodiscard]] Verdict verdict(const std::string& summary) const {
    std::ostringstream os;
    os << summary << "; " << checks_ << " checks";
    if (failures_ > 0) os << ", " << failures_ << " failed, first: " << first_;
    return {failures_ == 0, os.str()};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::string first_;
};

Verdict queueing_exactness() {
  using namespace queueing;
  Tally t;
  t.expect(std::abs(erlang_c_probability(0.5, 1) - 0.5) <= 1e-12, "P(0.5,1)");
  t.expect(std::abs(erlang_c_probability(0.5, 2) - 1.0 / 3.0) <= 1e-12, "P(0.5,2)");
  Rng rng(1);
  for (int n = 0; n < 200; ++n) {
    const double rho = rng.uniform(0.0, 0.99);
    const int s = 1 + static_cast<int>(rng.below(32));
    const double mu = rng.uniform(0.1, 10.0);
    const double mm = expected_time_in_system(rho, s, mu);
    t.expect(std::abs(mgs_time_in_system(rho, s, mu, 1.0) - mm) <= 1e-12 * (1.0 + mm),
             "mgs(c2=1) != M/M/s at rho=" + std::to_string(rho));
  }
  return t.verdict("Erlang-C closed forms and M/G/s reduction");
}

Verdict convexity_and_cuts() {
  using namespace queueing;
  Tally t;
  Rng rng(2);
  for (int n = 0; n < 1000; ++n) {
    const int s = 1 + static_cast<int>(rng.below(32));
    const double h = rng.uniform(1e-4, 0.05);
    const double mid = rng.uniform(h, 0.999 - h);
    const double lo = w_nu(mid - h, s);
    const double at = w_nu(mid, s);
    const double hi = w_nu(mid + h, s);
    t.expect(lo < at && at < hi, "monotonicity");
    t.expect((lo - 2.0 * at + hi) / (h * h) >= -1e-9, "convexity");
    const double anchor = rng.uniform(1e-3, 0.995);
    const double rho = rng.uniform(0.0, 0.999);
    t.expect(cut_at(anchor, s).at(rho) <= w_nu(rho, s) + 1e-7, "cut minorization");
  }
  return t.verdict("1000 samples, s in 1..32");
}

Verdict oracle_sandwich() {
  Tally t;
  Rng gen(3);
  int feasible = 0;
  int infeasible = 0;
  // 50 feasible draws; infeasible ones met on the way are checked too
  for (int trial = 0; feasible < 50 && trial < 1000; ++trial) {
    const Instance inst(tiny_instance(gen, random_tiny_spec(gen)));
    const OracleResult exact = solve_exact(inst);
    DualConfig c;
    c.max_iterations = 40;
    c.tolerance = 1e-6;
    c.seed = static_cast<std::uint64_t>(trial);
    const double tol = 1e-6 * (1.0 + std::abs(exact.optimum));
    const std::string tag = "instance " + std::to_string(trial);
    c.on_iteration = [&](const IterationRecord& rec) {
      const std::string at = tag + " iteration " + std::to_string(rec.iteration);
      if (exact.feasible) {
        t.expect(rec.lagrangian <= exact.optimum + tol, at + ": L above optimum");
        t.expect(rec.upper_bound >= exact.optimum - tol, at + ": UB below optimum");
      } else {
        t.expect(!std::isfinite(rec.upper_bound), at + ": UB on an infeasible instance");
      }
    };
    const DualResult r = run_dual_loop(inst, c);
    if (r.best_solution) t.expect(r.best_report->accepted(), tag + ": incumbent not accepted");
    feasible += exact.feasible;
    infeasible += !exact.feasible;
  }
  t.expect(feasible == 50, "fewer than 50 feasible instances drawn");
  return t.verdict(std::to_string(feasible) + " feasible instances, plus " +
                   std::to_string(infeasible) + " infeasible");
}

Verdict small_instance_convergence() {
  Tally t;
  std::ostringstream gaps;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ScenarioConfig sc;
    sc.seed = seed;
    sc.n_households = 50;
    sc.n_taz = 16;
    sc.n_depots = 4;
    sc.params.k_c = 1;
    const Instance inst(generate_scenario(sc));
    DualConfig c;
    c.max_iterations = 200;
    c.time_limit_seconds = 600.0;
    c.seed = seed;
    c.execution.partitions = {{"group", 8, std::nullopt}};
    c.execution.max_threads = 8;
    const DualResult r = run_dual_loop(inst, c);
    const double gap = r.model_gap();
    worst = std::max(worst, gap);
    gaps << (seed > 1 ? ", " : "") << gap;
    t.expect(gap <= 0.10, "seed " + std::to_string(seed) + " gap " + std::to_string(gap));
  }
  return t.verdict("|I|=50, k_c=1, |J|=20, 8 workers; gaps " + gaps.str() +
                   " (worst " + std::to_string(worst) + ")");
}

Verdict scenario_ordering() {
  Tally t;
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const OracleResult best =
        solve_exact(Instance(oracle_scenario(seed, LocationSet::both, AgencyPolicy::multi)));
    t.expect(best.feasible, "scenario 6 infeasible on seed " + std::to_string(seed));
    for (LocationSet loc : {LocationSet::taz, LocationSet::depot, LocationSet::both}) {
      for (AgencyPolicy pol : {AgencyPolicy::single, AgencyPolicy::multi}) {
        if (loc == LocationSet::both && pol == AgencyPolicy::multi) continue;
        std::optional<Instance> inst;
        try {
          inst.emplace(oracle_scenario(seed, loc, pol));
        } catch (const InstanceError&) {
          continue;  // a household has no eligible station: no feasible solution
        }
        const OracleResult r = solve_exact(*inst);
        if (!r.feasible) continue;
        ++compared;
        t.expect(best.optimum <= r.optimum,
                 "seed " + std::to_string(seed) + " " + to_string(loc) + "/" + to_string(pol));
      }
    }
  }
  return t.verdict("5 seeds, " + std::to_string(compared) + " feasible comparisons");
}

Verdict sensitivity_directions() {
  Tally t;
  int moved = 0;
  const std::vector<double> grid{-50.0, 0.0, 50.0, 100.0};
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const InstanceData base = oracle_scenario(seed, LocationSet::both, AgencyPolicy::multi);
    for (const std::string param : {"phi", "tau", "xi", "mu"}) {
      std::vector<double> values;
      for (double pct : grid) {
        const OracleResult r = solve_exact(Instance(cli::scale_parameter(base, param, pct)));
        values.push_back(r.feasible ? r.optimum : std::numeric_limits<double>::infinity());
      }
      for (std::size_t g = 1; g < values.size(); ++g) {
        const bool ok = param == "mu" ? values[g] <= values[g - 1] : values[g] >= values[g - 1];
        t.expect(ok, param + " on seed " + std::to_string(seed));
        moved += values[g] != values[g - 1];
      }
    }
  }
  t.expect(moved > 0, "no grid step changed the objective");
  return t.verdict("phi, tau, xi up; mu down over -50..100% on 4 seeds; " +
                   std::to_string(moved) + " of 48 steps moved the optimum");
}

Instance scheduler_instance() {
  Rng rng(7);
  InstanceData d = tiny_instance(rng, {30, 10, 2, 2, 2});
  d.params.station_budget = 1e6;
  d.params.charger_budget = 1e6;
  d.params.max_stations = 1000;
  return Instance(d);
}

double assembled(const Instance& inst, const Multipliers& m, const IterationResult& r) {
  std::vector<double> obj;
  for (const auto& s : r.solutions) obj.push_back(s.objective_value);
  return lagrangian_value(obj, m, inst.params());
}

Verdict scheduler() {
  Tally t;
  const Instance inst = scheduler_instance();
  Rng rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    Multipliers m(inst.num_households());
    for (double& z : m.zeta) z = rng.uniform(0.0, 200.0);
    m.beta_phi = rng.uniform(0.0, 0.5);
    m.beta_xi = rng.uniform(0.0, 0.5);
    m.nu = rng.uniform(0.0, 5.0);
    std::vector<double> values;
    for (int workers : {1, 4, 8}) {
      ExecutionOptions opt;
      opt.partitions = {{"group", workers, std::nullopt}};
      opt.seed = 5;
      opt.max_threads = static_cast<unsigned>(workers);
      values.push_back(assembled(inst, m, execute_iteration(inst, m, opt)));
    }
    t.expect(values[0] == values[1] && values[0] == values[2], "L differs across worker counts");

    ExecutionOptions base;
    base.partitions = {{"standard", 2, 30.0}, {"group", 1, std::nullopt}};
    base.seed = 5;
    const IterationResult clean = execute_iteration(inst, m, base);
    if (clean.report.partitions[0].assigned.empty()) {
      t.expect(false, "limited partition received no task");
      continue;
    }
    const std::size_t victim = clean.report.partitions[0].assigned.front();
    ExecutionOptions faulty = base;
    faulty.inject_timeout = [victim](std::size_t j, const std::string&) { return j == victim; };
    const IterationResult r = execute_iteration(inst, m, faulty);
    t.expect(r.report.resubmitted == std::vector<std::size_t>{victim}, "resubmission count");
    std::multiset<std::size_t> done;
    for (const auto& p : r.report.partitions) done.insert(p.completed.begin(), p.completed.end());
    bool complete = done.size() == inst.num_stations();
    for (std::size_t j = 0; j < inst.num_stations(); ++j) complete = complete && done.count(j) == 1;
    t.expect(complete, "incomplete solution set after resubmission");
    t.expect(r.solutions.size() == inst.num_stations(), "solution vector size");
    t.expect(assembled(inst, m, r) == values[0], "L changed by the resubmission");
  }
  return t.verdict("1/4/8 workers and one injected timeout, 3 multiplier draws");
}

FractionalPoint random_point(const Instance& inst, Rng& rng) {
  FractionalPoint f = FractionalPoint::empty(inst);
  const std::size_t nk = f.num_types;
  for (std::size_t j = 0; j < inst.num_stations(); ++j) {
    f.open[j] = rng.uniform() < 0.4;
    if (!f.open[j]) continue;
    for (std::size_t k = 0; k < nk; ++k) {
      const auto cap = static_cast<std::size_t>(inst.charger_types()[k].max_per_station);
      f.chargers[j * nk + k] = static_cast<int>(rng.below(cap + 1));
      f.wait[j * nk + k] = rng.uniform(0.0, 600.0);
    }
  }
  for (auto& row : f.x) {
    double left = 1.0;
    for (double& v : row) {
      if (rng.uniform() < 0.5) continue;
      v = rng.uniform(0.0, left);
      left -= v;
    }
  }
  return f;
}

InstanceData rounding_instance(Rng& rng) {
  ScenarioConfig sc;
  sc.seed = rng.next();
  sc.n_households = 200;
  sc.n_taz = 8 + static_cast<int>(rng.below(20));
  sc.n_depots = 2 + static_cast<int>(rng.below(4));
  sc.params.k_c = 1 + static_cast<int>(rng.below(4));
  sc.params.max_wait = rng.uniform() < 0.3 ? rng.uniform(0.0, 30.0) : rng.uniform(30.0, 600.0);
  if (rng.uniform() < 0.25) sc.params.station_budget = rng.uniform(0.0, 400.0);
  if (rng.uniform() < 0.25) sc.params.charger_budget = rng.uniform(0.0, 400.0);
  if (rng.uniform() < 0.25) sc.params.max_stations = 1 + static_cast<int>(rng.below(5));
  InstanceData d = generate_scenario(sc);
  for (auto& t : d.charger_types) {
    t.max_per_station = 1 + static_cast<int>(rng.below(6));
  }
  return d;
}

Verdict rounding_feasibility() {
  Tally t;
  Rng gen(9);
  int succeeded = 0;
  int accepted = 0;
  int flagged = 0;
  int failed = 0;
  std::optional<Instance> inst;
  for (int run = 0; run < 1000; ++run) {
    if (run % 10 == 0) inst.emplace(rounding_instance(gen));
    const FractionalPoint f = run % 3 == 0 ? FractionalPoint::empty(*inst) : random_point(*inst, gen);
    RoundingOptions opt;
    opt.mode = run % 4 == 3 ? RoundingMode::probabilistic : RoundingMode::deterministic;
    opt.refit_chargers = run % 5 != 0;
    Rng rng(static_cast<std::uint64_t>(run));
    const RoundingResult r = primal_heuristic(*inst, f, rng, opt);
    const std::string tag = "run " + std::to_string(run);
    if (!r.success) {
      ++failed;
      t.expect(!r.failure.empty(), tag + ": failure without a reason");
      t.expect(!r.usable_as_upper_bound(), tag + ": failed run usable as a bound");
      continue;
    }
    ++succeeded;
    if (!r.solution) {
      t.expect(false, tag + ": success without a solution");
      continue;
    }
    // independent re-evaluation of what the heuristic returned
    const SolutionReport rep = evaluate_solution(*r.solution, *inst);
    t.expect(rep.constraints_ok, tag + ": silent infeasible success: " + rep.summary());
    const bool budget_ok = rep.budget.all();
    t.expect(r.solution->budget.all() == budget_ok, tag + ": budget flags disagree");
    t.expect(r.usable_as_upper_bound() == (rep.accepted() && !r.solution->probabilistic),
             tag + ": usable_as_upper_bound disagrees with evaluation");
    if (rep.accepted()) {
      ++accepted;
    } else {
      ++flagged;
    }
  }
  std::ostringstream os;
  os << "1000 runs, |I|=200: " << accepted << " accepted, " << flagged
     << " flagged over budget, " << failed << " explicit failures";
  (void)succeeded;
  return t.verdict(os.str());
}

Verdict gigs_conservatism() {
  using namespace queueing;
  Tally t;
  Rng rng(10);
  for (int n = 0; n < 500; ++n) {
    const double rho = rng.uniform(0.0, 0.99);
    const int s = 1 + static_cast<int>(rng.below(16));
    const double mu = rng.uniform(0.1, 10.0);
    const double ca = rng.uniform(0.0, 0.999);
    const double cs = rng.uniform(0.0, 2.0);
    const double wait = 1.0 / mu;
    const double under = gigs_time_in_system(rho, s, mu, ca, cs) - wait;
    const double poisson = gigs_time_in_system(rho, s, mu, 1.0, cs) - wait;
    t.expect(under <= poisson + 1e-15 * (1.0 + poisson), "draw " + std::to_string(n));
  }
  return t.verdict("500 draws with c_a^2 < 1");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"queueing exactness", queueing_exactness},
      {"convexity and cut suite", convexity_and_cuts},
      {"oracle sandwich", oracle_sandwich},
      {"small-instance convergence", small_instance_convergence},
      {"scenario ordering", scenario_ordering},
      {"sensitivity directions", sensitivity_directions},
      {"scheduler determinism and fault tolerance", scheduler},
      {"rounding feasibility", rounding_feasibility},
      {"GI/G/s conservatism", gigs_conservatism},
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[c].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("criterion %zu %s: %s (%s, %.2fs)\n", c + 1, criteria[c].first.c_str(),
                v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
