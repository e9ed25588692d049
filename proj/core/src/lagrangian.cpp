#include "scla/lagrangian.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace scla {

namespace {

constexpr double kStepMin = 1e-4;
constexpr double kStepMax = 2.0 - 1e-6;
constexpr double kResidue = 1e-9;

std::size_t idx(MultiplierGroup g) { return static_cast<std::size_t>(g); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

double Subgradients::norm2(MultiplierGroup g) const {
  switch (g) {
    case MultiplierGroup::zeta: {
      double s = 0.0;
      for (double v : zeta) s += v * v;
      return s;
    }
    case MultiplierGroup::beta_phi: return beta_phi * beta_phi;
    case MultiplierGroup::beta_xi: return beta_xi * beta_xi;
    case MultiplierGroup::nu: return nu * nu;
  }
  return 0.0;
}

double Subgradients::dot(const Subgradients& o, MultiplierGroup g) const {
  switch (g) {
    case MultiplierGroup::zeta: {
      double s = 0.0;
      for (std::size_t i = 0; i < zeta.size() && i < o.zeta.size(); ++i) s += zeta[i] * o.zeta[i];
      return s;
    }
    case MultiplierGroup::beta_phi: return beta_phi * o.beta_phi;
    case MultiplierGroup::beta_xi: return beta_xi * o.beta_xi;
    case MultiplierGroup::nu: return nu * o.nu;
  }
  return 0.0;
}

double feasible_cost_ceiling(const Instance& instance) {
  const auto& p = instance.params();
  const auto types = instance.charger_types();
  double per_station_chargers = 0.0;
  double longest_wait = 0.0;
  for (const auto& t : types) {
    per_station_chargers += t.install_cost * t.max_per_station;
    longest_wait = std::max(longest_wait, wait_limit(t, p));
  }
  double total = 0.0;
  for (const auto& st : instance.stations()) total += st.open_cost + per_station_chargers;
  const auto households = instance.households();
  for (std::size_t i = 0; i < households.size(); ++i) {
    double worst = 0.0;
    for (std::size_t m = 0; m < instance.stations_of(i).size(); ++m) {
      worst = std::max(worst, instance.detour(i, m));
    }
    total += households[i].lambda *
             (p.detour_cost * p.detour_cost_multiplier * worst + p.wait_cost * longest_wait);
  }
  return total;
}

double lagrangian_value(std::span<const double> subproblem_objectives,
                        const Multipliers& multipliers, const GlobalParams& params) {
  double v = 0.0;
  for (double sp : subproblem_objectives) v += sp;
  for (double z : multipliers.zeta) v += z;
  v -= multipliers.beta_phi * params.station_budget;
  v -= multipliers.beta_xi * params.charger_budget;
  v -= multipliers.nu * params.max_stations;
  return v;
}

Subgradients subgradients(std::span<const SubproblemSolution> solutions, const Instance& instance) {
  const std::size_t nh = instance.num_households();
  const auto& p = instance.params();
  const auto types = instance.charger_types();
  Subgradients g;
  g.zeta.assign(nh, 1.0);
  double opening = 0.0;
  double install = 0.0;
  double open_count = 0.0;
  for (const auto& sol : solutions) {
    const std::size_t j = sol.station;
    const auto members = instance.households_of(j);
    if (sol.open) {
      opening += instance.stations()[j].open_cost;
      open_count += 1.0;
    }
    for (std::size_t k = 0; k < sol.chargers.size(); ++k) {
      install += types[k].install_cost * sol.chargers[k];
    }
    for (std::size_t local = 0; local < members.size(); ++local) {
      for (std::size_t k = 0; k < sol.chargers.size(); ++k) {
        g.zeta[static_cast<std::size_t>(members[local])] -= sol.x_at(local, k);
      }
    }
  }
  // LP round-off leaves residues like 1e-16 that would blow up the step
  // lambda * delta / |g|^2, so they count as exact zeros
  auto snap = [](double v, double scale) {
    return std::abs(v) <= kResidue * (1.0 + std::abs(scale)) ? 0.0 : v;
  };
  for (double& z : g.zeta) z = snap(z, 1.0);
  g.beta_phi = snap(opening - p.station_budget, p.station_budget);
  g.beta_xi = snap(install - p.charger_budget, p.charger_budget);
  g.nu = snap(open_count - p.max_stations, p.max_stations);
  return g;
}

MultiplierUpdate update_multipliers(const DualState& state, const Subgradients& g,
                                    double upper_bound) {
  MultiplierUpdate out{state.multipliers, false};
  const double delta = upper_bound - state.best_lower_bound;
  if (!(delta > 0.0)) {
    out.frozen = true;
    return out;
  }
  auto step = [&](MultiplierGroup grp) {
    const double n2 = g.norm2(grp);
    return n2 > 0.0 ? state.step_length[idx(grp)] * delta / n2 : 0.0;
  };
  const double sz = step(MultiplierGroup::zeta);
  if (sz > 0.0) {
    for (std::size_t i = 0; i < out.multipliers.zeta.size(); ++i) {
      out.multipliers.zeta[i] = std::max(0.0, out.multipliers.zeta[i] + sz * g.zeta[i]);
    }
  }
  out.multipliers.beta_phi =
      std::max(0.0, out.multipliers.beta_phi + step(MultiplierGroup::beta_phi) * g.beta_phi);
  out.multipliers.beta_xi =
      std::max(0.0, out.multipliers.beta_xi + step(MultiplierGroup::beta_xi) * g.beta_xi);
  out.multipliers.nu = std::max(0.0, out.multipliers.nu + step(MultiplierGroup::nu) * g.nu);
  return out;
}

std::array<StepColor, kGroups> adapt_step_lengths(DualState& state, const Subgradients& g,
                                                  double lagrangian_new) {
  std::array<StepColor, kGroups> colors{};
  if (!state.aggregated) state.aggregated = g;
  const Subgradients& agg = *state.aggregated;
  const bool improved = lagrangian_new > state.best_lower_bound;
  for (std::size_t n = 0; n < kGroups; ++n) {
    const auto grp = static_cast<MultiplierGroup>(n);
    double& len = state.step_length[n];
    if (!improved) {
      colors[n] = StepColor::red;
      len *= 0.9;
    } else {
      // <g - g_bar, g>
      const double d = g.norm2(grp) - agg.dot(g, grp);
      if (d >= 0.0) {
        colors[n] = StepColor::green;
        len *= 1.1;
      } else {
        colors[n] = StepColor::yellow;
      }
    }
    len = std::clamp(len, kStepMin, kStepMax);
  }
  Subgradients next = agg;
  for (std::size_t i = 0; i < next.zeta.size() && i < g.zeta.size(); ++i) {
    next.zeta[i] = 0.5 * next.zeta[i] + 0.5 * g.zeta[i];
  }
  next.beta_phi = 0.5 * next.beta_phi + 0.5 * g.beta_phi;
  next.beta_xi = 0.5 * next.beta_xi + 0.5 * g.beta_xi;
  next.nu = 0.5 * next.nu + 0.5 * g.nu;
  state.aggregated = std::move(next);
  return colors;
}

double DualResult::model_gap() const {
  const double ub = state.upper_bound;
  if (!std::isfinite(ub) || ub == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(ub - state.best_lower_bound) / ub;
}

DualResult run_dual_loop(const Instance& instance, const DualConfig& config) {
  if (!(config.tolerance > 0.0 && config.tolerance <= 1.0)) {
    throw std::invalid_argument("dual loop: tolerance must lie in (0, 1]");
  }
  if (config.max_iterations < 1 || !(config.time_limit_seconds > 0.0)) {
    throw std::invalid_argument("dual loop: iteration and time caps must be positive");
  }
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  DualResult out;
  DualState& st = out.state;
  st.multipliers = Multipliers(instance.num_households());
  st.best_multipliers = st.multipliers;
  std::optional<Subgradients> used_gradient;  // the g that produced st.multipliers
  const double ceiling = feasible_cost_ceiling(instance);

  while (true) {
    ++st.iteration;
    ExecutionOptions exec = config.execution;
    exec.seed = config.execution.seed + static_cast<std::uint64_t>(st.iteration);
    IterationResult it = execute_iteration(instance, st.multipliers, exec);
    std::vector<double> objectives;
    objectives.reserve(it.solutions.size());
    for (const auto& s : it.solutions) {
      objectives.push_back(s.objective_value);
      if (!s.converged) {
        out.warnings.push_back("iteration " + std::to_string(st.iteration) + ": station index " +
                               std::to_string(s.station) +
                               " stopped at the cut limit; its bound is weaker but still valid");
      }
    }
    const double L = lagrangian_value(objectives, st.multipliers, instance.params());

    const FractionalPoint point = FractionalPoint::from_subproblems(instance, it.solutions);
    Rng rng(config.seed * 0x100000001B3ULL + static_cast<std::uint64_t>(st.iteration));
    RoundingOptions ro = config.rounding_options;
    ro.mode = RoundingMode::deterministic;
    RoundingResult rounded = primal_heuristic(instance, point, rng, ro);
    bool improved = false;
    if (rounded.usable_as_upper_bound() && rounded.solution->objective() < st.upper_bound) {
      st.upper_bound = rounded.solution->objective();
      out.best_solution = rounded.solution;
      out.best_report = rounded.report;
      improved = true;
    }
    if (config.rounding == RoundingMode::probabilistic) {
      Rng prng = rng.split();
      ro.mode = RoundingMode::probabilistic;
      RoundingResult pr = primal_heuristic(instance, point, prng, ro);
      if (pr.success) out.last_rounding = pr.solution;
    } else if (rounded.success) {
      out.last_rounding = rounded.solution;
    }

    if (used_gradient) {
      adapt_step_lengths(st, *used_gradient, L);
    }
    if (L > st.best_lower_bound) {
      st.best_lower_bound = L;
      st.best_multipliers = st.multipliers;
    }

    IterationRecord rec;
    rec.iteration = st.iteration;
    rec.lagrangian = L;
    rec.best_lower_bound = st.best_lower_bound;
    rec.upper_bound = st.upper_bound;
    rec.gap = std::isfinite(st.upper_bound) && st.upper_bound != 0.0
                  ? 1.0 - st.best_lower_bound / st.upper_bound
                  : std::numeric_limits<double>::infinity();
    rec.step_length = st.step_length;
    rec.seconds = elapsed();
    rec.upper_bound_improved = improved;
    rec.resubmissions = it.report.resubmitted.size();
    st.history.push_back(rec);
    if (config.on_iteration) config.on_iteration(rec);

    if (!std::isfinite(st.upper_bound) &&
        st.best_lower_bound > ceiling + 1e-9 * (1.0 + std::abs(ceiling))) {
      out.stop_reason = "infeasible: lower bound exceeds every feasible cost";
      break;
    }
    if (rec.gap <= config.tolerance) {
      out.stop_reason = "gap tolerance reached";
      break;
    }
    if (st.iteration >= config.max_iterations) {
      out.stop_reason = "iteration cap reached";
      break;
    }
    if (rec.seconds >= config.time_limit_seconds) {
      out.stop_reason = "time cap reached";
      break;
    }

    const Subgradients g = subgradients(it.solutions, instance);
    const double ub = std::isfinite(st.upper_bound) ? st.upper_bound : ceiling;
    MultiplierUpdate upd = update_multipliers(st, g, ub);
    if (upd.frozen) {
      out.stop_reason = "bounds met";
      break;
    }
    st.multipliers = std::move(upd.multipliers);
    used_gradient = g;
  }
  return out;
}

std::string bounds_csv(std::span<const IterationRecord> history) {
  std::ostringstream os;
  os << "iter,L,UB,gap,seconds\n";
  for (const auto& r : history) {
    os << r.iteration << ',' << num(r.lagrangian) << ',' << num(r.upper_bound) << ','
       << num(r.gap) << ',' << num(r.seconds) << '\n';
  }
  return os.str();
}

std::string dual_log_csv(std::span<const IterationRecord> history) {
  std::ostringstream os;
  os << "iteration,L,best_L,UB,gap,lambda_zeta,lambda_beta_phi,lambda_beta_xi,lambda_nu,seconds\n";
  for (const auto& r : history) {
    os << r.iteration << ',' << num(r.lagrangian) << ',' << num(r.best_lower_bound) << ','
       << num(r.upper_bound) << ',' << num(r.gap);
    for (double l : r.step_length) os << ',' << num(l);
    os << ',' << num(r.seconds) << '\n';
  }
  return os.str();
}

}  // namespace scla
