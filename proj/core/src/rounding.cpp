#include "scla/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "scla/queueing.hpp"

namespace scla {

namespace {

double queue_wait(const ChargerType& t, int s, double load) {
  return queueing::evaluate(load / (s * t.mu), s, t.mu_per_minute(), t.scv_service).w_total;
}

int required_servers(const ChargerType& t, double load, double eps) {
  return static_cast<int>(std::ceil(load / (t.mu * (1.0 - eps)) - 1e-12));
}

// Smallest feasible count when `cheapest` is false, otherwise the count
// minimizing install plus waiting cost. Zero when nothing fits.
int size_pair(const ChargerType& t, const GlobalParams& p, double load, bool cheapest) {
  const int start = std::max(1, required_servers(t, load, p.epsilon));
  int chosen = 0;
  double best = 0.0;
  for (int s = start; s <= t.max_per_station; ++s) {
    if (load / (s * t.mu) >= 1.0) continue;
    const double w = queue_wait(t, s, load);
    if (!within_wait_limit(w, t, p)) continue;
    if (!cheapest) return s;
    const double cost = t.install_cost * s + load * p.wait_cost * w;
    if (chosen == 0 || cost < best - 1e-12 * (1.0 + std::abs(best))) {
      chosen = s;
      best = cost;
    }
  }
  return chosen;
}

}  // namespace

std::string to_string(RoundingMode mode) {
  return mode == RoundingMode::deterministic ? "deterministic" : "probabilistic";
}

RoundingMode parse_rounding_mode(const std::string& text) {
  if (text == "deterministic") return RoundingMode::deterministic;
  if (text == "probabilistic") return RoundingMode::probabilistic;
  throw std::invalid_argument("unknown rounding mode '" + text +
                              "' (expected deterministic or probabilistic)");
}

FractionalPoint FractionalPoint::empty(const Instance& instance) {
  FractionalPoint f;
  const std::size_t nk = instance.num_types();
  f.num_types = nk;
  f.open.assign(instance.num_stations(), 0);
  f.chargers.assign(instance.num_stations() * nk, 0);
  f.wait.assign(instance.num_stations() * nk, 0.0);
  f.x.resize(instance.num_households());
  for (std::size_t i = 0; i < instance.num_households(); ++i) {
    f.x[i].assign(instance.stations_of(i).size() * nk, 0.0);
  }
  return f;
}

FractionalPoint FractionalPoint::from_subproblems(const Instance& instance,
                                                  std::span<const SubproblemSolution> solutions) {
  if (solutions.size() != instance.num_stations()) {
    throw std::invalid_argument("fractional point: need one subproblem solution per station");
  }
  FractionalPoint f = empty(instance);
  const std::size_t nk = f.num_types;
  for (std::size_t j = 0; j < solutions.size(); ++j) {
    const SubproblemSolution& s = solutions[j];
    f.open[j] = s.open ? 1 : 0;
    for (std::size_t k = 0; k < nk; ++k) {
      f.chargers[j * nk + k] = s.chargers.at(k);
      f.wait[j * nk + k] = s.wait.at(k);
    }
  }
  for (std::size_t i = 0; i < instance.num_households(); ++i) {
    const auto js = instance.stations_of(i);
    for (std::size_t m = 0; m < js.size(); ++m) {
      const SubproblemSolution& s = solutions[static_cast<std::size_t>(js[m])];
      const auto local = static_cast<std::size_t>(instance.slot(i, m));
      for (std::size_t k = 0; k < nk; ++k) f.x[i][m * nk + k] = s.x_at(local, k);
    }
  }
  return f;
}

double FractionalPoint::x_at(const Instance& instance, std::size_t i, std::size_t j,
                             std::size_t k) const {
  const int m = instance.neighborhood_position(i, j);
  if (m < 0) return 0.0;
  return x[i][static_cast<std::size_t>(m) * num_types + k];
}

OpeningResult adaptive_station_opening(const Instance& instance,
                                       std::span<const std::uint8_t> seed_open, Rng& rng) {
  const std::size_t nj = instance.num_stations();
  OpeningResult out;
  out.open.assign(seed_open.begin(), seed_open.end());
  out.open.resize(nj, 0);
  std::vector<std::uint8_t> covered(instance.num_households(), 0);
  for (std::size_t j = 0; j < nj; ++j) {
    if (!out.open[j]) continue;
    for (int i : instance.households_of(j)) covered[static_cast<std::size_t>(i)] = 1;
  }
  std::size_t remaining = std::count(covered.begin(), covered.end(), 0);
  std::vector<std::size_t> cand;
  std::vector<double> weight;
  while (remaining > 0) {
    cand.clear();
    weight.clear();
    for (std::size_t j = 0; j < nj; ++j) {
      if (out.open[j]) continue;
      double w = 0.0;
      for (int i : instance.households_of(j)) w += covered[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
      if (w > 0.0) {
        cand.push_back(j);
        weight.push_back(w);
      }
    }
    if (cand.empty()) break;
    const std::size_t pick = cand[rng.weighted(weight)];
    out.open[pick] = 1;
    for (int i : instance.households_of(pick)) {
      if (!covered[static_cast<std::size_t>(i)]) {
        covered[static_cast<std::size_t>(i)] = 1;
        --remaining;
      }
    }
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) out.uncovered.push_back(i);
  }
  return out;
}

AssignmentState::AssignmentState(const Instance& instance, const FractionalPoint& point)
    : num_types(instance.num_types()),
      demand(instance.num_stations() * instance.num_types(), 0.0),
      chargers(point.chargers),
      wait(point.wait),
      usage(instance.num_stations() * instance.num_types(), 0),
      assignment(instance.num_households()) {
  chargers.resize(demand.size(), 0);
  wait.resize(demand.size(), 0.0);
}

bool check_and_assign(const Instance& instance, std::size_t i, std::size_t j, std::size_t k,
                      AssignmentState& state, double weight) {
  const ChargerType& t = instance.charger_types()[k];
  const GlobalParams& p = instance.params();
  const std::size_t c = j * state.num_types + k;
  const double load = state.demand[c] + weight * instance.households()[i].lambda;
  const int s_req = required_servers(t, load, p.epsilon);
  if (s_req > t.max_per_station) return false;
  for (int s = std::max({state.chargers[c], s_req, 1}); s <= t.max_per_station; ++s) {
    if (load / (s * t.mu) >= 1.0) break;
    const double w = queue_wait(t, s, load);
    if (within_wait_limit(w, t, p)) {
      state.demand[c] = load;
      state.chargers[c] = s;
      state.wait[c] = w;
      ++state.usage[c];
      state.assignment[i].push_back({j, k, weight});
      return true;
    }
  }
  return false;
}

AssignmentPass assignment_iteration(const Instance& instance, const FractionalPoint& point,
                                    std::span<const std::uint8_t> open, RoundingMode mode,
                                    Rng& rng) {
  const std::size_t nh = instance.num_households();
  const std::size_t nj = instance.num_stations();
  const std::size_t nk = instance.num_types();
  const auto types = instance.charger_types();
  const auto households = instance.households();
  AssignmentPass pass{AssignmentState(instance, point), {}, {}, {}};
  AssignmentState& st = pass.state;

  std::vector<std::size_t> order(nh);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return households[a].lambda > households[b].lambda;
  });

  struct Candidate {
    std::size_t j, k;
    double x;
    std::uint64_t tie;
  };
  std::vector<Candidate> cands;
  std::vector<std::uint8_t> prob_pair(nj * nk, 0);
  for (const std::size_t i : order) {
    cands.clear();
    const auto js = instance.stations_of(i);
    for (std::size_t m = 0; m < js.size(); ++m) {
      const auto j = static_cast<std::size_t>(js[m]);
      if (!open[j]) continue;
      for (std::size_t k = 0; k < nk; ++k) {
        cands.push_back({j, k, point.x[i][m * nk + k], 0});
      }
    }
    if (cands.empty()) {
      pass.unassigned.push_back(i);
      continue;
    }
    if (mode == RoundingMode::probabilistic) {
      double total = 0.0;
      for (const auto& cd : cands) total += cd.x > 0.0 ? cd.x : 0.0;
      if (total > 0.0) {
        for (const auto& cd : cands) {
          if (!(cd.x > 0.0)) continue;
          const double share = cd.x / total;
          const std::size_t c = cd.j * nk + cd.k;
          st.demand[c] += share * households[i].lambda;
          ++st.usage[c];
          prob_pair[c] = 1;
          st.assignment[i].push_back({cd.j, cd.k, share});
        }
        continue;
      }
      // no fractional mass on an open pair: assign this household deterministically
    }
    for (auto& cd : cands) cd.tie = rng.next();
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.x != b.x) return a.x > b.x;
      const double ca = types[a.k].install_cost;
      const double cb = types[b.k].install_cost;
      if (ca != cb) return ca < cb;
      const int ua = st.usage[a.j * nk + a.k];
      const int ub = st.usage[b.j * nk + b.k];
      if (ua != ub) return ua < ub;
      const double wa = st.wait[a.j * nk + a.k];
      const double wb = st.wait[b.j * nk + b.k];
      if (wa != wb) return wa < wb;
      return a.tie < b.tie;
    });
    bool assigned = false;
    for (const auto& cd : cands) {
      if (check_and_assign(instance, i, cd.j, cd.k, st)) {
        assigned = true;
        break;
      }
    }
    if (!assigned) pass.unassigned.push_back(i);
  }
  std::sort(pass.unassigned.begin(), pass.unassigned.end());

  // pairs without demand keep no chargers; probabilistic pairs are sized to
  // their expected load
  pass.used.assign(nj, 0);
  for (std::size_t c = 0; c < nj * nk; ++c) {
    if (st.usage[c] == 0) {
      st.chargers[c] = 0;
      st.wait[c] = 0.0;
      continue;
    }
    pass.used[c / nk] = 1;
    const ChargerType& t = types[c % nk];
    if (prob_pair[c]) {
      const int s = size_pair(t, instance.params(), st.demand[c], false);
      if (s == 0) {
        pass.unsizable_pairs.push_back(c);
        continue;
      }
      st.chargers[c] = s;
    }
    st.wait[c] = queue_wait(t, st.chargers[c], st.demand[c]);
  }
  return pass;
}

std::optional<std::size_t> add_overload_station(const Instance& instance,
                                                std::span<const std::size_t> unassigned,
                                                std::vector<std::uint8_t>& open) {
  std::vector<int> weight(instance.num_stations(), 0);
  for (const std::size_t i : unassigned) {
    for (int j : instance.stations_of(i)) {
      if (!open[static_cast<std::size_t>(j)]) ++weight[static_cast<std::size_t>(j)];
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < weight.size(); ++j) {
    if (weight[j] > 0 && (!best || weight[j] > weight[*best])) best = j;
  }
  if (best) open[*best] = 1;
  return best;
}

RoundingResult primal_heuristic(const Instance& instance, const FractionalPoint& point, Rng& rng,
                                const RoundingOptions& options) {
  RoundingResult out;
  const std::size_t nk = instance.num_types();
  OpeningResult opening = adaptive_station_opening(instance, point.open, rng);
  if (!opening.uncovered.empty()) {
    out.failure = std::to_string(opening.uncovered.size()) +
                  " households cannot be covered by any station";
    return out;
  }
  std::vector<std::uint8_t> available = opening.open;
  std::optional<AssignmentPass> pass;
  while (true) {
    pass = assignment_iteration(instance, point, available, options.mode, rng);
    ++out.passes;
    if (!pass->unsizable_pairs.empty()) {
      out.failure = "probabilistic loads cannot be served within the charger limits";
      return out;
    }
    if (pass->unassigned.empty()) break;
    const auto added = add_overload_station(instance, pass->unassigned, available);
    if (!added) {
      out.failure = "stalled with " + std::to_string(pass->unassigned.size()) +
                    " unassigned households and no station left to open";
      return out;
    }
    out.overload_opened.push_back(*added);
  }

  AssignmentState& st = pass->state;
  FeasibleSolution sol(instance.num_households(), instance.num_stations(), nk);
  sol.probabilistic = options.mode == RoundingMode::probabilistic;
  sol.open = pass->used;
  sol.chargers = st.chargers;
  sol.wait = st.wait;
  sol.assignment = std::move(st.assignment);

  if (options.refit_chargers) {
    const auto types = instance.charger_types();
    const SolutionReport before = evaluate_solution(sol, instance);
    FeasibleSolution refit = sol;
    for (std::size_t c = 0; c < refit.chargers.size(); ++c) {
      if (refit.chargers[c] == 0) continue;
      const ChargerType& t = types[c % nk];
      const int s = size_pair(t, instance.params(), st.demand[c], true);
      if (s == 0) continue;
      refit.chargers[c] = s;
      refit.wait[c] = queue_wait(t, s, st.demand[c]);
    }
    const SolutionReport after = evaluate_solution(refit, instance);
    if (after.constraints_ok && (after.budget.charger_budget || !before.budget.charger_budget)) {
      sol = std::move(refit);
    }
  }

  SolutionReport report = refresh_solution(sol, instance);
  if (!report.constraints_ok) {
    out.failure = "rounded solution failed the constraint check:\n" + report.summary();
    out.solution = std::move(sol);
    out.report = std::move(report);
    return out;
  }
  out.success = true;
  out.solution = std::move(sol);
  out.report = std::move(report);
  return out;
}

}  // namespace scla
