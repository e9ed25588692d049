#include "scla/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "scla/lp.hpp"

namespace scla {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wait_bound(const ChargerType& t, const GlobalParams& p) {
  return p.max_wait + t.service_minutes();
}

// (obj, total chargers, s) lexicographic comparison with a tolerance on obj
bool better(double obj, int total, std::span<const int> s, double best_obj, int best_total,
            std::span<const int> best_s) {
  const double tol = 1e-9 * (1.0 + std::abs(best_obj));
  if (obj < best_obj - tol) return true;
  if (obj > best_obj + tol) return false;
  if (total != best_total) return total < best_total;
  return std::lexicographical_compare(s.begin(), s.end(), best_s.begin(), best_s.end());
}

}  // namespace

ConfigCatalog::ConfigCatalog(std::span<const ChargerType> types, std::size_t cap) : k_(types.size()) {
  double count = 1.0;
  for (const auto& t : types) {
    if (t.max_per_station < 0) throw SubproblemError("charger type with negative maximum");
    count *= static_cast<double>(t.max_per_station + 1);
  }
  if (count > static_cast<double>(cap)) {
    throw SubproblemError("subproblem: " + std::to_string(static_cast<long long>(count)) +
                          " charger configurations exceed the enumeration cap of " +
                          std::to_string(cap));
  }
  const auto n = static_cast<std::size_t>(count);
  std::vector<int> raw(n * k_);
  std::vector<double> cost(n);
  std::vector<int> total(n);
  std::vector<int> cur(k_, 0);
  for (std::size_t c = 0; c < n; ++c) {
    double sum = 0.0;
    int tot = 0;
    for (std::size_t k = 0; k < k_; ++k) {
      raw[c * k_ + k] = cur[k];
      sum += types[k].install_cost * cur[k];
      tot += cur[k];
    }
    cost[c] = sum;
    total[c] = tot;
    for (std::size_t k = k_; k-- > 0;) {  // odometer, last type fastest
      if (++cur[k] <= types[k].max_per_station) break;
      cur[k] = 0;
    }
  }
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < n; ++c) {
    if (total[c] > 0) order.push_back(c);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cost[a] != cost[b]) return cost[a] < cost[b];
    if (total[a] != total[b]) return total[a] < total[b];
    return std::lexicographical_compare(raw.begin() + static_cast<long>(a * k_),
                                        raw.begin() + static_cast<long>((a + 1) * k_),
                                        raw.begin() + static_cast<long>(b * k_),
                                        raw.begin() + static_cast<long>((b + 1) * k_));
  });
  counts_.reserve(order.size() * k_);
  for (std::size_t c : order) {
    counts_.insert(counts_.end(), raw.begin() + static_cast<long>(c * k_),
                   raw.begin() + static_cast<long>((c + 1) * k_));
    cost_.push_back(cost[c]);
    total_.push_back(total[c]);
  }
}

SubproblemInput make_subproblem_input(const Instance& instance, std::size_t station,
                                      const Multipliers& multipliers) {
  SubproblemInput in;
  in.station = station;
  in.open_cost = instance.stations()[station].open_cost;
  const auto members = instance.households_of(station);
  in.lambda.reserve(members.size());
  for (std::size_t local = 0; local < members.size(); ++local) {
    const auto i = static_cast<std::size_t>(members[local]);
    in.lambda.push_back(instance.households()[i].lambda);
    in.detour.push_back(instance.detour_at(station, local));
    in.zeta.push_back(multipliers.zeta.empty() ? 0.0 : multipliers.zeta.at(i));
  }
  in.types.assign(instance.charger_types().begin(), instance.charger_types().end());
  in.beta_phi = multipliers.beta_phi;
  in.beta_xi = multipliers.beta_xi;
  in.nu = multipliers.nu;
  in.params = instance.params();
  return in;
}

double configuration_fixed_charge(const SubproblemInput& input, std::span<const int> chargers) {
  double v = (1.0 + input.beta_phi) * input.open_cost + input.nu;
  for (std::size_t k = 0; k < chargers.size(); ++k) {
    v += (1.0 + input.beta_xi) * input.types[k].install_cost * chargers[k];
  }
  return v;
}

double station_wait_minutes(const ChargerType& type, int servers, double load_per_day) {
  if (servers < 1) return kInf;
  const double rho = load_per_day / (servers * type.mu);
  if (!(rho < 1.0)) return kInf;
  return queueing::evaluate(std::max(0.0, rho), servers, type.mu_per_minute(), type.scv_service)
      .w_total;
}

InnerResult inner_congestion_lp(const SubproblemInput& input, std::span<const int> chargers,
                                std::span<const TypedCut> cuts) {
  const std::size_t n = input.lambda.size();
  const std::size_t kk = input.types.size();
  const GlobalParams& p = input.params;
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < kk; ++k) {
    if (chargers[k] > 0) active.push_back(k);
  }
  InnerResult out;
  out.x.assign(n * kk, 0.0);
  out.q.assign(n * kk, 0.0);
  out.wait.assign(kk, 0.0);
  if (active.empty()) throw std::invalid_argument("inner_congestion_lp: no charger in configuration");

  const std::size_t na = active.size();
  // columns: x[i][a], q[i][a], then W[a]
  const std::size_t nx = n * na;
  const std::size_t ncol = 2 * nx + na;
  auto xc = [&](std::size_t i, std::size_t a) { return i * na + a; };
  auto qc = [&](std::size_t i, std::size_t a) { return nx + i * na + a; };
  auto wc = [&](std::size_t a) { return 2 * nx + a; };

  lp::LinearProgram prog(ncol);
  const double detour_rate = p.detour_cost * p.detour_cost_multiplier;
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = detour_rate * input.detour[i] * input.lambda[i] - input.zeta[i];
    for (std::size_t a = 0; a < na; ++a) {
      const ChargerType& t = input.types[active[a]];
      prog.objective[xc(i, a)] = cx;
      prog.upper[xc(i, a)] = 1.0;
      prog.objective[qc(i, a)] = p.wait_cost * input.lambda[i];
      prog.upper[qc(i, a)] = wait_bound(t, p);
    }
  }
  for (std::size_t a = 0; a < na; ++a) {
    const ChargerType& t = input.types[active[a]];
    prog.lower[wc(a)] = t.service_minutes();
    prog.upper[wc(a)] = wait_bound(t, p);
  }

  auto row = [&]() { return std::vector<double>(ncol, 0.0); };
  if (na > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      auto r = row();
      for (std::size_t a = 0; a < na; ++a) r[xc(i, a)] = 1.0;
      prog.add_row(std::move(r), lp::Relation::less_equal, 1.0);
    }
  }
  for (std::size_t a = 0; a < na; ++a) {
    const ChargerType& t = input.types[active[a]];
    const int s = chargers[active[a]];
    auto stab = row();
    auto use = row();
    for (std::size_t i = 0; i < n; ++i) {
      stab[xc(i, a)] = input.lambda[i];
      use[xc(i, a)] = 1.0;
    }
    prog.add_row(std::move(stab), lp::Relation::less_equal, t.mu * s * (1.0 - p.epsilon));
    prog.add_row(std::move(use), lp::Relation::greater_equal,
                 static_cast<double>(s) / t.max_per_station);
    const double u = wait_bound(t, p);
    for (std::size_t i = 0; i < n; ++i) {
      // q >= W - U (1 - x)
      auto lo = row();
      lo[qc(i, a)] = 1.0;
      lo[wc(a)] = -1.0;
      lo[xc(i, a)] = -u;
      prog.add_row(std::move(lo), lp::Relation::greater_equal, -u);
      // q <= U x
      auto hx = row();
      hx[qc(i, a)] = 1.0;
      hx[xc(i, a)] = -u;
      prog.add_row(std::move(hx), lp::Relation::less_equal, 0.0);
      // q <= W
      auto hw = row();
      hw[qc(i, a)] = 1.0;
      hw[wc(a)] = -1.0;
      prog.add_row(std::move(hw), lp::Relation::less_equal, 0.0);
    }
  }
  for (const TypedCut& c : cuts) {
    const auto it = std::find(active.begin(), active.end(), c.type);
    if (it == active.end()) continue;
    const auto a = static_cast<std::size_t>(it - active.begin());
    const ChargerType& t = input.types[c.type];
    const int s = chargers[c.type];
    // W >= f (A + B rho) / (mu s) + 1/mu with rho = sum lambda x / (mu_day s)
    const double scale = 0.5 * (1.0 + t.scv_service) / (t.mu_per_minute() * s);
    auto r = row();
    r[wc(a)] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      r[xc(i, a)] = -scale * c.cut.slope_B * input.lambda[i] / (t.mu * s);
    }
    prog.add_row(std::move(r), lp::Relation::greater_equal,
                 scale * c.cut.intercept_A + t.service_minutes());
  }

  const lp::LpSolution sol = lp::solve_lp(prog);
  if (sol.status != lp::Status::optimal) {
    out.feasible = false;
    out.value = kInf;
    return out;
  }
  out.feasible = true;
  out.value = sol.objective_value + configuration_fixed_charge(input, chargers);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < na; ++a) {
      out.x[i * kk + active[a]] = sol.values[xc(i, a)];
      out.q[i * kk + active[a]] = sol.values[qc(i, a)];
    }
  }
  for (std::size_t a = 0; a < na; ++a) out.wait[active[a]] = sol.values[wc(a)];
  return out;
}

namespace {

struct ConfigOutcome {
  InnerResult lp;
  int cuts = 0;
  bool converged = true;
};

ConfigOutcome solve_configuration(const SubproblemInput& input, std::span<const int> chargers,
                                  const SubproblemOptions& options) {
  const std::size_t n = input.lambda.size();
  const std::size_t kk = input.types.size();
  const double eps = input.params.epsilon;
  std::vector<TypedCut> cuts;
  ConfigOutcome out;
  while (true) {
    out.lp = inner_congestion_lp(input, chargers, cuts);
    if (!out.lp.feasible) return out;
    bool added = false;
    for (std::size_t k = 0; k < kk; ++k) {
      const int s = chargers[k];
      if (s == 0) continue;
      const ChargerType& t = input.types[k];
      double load = 0.0;
      for (std::size_t i = 0; i < n; ++i) load += input.lambda[i] * out.lp.x[i * kk + k];
      double rho = load / (t.mu * s);
      if (rho <= 0.0) continue;
      rho = std::min(rho, 1.0 - eps);
      const double truth =
          queueing::evaluate(rho, s, t.mu_per_minute(), t.scv_service).w_total;
      if (truth - out.lp.wait[k] <= options.cut_tolerance * (1.0 + truth)) continue;
      if (out.cuts >= options.max_cuts) {
        out.converged = false;
        return out;
      }
      cuts.push_back({k, queueing::cut_at(rho, s)});
      ++out.cuts;
      added = true;
    }
    if (!added) return out;
  }
}

}  // namespace

SubproblemSolution solve_station_subproblem(const SubproblemInput& input,
                                            const SubproblemOptions& options) {
  const std::size_t n = input.lambda.size();
  const std::size_t kk = input.types.size();
  if (input.detour.size() != n || input.zeta.size() != n) {
    throw std::invalid_argument("subproblem: household vectors differ in length");
  }
  std::shared_ptr<const ConfigCatalog> catalog = input.catalog;
  if (!catalog || catalog->num_types() != kk) {
    catalog = std::make_shared<ConfigCatalog>(input.types, options.max_configs);
  } else {
    double count = 1.0;
    for (const auto& t : input.types) count *= t.max_per_station + 1;
    if (count > static_cast<double>(options.max_configs)) {
      throw SubproblemError("subproblem: charger configurations exceed the enumeration cap of " +
                            std::to_string(options.max_configs));
    }
  }

  SubproblemSolution best;
  best.station = input.station;
  best.chargers.assign(kk, 0);
  best.x.assign(n * kk, 0.0);
  best.wait.assign(kk, 0.0);
  best.objective_value = 0.0;  // closed station
  int best_total = 0;

  const double detour_rate = input.params.detour_cost * input.params.detour_cost_multiplier;
  double variable_floor = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    variable_floor += std::min(0.0, detour_rate * input.detour[i] * input.lambda[i] - input.zeta[i]);
  }
  if (n == 0) return best;  // nothing can be assigned, so no charger may be installed

  const double base = (1.0 + input.beta_phi) * input.open_cost + input.nu;
  int cuts_used = 0;
  for (std::size_t c = 0; c < catalog->size(); ++c) {
    if (options.deadline && std::chrono::steady_clock::now() > *options.deadline) {
      throw DeadlineExceeded("subproblem: deadline passed at station index " +
                             std::to_string(input.station));
    }
    const double fixed = base + (1.0 + input.beta_xi) * catalog->install_cost(c);
    if (options.pruning &&
        fixed + variable_floor > best.objective_value + 1e-9 * (1.0 + std::abs(best.objective_value))) {
      // catalog is sorted by install cost, so every later entry is pruned too
      break;
    }
    const auto s = catalog->config(c);
    const ConfigOutcome r = solve_configuration(input, s, options);
    ++best.configs_evaluated;
    cuts_used += r.cuts;
    if (!r.lp.feasible) continue;
    if (better(r.lp.value, catalog->total(c), s, best.objective_value, best_total, best.chargers)) {
      best.objective_value = r.lp.value;
      best.open = true;
      best.chargers.assign(s.begin(), s.end());
      best.x = r.lp.x;
      best.wait = r.lp.wait;
      best.converged = r.converged;
      best_total = catalog->total(c);
    }
  }
  best.cuts_used = cuts_used;
  return best;
}

}  // namespace scla
