#include "scla/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "scla/queueing.hpp"

namespace scla {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Option {
  std::size_t station = 0;
  std::size_t type = 0;
  double detour_cost = 0.0;  // USD/day
  double wait_floor = 0.0;  // lambda * C_tau * service minutes
};

class Enumerator {
 public:
  Enumerator(const Instance& instance, const OracleOptions& options)
      : inst_(instance),
        opts_(options),
        nh_(instance.num_households()),
        nj_(instance.num_stations()),
        nk_(instance.num_types()),
        p_(instance.params()),
        types_(instance.charger_types()) {
    options_.resize(nh_);
    for (std::size_t i = 0; i < nh_; ++i) {
      const Household& h = instance.households()[i];
      const auto js = instance.stations_of(i);
      for (std::size_t m = 0; m < js.size(); ++m) {
        for (std::size_t k = 0; k < nk_; ++k) {
          options_[i].push_back({static_cast<std::size_t>(js[m]), k,
                                 h.lambda * p_.detour_cost * p_.detour_cost_multiplier *
                                     instance.detour(i, m),
                                 h.lambda * p_.wait_cost * types_[k].service_minutes()});
        }
      }
      std::sort(options_[i].begin(), options_[i].end(), [](const Option& a, const Option& b) {
        return a.station != b.station ? a.station < b.station : a.type < b.type;
      });
    }
    load_.assign(nj_ * nk_, 0.0);
    pair_count_.assign(nj_ * nk_, 0);
    station_count_.assign(nj_, 0);
    choice_.assign(nh_, 0);
  }

  OracleResult run() {
    descend(0, 0.0, 0.0);
    OracleResult out;
    out.assignments_visited = visited_;
    if (best_ == kInf) return out;
    out.feasible = true;
    out.optimum = best_;
    FeasibleSolution sol(nh_, nj_, nk_);
    for (std::size_t i = 0; i < nh_; ++i) {
      const Option& o = options_[i][best_choice_[i]];
      sol.assignment[i].push_back({o.station, o.type, 1.0});
      sol.open[o.station] = 1;
    }
    std::vector<double> load(nj_ * nk_, 0.0);
    for (std::size_t i = 0; i < nh_; ++i) {
      const Option& o = options_[i][best_choice_[i]];
      load[o.station * nk_ + o.type] += inst_.households()[i].lambda;
    }
    sol.chargers = best_s_;
    for (std::size_t c = 0; c < nj_ * nk_; ++c) {
      if (best_s_[c] > 0) sol.wait[c] = wait_of(c % nk_, best_s_[c], load[c]);
    }
    refresh_solution(sol, inst_);
    out.solution = std::move(sol);
    return out;
  }

 private:
  double wait_of(std::size_t k, int s, double load) const {
    const ChargerType& t = types_[k];
    const double rho = load / (s * t.mu);
    return queueing::evaluate(rho, s, t.mu_per_minute(), t.scv_service).w_total;
  }

  // lower bound on the charger cost for a pair carrying `load`
  double charger_floor(std::size_t k, double load) const {
    const ChargerType& t = types_[k];
    const double need = std::ceil(load / (t.mu * (1.0 - p_.epsilon)) - 1e-12);
    return t.install_cost * std::max(1.0, need);
  }

  void descend(std::size_t i, double running, double opening) {
    if (i == nh_) {
      leaf(running);
      return;
    }
    for (std::size_t n = 0; n < options_[i].size(); ++n) {
      const Option& o = options_[i][n];
      const std::size_t c = o.station * nk_ + o.type;
      const double lam = inst_.households()[i].lambda;
      const bool new_station = station_count_[o.station] == 0;
      const double new_opening = opening + (new_station ? inst_.stations()[o.station].open_cost : 0.0);
      if (new_station && open_stations_ + 1 > p_.max_stations) continue;
      if (new_opening > p_.station_budget * (1.0 + 1e-9)) continue;
      const double before = pair_count_[c] > 0 ? charger_floor(o.type, load_[c]) : 0.0;
      const double after = charger_floor(o.type, load_[c] + lam);
      const double next = running + o.detour_cost + o.wait_floor + after - before +
                          (new_station ? inst_.stations()[o.station].open_cost : 0.0);
      if (opts_.pruning && best_ < kInf && next > best_ + 1e-9 * (1.0 + std::abs(best_))) continue;
      load_[c] += lam;
      ++pair_count_[c];
      if (new_station) ++open_stations_;
      ++station_count_[o.station];
      choice_[i] = n;
      descend(i + 1, next, new_opening);
      --station_count_[o.station];
      if (new_station) --open_stations_;
      --pair_count_[c];
      load_[c] -= lam;
      if (pair_count_[c] == 0) load_[c] = 0.0;
    }
  }

  void leaf(double /*bound*/) {
    ++visited_;
    // exact loads, summed in household order so they do not depend on the
    // add/subtract history of the search
    std::vector<double> load(nj_ * nk_, 0.0);
    double detour = 0.0;
    for (std::size_t i = 0; i < nh_; ++i) {
      const Option& o = options_[i][choice_[i]];
      load[o.station * nk_ + o.type] += inst_.households()[i].lambda;
      detour += o.detour_cost;
    }
    double opening = 0.0;
    for (std::size_t j = 0; j < nj_; ++j) {
      if (station_count_[j] > 0) opening += inst_.stations()[j].open_cost;
    }
    // feasible charger counts per used pair with their pair cost
    pairs_.clear();
    for (std::size_t c = 0; c < nj_ * nk_; ++c) {
      if (pair_count_[c] == 0) continue;
      const std::size_t k = c % nk_;
      const ChargerType& t = types_[k];
      PairChoices pc;
      pc.cell = c;
      for (int s = 1; s <= t.max_per_station; ++s) {
        if (load[c] > t.mu * s * (1.0 - p_.epsilon)) continue;
        const double w = wait_of(k, s, load[c]);
        if (!within_wait_limit(w, t, p_)) continue;
        pc.s.push_back(s);
        pc.install.push_back(t.install_cost * s);
        pc.cost.push_back(t.install_cost * s + load[c] * p_.wait_cost * w);
      }
      if (pc.s.empty()) return;
      pairs_.push_back(std::move(pc));
    }
    const double fixed = opening + detour;
    if (opts_.pruning && best_ < kInf) {
      double floor = fixed;
      for (const auto& pc : pairs_) floor += *std::min_element(pc.cost.begin(), pc.cost.end());
      if (floor > best_ + 1e-9 * (1.0 + std::abs(best_))) return;
    }
    pick_.assign(pairs_.size(), 0);
    leaf_best_ = kInf;
    choose(0, fixed, 0.0);
    if (leaf_best_ < best_ - 1e-12 * (1.0 + std::abs(best_)) || best_ == kInf) {
      if (leaf_best_ == kInf) return;
      best_ = leaf_best_;
      best_choice_ = choice_;
      best_s_.assign(nj_ * nk_, 0);
      for (std::size_t n = 0; n < pairs_.size(); ++n) {
        best_s_[pairs_[n].cell] = pairs_[n].s[leaf_pick_[n]];
      }
    }
  }

  void choose(std::size_t n, double total, double install) {
    if (n == pairs_.size()) {
      if (total < leaf_best_ - 1e-12 * (1.0 + std::abs(leaf_best_)) || leaf_best_ == kInf) {
        leaf_best_ = total;
        leaf_pick_ = pick_;
      }
      return;
    }
    const PairChoices& pc = pairs_[n];
    for (std::size_t m = 0; m < pc.s.size(); ++m) {
      const double ins = install + pc.install[m];
      if (ins > p_.charger_budget * (1.0 + 1e-9)) break;  // install grows with s
      pick_[n] = m;
      choose(n + 1, total + pc.cost[m], ins);
    }
  }

  struct PairChoices {
    std::size_t cell = 0;
    std::vector<int> s;
    std::vector<double> install;
    std::vector<double> cost;
  };

  const Instance& inst_;
  OracleOptions opts_;
  std::size_t nh_, nj_, nk_;
  GlobalParams p_;
  std::span<const ChargerType> types_;
  std::vector<std::vector<Option>> options_;
  std::vector<double> load_;
  std::vector<int> pair_count_;
  std::vector<int> station_count_;
  int open_stations_ = 0;
  std::vector<std::size_t> choice_;
  std::vector<PairChoices> pairs_;
  std::vector<std::size_t> pick_;
  std::vector<std::size_t> leaf_pick_;
  double leaf_best_ = kInf;
  double best_ = kInf;
  std::vector<std::size_t> best_choice_;
  std::vector<int> best_s_;
  std::size_t visited_ = 0;
};

}  // namespace

double oracle_enumeration_count(const Instance& instance) {
  const std::size_t nj = instance.num_stations();
  const std::size_t nk = instance.num_types();
  if (nj >= 63) return kInf;
  double per_station_s = 1.0;
  for (const auto& t : instance.charger_types()) per_station_s *= t.max_per_station + 1.0;
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nj); ++mask) {
    const int open = std::popcount(mask);
    double count = std::pow(per_station_s, open);
    for (std::size_t i = 0; i < instance.num_households() && count > 0.0; ++i) {
      int reachable = 0;
      for (int j : instance.stations_of(i)) reachable += (mask >> j) & 1U;
      count *= static_cast<double>(reachable) * static_cast<double>(nk);
    }
    total += count;
  }
  return total;
}

OracleResult solve_exact(const Instance& instance, const OracleLimits& limits,
                         const OracleOptions& options) {
  auto refuse = [](const std::string& what) {
    throw OracleRefusal("oracle: instance too large, " + what);
  };
  if (instance.num_households() > limits.max_households) {
    refuse(std::to_string(instance.num_households()) + " households (limit " +
           std::to_string(limits.max_households) + ")");
  }
  if (instance.num_stations() > limits.max_stations) {
    refuse(std::to_string(instance.num_stations()) + " stations (limit " +
           std::to_string(limits.max_stations) + ")");
  }
  if (instance.num_types() > limits.max_charger_types) {
    refuse(std::to_string(instance.num_types()) + " charger types (limit " +
           std::to_string(limits.max_charger_types) + ")");
  }
  for (const auto& t : instance.charger_types()) {
    if (t.max_per_station > limits.max_chargers_per_type) {
      refuse("type " + t.name + " allows " + std::to_string(t.max_per_station) +
             " chargers per station (limit " + std::to_string(limits.max_chargers_per_type) + ")");
    }
  }
  const double count = oracle_enumeration_count(instance);
  if (count > limits.max_enumeration) {
    refuse("enumeration count " + std::to_string(count) + " exceeds " +
           std::to_string(limits.max_enumeration));
  }
  return Enumerator(instance, options).run();
}

}  // namespace scla
