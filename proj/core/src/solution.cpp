#include "scla/solution.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scla/queueing.hpp"

namespace scla {

namespace {

constexpr double kTol = 1e-9;

class CheckList {
 public:
  explicit CheckList(std::vector<ConstraintCheck>& out) : out_(out) {}

  std::size_t add(std::string name) {
    out_.push_back({std::move(name), true, {}});
    return out_.size() - 1;
  }

  void fail(std::size_t row, const std::string& detail) {
    if (out_[row].passed) out_[row].detail = detail;
    out_[row].passed = false;
  }

 private:
  std::vector<ConstraintCheck>& out_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

FeasibleSolution::FeasibleSolution(std::size_t households, std::size_t stations, std::size_t types)
    : num_types(types),
      open(stations, 0),
      chargers(stations * types, 0),
      wait(stations * types, 0.0),
      assignment(households) {}

std::string SolutionReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.passed) os << ": " << c.detail;
    os << '\n';
  }
  return os.str();
}

SolutionReport evaluate_solution(const FeasibleSolution& sol, const Instance& instance) {
  SolutionReport rep;
  CheckList checks(rep.checks);
  const std::size_t nh = instance.num_households();
  const std::size_t nj = instance.num_stations();
  const std::size_t nk = instance.num_types();
  const auto& p = instance.params();
  const auto types = instance.charger_types();
  const auto stations = instance.stations();
  const auto households = instance.households();

  const std::size_t shape = checks.add("shape");
  if (sol.num_types != nk || sol.open.size() != nj || sol.chargers.size() != nj * nk ||
      sol.wait.size() != nj * nk || sol.assignment.size() != nh) {
    checks.fail(shape, "vector sizes do not match the instance");
    rep.constraints_ok = false;
    rep.budget = {false, false, false};
    return rep;
  }

  const std::size_t full = checks.add("every household fully assigned");
  const std::size_t access = checks.add("assignments stay inside J_i");
  const std::size_t open_only = checks.add("x <= y");
  const std::size_t integral = checks.add("integral assignment");
  rep.load.assign(nj * nk, 0.0);
  std::vector<double> share(nj * nk, 0.0);  // sum of x per pair
  double detour = 0.0;
  for (std::size_t i = 0; i < nh; ++i) {
    double total = 0.0;
    for (const auto& a : sol.assignment[i]) {
      if (a.station >= nj || a.type >= nk) {
        checks.fail(access, "household " + std::to_string(households[i].id) +
                                " refers to an unknown station or type");
        continue;
      }
      if (!(a.fraction >= -kTol) || a.fraction > 1.0 + kTol) {
        checks.fail(full, "household " + std::to_string(households[i].id) +
                              " has share " + fmt(a.fraction));
      }
      if (!sol.probabilistic && std::abs(a.fraction - 1.0) > kTol) {
        checks.fail(integral, "household " + std::to_string(households[i].id) +
                                  " has a fractional share " + fmt(a.fraction));
      }
      const int m = instance.neighborhood_position(i, a.station);
      if (m < 0) {
        checks.fail(access, "household " + std::to_string(households[i].id) + " sent to station " +
                                std::to_string(stations[a.station].id));
        continue;
      }
      if (!sol.open[a.station] && a.fraction > kTol) {
        checks.fail(open_only, "household " + std::to_string(households[i].id) +
                                   " uses closed station " + std::to_string(stations[a.station].id));
      }
      total += a.fraction;
      rep.load[a.station * nk + a.type] += households[i].lambda * a.fraction;
      share[a.station * nk + a.type] += a.fraction;
      detour += households[i].lambda * p.detour_cost * p.detour_cost_multiplier *
                instance.detour(i, static_cast<std::size_t>(m)) * a.fraction;
    }
    if (std::abs(total - 1.0) > kTol) {
      checks.fail(full, "household " + std::to_string(households[i].id) + " has total share " +
                            fmt(total));
    }
    if (!sol.probabilistic && sol.assignment[i].size() != 1) {
      checks.fail(integral, "household " + std::to_string(households[i].id) + " has " +
                                std::to_string(sol.assignment[i].size()) + " assignments");
    }
  }

  const std::size_t stability = checks.add("stability lambda_bar <= mu s (1 - eps)");
  const std::size_t wait_def = checks.add("W equals Erlang-C at the effective rate");
  const std::size_t wait_bound = checks.add("W <= EW + 1/mu");
  const std::size_t limit = checks.add("s <= S_bar");
  const std::size_t allocation = checks.add("s <= S_bar * sum x");
  const std::size_t open_needs = checks.add("y <= sum s");
  rep.recomputed_wait.assign(nj * nk, 0.0);
  double opening = 0.0;
  double chargers = 0.0;
  double waiting = 0.0;
  int open_count = 0;
  for (std::size_t j = 0; j < nj; ++j) {
    int station_total = 0;
    for (std::size_t k = 0; k < nk; ++k) {
      const std::size_t c = j * nk + k;
      const int s = sol.chargers[c];
      const ChargerType& t = types[k];
      const std::string where =
          "station " + std::to_string(stations[j].id) + " type " + t.name;
      station_total += s;
      chargers += t.install_cost * s;
      if (s < 0 || s > t.max_per_station) {
        checks.fail(limit, where + " has " + std::to_string(s) + " chargers");
      }
      if (s > 0 && static_cast<double>(s) > t.max_per_station * share[c] + kTol) {
        checks.fail(allocation, where + " has chargers but share " + fmt(share[c]));
      }
      const double load = rep.load[c];
      if (s <= 0) {
        if (load > kTol) checks.fail(stability, where + " serves demand without chargers");
        continue;
      }
      if (load > t.mu * s * (1.0 - p.epsilon) * (1.0 + kTol) + kTol) {
        checks.fail(stability, where + " load " + fmt(load) + " exceeds " +
                                   fmt(t.mu * s * (1.0 - p.epsilon)));
        continue;
      }
      const double rho = load / (t.mu * s);
      const double w =
          queueing::evaluate(std::max(0.0, rho), s, t.mu_per_minute(), t.scv_service).w_total;
      rep.recomputed_wait[c] = w;
      if (std::abs(sol.wait[c] - w) > 1e-6 * (1.0 + w)) {
        checks.fail(wait_def, where + " stores W=" + fmt(sol.wait[c]) + ", recomputed " + fmt(w));
      }
      if (!within_wait_limit(w, t, p)) {
        checks.fail(wait_bound, where + " W=" + fmt(w) + " exceeds " +
                                    fmt(p.max_wait + t.service_minutes()));
      }
      waiting += load * p.wait_cost * w;
    }
    if (sol.open[j]) {
      ++open_count;
      opening += stations[j].open_cost;
      if (station_total < 1) {
        checks.fail(open_needs, "station " + std::to_string(stations[j].id) + " open without chargers");
      }
    } else if (station_total > 0) {
      checks.fail(open_only, "station " + std::to_string(stations[j].id) + " closed with chargers");
    }
  }
  for (const auto& c : rep.checks) rep.constraints_ok = rep.constraints_ok && c.passed;

  rep.cost = {opening, chargers, detour, waiting};
  rep.budget.station_budget = opening <= p.station_budget * (1.0 + kTol);
  rep.budget.charger_budget = chargers <= p.charger_budget * (1.0 + kTol);
  rep.budget.station_count = open_count <= p.max_stations;
  rep.checks.push_back({"station budget", rep.budget.station_budget,
                        rep.budget.station_budget ? "" : "opening cost " + fmt(opening)});
  rep.checks.push_back({"charger budget", rep.budget.charger_budget,
                        rep.budget.charger_budget ? "" : "charger cost " + fmt(chargers)});
  rep.checks.push_back({"station count", rep.budget.station_count,
                        rep.budget.station_count ? "" : std::to_string(open_count) + " open"});
  return rep;
}

SolutionReport refresh_solution(FeasibleSolution& solution, const Instance& instance) {
  SolutionReport rep = evaluate_solution(solution, instance);
  solution.cost = rep.cost;
  solution.budget = rep.budget;
  return rep;
}

std::string solution_to_json(const FeasibleSolution& sol, const Instance& instance,
                             const SolutionReport& report) {
  using ojson = nlohmann::ordered_json;
  const auto types = instance.charger_types();
  const auto stations = instance.stations();
  ojson out;
  out["mode"] = sol.probabilistic ? "probabilistic" : "deterministic";
  out["objective"] = report.cost.total();
  out["cost"] = {{"opening", report.cost.opening},
                 {"chargers", report.cost.chargers},
                 {"detour", report.cost.detour},
                 {"waiting", report.cost.waiting}};
  out["feasible"] = report.constraints_ok;
  out["budget"] = {{"station_budget", report.budget.station_budget},
                   {"charger_budget", report.budget.charger_budget},
                   {"station_count", report.budget.station_count}};
  ojson open = ojson::array();
  for (std::size_t j = 0; j < sol.open.size(); ++j) {
    if (!sol.open[j]) continue;
    ojson st;
    st["id"] = stations[j].id;
    ojson ch = ojson::object();
    ojson w = ojson::object();
    for (std::size_t k = 0; k < sol.num_types; ++k) {
      ch[types[k].name] = sol.charger(j, k);
      if (sol.charger(j, k) > 0) w[types[k].name] = sol.wait_at(j, k);
    }
    st["chargers"] = ch;
    st["wait_minutes"] = w;
    open.push_back(st);
  }
  out["stations"] = open;
  ojson assign = ojson::array();
  for (std::size_t i = 0; i < sol.assignment.size(); ++i) {
    for (const auto& a : sol.assignment[i]) {
      ojson row = {{"household", instance.households()[i].id},
                   {"station", stations[a.station].id},
                   {"type", types[a.type].name}};
      if (sol.probabilistic) row["probability"] = a.fraction;
      assign.push_back(row);
    }
  }
  out["assignments"] = assign;
  ojson checks = ojson::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"constraint", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  out["checks"] = checks;
  return out.dump(2) + "\n";
}

FeasibleSolution solution_from_json(const std::string& text, const Instance& instance) {
  using json = nlohmann::json;
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError(std::string("solution: ") + e.what());
  }
  const auto types = instance.charger_types();
  auto type_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t k = 0; k < types.size(); ++k) {
      if (types[k].name == name) return k;
    }
    throw InstanceError("solution: unknown charger type '" + name + "'");
  };
  std::vector<std::size_t> household_index;
  auto household_of = [&](int id) -> std::size_t {
    const auto hs = instance.households();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      if (hs[i].id == id) return i;
    }
    throw InstanceError("solution: unknown household id " + std::to_string(id));
  };
  FeasibleSolution sol(instance.num_households(), instance.num_stations(), instance.num_types());
  try {
    sol.probabilistic = in.value("mode", "deterministic") == "probabilistic";
    for (const auto& st : in.at("stations")) {
      const std::size_t j = instance.station_index(st.at("id").get<int>());
      sol.open[j] = 1;
      for (const auto& [name, count] : st.at("chargers").items()) {
        sol.chargers[j * sol.num_types + type_index(name)] = count.get<int>();
      }
      const json waits = st.value("wait_minutes", json::object());
      for (const auto& [name, w] : waits.items()) {
        sol.wait[j * sol.num_types + type_index(name)] = w.get<double>();
      }
    }
    for (const auto& row : in.at("assignments")) {
      const std::size_t i = household_of(row.at("household").get<int>());
      sol.assignment[i].push_back({instance.station_index(row.at("station").get<int>()),
                                   type_index(row.at("type").get<std::string>()),
                                   row.value("probability", 1.0)});
    }
  } catch (const json::exception& e) {
    throw InstanceError(std::string("solution: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw InstanceError(std::string("solution: ") + e.what());
  }
  return sol;
}

std::string stations_geojson(const FeasibleSolution& sol, const Instance& instance) {
  using ojson = nlohmann::ordered_json;
  const auto types = instance.charger_types();
  const auto stations = instance.stations();
  ojson features = ojson::array();
  for (std::size_t j = 0; j < sol.open.size(); ++j) {
    if (!sol.open[j]) continue;
    const Station& st = stations[j];
    ojson props;
    props["id"] = st.id;
    props["kind"] = to_string(st.kind);
    props["agency"] = instance.service_agency(j);
    for (std::size_t k = 0; k < sol.num_types; ++k) {
      props["s_" + types[k].name] = sol.charger(j, k);
      props["W_" + types[k].name] = sol.wait_at(j, k);
    }
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "Point"}, {"coordinates", {st.position.lon, st.position.lat}}}},
                        {"properties", props}});
  }
  ojson out = {{"type", "FeatureCollection"}, {"features", features}};
  return out.dump(2) + "\n";
}

}  // namespace scla
