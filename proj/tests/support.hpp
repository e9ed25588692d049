#pragma once

// Hand-rolled generators shared by the test binaries.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scla/instance.hpp"
#include "scla/random.hpp"

namespace scla::testing {

struct TinySpec {
  int households = 4;
  int stations = 3;  ///< candidate stations, the first one is a depot
  int types = 2;
  int max_chargers = 2;
  int k_c = 2;
};

/// Planar instance whose first station is the home depot (free to open) and
/// the rest TAZ sites. Rates are per day and chosen so that stability, the
/// waiting limit and the budgets all bind now and then.
inline InstanceData tiny_instance(Rng& rng, const TinySpec& spec) {
  InstanceData d;
  d.policy = AgencyPolicy::multi;
  d.travel.kind = TravelModel::Kind::euclidean;
  d.travel.minutes_per_unit = 3.0;
  d.params.k_c = spec.k_c;
  d.params.detour_cost = rng.uniform(0.2, 1.5);
  d.params.wait_cost = rng.uniform(0.001, 0.05);
  d.params.max_wait = rng.uniform() < 0.3 ? rng.uniform(0.0, 60.0) : rng.uniform(60.0, 2000.0);
  d.params.epsilon = 0.01;
  d.params.station_budget = rng.uniform() < 0.2 ? rng.uniform(20.0, 80.0) : 1e6;
  d.params.charger_budget = rng.uniform() < 0.2 ? rng.uniform(10.0, 60.0) : 1e6;
  d.params.max_stations = rng.uniform() < 0.2 ? 1 : 1000;
  for (int k = 0; k < spec.types; ++k) {
    ChargerType t;
    t.id = k;
    t.name = "t" + std::to_string(k);
    t.mu = rng.uniform(1.0, 8.0);
    t.install_cost = rng.uniform(2.0, 25.0);
    t.max_per_station = spec.max_chargers;
    d.charger_types.push_back(t);
  }
  for (int j = 0; j < spec.stations; ++j) {
    Station s;
    s.id = 10 + j;
    s.kind = j == 0 ? StationKind::depot : StationKind::taz;
    s.agency = j == 0 ? "north" : "";
    s.position = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    s.open_cost = j == 0 ? 0.0 : rng.uniform(5.0, 60.0);
    d.stations.push_back(s);
  }
  for (int i = 0; i < spec.households; ++i) {
    Household h;
    h.id = 100 + i;
    h.position = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    h.depot_id = 10;
    h.gamma = rng.uniform(0.5, 6.0);
    h.pi = 1.0;
    h.lambda = h.gamma;
    d.households.push_back(h);
  }
  return d;
}

/// Random oracle-sized spec.
inline TinySpec random_tiny_spec(Rng& rng, int max_households = 5) {
  TinySpec s;
  s.households = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(max_households)));
  s.stations = 1 + static_cast<int>(rng.below(3));
  s.types = 1 + static_cast<int>(rng.below(2));
  s.max_chargers = 1 + static_cast<int>(rng.below(3));
  s.k_c = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(s.stations)));
  return s;
}

/// Generated scenario shrunk to oracle size: two depots of different
/// agencies, one TAZ, `households` households, two charger types with at
/// most two chargers each, k_c covering every station.
inline InstanceData oracle_scenario(std::uint64_t seed, LocationSet locations,
                                    AgencyPolicy policy, int households = 5) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.n_households = households;
  cfg.n_taz = 1;
  cfg.n_depots = 2;
  cfg.n_agencies = 2;
  cfg.locations = locations;
  cfg.policy = policy;
  cfg.region_radius_km = 6.0;
  cfg.deliveries_per_vehicle = 2.0;  // rates of a few charges per day
  cfg.params.k_c = 3;
  InstanceData d = generate_scenario(cfg);
  std::vector<ChargerType> types = default_charger_types();
  types.erase(types.begin() + 1);  // basic and fast
  for (auto& t : types) t.max_per_station = 2;
  d.charger_types = types;
  return d;
}

}  // namespace scla::testing
