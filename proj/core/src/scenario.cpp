#include <cmath>
#include <string>

#include "scla/instance.hpp"
#include "scla/random.hpp"

namespace scla {

namespace {

constexpr double kKmPerDegreeLat = 111.32;

GeoPoint offset_km(const GeoPoint& origin, double east_km, double north_km) {
  const double lat = origin.lat + north_km / kKmPerDegreeLat;
  const double lon =
      origin.lon + east_km / (kKmPerDegreeLat * std::cos(origin.lat * M_PI / 180.0));
  return {lat, lon};
}

const char* const kAgencyNames[] = {"amazon", "fedex", "ups", "usps", "dhl", "ontrac"};

}  // namespace

double amortized_per_day(double capital_usd, double lifetime_years) {
  return capital_usd / (lifetime_years * kDaysPerYear);
}

std::vector<ChargerType> default_charger_types(double lifetime_years) {
  struct Row {
    const char* name;
    double capex;
    double per_hour;
  };
  const Row rows[] = {{"basic", 73000.0, 0.53}, {"moderate", 157000.0, 1.90}, {"fast", 228000.0, 3.81}};
  std::vector<ChargerType> out;
  int id = 0;
  for (const auto& r : rows) {
    ChargerType t;
    t.id = id++;
    t.name = r.name;
    t.mu = r.per_hour * 24.0;
    t.install_cost = amortized_per_day(r.capex, lifetime_years);
    t.max_per_station = 20;
    out.push_back(t);
  }
  return out;
}

InstanceData generate_scenario(const ScenarioConfig& config) {
  if (config.n_households < 1) throw InstanceError("generate: --households must be >= 1");
  if (config.n_depots < 1) {
    throw InstanceError("generate: at least one depot is required (households start at a depot)");
  }
  if (config.n_taz < 0) throw InstanceError("generate: --taz must be >= 0");
  if (config.locations == LocationSet::taz && config.n_taz < 1) {
    throw InstanceError("generate: locations=taz needs --taz >= 1");
  }
  if (!(config.deliveries_per_vehicle >= 1.0)) {
    throw InstanceError("generate: deliveries per vehicle must be >= 1");
  }
  if (!(config.gamma_min > 0.0) || config.gamma_max < config.gamma_min) {
    throw InstanceError("generate: gamma range must satisfy 0 < min <= max");
  }
  if (config.n_agencies < 1) throw InstanceError("generate: at least one agency is required");

  Rng rng(config.seed);
  InstanceData data;
  data.policy = config.policy;
  data.params = config.params;
  data.travel.kind = TravelModel::Kind::haversine;
  data.travel.speed_kmh = config.speed_kmh;
  data.charger_types = default_charger_types(config.charger_lifetime_years);

  const double station_cost =
      amortized_per_day(config.station_capex_usd, config.station_lifetime_years);
  const int agencies = std::min(config.n_agencies, config.n_depots);

  // Draw order is fixed: TAZ sites, depots, households. Every scenario of a
  // seed therefore shares coordinates and demand.
  const double r = config.region_radius_km;
  for (int t = 0; t < config.n_taz; ++t) {
    const double radius = r * std::sqrt(rng.uniform());
    const double angle = 2.0 * M_PI * rng.uniform();
    Station s;
    s.id = t;
    s.kind = StationKind::taz;
    s.position = offset_km(config.center, radius * std::cos(angle), radius * std::sin(angle));
    s.open_cost = station_cost;
    s.candidate = true;
    data.stations.push_back(s);
  }
  std::vector<std::size_t> depot_rows;
  for (int d = 0; d < config.n_depots; ++d) {
    const double east = 0.35 * r * rng.normal();
    const double north = 0.35 * r * rng.normal();
    Station s;
    s.id = config.n_taz + d;
    s.kind = StationKind::depot;
    s.agency = kAgencyNames[d % agencies % 6];
    if (agencies > 6) s.agency += std::to_string(d % agencies);
    s.position = offset_km(config.center, east, north);
    s.open_cost = 0.0;
    depot_rows.push_back(data.stations.size());
    data.stations.push_back(s);
  }

  // dense cores around depots with a sparse fringe
  for (int i = 0; i < config.n_households; ++i) {
    const std::size_t d = depot_rows[rng.below(depot_rows.size())];
    const double sigma_km = rng.uniform() < 0.7 ? 0.15 * r : 0.45 * r;
    Household h;
    h.id = i;
    h.depot_id = data.stations[d].id;
    h.position = offset_km(data.stations[d].position, sigma_km * rng.normal(),
                           sigma_km * rng.normal());
    h.gamma = rng.uniform(config.gamma_min, config.gamma_max);
    h.pi = 1.0 / config.deliveries_per_vehicle;
    h.lambda = h.gamma * h.pi;
    data.households.push_back(h);
  }

  for (auto& s : data.stations) {
    if (s.kind == StationKind::taz) {
      s.candidate = config.locations != LocationSet::depot;
    } else {
      s.candidate = config.locations != LocationSet::taz;
    }
  }
  // a TAZ that is not a candidate is simply absent
  if (config.locations == LocationSet::depot) {
    std::erase_if(data.stations, [](const Station& s) { return s.kind == StationKind::taz; });
  }
  return data;
}

}  // namespace scla
