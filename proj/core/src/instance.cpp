#include "scla/instance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include "scla/kdtree.hpp"

namespace scla {

namespace {

constexpr double kEarthRadiusKm = 6371.0088;
constexpr double kKmPerDegree = 111.32;

double deg2rad(double d) { return d * M_PI / 180.0; }

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double dlat = deg2rad(b.lat - a.lat);
  const double dlon = deg2rad(b.lon - a.lon);
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(deg2rad(a.lat)) * std::cos(deg2rad(b.lat)) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

// Households are shared by every scenario of a seed, stations are not.
double reference_latitude(const InstanceData& data) {
  if (data.households.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& h : data.households) sum += h.position.lat;
  return sum / static_cast<double>(data.households.size());
}

std::string household_path(const InstanceData& data, std::size_t i) {
  return "households[" + std::to_string(i) + "] (id " + std::to_string(data.households[i].id) +
         ")";
}

std::unordered_map<int, std::size_t> station_lookup(const InstanceData& data) {
  std::unordered_map<int, std::size_t> lookup;
  for (std::size_t j = 0; j < data.stations.size(); ++j) {
    if (!lookup.emplace(data.stations[j].id, j).second) {
      throw InstanceError("stations[" + std::to_string(j) + "]: duplicate id " +
                          std::to_string(data.stations[j].id));
    }
  }
  return lookup;
}

}  // namespace

// ---------------------------------------------------------------------------

TravelTimes::TravelTimes(const InstanceData& data) : model_(data.travel) {
  station_pos_.reserve(data.stations.size());
  for (const auto& s : data.stations) station_pos_.push_back(s.position);
  household_pos_.reserve(data.households.size());
  for (const auto& h : data.households) household_pos_.push_back(h.position);

  if (data.travel_matrix) {
    const auto& rows = *data.travel_matrix;
    cols_ = data.stations.size() + data.households.size();
    if (rows.size() != data.stations.size()) {
      throw InstanceError("travel_matrix: expected " + std::to_string(data.stations.size()) +
                          " rows (one per station), got " + std::to_string(rows.size()));
    }
    matrix_.reserve(rows.size() * cols_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols_) {
        throw InstanceError("travel_matrix[" + std::to_string(r) + "]: expected " +
                            std::to_string(cols_) + " columns, got " +
                            std::to_string(rows[r].size()));
      }
      for (std::size_t c = 0; c < cols_; ++c) {
        if (!(rows[r][c] >= 0.0) || !std::isfinite(rows[r][c])) {
          throw InstanceError("travel_matrix[" + std::to_string(r) + "][" + std::to_string(c) +
                              "]: travel time must be finite and >= 0");
        }
        matrix_.push_back(rows[r][c]);
      }
    }
  }
}

double TravelTimes::geometric(const GeoPoint& a, const GeoPoint& b) const {
  if (model_.kind == TravelModel::Kind::euclidean) {
    return std::hypot(a.lat - b.lat, a.lon - b.lon) * model_.minutes_per_unit;
  }
  return haversine_km(a, b) / model_.speed_kmh * 60.0;
}

double TravelTimes::station_to_station(std::size_t a, std::size_t b) const {
  if (!matrix_.empty()) return matrix_[a * cols_ + b];
  return geometric(station_pos_[a], station_pos_[b]);
}

double TravelTimes::station_to_household(std::size_t station, std::size_t household) const {
  if (!matrix_.empty()) return matrix_[station * cols_ + station_pos_.size() + household];
  return geometric(station_pos_[station], household_pos_[household]);
}

double detour_minutes(const TravelTimes& travel, std::size_t depot, std::size_t station,
                      std::size_t household) {
  const double t = travel.station_to_station(depot, station) +
                   travel.station_to_household(station, household) -
                   travel.station_to_household(depot, household);
  return std::max(0.0, t);
}

// ---------------------------------------------------------------------------

std::pair<double, double> neighborhood_coords(const TravelModel& model, const GeoPoint& p,
                                              double ref_lat) {
  if (model.kind == TravelModel::Kind::euclidean) return {p.lon, p.lat};
  return {p.lon * kKmPerDegree * std::cos(deg2rad(ref_lat)), p.lat * kKmPerDegree};
}

std::vector<std::string> service_agencies(const InstanceData& data) {
  std::vector<std::size_t> depots;
  for (std::size_t j = 0; j < data.stations.size(); ++j) {
    if (data.stations[j].kind == StationKind::depot) depots.push_back(j);
  }
  const double ref_lat = reference_latitude(data);
  std::vector<std::string> out(data.stations.size());
  for (std::size_t j = 0; j < data.stations.size(); ++j) {
    const Station& s = data.stations[j];
    if (s.kind == StationKind::depot) {
      out[j] = s.agency;
      continue;
    }
    const auto [x, y] = neighborhood_coords(data.travel, s.position, ref_lat);
    double best = INFINITY;
    int best_id = 0;
    for (std::size_t d : depots) {
      const auto [dx, dy] = neighborhood_coords(data.travel, data.stations[d].position, ref_lat);
      const double dist = (dx - x) * (dx - x) + (dy - y) * (dy - y);
      const int id = data.stations[d].id;
      if (dist < best || (dist == best && id < best_id)) {
        best = dist;
        best_id = id;
        out[j] = data.stations[d].agency;
      }
    }
  }
  return out;
}

Neighborhoods build_neighborhoods(const InstanceData& data, int k_c) {
  if (k_c < 1) throw InstanceError("params.k_c: neighborhood size must be >= 1");
  const auto lookup = station_lookup(data);
  const auto agencies = service_agencies(data);
  const double ref_lat = reference_latitude(data);

  // one tree per eligibility group: everything under multi-agency, one per
  // agency under single-agency
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < data.stations.size(); ++j) {
    if (!data.stations[j].candidate) continue;
    const std::string key = data.policy == AgencyPolicy::multi ? std::string{} : agencies[j];
    groups[key].push_back(j);
  }
  std::map<std::string, KdTree2> trees;
  for (const auto& [key, members] : groups) {
    std::vector<KeyedPoint> pts;
    pts.reserve(members.size());
    for (std::size_t j : members) {
      const auto [x, y] = neighborhood_coords(data.travel, data.stations[j].position, ref_lat);
      pts.push_back({x, y, data.stations[j].id});
    }
    trees.emplace(key, KdTree2(std::move(pts)));
  }

  Neighborhoods hoods;
  hoods.stations_of.resize(data.households.size());
  hoods.households_of.resize(data.stations.size());
  for (std::size_t i = 0; i < data.households.size(); ++i) {
    const Household& h = data.households[i];
    std::string key;
    if (data.policy == AgencyPolicy::single) {
      const auto it = lookup.find(h.depot_id);
      if (it == lookup.end()) {
        throw InstanceError(household_path(data, i) + ".depot_id: unknown station " +
                            std::to_string(h.depot_id));
      }
      key = data.stations[it->second].agency;
    }
    const auto tree = trees.find(key);
    if (tree == trees.end() || tree->second.size() == 0) {
      throw InstanceError(household_path(data, i) + ": no eligible candidate station");
    }
    const auto [x, y] = neighborhood_coords(data.travel, h.position, ref_lat);
    const auto& members = groups.at(key);
    for (std::size_t pos : tree->second.nearest(x, y, static_cast<std::size_t>(k_c))) {
      const int j = static_cast<int>(members[pos]);
      hoods.stations_of[i].push_back(j);
      hoods.households_of[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
    }
  }
  return hoods;
}

// ---------------------------------------------------------------------------

Instance::Instance(InstanceData data) : data_(std::move(data)) {
  const GlobalParams& p = data_.params;
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InstanceError(what);
  };
  require(p.detour_cost >= 0, "params.detour_cost: must be >= 0");
  require(p.wait_cost >= 0, "params.wait_cost: must be >= 0");
  require(p.station_budget >= 0, "params.station_budget: must be >= 0");
  require(p.charger_budget >= 0, "params.charger_budget: must be >= 0");
  require(p.max_stations >= 0, "params.max_stations: must be >= 0");
  require(p.max_wait >= 0, "params.max_wait: must be >= 0");
  require(p.epsilon > 0 && p.epsilon < 1, "params.epsilon: must lie in (0, 1)");
  require(p.k_c >= 1, "params.k_c: must be >= 1");
  require(p.detour_cost_multiplier >= 0, "params.detour_cost_multiplier: must be >= 0");
  if (data_.travel.kind == TravelModel::Kind::haversine) {
    require(data_.travel.speed_kmh > 0, "travel.speed_kmh: must be > 0");
  } else {
    require(data_.travel.minutes_per_unit > 0, "travel.minutes_per_unit: must be > 0");
  }

  require(!data_.charger_types.empty(), "charger_types: at least one type is required");
  for (std::size_t k = 0; k < data_.charger_types.size(); ++k) {
    const auto& t = data_.charger_types[k];
    const std::string path = "charger_types[" + std::to_string(k) + "]";
    require(t.mu > 0 && std::isfinite(t.mu), path + ".mu: must be > 0");
    require(t.install_cost >= 0, path + ".install_cost: must be >= 0");
    require(t.max_per_station >= 0, path + ".max_per_station: must be >= 0");
    require(t.scv_service >= 0, path + ".scv_service: must be >= 0");
  }

  const auto lookup = station_lookup(data_);
  for (std::size_t j = 0; j < data_.stations.size(); ++j) {
    const auto& s = data_.stations[j];
    const std::string path = "stations[" + std::to_string(j) + "] (id " + std::to_string(s.id) + ")";
    require(s.open_cost >= 0, path + ".open_cost: must be >= 0");
    if (s.kind == StationKind::depot) {
      require(s.open_cost == 0.0, path + ".open_cost: depot stations open at zero cost");
    } else {
      require(s.agency.empty(), path + ".agency: TAZ stations carry no agency");
      require(s.candidate, path + ".candidate: TAZ stations are always candidates");
    }
  }

  std::unordered_map<int, std::size_t> household_ids;
  depot_index_.resize(data_.households.size());
  for (std::size_t i = 0; i < data_.households.size(); ++i) {
    const auto& h = data_.households[i];
    const std::string path = household_path(data_, i);
    require(household_ids.emplace(h.id, i).second, path + ": duplicate id");
    require(h.gamma > 0, path + ".gamma: must be > 0");
    require(h.pi > 0 && h.pi <= 1, path + ".pi: must lie in (0, 1]");
    require(std::abs(h.lambda - h.gamma * h.pi) <= 1e-9 * std::max(1.0, h.lambda),
            path + ".lambda: must equal gamma * pi");
    const auto it = lookup.find(h.depot_id);
    require(it != lookup.end(), path + ".depot_id: unknown station " + std::to_string(h.depot_id));
    require(data_.stations[it->second].kind == StationKind::depot,
            path + ".depot_id: station " + std::to_string(h.depot_id) + " is not a depot");
    depot_index_[i] = it->second;
  }

  travel_ = TravelTimes(data_);
  service_agency_ = service_agencies(data_);
  hoods_ = build_neighborhoods(data_, p.k_c);

  slots_.resize(data_.households.size());
  detours_.resize(data_.households.size());
  station_detours_.resize(data_.stations.size());
  for (std::size_t j = 0; j < data_.stations.size(); ++j) {
    station_detours_[j].resize(hoods_.households_of[j].size());
  }
  for (std::size_t i = 0; i < data_.households.size(); ++i) {
    for (int j : hoods_.stations_of[i]) {
      const auto& members = hoods_.households_of[static_cast<std::size_t>(j)];
      const auto pos = std::lower_bound(members.begin(), members.end(), static_cast<int>(i));
      const int local = static_cast<int>(pos - members.begin());
      const double t = detour_minutes(travel_, depot_index_[i], static_cast<std::size_t>(j), i);
      slots_[i].push_back(local);
      detours_[i].push_back(t);
      station_detours_[static_cast<std::size_t>(j)][static_cast<std::size_t>(local)] = t;
    }
  }
}

int Instance::neighborhood_position(std::size_t household, std::size_t station) const {
  const auto& js = hoods_.stations_of[household];
  for (std::size_t m = 0; m < js.size(); ++m) {
    if (static_cast<std::size_t>(js[m]) == station) return static_cast<int>(m);
  }
  return -1;
}

double Instance::detour_time(std::size_t household, std::size_t station) const {
  const int m = neighborhood_position(household, station);
  if (m < 0) {
    throw std::invalid_argument("detour_time: station " + std::to_string(station) +
                                " is not in the neighborhood of household " +
                                std::to_string(household));
  }
  return detours_[household][static_cast<std::size_t>(m)];
}

std::size_t Instance::station_index(int station_id) const {
  for (std::size_t j = 0; j < data_.stations.size(); ++j) {
    if (data_.stations[j].id == station_id) return j;
  }
  throw std::out_of_range("unknown station id " + std::to_string(station_id));
}

// ---------------------------------------------------------------------------

std::string to_string(StationKind kind) { return kind == StationKind::taz ? "taz" : "depot"; }

std::string to_string(AgencyPolicy policy) {
  return policy == AgencyPolicy::single ? "single" : "multi";
}

std::string to_string(LocationSet locations) {
  switch (locations) {
    case LocationSet::taz: return "taz";
    case LocationSet::depot: return "depot";
    case LocationSet::both: return "both";
  }
  return "both";
}

AgencyPolicy parse_policy(const std::string& text) {
  if (text == "single") return AgencyPolicy::single;
  if (text == "multi") return AgencyPolicy::multi;
  throw InstanceError("policy: expected 'single' or 'multi', got '" + text + "'");
}

LocationSet parse_locations(const std::string& text) {
  if (text == "taz") return LocationSet::taz;
  if (text == "depot") return LocationSet::depot;
  if (text == "both") return LocationSet::both;
  throw InstanceError("locations: expected 'taz', 'depot' or 'both', got '" + text + "'");
}

}  // namespace scla
