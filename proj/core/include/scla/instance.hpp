#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scla {

inline constexpr double kMinutesPerDay = 1440.0;
inline constexpr double kDaysPerYear = 365.0;

/// Schema or consistency problem in instance data; the message names the
/// offending field path.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Latitude/longitude in degrees. Under the planar travel model the pair is
/// read as (y, x) in arbitrary units.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

enum class StationKind { taz, depot };
enum class AgencyPolicy { single, multi };
enum class LocationSet { taz, depot, both };

struct Household {
  int id = 0;
  GeoPoint position;
  int depot_id = 0;  ///< station id of the home depot F_i
  double gamma = 1.0;  ///< deliveries per day
  double pi = 1.0;  ///< probability of a charge before the delivery
  double lambda = 1.0;  ///< charges per day, gamma * pi
};

struct Station {
  int id = 0;
  GeoPoint position;
  StationKind kind = StationKind::taz;
  std::string agency;  ///< empty for TAZ sites
  double open_cost = 0.0;  ///< USD/day
  bool candidate = true;  ///< false: a depot that only anchors routes
};

struct ChargerType {
  int id = 0;
  std::string name;
  double mu = 1.0;  ///< charges per day per charger
  double install_cost = 0.0;  ///< USD/day per charger
  int max_per_station = 1;
  double scv_service = 1.0;  ///< squared CV of the charging time

  [[nodiscard]] double mu_per_minute() const { return mu / kMinutesPerDay; }
  [[nodiscard]] double service_minutes() const { return kMinutesPerDay / mu; }
};

struct GlobalParams {
  double detour_cost = 1.09;  ///< USD/min
  double wait_cost = 0.70;  ///< USD/min
  double station_budget = 150000.0;  ///< USD/day
  double charger_budget = 500000.0;  ///< USD/day
  int max_stations = 1000;
  double max_wait = 30.0;  ///< minutes of queueing on top of service
  double epsilon = 0.01;
  int k_c = 3;
  double detour_cost_multiplier = 1.0;
};

/// Upper limit EW + 1/mu on the time in system of a charger type, minutes.
inline double wait_limit(const ChargerType& type, const GlobalParams& params) {
  return params.max_wait + type.service_minutes();
}

/// W <= EW + 1/mu with a 1e-9 relative allowance for rounding, so the
/// boundary case W == 1/mu at EW = 0 is accepted.
inline bool within_wait_limit(double w, const ChargerType& type, const GlobalParams& params) {
  const double limit = wait_limit(type, params);
  return w <= limit + 1e-9 * (1.0 + limit);
}

struct TravelModel {
  enum class Kind { haversine, euclidean };
  Kind kind = Kind::haversine;
  double speed_kmh = 30.0;  ///< haversine only
  double minutes_per_unit = 1.0;  ///< euclidean only
};

/// Plain, unvalidated instance contents as read from or written to disk.
struct InstanceData {
  AgencyPolicy policy = AgencyPolicy::multi;
  GlobalParams params;
  TravelModel travel;
  std::vector<ChargerType> charger_types;
  std::vector<Station> stations;
  std::vector<Household> households;
  /// Rows: stations in file order. Columns: stations, then households.
  std::optional<std::vector<std::vector<double>>> travel_matrix;
};

/// Travel-time provider in minutes. A dense matrix, when present, wins over
/// the geometric model. Travel is taken as symmetric.
class TravelTimes {
 public:
  TravelTimes() = default;
  TravelTimes(const InstanceData& data);

  [[nodiscard]] double station_to_station(std::size_t a, std::size_t b) const;
  [[nodiscard]] double station_to_household(std::size_t station, std::size_t household) const;
  [[nodiscard]] bool from_matrix() const { return !matrix_.empty(); }

 private:
  [[nodiscard]] double geometric(const GeoPoint& a, const GeoPoint& b) const;

  TravelModel model_;
  std::vector<GeoPoint> station_pos_;
  std::vector<GeoPoint> household_pos_;
  std::vector<double> matrix_;
  std::size_t cols_ = 0;
};

/// J_i (station indices per household, nearest first) and I_j (household
/// indices per station, ascending).
struct Neighborhoods {
  std::vector<std::vector<int>> stations_of;
  std::vector<std::vector<int>> households_of;
};

/// k_c nearest eligible candidate stations per household on a 2-d tree.
/// Throws InstanceError if a household has no eligible station.
Neighborhoods build_neighborhoods(const InstanceData& data, int k_c);

/// Planar coordinates used for nearest-station queries.
std::pair<double, double> neighborhood_coords(const TravelModel& model, const GeoPoint& p,
                                              double ref_lat);

/// Validated, immutable instance with derived neighborhoods and detours.
class Instance {
 public:
  explicit Instance(InstanceData data);

  [[nodiscard]] const InstanceData& data() const { return data_; }
  [[nodiscard]] const GlobalParams& params() const { return data_.params; }
  [[nodiscard]] AgencyPolicy policy() const { return data_.policy; }
  [[nodiscard]] std::span<const Household> households() const { return data_.households; }
  [[nodiscard]] std::span<const Station> stations() const { return data_.stations; }
  [[nodiscard]] std::span<const ChargerType> charger_types() const { return data_.charger_types; }
  [[nodiscard]] std::size_t num_households() const { return data_.households.size(); }
  [[nodiscard]] std::size_t num_stations() const { return data_.stations.size(); }
  [[nodiscard]] std::size_t num_types() const { return data_.charger_types.size(); }
  [[nodiscard]] const TravelTimes& travel() const { return travel_; }

  /// J_i as station indices, nearest first.
  [[nodiscard]] std::span<const int> stations_of(std::size_t household) const {
    return hoods_.stations_of[household];
  }
  /// I_j as household indices, ascending.
  [[nodiscard]] std::span<const int> households_of(std::size_t station) const {
    return hoods_.households_of[station];
  }
  /// Position of household i inside households_of(stations_of(i)[m]).
  [[nodiscard]] int slot(std::size_t household, std::size_t m) const {
    return slots_[household][m];
  }
  /// Detour minutes for household i and station stations_of(i)[m].
  [[nodiscard]] double detour(std::size_t household, std::size_t m) const {
    return detours_[household][m];
  }
  /// Detour minutes of households_of(j)[local] at station j.
  [[nodiscard]] double detour_at(std::size_t station, std::size_t local) const {
    return station_detours_[station][local];
  }
  /// Index m with stations_of(i)[m] == j, or -1.
  [[nodiscard]] int neighborhood_position(std::size_t household, std::size_t station) const;

  /// T(F_i, j) + T(j, i) - T(F_i, i), clamped at 0. Requires j in J_i.
  [[nodiscard]] double detour_time(std::size_t household, std::size_t station) const;

  [[nodiscard]] std::size_t depot_index(std::size_t household) const {
    return depot_index_[household];
  }
  [[nodiscard]] std::size_t station_index(int station_id) const;
  /// Depot agency for depots; agency of the nearest depot for TAZ sites.
  [[nodiscard]] const std::string& service_agency(std::size_t station) const {
    return service_agency_[station];
  }

 private:
  InstanceData data_;
  TravelTimes travel_;
  Neighborhoods hoods_;
  std::vector<std::vector<int>> slots_;
  std::vector<std::vector<double>> detours_;
  std::vector<std::vector<double>> station_detours_;
  std::vector<std::size_t> depot_index_;
  std::vector<std::string> service_agency_;
};

/// Raw detour formula on a travel provider, clamped at zero.
double detour_minutes(const TravelTimes& travel, std::size_t depot, std::size_t station,
                      std::size_t household);

/// Depot agency for depots, agency of the nearest depot for TAZ sites.
std::vector<std::string> service_agencies(const InstanceData& data);

// ---------------------------------------------------------------------------
// Scenario generation

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int n_households = 100;
  int n_taz = 20;
  int n_depots = 4;
  LocationSet locations = LocationSet::both;
  AgencyPolicy policy = AgencyPolicy::multi;
  GlobalParams params;
  double deliveries_per_vehicle = 120.0;  ///< nu_bar; pi_i = 1 / nu_bar
  double gamma_min = 1.0;
  double gamma_max = 7.0;
  int n_agencies = 4;
  GeoPoint center{41.8781, -87.6298};
  double region_radius_km = 15.0;
  double station_capex_usd = 1'000'000.0;
  double station_lifetime_years = 40.0;
  double charger_lifetime_years = 10.0;
  double speed_kmh = 30.0;
};

/// Basic / moderate / fast charger catalogue converted to per-day units.
std::vector<ChargerType> default_charger_types(double lifetime_years = 10.0);

/// Station opening cost per day for a capital cost amortized over a lifetime.
double amortized_per_day(double capital_usd, double lifetime_years);

/// Seeded synthetic instance. Geometry depends only on the seed and the
/// counts, so the six location/policy scenarios of one seed share it.
InstanceData generate_scenario(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Serialization

InstanceData load_instance(const std::filesystem::path& path);
InstanceData parse_instance(const std::string& json_text);
void save_instance(const InstanceData& data, const std::filesystem::path& path);
std::string dump_instance(const InstanceData& data);

std::string to_string(StationKind kind);
std::string to_string(AgencyPolicy policy);
std::string to_string(LocationSet locations);
AgencyPolicy parse_policy(const std::string& text);
LocationSet parse_locations(const std::string& text);

}  // namespace scla
