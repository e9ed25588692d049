#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "scla/instance.hpp"

namespace scla {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw InstanceError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw InstanceError(path + ": missing field '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw InstanceError(path + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return number(obj, key, path);
}

int integer(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_integer()) throw InstanceError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

int integer_or(const json& obj, const char* key, const std::string& path, int fallback) {
  if (!obj.contains(key)) return fallback;
  return integer(obj, key, path);
}

std::string text(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) throw InstanceError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

const json& array(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_array()) throw InstanceError(path + "." + key + ": expected an array");
  return v;
}

std::string element_path(const char* key, std::size_t n, const json& item) {
  std::string p = std::string(key) + "[" + std::to_string(n) + "]";
  if (item.is_object() && item.contains("id") && item["id"].is_number_integer()) {
    p += " (id " + std::to_string(item["id"].get<int>()) + ")";
  }
  return p;
}

ojson params_json(const GlobalParams& p) {
  ojson o;
  o["detour_cost"] = p.detour_cost;
  o["wait_cost"] = p.wait_cost;
  o["station_budget"] = p.station_budget;
  o["charger_budget"] = p.charger_budget;
  o["max_stations"] = p.max_stations;
  o["max_wait"] = p.max_wait;
  o["epsilon"] = p.epsilon;
  o["k_c"] = p.k_c;
  o["detour_cost_multiplier"] = p.detour_cost_multiplier;
  return o;
}

ojson header_json() {
  ojson h;
  h["schema"] = "scla-instance/1";
  h["units"] = {{"rates", "per day"}, {"costs", "USD per day"}, {"times", "minutes"},
                {"coordinates", "degrees (lat, lon); planar units under the euclidean model"}};
  h["travel_matrix_layout"] =
      "row-major minutes; one row per station in file order; columns are all stations in "
      "file order followed by all households in file order; travel is read as symmetric";
  ojson ref;
  ref["station_capex_usd"] = 1000000.0;
  ref["station_lifetime_years"] = 40.0;
  ref["charger_lifetime_years"] = 10.0;
  ref["charger_capex_usd"] = {{"basic", 73000.0}, {"moderate", 157000.0}, {"fast", 228000.0}};
  ref["charger_rate_per_hour"] = {{"basic", 0.53}, {"moderate", 1.90}, {"fast", 3.81}};
  ref["days_per_year"] = kDaysPerYear;
  ref["default_params"] = params_json(GlobalParams{});
  h["reference_values"] = ref;
  return h;
}

}  // namespace

std::string dump_instance(const InstanceData& data) {
  ojson doc;
  doc["header"] = header_json();
  doc["policy"] = to_string(data.policy);
  doc["params"] = params_json(data.params);
  ojson travel;
  if (data.travel.kind == TravelModel::Kind::haversine) {
    travel["model"] = "haversine";
    travel["speed_kmh"] = data.travel.speed_kmh;
  } else {
    travel["model"] = "euclidean";
    travel["minutes_per_unit"] = data.travel.minutes_per_unit;
  }
  doc["travel"] = travel;

  ojson types = ojson::array();
  for (const auto& t : data.charger_types) {
    ojson o;
    o["id"] = t.id;
    o["name"] = t.name;
    o["mu"] = t.mu;
    o["install_cost"] = t.install_cost;
    o["max_per_station"] = t.max_per_station;
    o["scv_service"] = t.scv_service;
    types.push_back(std::move(o));
  }
  doc["charger_types"] = std::move(types);

  ojson stations = ojson::array();
  for (const auto& s : data.stations) {
    ojson o;
    o["id"] = s.id;
    o["kind"] = to_string(s.kind);
    o["lat"] = s.position.lat;
    o["lon"] = s.position.lon;
    o["agency"] = s.agency.empty() ? ojson(nullptr) : ojson(s.agency);
    o["open_cost"] = s.open_cost;
    o["candidate"] = s.candidate;
    stations.push_back(std::move(o));
  }
  doc["stations"] = std::move(stations);

  ojson households = ojson::array();
  for (const auto& h : data.households) {
    ojson o;
    o["id"] = h.id;
    o["lat"] = h.position.lat;
    o["lon"] = h.position.lon;
    o["depot_id"] = h.depot_id;
    o["gamma"] = h.gamma;
    o["pi"] = h.pi;
    o["lambda"] = h.lambda;
    households.push_back(std::move(o));
  }
  doc["households"] = std::move(households);

  if (data.travel_matrix) doc["travel_matrix"] = *data.travel_matrix;
  return doc.dump(2) + "\n";
}

InstanceData parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InstanceError(std::string("instance: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InstanceError("instance: top level must be an object");

  InstanceData data;
  data.policy = doc.contains("policy") ? parse_policy(text(doc, "policy", "instance"))
                                       : AgencyPolicy::multi;

  const json& p = field(doc, "params", "instance");
  GlobalParams def;
  data.params.detour_cost = number_or(p, "detour_cost", "params", def.detour_cost);
  data.params.wait_cost = number_or(p, "wait_cost", "params", def.wait_cost);
  data.params.station_budget = number_or(p, "station_budget", "params", def.station_budget);
  data.params.charger_budget = number_or(p, "charger_budget", "params", def.charger_budget);
  data.params.max_stations = integer_or(p, "max_stations", "params", def.max_stations);
  data.params.max_wait = number_or(p, "max_wait", "params", def.max_wait);
  data.params.epsilon = number_or(p, "epsilon", "params", def.epsilon);
  data.params.k_c = integer_or(p, "k_c", "params", def.k_c);
  data.params.detour_cost_multiplier =
      number_or(p, "detour_cost_multiplier", "params", def.detour_cost_multiplier);

  if (doc.contains("travel")) {
    const json& t = doc["travel"];
    const std::string model = text(t, "model", "travel");
    if (model == "haversine") {
      data.travel.kind = TravelModel::Kind::haversine;
      data.travel.speed_kmh = number_or(t, "speed_kmh", "travel", 30.0);
    } else if (model == "euclidean") {
      data.travel.kind = TravelModel::Kind::euclidean;
      data.travel.minutes_per_unit = number_or(t, "minutes_per_unit", "travel", 1.0);
    } else {
      throw InstanceError("travel.model: expected 'haversine' or 'euclidean', got '" + model + "'");
    }
  }

  const json& types = array(doc, "charger_types", "instance");
  for (std::size_t k = 0; k < types.size(); ++k) {
    const json& o = types[k];
    const std::string path = element_path("charger_types", k, o);
    ChargerType t;
    t.id = integer(o, "id", path);
    t.name = o.contains("name") ? text(o, "name", path) : "type" + std::to_string(t.id);
    t.mu = number(o, "mu", path);
    t.install_cost = number(o, "install_cost", path);
    t.max_per_station = integer(o, "max_per_station", path);
    t.scv_service = number_or(o, "scv_service", path, 1.0);
    data.charger_types.push_back(std::move(t));
  }

  const json& stations = array(doc, "stations", "instance");
  for (std::size_t j = 0; j < stations.size(); ++j) {
    const json& o = stations[j];
    const std::string path = element_path("stations", j, o);
    Station s;
    s.id = integer(o, "id", path);
    const std::string kind = text(o, "kind", path);
    if (kind == "taz") {
      s.kind = StationKind::taz;
    } else if (kind == "depot") {
      s.kind = StationKind::depot;
    } else {
      throw InstanceError(path + ".kind: expected 'taz' or 'depot', got '" + kind + "'");
    }
    s.position = {number(o, "lat", path), number(o, "lon", path)};
    if (o.contains("agency") && !o["agency"].is_null()) s.agency = text(o, "agency", path);
    s.open_cost = number(o, "open_cost", path);
    if (o.contains("candidate")) {
      if (!o["candidate"].is_boolean()) throw InstanceError(path + ".candidate: expected a boolean");
      s.candidate = o["candidate"].get<bool>();
    }
    data.stations.push_back(std::move(s));
  }

  const json& households = array(doc, "households", "instance");
  for (std::size_t i = 0; i < households.size(); ++i) {
    const json& o = households[i];
    const std::string path = element_path("households", i, o);
    Household h;
    h.id = integer(o, "id", path);
    h.position = {number(o, "lat", path), number(o, "lon", path)};
    h.depot_id = integer(o, "depot_id", path);
    h.gamma = number(o, "gamma", path);
    h.pi = number(o, "pi", path);
    h.lambda = number(o, "lambda", path);
    data.households.push_back(h);
  }

  if (doc.contains("travel_matrix") && !doc["travel_matrix"].is_null()) {
    const json& m = doc["travel_matrix"];
    if (!m.is_array()) throw InstanceError("travel_matrix: expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (!m[r].is_array()) {
        throw InstanceError("travel_matrix[" + std::to_string(r) + "]: expected an array");
      }
      std::vector<double> row;
      for (std::size_t c = 0; c < m[r].size(); ++c) {
        if (!m[r][c].is_number()) {
          throw InstanceError("travel_matrix[" + std::to_string(r) + "][" + std::to_string(c) +
                              "]: expected a number");
        }
        row.push_back(m[r][c].get<double>());
      }
      rows.push_back(std::move(row));
    }
    data.travel_matrix = std::move(rows);
  }
  return data;
}

InstanceData load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open instance file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void save_instance(const InstanceData& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InstanceError("cannot write instance file " + path.string());
  out << dump_instance(data);
}

}  // namespace scla
