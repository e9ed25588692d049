#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scla_cli/cli.hpp"

namespace scla::cli {

namespace {

using json = nlohmann::json;

const std::set<std::string> kKeys{"method",         "tolerance",    "max_iterations",
                                  "time_limit_seconds", "rounding", "refit_chargers",
                                  "seed",           "partitions",   "max_threads",
                                  "output_dir"};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  return v;
}

}  // namespace

std::string to_string(Method method) {
  return method == Method::oracle ? "oracle" : "lagrangian-mcc";
}

Method parse_method(const std::string& text) {
  if (text == "lagrangian-mcc" || text == "lagrangian") return Method::lagrangian_mcc;
  if (text == "oracle") return Method::oracle;
  throw ConfigError("method: expected lagrangian-mcc or oracle, got '" + text + "'");
}

PartitionSpec parse_partition(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string piece; std::getline(ss, piece, ':');) parts.push_back(piece);
  if (parts.size() < 2 || parts.size() > 3 || parts[0].empty()) {
    throw ConfigError("partition: expected name:workers[:seconds], got '" + text + "'");
  }
  PartitionSpec spec;
  spec.name = parts[0];
  const double workers = parse_number(parts[1], "partition " + spec.name + " workers");
  if (workers != std::floor(workers)) {
    throw ConfigError("partition " + spec.name + ": workers must be an integer");
  }
  spec.worker_count = static_cast<int>(workers);
  if (parts.size() == 3 && parts[2] != "none" && parts[2] != "unlimited") {
    spec.time_limit_seconds = parse_number(parts[2], "partition " + spec.name + " time limit");
  }
  return spec;
}

void validate(const RunConfig& c) {
  if (!(c.tolerance > 0.0 && c.tolerance <= 1.0)) {
    throw ConfigError("tolerance: must lie in (0, 1]");
  }
  if (c.max_iterations < 1) throw ConfigError("max_iterations: must be positive");
  if (!(c.time_limit_seconds > 0.0)) throw ConfigError("time_limit_seconds: must be positive");
  if (c.partitions.empty()) throw ConfigError("partitions: at least one partition is required");
  std::set<std::string> names;
  for (const auto& p : c.partitions) {
    if (p.name.empty()) throw ConfigError("partitions: every partition needs a name");
    if (!names.insert(p.name).second) {
      throw ConfigError("partitions: duplicate name '" + p.name + "'");
    }
    if (p.worker_count < 1) throw ConfigError("partition " + p.name + ": workers must be >= 1");
    if (p.time_limit_seconds && !(*p.time_limit_seconds > 0.0)) {
      throw ConfigError("partition " + p.name + ": time limit must be positive");
    }
  }
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("run config: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) throw ConfigError("run config: unknown key '" + key + "'");
  }
  RunConfig c;
  try {
    if (doc.contains("method")) c.method = parse_method(doc["method"].get<std::string>());
    if (doc.contains("tolerance")) c.tolerance = doc["tolerance"].get<double>();
    if (doc.contains("max_iterations")) c.max_iterations = doc["max_iterations"].get<int>();
    if (doc.contains("time_limit_seconds")) {
      c.time_limit_seconds = doc["time_limit_seconds"].get<double>();
    }
    if (doc.contains("rounding")) {
      c.rounding = parse_rounding_mode(doc["rounding"].get<std::string>());
    }
    if (doc.contains("refit_chargers")) c.refit_chargers = doc["refit_chargers"].get<bool>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("max_threads")) c.max_threads = doc["max_threads"].get<unsigned>();
    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("partitions")) {
      c.partitions.clear();
      for (const auto& p : doc["partitions"]) {
        for (const auto& [key, value] : p.items()) {
          if (key != "name" && key != "workers" && key != "time_limit_seconds") {
            throw ConfigError("run config: unknown partition key '" + key + "'");
          }
        }
        PartitionSpec spec;
        spec.name = p.at("name").get<std::string>();
        spec.worker_count = p.at("workers").get<int>();
        if (p.contains("time_limit_seconds") && !p["time_limit_seconds"].is_null()) {
          spec.time_limit_seconds = p["time_limit_seconds"].get<double>();
        }
        c.partitions.push_back(spec);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("run config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json doc;
  doc["method"] = to_string(c.method);
  doc["tolerance"] = c.tolerance;
  doc["max_iterations"] = c.max_iterations;
  doc["time_limit_seconds"] = c.time_limit_seconds;
  doc["rounding"] = to_string(c.rounding);
  doc["refit_chargers"] = c.refit_chargers;
  doc["seed"] = c.seed;
  auto parts = nlohmann::ordered_json::array();
  for (const auto& p : c.partitions) {
    nlohmann::ordered_json row;
    row["name"] = p.name;
    row["workers"] = p.worker_count;
    row["time_limit_seconds"] =
        p.time_limit_seconds ? nlohmann::ordered_json(*p.time_limit_seconds) : nlohmann::ordered_json();
    parts.push_back(row);
  }
  doc["partitions"] = parts;
  doc["max_threads"] = c.max_threads;
  doc["output_dir"] = c.output_dir.string();
  return doc.dump(2) + "\n";
}

}  // namespace scla::cli
