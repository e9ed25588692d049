#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scla/oracle.hpp"
#include "scla_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace scla;
using namespace scla::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result scla_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("scla_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  [[nodiscard]] std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

/// Oracle-sized instance file: five households, a TAZ and two depots, two
/// charger types with at most two chargers.
std::string write_tiny(const Scratch& s, std::uint64_t seed = 3) {
  const std::string path = s / "tiny.json";
  const Result g = scla_run({"generate", "--households", "5", "--taz", "1", "--depots", "2",
                             "--agencies", "2", "--kc", "3", "--radius-km", "6",
                             "--deliveries-per-vehicle", "2", "--seed", std::to_string(seed),
                             "-o", path});
  REQUIRE(g.code == kOk);
  auto doc = nlohmann::json::parse(slurp(path));
  nlohmann::json types = nlohmann::json::array();
  for (auto t : doc["charger_types"]) {
    if (t["name"] == "moderate") continue;
    t["max_per_station"] = 2;
    types.push_back(t);
  }
  doc["charger_types"] = types;
  std::ofstream(path) << doc.dump(2);
  return path;
}

double objective_in(const std::string& solution_path) {
  return nlohmann::json::parse(slurp(solution_path))["objective"].get<double>();
}

std::vector<std::string> csv_rows(const std::string& text) {
  std::vector<std::string> rows;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) rows.push_back(line);
  return rows;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> f;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
  if (!row.empty() && row.back() == ',') f.emplace_back();
  return f;
}

}  // namespace

TEST_CASE("run config parsing") {
  const RunConfig c = parse_run_config(R"({
    "method": "oracle", "tolerance": 0.05, "max_iterations": 7, "time_limit_seconds": 3,
    "rounding": "probabilistic", "refit_chargers": false, "seed": 42, "max_threads": 2,
    "output_dir": "runs/a",
    "partitions": [{"name": "standard", "workers": 4, "time_limit_seconds": 30},
                   {"name": "group", "workers": 2, "time_limit_seconds": null}]
  })");
  CHECK(c.method == Method::oracle);
  CHECK(c.tolerance == 0.05);
  CHECK(c.max_iterations == 7);
  CHECK(c.rounding == RoundingMode::probabilistic);
  CHECK_FALSE(c.refit_chargers);
  CHECK(c.seed == 42);
  REQUIRE(c.partitions.size() == 2);
  CHECK(c.partitions[0].time_limit_seconds == std::optional<double>{30.0});
  CHECK_FALSE(c.partitions[1].time_limit_seconds.has_value());
  const RunConfig back = parse_run_config(run_config_to_json(c));
  CHECK(run_config_to_json(back) == run_config_to_json(c));

  CHECK_THROWS_AS(parse_run_config(R"({"tolerance": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"tolerance": 1.5})"), ConfigError);
  CHECK_NOTHROW(parse_run_config(R"({"tolerance": 1.0})"));
  CHECK_THROWS_AS(parse_run_config(R"({"max_iterations": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"time_limit_seconds": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"tolerence": 0.1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"method": "gurobi"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"rounding": "random"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"partitions": []})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"partitions": [{"name": "a", "workers": 0}]})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
}

TEST_CASE("partition flags") {
  const PartitionSpec a = parse_partition("standard:400:60");
  CHECK(a.name == "standard");
  CHECK(a.worker_count == 400);
  CHECK(a.time_limit_seconds == std::optional<double>{60.0});
  CHECK_FALSE(parse_partition("group:180").time_limit_seconds.has_value());
  CHECK_FALSE(parse_partition("group:2:none").time_limit_seconds.has_value());
  CHECK_THROWS_AS(parse_partition("group"), ConfigError);
  CHECK_THROWS_AS(parse_partition("group:two"), ConfigError);
  CHECK_THROWS_AS(parse_partition("group:1.5"), ConfigError);
  CHECK_THROWS_AS(parse_partition(":3"), ConfigError);
}

TEST_CASE("parameter scaling") {
  ScenarioConfig sc;
  sc.n_households = 10;
  const InstanceData base = generate_scenario(sc);
  const InstanceData phi = scale_parameter(base, "phi", 100.0);
  for (std::size_t j = 0; j < base.stations.size(); ++j) {
    CHECK(phi.stations[j].open_cost == doctest::Approx(2.0 * base.stations[j].open_cost));
  }
  CHECK(scale_parameter(base, "tau", -50.0).params.wait_cost ==
        doctest::Approx(0.5 * base.params.wait_cost));
  CHECK(scale_parameter(base, "xi", 25.0).charger_types[0].install_cost ==
        doctest::Approx(1.25 * base.charger_types[0].install_cost));
  CHECK(scale_parameter(base, "mu", 100.0).charger_types[1].mu ==
        doctest::Approx(2.0 * base.charger_types[1].mu));
  CHECK_THROWS(scale_parameter(base, "rho", 10.0));
  CHECK_THROWS(scale_parameter(base, "mu", -100.0));
}

TEST_CASE("generate writes an instance and echoes the default parameters") {
  Scratch s("generate");
  const Result r = scla_run({"generate", "--households", "100", "--taz", "20", "--depots", "4",
                             "--locations", "both", "--policy", "multi", "--kc", "2", "--seed",
                             "7", "-o", s / "inst.json"});
  REQUIRE(r.code == kOk);
  const Instance inst(load_instance(s / "inst.json"));
  CHECK(inst.num_households() == 100);
  CHECK(inst.num_stations() == 24);
  CHECK(inst.params().k_c == 2);
  const auto doc = nlohmann::json::parse(slurp(s / "inst.json"));
  REQUIRE(doc.contains("header"));
  const GlobalParams def;
  const std::string header = doc["header"].dump();
  CHECK(header.find("\"wait_cost\":0.7") != std::string::npos);
  CHECK(header.find("\"station_budget\":150000.0") != std::string::npos);
  CHECK(doc["params"]["detour_cost"].get<double>() == def.detour_cost);

  const Result bad = scla_run({"generate", "--locations", "depot", "--depots", "0"});
  CHECK(bad.code == kUsage);
  CHECK(bad.err.find("depot") != std::string::npos);
  CHECK(scla_run({"generate", "--policy", "shared"}).code == kUsage);

  const Result to_stdout = scla_run({"generate", "--households", "3", "--taz", "2"});
  CHECK(to_stdout.code == kOk);
  CHECK(nlohmann::json::parse(to_stdout.out)["households"].size() == 3);
}

TEST_CASE("oracle and Lagrangian runs on the same small file") {
  Scratch s("solve");
  const std::string inst = write_tiny(s);
  const Result o = scla_run({"solve", inst, "--method", "oracle", "-o", s / "oracle"});
  REQUIRE(o.code == kOk);
  CHECK(o.out.find("model gap: 0\n") != std::string::npos);
  const double optimum = objective_in(s / "oracle/solution.json");
  CHECK(optimum == doctest::Approx(solve_exact(Instance(load_instance(inst))).optimum));
  CHECK(fs::exists(s / "oracle/stations.geojson"));
  CHECK(csv_rows(slurp(s / "oracle/bounds.csv")).size() == 2);

  const Result l = scla_run({"solve", inst, "--max-iterations", "60", "-o", s / "lag"});
  REQUIRE(l.code == kOk);
  CHECK(objective_in(s / "lag/solution.json") >= optimum - 1e-9);
  const auto rows = csv_rows(slurp(s / "lag/bounds.csv"));
  CHECK(rows.front() == "iter,L,UB,gap,seconds");
  for (std::size_t t = 1; t < rows.size(); ++t) {
    CHECK(std::stod(fields(rows[t])[1]) <= optimum + 1e-6 * (1.0 + optimum));
  }
  CHECK(l.out.find("type basic: chargers") != std::string::npos);
  CHECK(l.out.find("mean W") != std::string::npos);

  const Result ev = scla_run({"evaluate", inst, s / "lag/solution.json"});
  CHECK(ev.code == kOk);
}

TEST_CASE("flags override the config file") {
  Scratch s("override");
  const std::string inst = write_tiny(s);
  std::ofstream(s / "run.json") << R"({"max_iterations": 1, "tolerance": 0.000001, "seed": 5})";
  REQUIRE(scla_run({"solve", inst, "-c", s / "run.json", "-o", s / "a"}).code != kUsage);
  CHECK(csv_rows(slurp(s / "a/bounds.csv")).size() == 2);
  scla_run({"solve", inst, "-c", s / "run.json", "--max-iterations", "4", "-o", s / "b"});
  CHECK(csv_rows(slurp(s / "b/bounds.csv")).size() == 5);
  CHECK(scla_run({"solve", inst, "--tolerance", "2"}).code == kUsage);
  std::ofstream(s / "bad.json") << R"({"tolerance": 0.1, "colour": "red"})";
  const Result bad = scla_run({"solve", inst, "-c", s / "bad.json"});
  CHECK(bad.code == kUsage);
  CHECK(bad.err.find("colour") != std::string::npos);
}

TEST_CASE("artifacts are reproducible under a fixed seed and config") {
  Scratch s("repro");
  const Result g = scla_run({"generate", "--households", "40", "--taz", "10", "--depots", "3",
                             "--kc", "2", "--seed", "11", "-o", s / "inst.json"});
  REQUIRE(g.code == kOk);
  const std::vector<std::string> common{"solve", s / "inst.json", "--max-iterations", "25",
                                        "--seed", "9"};
  auto with = [&](std::vector<std::string> extra, const std::string& out) {
    std::vector<std::string> args = common;
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("-o");
    args.push_back(s / out);
    return scla_run(args).code;
  };
  REQUIRE(with({}, "a") == kOk);
  REQUIRE(with({}, "b") == kOk);
  REQUIRE(with({"--partition", "standard:3:100", "--partition", "group:2", "--threads", "4"},
               "c") == kOk);
  for (const char* file : {"solution.json", "stations.geojson"}) {
    CHECK(slurp(s / (std::string("a/") + file)) == slurp(s / (std::string("b/") + file)));
    CHECK(slurp(s / (std::string("a/") + file)) == slurp(s / (std::string("c/") + file)));
  }
  // every bounds column except the wall clock
  const auto ra = csv_rows(slurp(s / "a/bounds.csv"));
  const auto rc = csv_rows(slurp(s / "c/bounds.csv"));
  REQUIRE(ra.size() == rc.size());
  for (std::size_t t = 0; t < ra.size(); ++t) {
    auto fa = fields(ra[t]);
    auto fc = fields(rc[t]);
    fa.pop_back();
    fc.pop_back();
    CHECK(fa == fc);
  }
}

TEST_CASE("a short time cap stops early and still writes artifacts") {
  Scratch s("timecap");
  REQUIRE(scla_run({"generate", "--households", "120", "--taz", "20", "--depots", "4", "--kc",
                    "3", "-o", s / "inst.json"})
              .code == kOk);
  const Result r = scla_run({"solve", s / "inst.json", "--time-limit", "1", "--tolerance",
                             "0.000001", "--max-iterations", "100000", "-o", s / "out"});
  CHECK(r.out.find("stop: time cap reached") != std::string::npos);
  CHECK(fs::exists(s / "out/bounds.csv"));
  if (r.code == kOk) CHECK(fs::exists(s / "out/solution.json"));
}

TEST_CASE("sweeps move the objective in the expected direction") {
  Scratch s("sweep");
  const std::string inst = write_tiny(s, 5);
  auto objectives = [&](const std::string& param) {
    const Result r = scla_run({"sweep", inst, "--param", param, "--grid", "0,50,100", "--method",
                               "oracle", "-o", s / param});
    REQUIRE(r.code == kOk);
    const auto rows = csv_rows(slurp(s / (param + "/sweep.csv")));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "parameter,change_pct,objective,objective_change_pct");
    std::vector<double> v;
    for (std::size_t t = 1; t < rows.size(); ++t) v.push_back(std::stod(fields(rows[t])[2]));
    CHECK(fields(rows[1])[3] == "0");
    return v;
  };
  const auto phi = objectives("phi");
  const auto tau = objectives("tau");
  const auto xi = objectives("xi");
  const auto mu = objectives("mu");
  for (std::size_t t = 1; t < 3; ++t) {
    CHECK(phi[t] >= phi[t - 1]);
    CHECK(tau[t] >= tau[t - 1]);
    CHECK(xi[t] >= xi[t - 1]);
    CHECK(mu[t] <= mu[t - 1]);
  }
  CHECK(scla_run({"sweep", inst, "--param", "phi"}).code == kUsage);
  CHECK(scla_run({"sweep", inst, "--param", "rho", "--grid", "0"}).code == kUsage);
  // reruns are byte-identical
  scla_run({"sweep", inst, "--param", "mu", "--grid", "0,50,100", "--method", "oracle", "-o",
            s / "mu2"});
  CHECK(slurp(s / "mu/sweep.csv") == slurp(s / "mu2/sweep.csv"));
}

TEST_CASE("round and evaluate") {
  Scratch s("round");
  const std::string inst = write_tiny(s);
  const Result r = scla_run({"round", inst, "--seed", "4", "-o", s / "r"});
  CHECK(r.code == kOk);
  REQUIRE(fs::exists(s / "r/solution.json"));

  // a solution whose stored W is stale fails evaluation
  auto doc = nlohmann::json::parse(slurp(s / "r/solution.json"));
  for (auto& st : doc["stations"]) {
    for (auto& [name, w] : st["wait_minutes"].items()) w = w.get<double>() * 0.5;
  }
  std::ofstream(s / "stale.json") << doc.dump();
  const Result ev = scla_run({"evaluate", inst, s / "stale.json", "--report", s / "rep.json"});
  CHECK(ev.code == kNoSolution);
  CHECK(ev.out.find("FAIL") != std::string::npos);
  CHECK(nlohmann::json::parse(slurp(s / "rep.json"))["feasible"] == false);

  // the rounded solution read back as a fractional point rounds to itself
  const Instance instance(load_instance(inst));
  std::string text = slurp(s / "r/solution.json");
  const FractionalPoint p = load_point(text, instance);
  for (const auto& row : p.x) {
    double total = 0.0;
    for (double v : row) total += v;
    CHECK(total == doctest::Approx(1.0));
  }
  const Result again = scla_run({"round", inst, "--point", s / "r/solution.json", "--mode",
                                 "probabilistic", "-o", s / "p"});
  CHECK(again.code == kOk);
}

TEST_CASE("usage errors and refusals") {
  CHECK(scla_run({}).code == kUsage);
  CHECK(scla_run({"--help"}).code == kOk);
  CHECK(scla_run({"solve"}).code == kUsage);
  CHECK(scla_run({"solve", "/no/such/file.json"}).code == kUsage);
  CHECK(scla_run({"frobnicate"}).code == kUsage);

  Scratch s("refuse");
  REQUIRE(scla_run({"generate", "--households", "30", "-o", s / "big.json"}).code == kOk);
  const Result r = scla_run({"solve", s / "big.json", "--method", "oracle", "-o", s / "o"});
  CHECK(r.code == kFailure);
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("an invalid instance file is a usage error") {
  Scratch s("invalid");
  const std::string inst = write_tiny(s);
  auto doc = nlohmann::json::parse(slurp(inst));
  doc["households"][0]["lambda"] = 1e6;  // inconsistent with gamma * pi
  std::ofstream(s / "bad.json") << doc.dump();
  const Result r = scla_run({"solve", s / "bad.json", "-o", s / "o"});
  CHECK(r.code == kUsage);
  CHECK(r.err.find("lambda") != std::string::npos);
}
