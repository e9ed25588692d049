#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scla/lagrangian.hpp"
#include "scla/oracle.hpp"
#include "scla/solution.hpp"
#include "scla_cli/cli.hpp"

namespace scla::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown for flag combinations CLI11 cannot see on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

struct SolveOutcome {
  std::optional<FeasibleSolution> solution;
  std::optional<SolutionReport> report;
  std::optional<FeasibleSolution> probabilistic;
  double lower_bound = -kInf;
  double upper_bound = kInf;
  double gap = kInf;
  bool proven_infeasible = false;
  std::string stop_reason;
  std::vector<IterationRecord> history;
  std::vector<std::string> warnings;
};

SolveOutcome solve_with(const Instance& instance, const RunConfig& config) {
  SolveOutcome out;
  if (config.method == Method::oracle) {
    const auto t0 = std::chrono::steady_clock::now();
    OracleResult r = solve_exact(instance);
    IterationRecord rec;
    rec.iteration = 1;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.feasible) {
      out.solution = r.solution;
      out.report = evaluate_solution(*r.solution, instance);
      out.lower_bound = out.upper_bound = r.optimum;
      out.gap = 0.0;
      out.stop_reason = "exact optimum";
      rec.lagrangian = rec.best_lower_bound = rec.upper_bound = r.optimum;
      rec.gap = 0.0;
    } else {
      out.proven_infeasible = true;
      out.stop_reason = "infeasible (exhaustive enumeration)";
      rec.lagrangian = rec.best_lower_bound = kInf;
    }
    out.history.push_back(rec);
    return out;
  }
  DualConfig dc;
  dc.tolerance = config.tolerance;
  dc.max_iterations = config.max_iterations;
  dc.time_limit_seconds = config.time_limit_seconds;
  dc.rounding = config.rounding;
  dc.rounding_options.refit_chargers = config.refit_chargers;
  dc.seed = config.seed;
  dc.execution.partitions = config.partitions;
  dc.execution.seed = config.seed;
  dc.execution.max_threads = config.max_threads;
  DualResult r = run_dual_loop(instance, dc);
  out.solution = r.best_solution;
  out.report = r.best_report;
  if (config.rounding == RoundingMode::probabilistic) out.probabilistic = r.last_rounding;
  out.lower_bound = r.lower_bound();
  out.upper_bound = r.upper_bound();
  out.gap = r.model_gap();
  out.proven_infeasible = r.stop_reason.rfind("infeasible", 0) == 0;
  out.stop_reason = r.stop_reason;
  out.history = std::move(r.state.history);
  out.warnings = std::move(r.warnings);
  return out;
}

void print_summary(std::ostream& os, const Instance& instance, const RunConfig& config,
                   const SolveOutcome& s) {
  os << "method: " << to_string(config.method) << "\n";
  os << "stop: " << s.stop_reason << "\n";
  os << "iterations: " << s.history.size() << "\n";
  os << "lower bound: " << num(s.lower_bound) << "\n";
  os << "upper bound: " << num(s.upper_bound) << "\n";
  os << "model gap: " << num(s.gap) << "\n";
  if (!s.solution) {
    os << (s.proven_infeasible ? "result: infeasible\n" : "result: no feasible solution found\n");
    return;
  }
  const FeasibleSolution& sol = *s.solution;
  const auto types = instance.charger_types();
  std::size_t opened = 0;
  for (auto o : sol.open) opened += o != 0;
  os << "stations opened: " << opened << "\n";
  for (std::size_t k = 0; k < types.size(); ++k) {
    long total = 0;
    double wait_sum = 0.0;
    std::size_t with = 0;
    for (std::size_t j = 0; j < instance.num_stations(); ++j) {
      const int c = sol.charger(j, k);
      total += c;
      if (c > 0) {
        wait_sum += sol.wait_at(j, k);
        ++with;
      }
    }
    os << "type " << types[k].name << ": chargers " << total << ", mean W "
       << (with ? num(wait_sum / static_cast<double>(with)) : std::string("-")) << " min\n";
  }
  const CostBreakdown& c = s.report->cost;
  os << "cost: opening " << num(c.opening) << ", chargers " << num(c.chargers) << ", detour "
     << num(c.detour) << ", waiting " << num(c.waiting) << ", total " << num(c.total()) << "\n";
}

void write_artifacts(const Instance& instance, const RunConfig& config, const SolveOutcome& s) {
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  write_file(dir / "bounds.csv", bounds_csv(s.history));
  if (s.solution) {
    write_file(dir / "solution.json", solution_to_json(*s.solution, instance, *s.report));
    write_file(dir / "stations.geojson", stations_geojson(*s.solution, instance));
  }
  if (s.probabilistic) {
    FeasibleSolution p = *s.probabilistic;
    const SolutionReport rep = evaluate_solution(p, instance);
    write_file(dir / "probabilistic.json", solution_to_json(p, instance, rep));
  }
}

/// Options shared by solve and sweep; set only when given so they override
/// the config file.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> method;
  std::optional<double> tolerance;
  std::optional<int> max_iterations;
  std::optional<double> time_limit;
  std::optional<std::string> rounding;
  std::optional<bool> refit;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> partitions;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;

  void attach(CLI::App& cmd) {
    cmd.add_option("-c,--config", config_path, "run-config JSON file")->check(CLI::ExistingFile);
    cmd.add_option("--method", method, "lagrangian-mcc or oracle")
        ->check(CLI::IsMember({"lagrangian-mcc", "lagrangian", "oracle"}));
    cmd.add_option("--tolerance", tolerance, "stop once 1 - LB/UB falls to this, in (0, 1]");
    cmd.add_option("--max-iterations", max_iterations, "dual iteration cap");
    cmd.add_option("--time-limit", time_limit, "wall-time cap in seconds");
    cmd.add_option("--rounding", rounding, "deterministic or probabilistic")
        ->check(CLI::IsMember({"deterministic", "probabilistic"}));
    cmd.add_option("--refit-chargers", refit, "re-pick charger counts after assignment");
    cmd.add_option("--seed", seed, "random seed");
    cmd.add_option("--partition", partitions,
                   "name:workers[:seconds], repeatable; replaces the configured partitions");
    cmd.add_option("--threads", threads, "OS threads shared by all workers (0 = all cores)");
    cmd.add_option("-o,--out-dir", out_dir, "directory for the output files");
  }

  [[nodiscard]] RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (method) c.method = parse_method(*method);
    if (tolerance) c.tolerance = *tolerance;
    if (max_iterations) c.max_iterations = *max_iterations;
    if (time_limit) c.time_limit_seconds = *time_limit;
    if (rounding) c.rounding = parse_rounding_mode(*rounding);
    if (refit) c.refit_chargers = *refit;
    if (seed) c.seed = *seed;
    if (!partitions.empty()) {
      c.partitions.clear();
      for (const auto& p : partitions) c.partitions.push_back(parse_partition(p));
    }
    if (threads) c.max_threads = *threads;
    if (out_dir) c.output_dir = *out_dir;
    validate(c);
    return c;
  }
};

int exit_for(const SolveOutcome& s, const RunConfig& config) {
  if (s.solution && s.report && s.report->accepted()) return kOk;
  if (config.method == Method::oracle && s.proven_infeasible) return kOk;
  return kNoSolution;
}

// ---------------------------------------------------------------------------

struct GenerateFlags {
  ScenarioConfig cfg;
  std::string locations = "both";
  std::string policy = "multi";
  std::string out = "-";
};

int cmd_generate(const GenerateFlags& f, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = f.cfg;
  cfg.locations = parse_locations(f.locations);
  cfg.policy = parse_policy(f.policy);
  InstanceData data;
  try {
    data = generate_scenario(cfg);
  } catch (const InstanceError& e) {
    throw UsageError(e.what());
  }
  if (f.out == "-") {
    out << dump_instance(data);
  } else {
    save_instance(data, f.out);
    err << "wrote " << f.out << " (" << data.households.size() << " households, "
        << data.stations.size() << " stations)\n";
  }
  return kOk;
}

int cmd_solve(const std::string& instance_path, const ConfigFlags& flags, std::ostream& out,
              std::ostream& err) {
  const RunConfig config = flags.resolve();
  const Instance instance(load_instance(instance_path));
  const SolveOutcome s = solve_with(instance, config);
  for (const auto& w : s.warnings) err << "warning: " << w << "\n";
  write_artifacts(instance, config, s);
  print_summary(out, instance, config, s);
  return exit_for(s, config);
}

struct RoundFlags {
  std::string instance;
  std::string point;
  std::string mode = "deterministic";
  bool refit = true;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

int cmd_round(const RoundFlags& f, std::ostream& out, std::ostream&) {
  const Instance instance(load_instance(f.instance));
  const FractionalPoint point =
      f.point.empty() ? FractionalPoint::empty(instance) : load_point(read_file(f.point), instance);
  Rng rng(f.seed);
  RoundingOptions opt;
  opt.mode = parse_rounding_mode(f.mode);
  opt.refit_chargers = f.refit;
  const RoundingResult r = primal_heuristic(instance, point, rng, opt);
  out << "passes: " << r.passes << "\n";
  out << "overload stations opened: " << r.overload_opened.size() << "\n";
  if (!r.success) {
    out << "result: failed (" << r.failure << ")\n";
    return kNoSolution;
  }
  const std::filesystem::path dir(f.out_dir);
  write_file(dir / "solution.json", solution_to_json(*r.solution, instance, *r.report));
  write_file(dir / "stations.geojson", stations_geojson(*r.solution, instance));
  out << r.report->summary();
  if (!r.report->summary().empty() && r.report->summary().back() != '\n') out << "\n";
  return r.report->accepted() ? kOk : kNoSolution;
}

int cmd_evaluate(const std::string& instance_path, const std::string& solution_path,
                 const std::string& report_path, std::ostream& out) {
  const Instance instance(load_instance(instance_path));
  const FeasibleSolution sol = solution_from_json(read_file(solution_path), instance);
  const SolutionReport rep = evaluate_solution(sol, instance);
  out << rep.summary();
  if (!rep.summary().empty() && rep.summary().back() != '\n') out << "\n";
  if (!report_path.empty()) write_file(report_path, solution_to_json(sol, instance, rep));
  return rep.accepted() ? kOk : kNoSolution;
}

int cmd_sweep(const std::string& instance_path, const std::string& parameter,
              const std::vector<double>& grid, const ConfigFlags& flags, std::ostream& out,
              std::ostream& err) {
  if (grid.empty()) throw UsageError("sweep: the grid is empty");
  const RunConfig config = flags.resolve();
  const InstanceData base = load_instance(instance_path);
  scale_parameter(base, parameter, 0.0);  // rejects unknown names up front

  auto objective_at = [&](double pct) {
    const Instance inst(scale_parameter(base, parameter, pct));
    const SolveOutcome s = solve_with(inst, config);
    for (const auto& w : s.warnings) err << "warning: " << w << "\n";
    return s.solution && s.report->accepted() ? s.report->cost.total() : kInf;
  };
  std::map<double, double> cache;
  auto cached = [&](double pct) {
    auto it = cache.find(pct);
    if (it == cache.end()) it = cache.emplace(pct, objective_at(pct)).first;
    return it->second;
  };
  const double reference = cached(0.0);
  std::ostringstream csv;
  csv << "parameter,change_pct,objective,objective_change_pct\n";
  for (double pct : grid) {
    const double obj = cached(pct);
    const double change = std::isfinite(obj) && std::isfinite(reference) && reference != 0.0
                              ? 100.0 * (obj - reference) / reference
                              : std::numeric_limits<double>::quiet_NaN();
    csv << parameter << ',' << num(pct) << ',' << num(obj) << ','
        << (std::isnan(change) ? std::string("") : num(change)) << '\n';
  }
  write_file(config.output_dir / "sweep.csv", csv.str());
  out << csv.str();
  return std::isfinite(reference) ? kOk : kNoSolution;
}

}  // namespace

InstanceData scale_parameter(InstanceData data, const std::string& parameter, double percent) {
  const double f = 1.0 + percent / 100.0;
  if (!(f >= 0.0) || !std::isfinite(f)) {
    throw UsageError("sweep: change " + num(percent) + "% would make " + parameter + " negative");
  }
  if (parameter == "phi") {
    for (auto& s : data.stations) s.open_cost *= f;
  } else if (parameter == "tau") {
    data.params.wait_cost *= f;
  } else if (parameter == "xi") {
    for (auto& t : data.charger_types) t.install_cost *= f;
  } else if (parameter == "mu") {
    if (!(f > 0.0)) throw UsageError("sweep: mu must stay positive");
    for (auto& t : data.charger_types) t.mu *= f;
  } else {
    throw UsageError("sweep: unknown parameter '" + parameter + "' (expected phi, tau, xi or mu)");
  }
  return data;
}

FractionalPoint load_point(const std::string& json_text, const Instance& instance) {
  // Accept "x" as an alias of "probability" so fractional files read naturally.
  std::string text = json_text;
  try {
    auto doc = nlohmann::json::parse(json_text);
    if (doc.contains("assignments")) {
      for (auto& row : doc["assignments"]) {
        if (row.contains("x") && !row.contains("probability")) {
          row["probability"] = row["x"];
          row.erase("x");
        }
      }
    }
    text = doc.dump();
  } catch (const nlohmann::json::exception& e) {
    throw InstanceError(std::string("point: ") + e.what());
  }
  const FeasibleSolution sol = solution_from_json(text, instance);
  FractionalPoint p = FractionalPoint::empty(instance);
  p.open = sol.open;
  p.chargers = sol.chargers;
  p.wait = sol.wait;
  const std::size_t nk = instance.num_types();
  for (std::size_t i = 0; i < sol.assignment.size(); ++i) {
    for (const auto& a : sol.assignment[i]) {
      const int m = instance.neighborhood_position(i, a.station);
      if (m < 0) {
        throw InstanceError("point: household " + std::to_string(instance.households()[i].id) +
                            " cannot reach station " +
                            std::to_string(instance.stations()[a.station].id));
      }
      p.x[i][static_cast<std::size_t>(m) * nk + a.type] += a.fraction;
    }
  }
  return p;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Charger location and allocation under congestion"};
  app.name("scla");
  app.require_subcommand(1);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic instance");
  generate->add_option("--seed", gen.cfg.seed, "random seed");
  generate->add_option("--households", gen.cfg.n_households, "number of households");
  generate->add_option("--taz", gen.cfg.n_taz, "number of TAZ candidate sites");
  generate->add_option("--depots", gen.cfg.n_depots, "number of depots");
  generate->add_option("--agencies", gen.cfg.n_agencies, "number of delivery agencies");
  generate->add_option("--locations", gen.locations, "candidate sites: taz, depot or both")
      ->check(CLI::IsMember({"taz", "depot", "both"}));
  generate->add_option("--policy", gen.policy, "charging policy: single or multi")
      ->check(CLI::IsMember({"single", "multi"}));
  generate->add_option("--kc", gen.cfg.params.k_c, "neighborhood size k_c")->check(CLI::PositiveNumber);
  generate->add_option("--radius-km", gen.cfg.region_radius_km, "service region radius");
  generate->add_option("--deliveries-per-vehicle", gen.cfg.deliveries_per_vehicle,
                       "deliveries one charge covers");
  generate->add_option("--gamma-min", gen.cfg.gamma_min, "smallest deliveries per day");
  generate->add_option("--gamma-max", gen.cfg.gamma_max, "largest deliveries per day");
  generate->add_option("--detour-cost", gen.cfg.params.detour_cost, "USD per detour minute");
  generate->add_option("--wait-cost", gen.cfg.params.wait_cost, "USD per waiting minute");
  generate->add_option("--station-budget", gen.cfg.params.station_budget, "USD/day");
  generate->add_option("--charger-budget", gen.cfg.params.charger_budget, "USD/day");
  generate->add_option("--max-stations", gen.cfg.params.max_stations, "station count cap");
  generate->add_option("--max-wait", gen.cfg.params.max_wait, "queueing minutes allowed");
  generate->add_option("--epsilon", gen.cfg.params.epsilon, "utilization safety margin");
  generate->add_option("-o,--out", gen.out, "instance file, - for stdout");

  std::string instance_path;
  ConfigFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "solve an instance");
  solve->add_option("instance", instance_path, "instance JSON")->required()->check(CLI::ExistingFile);
  solve_flags.attach(*solve);

  RoundFlags round_flags;
  auto* round = app.add_subcommand("round", "run the rounding heuristic alone");
  round->add_option("instance", round_flags.instance, "instance JSON")
      ->required()
      ->check(CLI::ExistingFile);
  round->add_option("--point", round_flags.point,
                    "fractional point in solution layout; default: nothing open")
      ->check(CLI::ExistingFile);
  round->add_option("--mode", round_flags.mode, "deterministic or probabilistic")
      ->check(CLI::IsMember({"deterministic", "probabilistic"}));
  round->add_option("--refit-chargers", round_flags.refit, "re-pick charger counts");
  round->add_option("--seed", round_flags.seed, "random seed");
  round->add_option("-o,--out-dir", round_flags.out_dir, "directory for the output files");

  std::string eval_instance;
  std::string eval_solution;
  std::string eval_report;
  auto* evaluate = app.add_subcommand("evaluate", "check a solution against every constraint");
  evaluate->add_option("instance", eval_instance, "instance JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("solution", eval_solution, "solution JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--report", eval_report, "write the evaluated solution here");

  std::string sweep_instance;
  std::string sweep_param;
  std::vector<double> sweep_grid;
  ConfigFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "re-solve over a grid of parameter changes");
  sweep->add_option("instance", sweep_instance, "instance JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", sweep_param, "phi, tau, xi or mu")->required();
  sweep->add_option("--grid", sweep_grid, "percent changes, e.g. 0,50,100")->delimiter(',');
  sweep_flags.attach(*sweep);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out, err);
    if (*solve) return cmd_solve(instance_path, solve_flags, out, err);
    if (*round) return cmd_round(round_flags, out, err);
    if (*evaluate) return cmd_evaluate(eval_instance, eval_solution, eval_report, out);
    if (*sweep) return cmd_sweep(sweep_instance, sweep_param, sweep_grid, sweep_flags, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InstanceError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const OracleRefusal& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace scla::cli
