#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "scla/instance.hpp"
#include "scla/parallel.hpp"
#include "scla/rounding.hpp"

namespace scla::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,     ///< unreadable input, invalid config, solver error
  kUsage = 2,       ///< bad flags
  kNoSolution = 3,  ///< ran to completion without an acceptable solution
};

enum class Method { lagrangian_mcc, oracle };

std::string to_string(Method method);
Method parse_method(const std::string& text);

struct RunConfig {
  Method method = Method::lagrangian_mcc;
  double tolerance = 0.01;
  int max_iterations = 200;
  double time_limit_seconds = 600.0;
  RoundingMode rounding = RoundingMode::deterministic;
  bool refit_chargers = true;
  std::uint64_t seed = 1;
  std::vector<PartitionSpec> partitions{{"group", 1, std::nullopt}};
  unsigned max_threads = 0;
  std::filesystem::path output_dir = ".";
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Strict parse: unknown keys and out-of-range values are errors.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);
void validate(const RunConfig& config);

/// "name:workers" or "name:workers:seconds".
PartitionSpec parse_partition(const std::string& text);

/// Copy of `data` with one cost or rate scaled by (1 + percent / 100).
/// Parameters: phi (station opening), tau (waiting), xi (charger
/// installation), mu (service rate).
InstanceData scale_parameter(InstanceData data, const std::string& parameter, double percent);

/// Reads a fractional point from solution-style JSON: open stations with
/// their chargers and waits, and assignment rows whose optional
/// "probability" (or "x") is the fractional share.
FractionalPoint load_point(const std::string& json_text, const Instance& instance);

/// Runs one command line (without the program name). Output goes to `out`,
/// diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scla::cli
