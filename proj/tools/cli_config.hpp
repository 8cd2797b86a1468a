#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <obcal/estimators.hpp>

namespace obcal::cli {

/// Invalid configuration; the CLI exits with code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Command { estimate, simulate, enumerate };

std::string_view to_string(Command command);

struct RunConfig {
  Command command = Command::estimate;
  std::string input;
  std::string output;
  BaseFamily family = BaseFamily::ols;
  std::vector<Estimator> estimators;
  bool extra_identity = false;  // extra-features: none | identity
  double level = 0.95;
  std::uint64_t seed = 1;
  int populations = 1000;  // S
  int allocations = 1000;  // B
  std::vector<int> n_values = {1000};
  double n1_fraction = 0.3;
  int n1 = -1;  // enumerate; negative means derive from n1_fraction
  std::uint64_t cap = 200000;
  int workers = 1;
};

/// Raw option values as text, before validation. Every field can come from a
/// flag or from a `key = value` line in a config file; flags win.
struct RawOptions {
  std::string config_path;
  std::string input;
  std::string output;
  std::string family;
  std::string estimators;
  std::string extra_features;
  std::string level;
  std::string seed;
  std::string populations;   // S
  std::string allocations;   // B
  std::string n_values;      // N, comma separated
  std::string n1_fraction;
  std::string n1;
  std::string cap;
  std::string workers;
};

/// Merges `key = value` lines from the config file into fields the command
/// line left unset, then validates everything into a RunConfig. Throws
/// ConfigError on any invalid or contradictory setting.
RunConfig resolve_config(Command command, const RawOptions& flags,
                         const std::vector<std::string>& flag_given);

}  // namespace obcal::cli
