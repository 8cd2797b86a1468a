#include "cli_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace obcal::cli {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  int line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_number) + ": empty key");
    }
    if (!entries.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_number) + ": duplicate key '" +
                        key + "'");
    }
  }
  return entries;
}

template <typename T>
T parse_integer(const std::string& text, const std::string& name) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(name + ": cannot parse '" + text + "' as an integer");
  }
  return value;
}

double parse_real(const std::string& text, const std::string& name) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ConfigError(name + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, ',')) {
    const std::string stripped = trim(item);
    if (!stripped.empty()) items.push_back(stripped);
  }
  return items;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::estimate: return "estimate";
    case Command::simulate: return "simulate";
    case Command::enumerate: return "enumerate";
  }
  return "?";
}

RunConfig resolve_config(Command command, const RawOptions& flags,
                         const std::vector<std::string>& flag_given) {
  RawOptions raw = flags;

  if (!raw.config_path.empty()) {
    auto file = read_config_file(raw.config_path);
    const auto given = [&](const std::string& key) {
      return std::find(flag_given.begin(), flag_given.end(), key) != flag_given.end();
    };
    const auto merge = [&](const std::string& key, std::string& slot) {
      const auto it = file.find(key);
      if (it != file.end() && !given(key)) slot = it->second;
      file.erase(key);
    };
    const auto command_it = file.find("command");
    if (command_it != file.end()) {
      if (command_it->second != to_string(command)) {
        throw ConfigError("config file says command = " + command_it->second +
                          " but the command line invoked " + std::string(to_string(command)));
      }
      file.erase(command_it);
    }
    merge("input", raw.input);
    merge("output", raw.output);
    merge("family", raw.family);
    merge("estimators", raw.estimators);
    merge("extra-features", raw.extra_features);
    merge("level", raw.level);
    merge("seed", raw.seed);
    merge("S", raw.populations);
    merge("B", raw.allocations);
    merge("N", raw.n_values);
    merge("n1-frac", raw.n1_fraction);
    merge("n1", raw.n1);
    merge("cap", raw.cap);
    merge("workers", raw.workers);
    if (!file.empty()) {
      throw ConfigError("config file: unknown key '" + file.begin()->first + "'");
    }
  }

  RunConfig config;
  config.command = command;
  config.input = raw.input;
  config.output = raw.output;

  if (raw.family.empty()) {
    config.family = command == Command::simulate ? BaseFamily::logistic : BaseFamily::ols;
  } else if (const auto family = parse_family(raw.family)) {
    config.family = *family;
  } else {
    throw ConfigError("family: unknown family '" + raw.family + "'");
  }

  if (raw.estimators.empty()) {
    switch (command) {
      case Command::estimate:
        config.estimators = {Estimator::unadj, Estimator::lin, Estimator::gob,
                             Estimator::gbcal, Estimator::cal};
        break;
      case Command::simulate:
        config.estimators = {Estimator::gob, Estimator::gbcal, Estimator::cal};
        break;
      case Command::enumerate:
        config.estimators = {Estimator::unadj};
        break;
    }
  } else {
    for (const std::string& name : split_list(raw.estimators)) {
      const auto estimator = parse_estimator(name);
      if (!estimator) throw ConfigError("estimators: unknown estimator '" + name + "'");
      config.estimators.push_back(*estimator);
    }
  }
  if (config.estimators.empty()) throw ConfigError("estimators: list is empty");

  if (raw.extra_features.empty() || raw.extra_features == "none") {
    config.extra_identity = false;
  } else if (raw.extra_features == "identity") {
    config.extra_identity = true;
  } else {
    throw ConfigError("extra-features: expected 'none' or 'identity', got '" +
                      raw.extra_features + "'");
  }
  const bool wants_cal2 =
      std::find(config.estimators.begin(), config.estimators.end(), Estimator::cal2) !=
      config.estimators.end();
  if (wants_cal2 && !config.extra_identity) {
    throw ConfigError("estimator cal2 requires extra-features = identity");
  }

  if (!raw.level.empty()) config.level = parse_real(raw.level, "level");
  if (!(config.level > 0.0 && config.level < 1.0)) {
    throw ConfigError("level must lie strictly in (0, 1)");
  }
  if (!raw.seed.empty()) config.seed = parse_integer<std::uint64_t>(raw.seed, "seed");
  if (!raw.cap.empty()) config.cap = parse_integer<std::uint64_t>(raw.cap, "cap");
  if (config.cap < 1) throw ConfigError("cap must be positive");
  if (!raw.workers.empty()) config.workers = parse_integer<int>(raw.workers, "workers");
  if (config.workers < 1) throw ConfigError("workers must be at least 1");
  if (!raw.n1_fraction.empty()) config.n1_fraction = parse_real(raw.n1_fraction, "n1-frac");
  if (!(config.n1_fraction > 0.0 && config.n1_fraction < 1.0)) {
    throw ConfigError("n1-frac must lie strictly in (0, 1)");
  }
  if (!raw.n1.empty()) config.n1 = parse_integer<int>(raw.n1, "n1");

  if (command == Command::simulate) {
    if (!raw.populations.empty()) config.populations = parse_integer<int>(raw.populations, "S");
    if (!raw.allocations.empty()) config.allocations = parse_integer<int>(raw.allocations, "B");
    if (config.populations < 1) throw ConfigError("S must be at least 1");
    if (config.allocations < 2) throw ConfigError("B must be at least 2");
    if (!raw.n_values.empty()) {
      config.n_values.clear();
      for (const std::string& item : split_list(raw.n_values)) {
        config.n_values.push_back(parse_integer<int>(item, "N"));
      }
    }
    if (config.n_values.empty()) throw ConfigError("N: list is empty");
    for (int n : config.n_values) {
      if (n < 2) throw ConfigError("N must be at least 2");
    }
    bool any_adjusted = false;
    for (Estimator e : config.estimators) any_adjusted |= e != Estimator::unadj;
    if (!any_adjusted) {
      throw ConfigError("simulate needs at least one adjusted estimator");
    }
  }

  if (command == Command::estimate || command == Command::enumerate) {
    if (config.input.empty()) throw ConfigError("input path is required");
  }
  if (config.output.empty()) throw ConfigError("output path is required");

  return config;
}

}  // namespace obcal::cli
