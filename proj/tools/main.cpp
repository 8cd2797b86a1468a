#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "commands.hpp"

namespace {

using obcal::cli::Command;
using obcal::cli::RawOptions;

struct SubcommandBindings {
  CLI::App* app = nullptr;
  Command command = Command::estimate;
  std::vector<std::pair<std::string, CLI::Option*>> options;
};

SubcommandBindings bind_subcommand(CLI::App& app, Command command, const std::string& name,
                                   const std::string& description, RawOptions& raw) {
  SubcommandBindings bound;
  bound.command = command;
  CLI::App* sub = app.add_subcommand(name, description);
  bound.app = sub;

  const auto add = [&](const std::string& key, std::string& slot, const std::string& help) {
    bound.options.emplace_back(key, sub->add_option("--" + key, slot, help));
  };
  add("config", raw.config_path, "Flat key = value config file; flags win");
  add("input", raw.input, "Input CSV path");
  add("output", raw.output, "Output report path (JSON)");
  add("family", raw.family, "Base learner family: ols, logistic, poisson");
  add("estimators", raw.estimators, "Comma list from unadj,gob,gbcal,cal,cal2,lin");
  add("extra-features", raw.extra_features, "Calibration extras: none or identity");
  add("level", raw.level, "Confidence level in (0, 1)");
  add("seed", raw.seed, "64-bit seed");
  add("S", raw.populations, "Simulated populations");
  add("B", raw.allocations, "Treatment allocations per population");
  add("N", raw.n_values, "Population sizes, comma separated");
  add("n1-frac", raw.n1_fraction, "Treated fraction");
  add("n1", raw.n1, "Treated count (enumerate)");
  add("cap", raw.cap, "Enumeration cap on C(N, n1)");
  add("workers", raw.workers, "Worker threads for simulate");
  return bound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrated treatment-effect estimation for completely randomized experiments"};
  app.require_subcommand(1);

  RawOptions raw_estimate;
  RawOptions raw_simulate;
  RawOptions raw_enumerate;
  const SubcommandBindings subs[] = {
      bind_subcommand(app, Command::estimate, "estimate",
                      "Estimate treatment effects from an observed CSV", raw_estimate),
      bind_subcommand(app, Command::simulate, "simulate",
                      "Monte Carlo variance-ratio study on the built-in DGP", raw_simulate),
      bind_subcommand(app, Command::enumerate, "enumerate",
                      "Exact randomization distribution for a small population", raw_enumerate),
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  for (const SubcommandBindings& sub : subs) {
    if (!sub.app->parsed()) continue;
    const RawOptions& raw = sub.command == Command::estimate   ? raw_estimate
                            : sub.command == Command::simulate ? raw_simulate
                                                               : raw_enumerate;
    std::vector<std::string> given;
    for (const auto& [key, option] : sub.options) {
      if (option->count() > 0) given.push_back(key);
    }
    obcal::cli::RunConfig config;
    try {
      config = obcal::cli::resolve_config(sub.command, raw, given);
    } catch (const obcal::cli::ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    try {
      return obcal::cli::run_command(config);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
