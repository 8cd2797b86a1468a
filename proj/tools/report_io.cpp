#include "report_io.hpp"

#include <fstream>
#include <stdexcept>

#include <obcal/version.hpp>

namespace obcal::cli {

Json config_echo(const RunConfig& config) {
  Json echo;
  echo["command"] = to_string(config.command);
  if (config.command != Command::simulate) echo["input"] = config.input;
  echo["family"] = to_string(config.family);
  Json names = Json::array();
  for (Estimator e : config.estimators) names.push_back(std::string(to_string(e)));
  echo["estimators"] = std::move(names);
  echo["extra_features"] = config.extra_identity ? "identity" : "none";
  echo["level"] = config.level;
  if (config.command == Command::simulate) {
    echo["S"] = config.populations;
    echo["B"] = config.allocations;
    echo["N"] = config.n_values;
    echo["n1_fraction"] = config.n1_fraction;
  }
  if (config.command == Command::enumerate) {
    if (config.n1 >= 0) {
      echo["n1"] = config.n1;
    } else {
      echo["n1_fraction"] = config.n1_fraction;
    }
    echo["cap"] = config.cap;
  }
  return echo;
}

Json meta_block(const RunConfig& config) {
  Json meta;
  meta["version"] = kVersion;
  meta["seed"] = config.seed;
  meta["config"] = config_echo(config);
  return meta;
}

Json report_to_json(const EstimateReport& report) {
  Json value;
  value["estimator"] = report.estimator_name;
  value["estimate"] = report.estimate;
  value["std_error"] = report.std_error;
  value["ci_lower"] = report.ci_lower;
  value["ci_upper"] = report.ci_upper;
  value["level"] = report.level;
  value["N"] = report.n_units;
  value["n1"] = report.n_treated;
  value["n0"] = report.n_control;
  value["diagnostics"] = {
      {"prediction_unbiasedness_gap", report.diagnostics.prediction_unbiasedness_gap},
      {"base_converged", report.diagnostics.base_converged},
      {"rank_deficient", report.diagnostics.rank_deficient},
  };
  return value;
}

EstimateReport report_from_json(const Json& value) {
  EstimateReport report;
  report.estimator_name = value.at("estimator").get<std::string>();
  report.estimate = value.at("estimate").get<double>();
  report.std_error = value.at("std_error").get<double>();
  report.ci_lower = value.at("ci_lower").get<double>();
  report.ci_upper = value.at("ci_upper").get<double>();
  report.level = value.at("level").get<double>();
  report.n_units = value.at("N").get<Index>();
  report.n_treated = value.at("n1").get<Index>();
  report.n_control = value.at("n0").get<Index>();
  const Json& diag = value.at("diagnostics");
  report.diagnostics.prediction_unbiasedness_gap =
      diag.at("prediction_unbiasedness_gap").get<double>();
  report.diagnostics.base_converged = diag.at("base_converged").get<bool>();
  report.diagnostics.rank_deficient = diag.at("rank_deficient").get<bool>();
  return report;
}

Json table_rows_to_json(const MonteCarloTable& table) {
  Json rows = Json::array();
  for (const MonteCarloRow& row : table.rows) {
    Json entry;
    entry["N"] = row.n_units;
    Json ratios;
    for (const auto& [estimator, ratio] : row.ratios) {
      ratios[std::string(to_string(estimator))] = ratio;
    }
    entry["ratios"] = std::move(ratios);
    entry["skipped"] = row.skipped;
    entry["flagged_populations"] = row.flagged_populations;
    rows.push_back(std::move(entry));
  }
  return rows;
}

MonteCarloRow table_row_from_json(const Json& value) {
  MonteCarloRow row;
  row.n_units = value.at("N").get<int>();
  for (const auto& [name, ratio] : value.at("ratios").items()) {
    const auto estimator = parse_estimator(name);
    if (!estimator) throw std::runtime_error("unknown estimator in table row: " + name);
    row.ratios.emplace_back(*estimator, ratio.get<double>());
  }
  row.skipped = value.at("skipped").get<long>();
  row.flagged_populations = value.at("flagged_populations").get<int>();
  return row;
}

Json exact_distribution_to_json(const ExactDistribution& distribution) {
  Json results = Json::array();
  for (const auto& [estimator, summary] : distribution.per_estimator) {
    Json entry;
    entry["estimator"] = std::string(to_string(estimator));
    entry["mean"] = summary.mean;
    entry["variance"] = summary.variance;
    entry["values"] = summary.values;
    results.push_back(std::move(entry));
  }
  return results;
}

void write_report_atomic(const std::filesystem::path& path, const Json& document) {
  const std::filesystem::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp);
    if (!out) throw std::runtime_error("cannot open " + temp.string() + " for writing");
    out << document.dump(2) << '\n';
    if (!out) throw std::runtime_error("write to " + temp.string() + " failed");
  }
  std::filesystem::rename(temp, path);
}

}  // namespace obcal::cli
