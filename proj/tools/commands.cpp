#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>

#include <obcal/estimators.hpp>
#include <obcal/inference.hpp>
#include <obcal/simulation.hpp>

#include "report_io.hpp"

namespace obcal::cli {

namespace {

bool needs_predictions(const std::vector<Estimator>& estimators) {
  return std::any_of(estimators.begin(), estimators.end(), [](Estimator e) {
    return e == Estimator::gob || e == Estimator::gbcal || e == Estimator::cal ||
           e == Estimator::cal2;
  });
}

struct EstimatorResult {
  double estimate = 0.0;
  Vector mu0;
  Vector mu1;
  ReportDiagnostics diagnostics;
};

EstimatorResult evaluate_for_report(Estimator estimator, const ObservedExperiment& obs,
                                    const PredictionPair* preds,
                                    std::optional<PredictionPair>& ols_preds_cache) {
  EstimatorResult result;
  switch (estimator) {
    case Estimator::unadj: {
      result.estimate = tau_unadj(obs);
      double treated_sum = 0.0;
      double control_sum = 0.0;
      for (Index i = 0; i < obs.size(); ++i) {
        (obs.alloc.z[i] == 1 ? treated_sum : control_sum) += obs.y_obs[i];
      }
      result.mu0 = Vector::Constant(obs.size(), control_sum / obs.alloc.n0);
      result.mu1 = Vector::Constant(obs.size(), treated_sum / obs.alloc.n1);
      break;
    }
    case Estimator::lin: {
      if (!ols_preds_cache) ols_preds_cache = fit_base_learners(obs, BaseFamily::ols);
      const PredictionPair& lin_preds = *ols_preds_cache;
      result.estimate = (lin_preds.mu1 - lin_preds.mu0).mean();
      result.mu0 = lin_preds.mu0;
      result.mu1 = lin_preds.mu1;
      result.diagnostics.rank_deficient =
          lin_preds.arm0.rank_deficient || lin_preds.arm1.rank_deficient;
      break;
    }
    case Estimator::gob: {
      result.estimate = tau_gob(obs, *preds);
      result.mu0 = preds->mu0;
      result.mu1 = preds->mu1;
      result.diagnostics.base_converged = preds->arm0.converged && preds->arm1.converged;
      result.diagnostics.rank_deficient =
          preds->arm0.rank_deficient || preds->arm1.rank_deficient;
      break;
    }
    case Estimator::gbcal:
    case Estimator::cal:
    case Estimator::cal2: {
      CalibratedPair calibrated =
          estimator == Estimator::gbcal ? calibrate_single(obs, *preds)
          : estimator == Estimator::cal ? calibrate(obs, *preds)
                                        : calibrate(obs, *preds, &obs.X);
      result.estimate = (calibrated.mu1_cal - calibrated.mu0_cal).mean();
      result.diagnostics.base_converged = preds->arm0.converged && preds->arm1.converged;
      result.diagnostics.rank_deficient =
          preds->arm0.rank_deficient || preds->arm1.rank_deficient ||
          calibrated.fit0.rank_deficient || calibrated.fit1.rank_deficient;
      result.mu0 = std::move(calibrated.mu0_cal);
      result.mu1 = std::move(calibrated.mu1_cal);
      break;
    }
  }
  result.diagnostics.prediction_unbiasedness_gap =
      prediction_unbiasedness_gap(obs, result.mu0, result.mu1);
  return result;
}

}  // namespace

int cmd_estimate(const RunConfig& config) {
  const ObservedExperiment obs = load_observed_csv(config.input);

  std::optional<PredictionPair> preds;
  if (needs_predictions(config.estimators)) {
    preds = fit_base_learners(obs, config.family);
  }
  std::optional<PredictionPair> ols_preds_cache;
  if (preds && config.family == BaseFamily::ols) ols_preds_cache = preds;

  Json results = Json::array();
  for (Estimator estimator : config.estimators) {
    const EstimatorResult result =
        evaluate_for_report(estimator, obs, preds ? &*preds : nullptr, ols_preds_cache);
    const double variance = variance_estimate(obs, result.mu0, result.mu1);
    const EstimateReport report =
        make_report(std::string(to_string(estimator)), result.estimate, variance, config.level,
                    obs, result.diagnostics);
    if (!report.diagnostics.base_converged) {
      std::cerr << "warning: base learner did not converge for estimator "
                << to_string(estimator) << "\n";
    }
    results.push_back(report_to_json(report));
  }

  Json document;
  document["meta"] = meta_block(config);
  document["results"] = std::move(results);
  write_report_atomic(config.output, document);
  return 0;
}

int cmd_simulate(const RunConfig& config) {
  std::vector<Estimator> adjusted;
  for (Estimator e : config.estimators) {
    if (e != Estimator::unadj) adjusted.push_back(e);
  }

  MonteCarloTable merged;
  merged.populations = config.populations;
  merged.allocations = config.allocations;
  merged.seed = config.seed;
  for (int n : config.n_values) {
    DgpSpec spec;
    spec.n_units = n;
    spec.n1_fraction = config.n1_fraction;
    MonteCarloTable table =
        run_monte_carlo(spec, config.populations, config.allocations, config.family, adjusted,
                        config.seed, {config.workers});
    for (auto& row : table.rows) merged.rows.push_back(std::move(row));
    merged.runtime_seconds += table.runtime_seconds;
  }

  Json document;
  document["meta"] = meta_block(config);
  document["rows"] = table_rows_to_json(merged);
  write_report_atomic(config.output, document);
  std::cerr << "simulate: S=" << merged.populations << " B=" << merged.allocations
            << " workers=" << config.workers << " runtime=" << merged.runtime_seconds << "s\n";
  return 0;
}

int cmd_enumerate(const RunConfig& config) {
  const FinitePopulation population = load_population_csv(config.input);
  const int n = static_cast<int>(population.size());
  const int n1 = config.n1 >= 0
                     ? config.n1
                     : static_cast<int>(std::floor(config.n1_fraction * n));

  const ExactDistribution distribution =
      exact_randomization_distribution(population, n1, config.family, config.estimators,
                                       config.cap);

  RunConfig echoed = config;
  echoed.n1 = n1;
  Json document;
  document["meta"] = meta_block(echoed);
  document["N"] = n;
  document["n1"] = n1;
  document["allocations"] = distribution.allocation_count;
  document["results"] = exact_distribution_to_json(distribution);
  write_report_atomic(config.output, document);
  return 0;
}

int run_command(const RunConfig& config) {
  switch (config.command) {
    case Command::estimate: return cmd_estimate(config);
    case Command::simulate: return cmd_simulate(config);
    case Command::enumerate: return cmd_enumerate(config);
  }
  return 2;
}

}  // namespace obcal::cli
