#include "obcal/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace obcal {

namespace {

constexpr std::uint64_t kPopulationSubstream = 0;  // allocation b uses substream b + 1

bool needs_predictions(const std::vector<Estimator>& estimators) {
  return std::any_of(estimators.begin(), estimators.end(), [](Estimator e) {
    return e == Estimator::gob || e == Estimator::gbcal || e == Estimator::cal ||
           e == Estimator::cal2;
  });
}

double variance_of(const std::vector<double>& values, double denominator) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / denominator;
}

struct PopulationResult {
  std::vector<double> ratios;  // aligned with the estimator list
  long skipped = 0;
};

}  // namespace

double dgp_prob_control(double x) { return std::exp(-(x + 0.85) * (x + 0.85) / 3.38); }

double dgp_prob_treated(double x) { return std::exp(-(x - 1.0) * (x - 1.0) / 2.0); }

int treated_count(const DgpSpec& spec) {
  if (spec.n_units < 2) throw std::invalid_argument("population needs at least two units");
  if (!(spec.n1_fraction > 0.0 && spec.n1_fraction < 1.0)) {
    throw std::invalid_argument("treated fraction must lie strictly in (0, 1)");
  }
  const int n1 = static_cast<int>(std::floor(spec.n1_fraction * spec.n_units));
  if (n1 < 1 || n1 > spec.n_units - 1) {
    throw std::invalid_argument("treated fraction leaves an arm empty");
  }
  return n1;
}

FinitePopulation threshold_population(const Vector& x, const Vector& u,
                                      const std::function<double(double)>& p0,
                                      const std::function<double(double)>& p1) {
  if (x.size() != u.size()) throw std::invalid_argument("covariate and uniform lengths differ");
  FinitePopulation population;
  population.X = x;
  population.y0.resize(x.size());
  population.y1.resize(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    population.y0[i] = u[i] <= p0(x[i]) ? 1.0 : 0.0;
    population.y1[i] = u[i] <= p1(x[i]) ? 1.0 : 0.0;
  }
  return population;
}

FinitePopulation generate_population(const DgpSpec& spec, RngStream& rng) {
  treated_count(spec);  // validates
  Vector x(spec.n_units);
  Vector u(spec.n_units);
  for (int i = 0; i < spec.n_units; ++i) {
    x[i] = -5.0 + 10.0 * rng.uniform01();
    u[i] = rng.uniform01();
  }
  return threshold_population(x, u, dgp_prob_control, dgp_prob_treated);
}

MonteCarloTable run_monte_carlo(const DgpSpec& spec, int populations, int allocations,
                                BaseFamily family, const std::vector<Estimator>& estimators,
                                std::uint64_t seed, const MonteCarloOptions& options) {
  if (populations < 1) throw std::invalid_argument("need at least one population");
  if (allocations < 2) throw std::invalid_argument("variance over allocations needs B >= 2");
  if (estimators.empty()) throw std::invalid_argument("estimator set is empty");
  const int n1 = treated_count(spec);
  const auto start_time = std::chrono::steady_clock::now();

  const bool with_preds = needs_predictions(estimators);
  const std::size_t n_estimators = estimators.size();

  std::vector<PopulationResult> results(static_cast<std::size_t>(populations));
  std::atomic<int> next_population{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto process_population = [&](int s) {

    RngStream population_rng(seed, static_cast<std::uint64_t>(s), kPopulationSubstream);
    const FinitePopulation population = generate_population(spec, population_rng);

    std::vector<std::vector<double>> values(n_estimators + 1);  // last slot: unadj baseline
    for (auto& column : values) column.reserve(static_cast<std::size_t>(allocations));
    long skipped = 0;

    for (int b = 0; b < allocations; ++b) {
      RngStream allocation_rng(seed, static_cast<std::uint64_t>(s),
                               static_cast<std::uint64_t>(b) + 1);
      const TreatmentAllocation alloc = sample_allocation(spec.n_units, n1, allocation_rng);
      const ObservedExperiment obs = observe(population, alloc);
      try {
        PredictionPair preds;
        if (with_preds) preds = fit_base_learners(obs, family);
        std::vector<double> replication(n_estimators + 1);
        for (std::size_t e = 0; e < n_estimators; ++e) {
          replication[e] = evaluate_estimator(estimators[e], obs, with_preds ? &preds : nullptr);
        }
        replication[n_estimators] = tau_unadj(obs);
        for (std::size_t e = 0; e <= n_estimators; ++e) values[e].push_back(replication[e]);
      } catch (const std::exception&) {
        ++skipped;  // excluded from this population's variances
      }
    }

    PopulationResult& result = results[static_cast<std::size_t>(s)];
    result.skipped = skipped;
    if (values.back().size() < 2) {
      throw std::runtime_error("population " + std::to_string(s) +
                               ": fewer than two usable replications");
    }
    const double denom = static_cast<double>(values.back().size()) - 1.0;
    const double unadj_variance = variance_of(values.back(), denom);
    if (unadj_variance <= 0.0) {
      throw std::runtime_error("population " + std::to_string(s) +
                               ": unadjusted estimator has zero variance");
    }
    result.ratios.resize(n_estimators);
    for (std::size_t e = 0; e < n_estimators; ++e) {
      result.ratios[e] = variance_of(values[e], denom) / unadj_variance;
    }
  };

  const auto worker = [&]() {
    for (;;) {
      const int s = next_population.fetch_add(1);
      if (s >= populations || failed.load()) return;
      try {
        process_population(s);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Fixed-order reduction keeps the table independent of the worker schedule.
  MonteCarloRow row;
  row.n_units = spec.n_units;
  row.ratios.reserve(n_estimators);
  for (std::size_t e = 0; e < n_estimators; ++e) {
    double sum = 0.0;
    for (int s = 0; s < populations; ++s) sum += results[static_cast<std::size_t>(s)].ratios[e];
    row.ratios.emplace_back(estimators[e], sum / populations);
  }
  for (int s = 0; s < populations; ++s) {
    const long skipped = results[static_cast<std::size_t>(s)].skipped;
    row.skipped += skipped;
    if (skipped > 0.05 * allocations) ++row.flagged_populations;
  }

  MonteCarloTable table;
  table.rows.push_back(std::move(row));
  table.populations = populations;
  table.allocations = allocations;
  table.seed = seed;
  table.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return table;
}

ExactDistribution exact_randomization_distribution(const FinitePopulation& population,
                                                   int n_treated, BaseFamily family,
                                                   const std::vector<Estimator>& estimators,
                                                   std::uint64_t cap) {
  const int n = static_cast<int>(population.size());
  if (n_treated < 2 || n_treated > n - 2) {
    throw std::invalid_argument("exact enumeration requires 2 <= n1 <= N-2");
  }
  if (estimators.empty()) throw std::invalid_argument("estimator set is empty");
  const auto all = enumerate_allocations(n, n_treated, cap);

  const bool with_preds = needs_predictions(estimators);
  ExactDistribution distribution;
  distribution.allocation_count = all.size();
  distribution.per_estimator.reserve(estimators.size());
  for (Estimator e : estimators) {
    ExactSummary summary;
    summary.values.reserve(all.size());
    distribution.per_estimator.emplace_back(e, std::move(summary));
  }

  for (const TreatmentAllocation& alloc : all) {
    const ObservedExperiment obs = observe(population, alloc);
    PredictionPair preds;
    if (with_preds) preds = fit_base_learners(obs, family);
    for (auto& [estimator, summary] : distribution.per_estimator) {
      summary.values.push_back(evaluate_estimator(estimator, obs, with_preds ? &preds : nullptr));
    }
  }

  for (auto& [estimator, summary] : distribution.per_estimator) {
    summary.mean = 0.0;
    for (double v : summary.values) summary.mean += v;
    summary.mean /= static_cast<double>(summary.values.size());
    summary.variance = variance_of(summary.values, static_cast<double>(summary.values.size()));
  }
  return distribution;
}

}  // namespace obcal
