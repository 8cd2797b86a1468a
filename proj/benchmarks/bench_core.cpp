#include <benchmark/benchmark.h>

#include <obcal/estimators.hpp>
#include <obcal/regression.hpp>
#include <obcal/rng.hpp>
#include <obcal/simulation.hpp>

namespace {

using namespace obcal;

ObservedExperiment dgp_experiment(int n, std::uint64_t seed) {
  DgpSpec spec;
  spec.n_units = n;
  RngStream rng(seed, 0, 0);
  const FinitePopulation population = generate_population(spec, rng);
  RngStream alloc_rng(seed, 0, 1);
  return observe(population, sample_allocation(n, treated_count(spec), alloc_rng));
}

void BM_fit_ols(benchmark::State& state) {
  const auto obs = dgp_experiment(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_ols(obs.X, obs.y_obs, true));
  }
}
BENCHMARK(BM_fit_ols)->Arg(100)->Arg(1000)->Arg(10000);

void BM_fit_logistic(benchmark::State& state) {
  const auto obs = dgp_experiment(static_cast<int>(state.range(0)), 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_glm(obs.X, obs.y_obs, GlmFamily::logistic, true));
  }
}
BENCHMARK(BM_fit_logistic)->Arg(100)->Arg(1000)->Arg(10000);

void BM_calibrated_estimator(benchmark::State& state) {
  const auto obs = dgp_experiment(static_cast<int>(state.range(0)), 13);
  for (auto _ : state) {
    const PredictionPair preds = fit_base_learners(obs, BaseFamily::logistic);
    benchmark::DoNotOptimize(tau_cal(obs, preds));
  }
}
BENCHMARK(BM_calibrated_estimator)->Arg(100)->Arg(1000);

void BM_sample_allocation(benchmark::State& state) {
  RngStream rng(14);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_allocation(n, n / 3, rng));
  }
}
BENCHMARK(BM_sample_allocation)->Arg(1000)->Arg(100000);

void BM_monte_carlo_population(benchmark::State& state) {
  DgpSpec spec;
  spec.n_units = static_cast<int>(state.range(0));
  const std::vector<Estimator> estimators = {Estimator::gob, Estimator::gbcal, Estimator::cal};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_monte_carlo(spec, 1, 50, BaseFamily::logistic, estimators, 15));
  }
}
BENCHMARK(BM_monte_carlo_population)->Unit(benchmark::kMillisecond)->Arg(500)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
