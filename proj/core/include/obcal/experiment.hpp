#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "obcal/rng.hpp"
#include "obcal/types.hpp"

namespace obcal {

inline constexpr std::uint64_t kDefaultEnumerationCap = 200000;

/// Both potential outcomes plus covariates for N units. Only simulations and
/// exact-enumeration oracles ever hold one of these; real data never does.
struct FinitePopulation {
  Vector y0;
  Vector y1;
  Matrix X;

  Index size() const { return y0.size(); }
  double average_effect() const { return (y1 - y0).mean(); }
};

struct TreatmentAllocation {
  IntVector z;  // 0/1 per unit
  int n1 = 0;
  int n0 = 0;
};

/// Validates entries and fills in the arm counts.
TreatmentAllocation allocation_from(IntVector z);

struct ObservedExperiment {
  TreatmentAllocation alloc;
  Vector y_obs;  // y_i(Z_i)
  Matrix X;

  Index size() const { return y_obs.size(); }
};

/// Uniform draw from the set of allocations with exactly n_treated ones,
/// via a partial Fisher-Yates shuffle. Requires 1 <= n_treated <= n_units - 1.
TreatmentAllocation sample_allocation(int n_units, int n_treated, RngStream& rng);

/// Reveals y1 on treated units and y0 on control units.
ObservedExperiment observe(const FinitePopulation& population,
                           const TreatmentAllocation& alloc);

/// Every allocation with exactly n_treated ones, in lexicographic order of the
/// 0/1 vector. Errors out when C(n_units, n_treated) exceeds the cap.
std::vector<TreatmentAllocation> enumerate_allocations(
    int n_units, int n_treated, std::uint64_t cap = kDefaultEnumerationCap);

/// C(n, k) saturated at cap + 1 so callers can test the cap without overflow.
std::uint64_t binomial_capped(int n, int k, std::uint64_t cap);

/// Strict CSV ingestion, header `z,y,x1,...,xk`. Parse failures name the data
/// row and column; files whose data leave an arm empty are rejected.
ObservedExperiment load_observed_csv(const std::filesystem::path& path);

/// Strict CSV ingestion for enumeration inputs, header `y0,y1,x1,...,xk`.
FinitePopulation load_population_csv(const std::filesystem::path& path);

}  // namespace obcal
