#include "obcal/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace obcal {

namespace {

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

double parse_finite_double(const std::string& token, Index row, const std::string& column) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    fail("row " + std::to_string(row) + ", column " + column + ": cannot parse '" + token +
         "' as a finite number");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

struct CsvTable {
  std::vector<std::vector<double>> rows;
  Index n_covariates = 0;
};

// Shared reader for both CSV variants: `prefix` names the leading columns,
// the remainder must be x1..xk in order.
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& prefix) {
  std::ifstream file(path);
  if (!file) fail("cannot open " + path.string());

  std::string line;
  if (!std::getline(file, line)) fail(path.string() + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < prefix.size()) fail(path.string() + ": header is missing required columns");
  for (std::size_t j = 0; j < prefix.size(); ++j) {
    if (header[j] != prefix[j]) {
      fail(path.string() + ": header column " + std::to_string(j + 1) + " must be '" +
           prefix[j] + "', got '" + header[j] + "'");
    }
  }
  const Index k = static_cast<Index>(header.size() - prefix.size());
  for (Index j = 0; j < k; ++j) {
    const std::string expected = "x" + std::to_string(j + 1);
    if (header[prefix.size() + j] != expected) {
      fail(path.string() + ": covariate column " + std::to_string(j + 1) + " must be named '" +
           expected + "'");
    }
  }

  CsvTable table;
  table.n_covariates = k;
  Index row = 0;
  while (std::getline(file, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (static_cast<Index>(fields.size()) != static_cast<Index>(header.size())) {
      fail("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
           " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      values[j] = parse_finite_double(fields[j], row, header[j]);
    }
    table.rows.push_back(std::move(values));
  }
  if (table.rows.empty()) fail(path.string() + ": no data rows");
  return table;
}

}  // namespace

TreatmentAllocation allocation_from(IntVector z) {
  TreatmentAllocation alloc;
  for (Index i = 0; i < z.size(); ++i) {
    if (z[i] == 1) {
      ++alloc.n1;
    } else if (z[i] == 0) {
      ++alloc.n0;
    } else {
      throw std::invalid_argument("treatment indicator must be 0 or 1");
    }
  }
  alloc.z = std::move(z);
  return alloc;
}

TreatmentAllocation sample_allocation(int n_units, int n_treated, RngStream& rng) {
  if (n_treated < 1 || n_treated > n_units - 1) {
    throw std::invalid_argument("treated count must satisfy 1 <= n1 <= N-1, got n1=" +
                                std::to_string(n_treated) + " with N=" + std::to_string(n_units));
  }
  std::vector<int> index(n_units);
  std::iota(index.begin(), index.end(), 0);
  // Partial Fisher-Yates: the first n_treated slots are a uniform subset.
  for (int i = 0; i < n_treated; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_units - i)));
    std::swap(index[i], index[j]);
  }
  TreatmentAllocation alloc;
  alloc.z = IntVector::Zero(n_units);
  for (int i = 0; i < n_treated; ++i) alloc.z[index[i]] = 1;
  alloc.n1 = n_treated;
  alloc.n0 = n_units - n_treated;
  return alloc;
}

ObservedExperiment observe(const FinitePopulation& population, const TreatmentAllocation& alloc) {
  const Index n = population.size();
  if (alloc.z.size() != n || population.y1.size() != n || population.X.rows() != n) {
    throw std::invalid_argument("allocation length does not match population size");
  }
  ObservedExperiment obs;
  obs.alloc = alloc;
  obs.X = population.X;
  obs.y_obs.resize(n);
  for (Index i = 0; i < n; ++i) {
    obs.y_obs[i] = alloc.z[i] == 1 ? population.y1[i] : population.y0[i];
  }
  return obs;
}

std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (result > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(result);
}

std::vector<TreatmentAllocation> enumerate_allocations(int n_units, int n_treated,
                                                       std::uint64_t cap) {
  if (n_treated < 1 || n_treated > n_units - 1) {
    throw std::invalid_argument("treated count must satisfy 1 <= n1 <= N-1");
  }
  const std::uint64_t count = binomial_capped(n_units, n_treated, cap);
  if (count > cap) {
    throw std::runtime_error("C(" + std::to_string(n_units) + ", " + std::to_string(n_treated) +
                             ") exceeds the enumeration cap of " + std::to_string(cap));
  }
  std::vector<TreatmentAllocation> all;
  all.reserve(count);
  std::vector<int> z(n_units, 0);
  std::fill(z.end() - n_treated, z.end(), 1);
  // next_permutation from the sorted start walks the 0/1 vectors in
  // lexicographic order.
  do {
    TreatmentAllocation alloc;
    alloc.z = Eigen::Map<const IntVector>(z.data(), n_units);
    alloc.n1 = n_treated;
    alloc.n0 = n_units - n_treated;
    all.push_back(std::move(alloc));
  } while (std::next_permutation(z.begin(), z.end()));
  return all;
}

ObservedExperiment load_observed_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path, {"z", "y"});
  const Index n = static_cast<Index>(table.rows.size());
  const Index k = table.n_covariates;

  IntVector z(n);
  Vector y(n);
  Matrix X(n, k);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    if (row[0] != 0.0 && row[0] != 1.0) {
      fail("row " + std::to_string(i + 1) + ", column z: expected 0 or 1");
    }
    z[i] = static_cast<int>(row[0]);
    y[i] = row[1];
    for (Index j = 0; j < k; ++j) X(i, j) = row[static_cast<std::size_t>(2 + j)];
  }

  ObservedExperiment obs;
  obs.alloc = allocation_from(std::move(z));
  if (obs.alloc.n1 == 0 || obs.alloc.n0 == 0) {
    fail(path.string() + ": arm empty (n1=" + std::to_string(obs.alloc.n1) +
         ", n0=" + std::to_string(obs.alloc.n0) + ")");
  }
  obs.y_obs = std::move(y);
  obs.X = std::move(X);
  return obs;
}

FinitePopulation load_population_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path, {"y0", "y1"});
  const Index n = static_cast<Index>(table.rows.size());
  const Index k = table.n_covariates;

  FinitePopulation population;
  population.y0.resize(n);
  population.y1.resize(n);
  population.X.resize(n, k);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    population.y0[i] = row[0];
    population.y1[i] = row[1];
    for (Index j = 0; j < k; ++j) population.X(i, j) = row[static_cast<std::size_t>(2 + j)];
  }
  return population;
}

}  // namespace obcal
