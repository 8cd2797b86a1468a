#pragma once

#include <filesystem>

#include <json.hpp>

#include <obcal/inference.hpp>
#include <obcal/simulation.hpp>

#include "cli_config.hpp"

namespace obcal::cli {

using Json = nlohmann::ordered_json;

/// Scientific configuration echoed into report files. Execution details
/// (output path, worker count) are left out so identical runs produce
/// identical bytes.
Json config_echo(const RunConfig& config);

Json meta_block(const RunConfig& config);

Json report_to_json(const EstimateReport& report);
EstimateReport report_from_json(const Json& value);

Json table_rows_to_json(const MonteCarloTable& table);
MonteCarloRow table_row_from_json(const Json& value);

Json exact_distribution_to_json(const ExactDistribution& distribution);

/// Serializes via a temp file in the same directory and renames into place,
/// so a failed run never leaves a partial report behind.
void write_report_atomic(const std::filesystem::path& path, const Json& document);

}  // namespace obcal::cli
