#pragma once

#include <filesystem>
#include <string>

#include "fleetobs/sim.hpp"

namespace fleetobs {

enum class OutputFormat { csv, json };

// Writes traces.csv, alarms.csv and (per format) metrics/certificates into
// dir, creating it if needed. File contents are deterministic functions of
// the RunResult.
void write_run_result(const std::filesystem::path& dir, const RunResult& rr,
                      OutputFormat format);

void write_comparison(const std::filesystem::path& dir,
                      const BaselineComparison& cmp, double sampling_dt_s);

void write_monte_carlo(const std::filesystem::path& dir,
                       const MonteCarloResult& mc, OutputFormat format);

// Reads a result directory produced by write_run_result and emits
// figure-ready long-format CSVs plus a manifest describing each series
// (plots/manifest.json). No plotting dependency; any external tool can
// render the figures from these files.
void emit_plots(const std::filesystem::path& result_dir);

std::string metrics_to_json(const RunResult& rr);

}  // namespace fleetobs
