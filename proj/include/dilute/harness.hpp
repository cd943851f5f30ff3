#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dilute/config.hpp"

namespace dilute {

inline constexpr const char* kToolVersion = "0.1.0";

/// Column order of the CSV output.
inline constexpr const char* kCsvHeader = "mode,cell,N,n,p,metric,value,ci_low,ci_high,trials,seed,status";

/// Row statuses. "failed" and "error" make the run a partial failure.
namespace status {
inline constexpr const char* ok = "ok";
inline constexpr const char* failed = "failed";
inline constexpr const char* error = "error";
inline constexpr const char* censored = "censored";
inline constexpr const char* vacuous = "vacuous";
inline constexpr const char* info = "info";
}  // namespace status

struct CsvRow {
    std::string mode;
    std::int64_t cell = 0;
    std::int64_t N = 0;
    std::int64_t n = 0;
    double p = 0.0;
    std::string metric;
    std::optional<double> value;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;  // seed that reproduces this row in isolation
    std::string status = status::ok;
};

struct CellTiming {
    std::int64_t cell = 0;
    std::string block;
    double seconds = 0.0;
};

struct RunResult {
    std::string config_digest;
    std::string tool_version = kToolVersion;
    std::vector<CsvRow> rows;
    std::vector<CellTiming> timings;
    std::vector<std::string> warnings;
    std::string report;  // human-readable text (ladder tables and the like)
    double seconds = 0.0;

    bool partial_failure() const;
};

/// Seed of cell `index` under the master seed.
std::uint64_t cell_seed(std::uint64_t master_seed, std::int64_t index);

/// Runs the configured mode over every cell. Check failures and per-block errors are
/// recorded as rows; only InternalError escapes.
RunResult run(const ExperimentConfig& config);

std::string to_csv(const std::vector<CsvRow>& rows);
/// Summary document: digest, version, canonical config, warnings, timings, status counts.
std::string summary_json(const RunResult& result, const ExperimentConfig& config);

/// Writes the CSV to config.output_path and the summary next to it (<path>.summary.json).
void write_outputs(const RunResult& result, const ExperimentConfig& config);

}  // namespace dilute
