#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dilute/distribution.hpp"

namespace dilute {

enum class Mode { Sample, Spectrum, Ladder, TailS1, TailSn, Concentration, VerifyAll };
std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

/// How p is chosen per grid cell.
enum class PRule { FixedP, NpLogPower };
std::string_view to_string(PRule rule);

struct DistConfig {
    std::string kind = "gaussian";
    double delta = 0.0;
    double tail_exponent = 5.0;  // symmetric_pareto only
    double prob = 0.5;           // two_point only

    EntryDistribution build() const;
    friend bool operator==(const DistConfig&, const DistConfig&) = default;
};

struct ExperimentConfig {
    std::string name = "experiment";
    Mode mode = Mode::VerifyAll;

    // model
    std::int64_t N = 1000;
    std::optional<std::int64_t> n;  // single-cell override of floor(y N)
    double y = 0.5;
    double p = 0.05;
    DistConfig dist;
    double trunc_A = 1.0;

    // sweep; an empty grid means the single cell N
    std::vector<std::int64_t> grid;
    PRule rule = PRule::FixedP;
    double B = 25.0;
    double alpha = 2.0;  // NpLogPower: p = B (ln N)^alpha / N

    std::int64_t trials = 200;
    std::uint64_t master_seed = 1;

    // thresholds
    double K = 10.0;
    double tau = 0.05;
    double rho = 0.3;
    double delta0 = 0.1;
    double epsilon = 0.5;

    // solvers
    double lanczos_tol = 1e-6;
    std::string sn_solver = "shift_invert";  // or "dense"

    std::string output_path = "dilute_spectra.csv";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates; unknown fields and bad values raise ValidationError naming the field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Checks value ranges; field-level ValidationError on the first problem.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
/// Compact JSON with sorted keys.
std::string canonical_text(const ExperimentConfig& config);
/// FNV-1a 64 of canonical_text, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

/// One (N, n, p) point of the sweep.
struct Cell {
    std::int64_t index = 0;
    std::int64_t N = 0;
    std::int64_t n = 0;
    double p = 0.0;
    double p_requested = 0.0;  // before clamping to (0, 1]
    bool clamped = false;
};

/// Expands the sweep into cells, clamping p to (0, 1].
std::vector<Cell> expand_cells(const ExperimentConfig& config);

}  // namespace dilute
