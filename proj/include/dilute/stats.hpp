#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dilute {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Exact binomial (Clopper-Pearson) interval for hits / trials at the given confidence.
Interval clopper_pearson(std::int64_t hits, std::int64_t trials, double confidence = 0.95);

/// Uniform deviation bound for the empirical mass of any interval from n samples at level
/// 1 - alpha: twice the Dvoretzky-Kiefer-Wolfowitz bound on the CDF, capped at 1.
double dkw_interval_halfwidth(std::int64_t n, double alpha = 0.01);

enum class TailDirection { Upper, Lower };
std::string_view to_string(TailDirection direction);

/// Monte Carlo estimate of P{statistic >= threshold} (Upper) or P{statistic <= threshold} (Lower).
struct TailEstimate {
    double threshold = 0.0;
    TailDirection direction = TailDirection::Upper;
    std::int64_t hits = 0;
    std::int64_t trials = 0;
    double p_hat = 0.0;
    Interval ci;  // Clopper-Pearson 95%

    static TailEstimate from_counts(double threshold, TailDirection direction, std::int64_t hits,
                                    std::int64_t trials);
    /// Counts the values on the threshold's tail side.
    static TailEstimate from_values(std::span<const double> values, double threshold,
                                    TailDirection direction);
};

enum class DecayStatus { Decreasing, NotDecreasing, Censored };
std::string_view to_string(DecayStatus status);

/// Least-squares slope of ln p_hat against x over a grid of tail estimates.
struct DecayFit {
    DecayStatus status = DecayStatus::Censored;
    double slope = 0.0;
    double intercept = 0.0;
    std::int64_t min_hits = 0;  // smallest hit count on the grid
};

/// Censored when some cell has fewer than `min_hits` hits; otherwise Decreasing iff
/// p_hat is strictly decreasing along the grid (in the given order) and the slope is negative.
DecayFit fit_log_decay(std::span<const double> x, std::span<const TailEstimate> cells,
                       std::int64_t min_hits = 5);

/// Median of a copy of the values (mean of the two middle values for even sizes).
double median(std::vector<double> values);

}  // namespace dilute
