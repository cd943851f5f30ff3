#include "dilute/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "dilute/errors.hpp"

namespace dilute {

Interval clopper_pearson(std::int64_t hits, std::int64_t trials, double confidence) {
    if (trials < 1) throw ValidationError("clopper_pearson: trials must be positive");
    if (hits < 0 || hits > trials) throw ValidationError("clopper_pearson: hits outside [0, trials]");
    if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("clopper_pearson: confidence in (0, 1)");
    const double alpha = 1.0 - confidence;
    const auto k = static_cast<double>(hits);
    const auto n = static_cast<double>(trials);
    Interval ci;
    ci.low = hits == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
    ci.high = hits == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
    return ci;
}

double dkw_interval_halfwidth(std::int64_t n, double alpha) {
    if (n < 1) throw ValidationError("dkw_interval_halfwidth: n must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("dkw_interval_halfwidth: alpha in (0, 1)");
    return std::min(1.0, 2.0 * std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n))));
}

std::string_view to_string(TailDirection direction) {
    return direction == TailDirection::Upper ? "upper" : "lower";
}

TailEstimate TailEstimate::from_counts(double threshold, TailDirection direction, std::int64_t hits,
                                       std::int64_t trials) {
    TailEstimate t;
    t.threshold = threshold;
    t.direction = direction;
    t.hits = hits;
    t.trials = trials;
    t.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
    t.ci = clopper_pearson(hits, trials);
    return t;
}

TailEstimate TailEstimate::from_values(std::span<const double> values, double threshold,
                                       TailDirection direction) {
    std::int64_t hits = 0;
    for (double v : values) {
        if (direction == TailDirection::Upper ? v >= threshold : v <= threshold) ++hits;
    }
    return from_counts(threshold, direction, hits, std::ssize(values));
}

std::string_view to_string(DecayStatus status) {
    switch (status) {
        case DecayStatus::Decreasing: return "decreasing";
        case DecayStatus::NotDecreasing: return "not_decreasing";
        case DecayStatus::Censored: return "censored";
    }
    return "unknown";
}

DecayFit fit_log_decay(std::span<const double> x, std::span<const TailEstimate> cells,
                       std::int64_t min_hits) {
    if (x.size() != cells.size() || x.size() < 2) {
        throw ValidationError("fit_log_decay: need matching grids of at least two cells");
    }
    DecayFit fit;
    fit.min_hits = cells.front().hits;
    for (const auto& c : cells) fit.min_hits = std::min(fit.min_hits, c.hits);
    if (fit.min_hits < min_hits) {
        fit.status = DecayStatus::Censored;
        return fit;
    }
    const auto m = static_cast<double>(x.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += std::log(cells[i].p_hat);
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(cells[i].p_hat) - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    bool strictly = true;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        if (!(cells[i].p_hat < cells[i - 1].p_hat)) strictly = false;
    }
    fit.status = strictly && fit.slope < 0.0 ? DecayStatus::Decreasing : DecayStatus::NotDecreasing;
    return fit;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of an empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lo + hi);
}

}  // namespace dilute
