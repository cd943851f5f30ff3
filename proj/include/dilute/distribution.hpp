#pragma once

#include <functional>
#include <random>
#include <string>
#include <string_view>

#include "dilute/rng.hpp"

namespace dilute {

enum class DistKind { Gaussian, Rademacher, SymmetricPareto, TwoPoint };

std::string_view to_string(DistKind kind);
DistKind dist_kind_from_string(std::string_view name);

/// Tail pieces of a law beyond a truncation level L:
///   first  = E[X 1{|X| > L}],  second = E[X^2 1{|X| > L}],  mass = P{|X| > L}.
struct TailMoments {
    double first = 0.0;
    double second = 0.0;
    double mass = 0.0;
};

/// A standardized (mean 0, variance 1) entry law with its declared moment surplus delta.
///
/// Construct through the named factories; they validate parameters and rescale
/// SymmetricPareto and TwoPoint so that the standardization holds exactly.
class EntryDistribution {
public:
    static EntryDistribution gaussian(double delta = 0.0);
    static EntryDistribution rademacher(double delta = 0.0);
    /// |X| is Pareto with the given tail exponent, scaled to unit variance; sign is symmetric.
    /// Requires tail_exponent > 4 + delta.
    static EntryDistribution symmetric_pareto(double tail_exponent, double delta = 0.0);
    /// X = a with probability prob, X = -prob/(1-prob) * a otherwise, a = sqrt((1-prob)/prob).
    static EntryDistribution two_point(double prob, double delta = 0.0);

    DistKind kind() const noexcept { return kind_; }
    double delta() const noexcept { return delta_; }
    double mu4() const noexcept { return mu4_; }
    /// E|X|^{4+delta}. Equals mu4 when delta == 0.
    double mu4d() const noexcept { return mu4d_; }
    bool has_moment_surplus() const noexcept { return delta_ > 0.0; }

    double tail_exponent() const noexcept { return tail_exponent_; }
    double pareto_scale() const noexcept { return pareto_scale_; }
    double two_point_prob() const noexcept { return prob_; }
    /// Upper support value of TwoPoint (the "a" of the law).
    double two_point_high() const noexcept { return high_; }
    double two_point_low() const noexcept { return low_; }

    bool is_symmetric() const noexcept;
    /// sup |X| over the support, +inf for unbounded laws.
    double max_abs() const noexcept;

    /// E|X|^r in closed form. Finite only for r < tail_exponent on Pareto laws.
    double abs_moment(double r) const;

    /// Closed form for Gaussian and bounded laws, adaptive quadrature otherwise.
    TailMoments tail_moments(double level) const;

    friend bool operator==(const EntryDistribution&, const EntryDistribution&) = default;

private:
    EntryDistribution() = default;
    void finish(double delta);

    DistKind kind_ = DistKind::Gaussian;
    double delta_ = 0.0;
    double mu4_ = 3.0;
    double mu4d_ = 3.0;
    double tail_exponent_ = 0.0;
    double pareto_scale_ = 0.0;
    double prob_ = 0.5;
    double high_ = 1.0;
    double low_ = -1.0;
};

/// Stateful draw helper; keeps the normal generator's cached second value.
class EntrySampler {
public:
    explicit EntrySampler(const EntryDistribution& dist) : dist_(dist) {}
    double operator()(Rng& rng);

private:
    EntryDistribution dist_;
    std::normal_distribution<double> normal_{};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

/// One draw from the law.
double sample_entry(const EntryDistribution& dist, Rng& rng);

/// Tail moments of an arbitrary law given by its density on [lo, hi] (either end may be infinite).
/// Integrates over {|x| > level} with Gauss-Kronrod to an absolute tolerance of 1e-10.
TailMoments tail_moments_by_quadrature(const std::function<double(double)>& density, double lo,
                                       double hi, double level);

}  // namespace dilute
