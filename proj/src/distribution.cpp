#include "dilute/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dilute/errors.hpp"

namespace dilute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-10;

double gaussian_abs_moment(double r) {
    // E|Z|^r = 2^{r/2} Gamma((r+1)/2) / sqrt(pi)
    return std::exp(0.5 * r * std::numbers::ln2 + std::lgamma(0.5 * (r + 1.0))) /
           std::sqrt(std::numbers::pi);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, 20, 1e-14, &err);
    if (!(err <= kQuadTol * std::max(1.0, std::abs(value)))) {
        throw ConvergenceError("tail quadrature did not reach tolerance (error estimate " +
                               std::to_string(err) + ")");
    }
    return value;
}

}  // namespace

std::string_view to_string(DistKind kind) {
    switch (kind) {
        case DistKind::Gaussian: return "gaussian";
        case DistKind::Rademacher: return "rademacher";
        case DistKind::SymmetricPareto: return "symmetric_pareto";
        case DistKind::TwoPoint: return "two_point";
    }
    return "unknown";
}

DistKind dist_kind_from_string(std::string_view name) {
    if (name == "gaussian") return DistKind::Gaussian;
    if (name == "rademacher") return DistKind::Rademacher;
    if (name == "symmetric_pareto") return DistKind::SymmetricPareto;
    if (name == "two_point") return DistKind::TwoPoint;
    throw ValidationError("unknown distribution kind '" + std::string(name) + "'");
}

void EntryDistribution::finish(double delta) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw ValidationError("moment surplus delta must be finite and >= 0");
    }
    delta_ = delta;
    mu4_ = abs_moment(4.0);
    mu4d_ = abs_moment(4.0 + delta);
    if (!(mu4_ >= 1.0 - 1e-12)) {
        throw InternalError("fourth moment below 1 for a standardized law");
    }
}

EntryDistribution EntryDistribution::gaussian(double delta) {
    EntryDistribution d;
    d.kind_ = DistKind::Gaussian;
    d.finish(delta);
    return d;
}

EntryDistribution EntryDistribution::rademacher(double delta) {
    EntryDistribution d;
    d.kind_ = DistKind::Rademacher;
    d.high_ = 1.0;
    d.low_ = -1.0;
    d.prob_ = 0.5;
    d.finish(delta);
    return d;
}

EntryDistribution EntryDistribution::symmetric_pareto(double tail_exponent, double delta) {
    if (!(tail_exponent > 4.0 + std::max(delta, 0.0))) {
        throw ValidationError("symmetric_pareto needs tail_exponent > 4 + delta");
    }
    EntryDistribution d;
    d.kind_ = DistKind::SymmetricPareto;
    d.tail_exponent_ = tail_exponent;
    // E Y^2 = a s^2 / (a - 2) = 1
    d.pareto_scale_ = std::sqrt((tail_exponent - 2.0) / tail_exponent);
    d.finish(delta);
    return d;
}

EntryDistribution EntryDistribution::two_point(double prob, double delta) {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw ValidationError("two_point needs prob in (0, 1)");
    }
    EntryDistribution d;
    d.kind_ = DistKind::TwoPoint;
    d.prob_ = prob;
    d.high_ = std::sqrt((1.0 - prob) / prob);
    d.low_ = -std::sqrt(prob / (1.0 - prob));
    d.finish(delta);
    return d;
}

bool EntryDistribution::is_symmetric() const noexcept {
    switch (kind_) {
        case DistKind::Gaussian:
        case DistKind::Rademacher:
        case DistKind::SymmetricPareto: return true;
        case DistKind::TwoPoint: return prob_ == 0.5;
    }
    return false;
}

double EntryDistribution::max_abs() const noexcept {
    switch (kind_) {
        case DistKind::Gaussian:
        case DistKind::SymmetricPareto: return kInf;
        case DistKind::Rademacher: return 1.0;
        case DistKind::TwoPoint: return std::max(high_, -low_);
    }
    return kInf;
}

double EntryDistribution::abs_moment(double r) const {
    switch (kind_) {
        case DistKind::Gaussian: return gaussian_abs_moment(r);
        case DistKind::Rademacher: return 1.0;
        case DistKind::TwoPoint:
            return prob_ * std::pow(high_, r) + (1.0 - prob_) * std::pow(-low_, r);
        case DistKind::SymmetricPareto: {
            const double a = tail_exponent_;
            if (!(r < a)) return kInf;
            return a * std::pow(pareto_scale_, r) / (a - r);
        }
    }
    return kInf;
}

TailMoments EntryDistribution::tail_moments(double level) const {
    if (!(level >= 0.0)) throw ValidationError("truncation level must be >= 0");
    TailMoments t;
    switch (kind_) {
        case DistKind::Gaussian: {
            const double phi = std::exp(-0.5 * level * level) / std::sqrt(2.0 * std::numbers::pi);
            const double upper = std::erfc(level / std::numbers::sqrt2);  // P{|Z| > L}
            t.mass = upper;
            t.second = 2.0 * level * phi + upper;
            t.first = 0.0;
            return t;
        }
        case DistKind::Rademacher:
        case DistKind::TwoPoint: {
            if (high_ > level) {
                t.mass += prob_;
                t.first += prob_ * high_;
                t.second += prob_ * high_ * high_;
            }
            if (-low_ > level) {
                t.mass += 1.0 - prob_;
                t.first += (1.0 - prob_) * low_;
                t.second += (1.0 - prob_) * low_ * low_;
            }
            return t;
        }
        case DistKind::SymmetricPareto: {
            const double a = tail_exponent_;
            const double s = pareto_scale_;
            const double scale_pow = a * std::pow(s, a);
            auto density = [=](double x) {
                const double ax = std::abs(x);
                return ax < s ? 0.0 : 0.5 * scale_pow * std::pow(ax, -a - 1.0);
            };
            const double from = std::max(level, s);
            // Symmetric law: the two half-lines contribute equally to mass and second
            // moment and cancel in the first moment.
            t.mass = 2.0 * integrate(density, from, kInf);
            t.second = 2.0 * integrate([&](double x) { return x * x * density(x); }, from, kInf);
            t.first = 0.0;
            return t;
        }
    }
    return t;
}

TailMoments tail_moments_by_quadrature(const std::function<double(double)>& density, double lo,
                                       double hi, double level) {
    if (!(level >= 0.0)) throw ValidationError("truncation level must be >= 0");
    TailMoments t;
    auto piece = [&](double a, double b) {
        a = std::max(a, lo);
        b = std::min(b, hi);
        if (!(b > a)) return;
        t.mass += integrate(density, a, b);
        t.first += integrate([&](double x) { return x * density(x); }, a, b);
        t.second += integrate([&](double x) { return x * x * density(x); }, a, b);
    };
    piece(-kInf, -level);
    piece(level, kInf);
    return t;
}

double EntrySampler::operator()(Rng& rng) {
    switch (dist_.kind()) {
        case DistKind::Gaussian: return normal_(rng);
        case DistKind::Rademacher: return (rng() >> 63) ? 1.0 : -1.0;
        case DistKind::TwoPoint:
            return unit_(rng) < dist_.two_point_prob() ? dist_.two_point_high()
                                                       : dist_.two_point_low();
        case DistKind::SymmetricPareto: {
            const double u = 1.0 - unit_(rng);  // (0, 1]
            const double mag = dist_.pareto_scale() * std::pow(u, -1.0 / dist_.tail_exponent());
            return (rng() >> 63) ? mag : -mag;
        }
    }
    return 0.0;
}

double sample_entry(const EntryDistribution& dist, Rng& rng) {
    EntrySampler s(dist);
    return s(rng);
}

}  // namespace dilute
