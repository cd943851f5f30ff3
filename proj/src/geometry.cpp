#include "dilute/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dilute/errors.hpp"

namespace dilute {

void CompressibilityParams::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("compressibility delta must lie in (0, 1)");
    if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("compressibility rho must lie in (0, 1)");
}

SphereVector::SphereVector(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw ValidationError("sphere vector must have at least one coordinate");
    double s = 0.0;
    for (double v : coords_) s += v * v;
    if (!(std::abs(std::sqrt(s) - 1.0) <= 1e-12)) {
        throw ValidationError("sphere vector norm " + std::to_string(std::sqrt(s)) + " is not 1");
    }
}

SphereVector SphereVector::normalized(std::vector<double> coords) {
    double s = 0.0;
    for (double v : coords) s += v * v;
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("cannot normalize a zero or non-finite vector");
    const double inv = 1.0 / std::sqrt(s);
    for (double& v : coords) v *= inv;
    return SphereVector(std::move(coords));
}

SphereVector SphereVector::uniform(std::int64_t n, Rng& rng) {
    if (n < 1) throw ValidationError("sphere dimension must be positive");
    std::normal_distribution<double> normal;
    std::vector<double> v(n);
    while (true) {
        double s = 0.0;
        for (double& e : v) {
            e = normal(rng);
            s += e * e;
        }
        if (s > 1e-300) break;
    }
    return normalized(std::move(v));
}

SphereVector SphereVector::basis(std::int64_t n, std::int64_t k) {
    if (k < 0 || k >= n) throw ValidationError("basis index out of range");
    std::vector<double> v(n, 0.0);
    v[k] = 1.0;
    return SphereVector(std::move(v));
}

SparseDistance distance_to_sparse(const SphereVector& x, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("distance_to_sparse: delta must lie in (0, 1)");
    const std::int64_t n = x.size();
    SparseDistance out;
    out.support = static_cast<std::int64_t>(std::floor(delta * static_cast<double>(n)));
    if (out.support == 0) {
        out.distance = 1.0;
        out.no_sparse_support = true;
        return out;
    }
    std::vector<std::int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return std::abs(x[a]) > std::abs(x[b]); });
    // Smallest magnitudes first, so which of several tied coordinates is dropped cannot matter.
    double s = 0.0;
    for (std::int64_t i = n - 1; i >= out.support; --i) s += x[order[i]] * x[order[i]];
    out.distance = std::sqrt(s);
    return out;
}

Compressibility classify(const SphereVector& x, const CompressibilityParams& params) {
    params.validate();
    return distance_to_sparse(x, params.delta).distance <= params.rho ? Compressibility::Compressible
                                                                      : Compressibility::Incompressible;
}

SpreadSet spread_set(const SphereVector& x, const CompressibilityParams& params) {
    params.validate();
    const auto n = static_cast<double>(x.size());
    const double lo = 1.0 / (2.0 * std::sqrt(n));
    const double hi = std::sqrt(2.0 / (n * params.delta));
    SpreadSet out;
    for (std::int64_t k = 0; k < x.size(); ++k) {
        const double a = std::abs(x[k]);
        if (a >= lo && a <= hi) {
            out.indices.push_back(k);
            out.energy += x[k] * x[k];
        }
    }
    out.size_ratio = static_cast<double>(out.indices.size()) / (n * params.delta * params.rho * params.rho);
    if (out.energy < params.rho * params.rho) {
        throw GuaranteeError("spread set energy " + std::to_string(out.energy) + " below rho^2 = " +
                             std::to_string(params.rho * params.rho));
    }
    return out;
}

namespace {

double log_binomial(std::int64_t n, std::int64_t k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) - std::lgamma(double(n - k) + 1.0);
}

SphereVector propose(std::int64_t dim, const NetTarget& target, Rng& rng) {
    if (target.kind == NetTarget::Kind::FullSphere) return SphereVector::uniform(dim, rng);
    std::vector<std::int64_t> idx(dim);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates for a uniform k-subset.
    for (std::int64_t i = 0; i < target.support; ++i) {
        std::uniform_int_distribution<std::int64_t> pick(i, dim - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    const SphereVector local = SphereVector::uniform(target.support, rng);
    std::vector<double> v(dim, 0.0);
    for (std::int64_t i = 0; i < target.support; ++i) v[idx[i]] = local[i];
    return SphereVector(std::move(v));
}

double distance(const SphereVector& a, const SphereVector& b) {
    double s = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

NetSpec build_net(std::int64_t ambient_dim, double epsilon, NetTarget target, std::uint64_t seed) {
    if (ambient_dim < 1) throw ValidationError("build_net: ambient dimension must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("build_net: epsilon must lie in (0, 1]");
    std::int64_t dim = ambient_dim;
    double log_choices = 0.0;
    if (target.kind == NetTarget::Kind::SparseSupport) {
        if (target.support < 1 || target.support > ambient_dim) {
            throw ValidationError("build_net: support size must lie in [1, ambient_dim]");
        }
        dim = target.support;
        log_choices = log_binomial(ambient_dim, target.support);
    }
    if (dim > kNetDimGuard) {
        throw CapacityError("build_net: dimension " + std::to_string(dim) + " exceeds " +
                            std::to_string(kNetDimGuard));
    }
    NetSpec net;
    net.epsilon = epsilon;
    net.ambient_dim = ambient_dim;
    net.target = target;
    const double base = 1.0 + 2.0 / epsilon;
    net.cardinality_bound = std::exp(log_choices + double(dim) * std::log(base));
    net.reference_bound = std::exp(log_choices + std::log(double(dim)) + double(dim - 1) * std::log(base));

    Rng rng = make_rng(seed);
    std::int64_t stall = 0;
    while (stall < 50 * std::ssize(net.points) + 1000) {
        SphereVector cand = propose(ambient_dim, target, rng);
        bool far = true;
        for (const auto& q : net.points) {
            if (distance(cand, q) <= epsilon) {
                far = false;
                break;
            }
        }
        if (far) {
            net.points.push_back(std::move(cand));
            stall = 0;
            if (static_cast<double>(net.points.size()) > net.cardinality_bound) {
                throw InternalError("build_net: packing exceeds the volumetric bound");
            }
        } else {
            ++stall;
        }
    }
    return net;
}

double net_covering_radius(const NetSpec& net, std::int64_t probes, std::uint64_t seed) {
    if (net.points.empty()) throw ValidationError("net_covering_radius: empty net");
    Rng rng = make_rng(seed);
    double worst = 0.0;
    for (std::int64_t t = 0; t < probes; ++t) {
        const SphereVector z = propose(net.ambient_dim, net.target, rng);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : net.points) best = std::min(best, distance(z, q));
        worst = std::max(worst, best);
    }
    return worst;
}

SphereVector sample_incompressible(std::int64_t n, const CompressibilityParams& params,
                                   std::uint64_t seed, std::int64_t max_rejects) {
    params.validate();
    Rng rng = make_rng(seed);
    for (std::int64_t attempt = 0; attempt <= max_rejects; ++attempt) {
        SphereVector x = SphereVector::uniform(n, rng);
        if (classify(x, params) == Compressibility::Incompressible) return x;
    }
    throw GuaranteeError("sample_incompressible: no incompressible vector in " +
                         std::to_string(max_rejects + 1) + " attempts (acceptance rate 0/" +
                         std::to_string(max_rejects + 1) + ")");
}

double incompressible_acceptance_rate(std::int64_t n, const CompressibilityParams& params,
                                      std::uint64_t seed, std::int64_t attempts) {
    params.validate();
    if (attempts < 1) throw ValidationError("attempts must be positive");
    Rng rng = make_rng(seed);
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < attempts; ++t) {
        if (classify(SphereVector::uniform(n, rng), params) == Compressibility::Incompressible) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(attempts);
}

}  // namespace dilute
