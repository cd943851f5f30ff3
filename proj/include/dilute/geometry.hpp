#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dilute/rng.hpp"

namespace dilute {

/// (delta, rho) of the compressible / incompressible split; both strictly inside (0, 1).
struct CompressibilityParams {
    double delta = 0.1;
    double rho = 0.3;
    void validate() const;
};

/// A point of the unit sphere in R^n, norm 1 within 1e-12.
class SphereVector {
public:
    /// Throws ValidationError unless the norm is within 1e-12 of 1.
    explicit SphereVector(std::vector<double> coords);
    /// Rescale a nonzero vector onto the sphere.
    static SphereVector normalized(std::vector<double> coords);
    /// Uniform draw from the sphere S^{n-1}.
    static SphereVector uniform(std::int64_t n, Rng& rng);
    static SphereVector basis(std::int64_t n, std::int64_t k);

    std::span<const double> coords() const noexcept { return coords_; }
    std::int64_t size() const noexcept { return std::ssize(coords_); }
    double operator[](std::int64_t i) const { return coords_[i]; }

private:
    std::vector<double> coords_;
};

struct SparseDistance {
    double distance = 1.0;
    std::int64_t support = 0;       // floor(delta n)
    bool no_sparse_support = false; // support == 0: only the zero vector is available
};

/// Distance from x to the nearest vector with at most floor(delta n) nonzeros: the norm of x
/// off its floor(delta n) largest-magnitude coordinates (ties keep the lower index).
SparseDistance distance_to_sparse(const SphereVector& x, double delta);

enum class Compressibility { Compressible, Incompressible };

/// Compressible iff distance_to_sparse(x, delta) <= rho.
Compressibility classify(const SphereVector& x, const CompressibilityParams& params);

struct SpreadSet {
    std::vector<std::int64_t> indices;
    double energy = 0.0;      // sum of x_k^2 over the set
    double size_ratio = 0.0;  // |set| / (n delta rho^2)
};

/// {k : 1/(2 sqrt n) <= |x_k| <= sqrt(2 / (n delta))}. Throws GuaranteeError when its
/// energy is below rho^2. That can happen for incompressible x too: the coordinates
/// below 1/(2 sqrt n) may carry up to 1/4 of the mass.
SpreadSet spread_set(const SphereVector& x, const CompressibilityParams& params);

struct NetTarget {
    enum class Kind { FullSphere, SparseSupport };
    Kind kind = Kind::FullSphere;
    std::int64_t support = 0;  // k for SparseSupport

    static NetTarget full_sphere() { return {}; }
    static NetTarget sparse_support(std::int64_t k) { return {Kind::SparseSupport, k}; }
};

struct NetSpec {
    double epsilon = 0.0;
    std::int64_t ambient_dim = 0;
    NetTarget target;
    std::vector<SphereVector> points;
    /// Volumetric bound on any epsilon-separated set of the target:
    /// (1 + 2/eps)^d, times C(n, k) for k-sparse supports.
    double cardinality_bound = 0.0;
    /// d (1 + 2/eps)^{d-1} (times C(n, k) for supports), reported for comparison only.
    double reference_bound = 0.0;
};

/// Largest dimension a full-sphere net may be built in.
inline constexpr std::int64_t kNetDimGuard = 30;

/// Greedy maximin packing from uniform proposals: a proposal is kept iff it lies more
/// than epsilon from every kept point; stops after 50 |net| + 1000 consecutive rejections.
NetSpec build_net(std::int64_t ambient_dim, double epsilon, NetTarget target, std::uint64_t seed);

/// Largest distance from `probes` random target points to their nearest net point.
double net_covering_radius(const NetSpec& net, std::int64_t probes, std::uint64_t seed);

/// Rejection-sample a uniform sphere vector until it is incompressible. Throws
/// GuaranteeError carrying the acceptance rate after max_rejects rejections.
SphereVector sample_incompressible(std::int64_t n, const CompressibilityParams& params,
                                   std::uint64_t seed, std::int64_t max_rejects = 10000);

/// Share of `attempts` uniform sphere vectors that are incompressible.
double incompressible_acceptance_rate(std::int64_t n, const CompressibilityParams& params,
                                      std::uint64_t seed, std::int64_t attempts);

}  // namespace dilute
