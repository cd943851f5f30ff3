#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dilute/geometry.hpp"
#include "dilute/ladder.hpp"
#include "dilute/model.hpp"
#include "dilute/stats.hpp"

namespace dilute {

/// Empirical Levy concentration sup_v P{|xi - v| <= eps} of a sample.
struct ConcentrationEstimate {
    double epsilon = 0.0;
    double value = 0.0;
    std::int64_t sample_size = 0;
    double ci_halfwidth = 1.0;  // 99% uniform deviation bound over all windows
};

/// Exact for the empirical measure: a sorted two-pointer sweep over closed windows
/// [s_i, s_i + 2 eps]. Requires at least two samples and eps > 0.
ConcentrationEstimate levy_concentration(std::span<const double> samples, double epsilon);

/// (sum_k x_k X_jk) / sqrt(p) over the stored entries of row j.
double row_functional(const CsrMatrix& x, std::int64_t row, const SphereVector& v, double p);

/// `count` independent rows of the ensemble, each from its own trial seed; rows pass
/// through truncate_center_rescale when the law has a moment surplus.
std::vector<SparseSample> draw_rows(const ModelParams& params, std::uint64_t seed, std::int64_t count);

struct ConcentrReport {
    std::int64_t nu = 0;
    double rho = 0.0;
    double delta_used = 0.0;   // compressibility delta of the test vector
    double p_nu = 0.0;
    ConcentrationEstimate levy;  // at eps = rho / 2
    double gap = 0.0;            // 1 - levy.value
    double gap_lower = 0.0;      // gap - ci_halfwidth
    double reference = 0.0;      // rho^4 p_nu
    double fitted_constant = 0.0;  // gap / reference
    bool passed = false;         // gap_lower > 0
};

/// Largest compressibility delta used when drawing incompressible test vectors;
/// ladder values above it are capped. Past about 0.46 the lowest (1 - delta) share of a
/// uniform sphere vector carries less than 0.09 of its energy, so rejection sampling at
/// rho = 0.3 stalls.
inline constexpr double kTestVectorDeltaCap = 0.4;

ConcentrReport verify_lemma_concentr(const ModelParams& params, const LadderSchedule& schedule,
                                     std::int64_t nu, double rho, std::int64_t trials,
                                     std::uint64_t seed);

struct ConcsingleReport {
    double p = 0.0;
    double mu4 = 0.0;
    ConcentrationEstimate levy;  // of xi X / sqrt(p) at eps = 1/2
    double bound = 0.0;          // 1 - p / (8 mu4)
    bool passed = false;         // levy.value <= bound + ci_halfwidth
    std::vector<std::pair<double, double>> bound_sweep;  // (p 2^-i, bound) for i = 0..4
};

/// Requires trials >= 10^4.
ConcsingleReport verify_lemma_concsingle(const EntryDistribution& dist, double p, std::int64_t trials,
                                         std::uint64_t seed);

using ScalarSampler = std::function<double(Rng&)>;

struct TensorizationReport {
    double lambda = 0.0;
    double q = 0.0;
    double C = 0.5;
    double small_mass = 0.0;  // Monte Carlo P{|zeta| <= lambda} used to certify the precondition
    std::vector<std::int64_t> grid;
    std::vector<TailEstimate> cells;  // P{sum zeta_j^2 <= C N q lambda^2} per N
    DecayFit fit;                     // against N
    double fitted_constant = 0.0;     // -slope / q when not censored
};

/// Rejects (ValidationError) a sampler whose P{|zeta| <= lambda} exceeds 1 - q by more than
/// its 99% Clopper-Pearson margin on 10^5 draws.
TensorizationReport verify_tensorization(const ScalarSampler& zeta, double lambda, double q,
                                         std::span<const std::int64_t> grid, std::int64_t trials,
                                         std::uint64_t seed, double C = 0.5);

/// ||X x||_2 / sqrt(N p) for `trials` independent samples.
std::vector<double> small_ball_norms(const ModelParams& params, const SphereVector& x,
                                     std::int64_t trials, std::uint64_t seed);

/// P{||X x||_2 <= tau sqrt(N p)}. Requires trials >= 1000.
TailEstimate small_ball_fixed_vector(const ModelParams& params, const SphereVector& x, double tau,
                                     std::int64_t trials, std::uint64_t seed);

enum class SnSolver { Dense, ShiftInvert };

struct TailRun {
    TailEstimate estimate;
    std::vector<double> ratios;  // s / sqrt(Np) per trial, in trial order
    double median_ratio = 0.0;
    std::int64_t nonconverged = 0;
    std::int64_t rank_deficient = 0;
};

/// P{s1 >= K sqrt(Np)}; s1 by Lanczos at the given tolerance. Requires trials >= 100.
TailRun tail_s1(const ModelParams& params, double K, std::int64_t trials, std::uint64_t seed,
                double tol = 1e-6);

/// P{sn <= tau sqrt(Np)}. The dense solver enforces the oracle size guard.
TailRun tail_sn(const ModelParams& params, double tau, std::int64_t trials, std::uint64_t seed,
                SnSolver solver = SnSolver::ShiftInvert, double tol = 1e-6);

/// tau0 = (rho / (4 sqrt2 5^y e^2 K^y))^{1/(1-y)}.
double tau0_reference(double rho, double y, double K);

struct Tau0Coupling {
    double tau0 = 0.0;
    double rho0 = 0.0;       // tau0 / (2K)
    bool consistent = false; // nonzero fixed point with tau0 <= 4K and rho0 < 1
};

/// Nonzero fixed point of tau0 = tau0_reference(tau0 / (2K), y, K).
Tau0Coupling tau0_coupled(double y, double K);

struct EnvelopeReport {
    double t = 0.0;
    double rho = 0.0;
    double envelope = 0.0;  // (2t / sqrt(t^2 + rho^2/2))^N + (2 c0 / C e^{-C^2/2})^N
    bool vacuous = false;   // envelope >= 1
    TailEstimate estimate;  // P{||X x|| <= t sqrt(Np)}
    bool consistent = false; // estimate.ci.low <= envelope
};

EnvelopeReport lemma_new_envelope(const ModelParams& params, const SphereVector& x, double rho,
                                  double t, std::int64_t trials, std::uint64_t seed,
                                  double c0 = 1.0, double C = 3.0);

}  // namespace dilute
