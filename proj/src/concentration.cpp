#include "dilute/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dilute/errors.hpp"
#include "dilute/kernels.hpp"
#include "dilute/spectral.hpp"

namespace dilute {

ConcentrationEstimate levy_concentration(std::span<const double> samples, double epsilon) {
    if (samples.size() < 2) throw ValidationError("levy_concentration: need at least two samples");
    if (!(epsilon > 0.0)) throw ValidationError("levy_concentration: epsilon must be positive");
    std::vector<double> s(samples.begin(), samples.end());
    for (double v : s) {
        if (!std::isfinite(v)) throw ValidationError("levy_concentration: non-finite sample");
    }
    std::sort(s.begin(), s.end());
    const double width = 2.0 * epsilon;
    std::size_t best = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (j < i) j = i;
        while (j + 1 < s.size() && s[j + 1] - s[i] <= width) ++j;
        best = std::max(best, j - i + 1);
    }
    ConcentrationEstimate out;
    out.epsilon = epsilon;
    out.sample_size = std::ssize(s);
    out.value = static_cast<double>(best) / static_cast<double>(s.size());
    out.ci_halfwidth = dkw_interval_halfwidth(out.sample_size, 0.01);
    return out;
}

double row_functional(const CsrMatrix& x, std::int64_t row, const SphereVector& v, double p) {
    if (v.size() != x.cols) throw ValidationError("row_functional: vector length differs from row length");
    if (row < 0 || row >= x.rows) throw ValidationError("row_functional: row index out of range");
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("row_functional: p must lie in (0, 1]");
    const auto cols = x.row_cols(row);
    const auto vals = x.row_vals(row);
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) s += v[cols[k]] * vals[k];
    return s / std::sqrt(p);
}

namespace {

SparseSample prepare(SparseSample s, const ModelParams& params) {
    if (params.dist().has_moment_surplus()) return truncate_center_rescale(s).first;
    return s;
}

}  // namespace

std::vector<SparseSample> draw_rows(const ModelParams& params, std::uint64_t seed, std::int64_t count) {
    std::vector<SparseSample> rows(count);
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < count; ++t) {
        rows[t] = prepare(sample_leading_rows(params, mix_seed(seed, t), 1), params);
    }
    return rows;
}

ConcentrReport verify_lemma_concentr(const ModelParams& params, const LadderSchedule& schedule,
                                     std::int64_t nu, double rho, std::int64_t trials,
                                     std::uint64_t seed) {
    if (nu < 1 || nu > schedule.L) {
        throw ValidationError("verify_lemma_concentr: nu must lie in [1, L] = [1, " +
                              std::to_string(schedule.L) + "]");
    }
    if (trials < 2) throw ValidationError("verify_lemma_concentr: need at least two trials");
    ConcentrReport rep;
    rep.nu = nu;
    rep.rho = rho;
    rep.p_nu = schedule.p_seq[nu];
    rep.delta_used = std::min(schedule.delta_seq[nu], kTestVectorDeltaCap);
    const CompressibilityParams cp{rep.delta_used, rho};
    const SphereVector x = sample_incompressible(params.cols(), cp, mix_seed(seed, 0x5eed));

    const auto rows = draw_rows(params, seed, trials);
    std::vector<double> z(trials);
    for (std::int64_t t = 0; t < trials; ++t) z[t] = row_functional(rows[t].matrix, 0, x, params.p());
    rep.levy = levy_concentration(z, rho / 2.0);
    rep.gap = 1.0 - rep.levy.value;
    rep.gap_lower = rep.gap - rep.levy.ci_halfwidth;
    rep.reference = std::pow(rho, 4) * rep.p_nu;
    rep.fitted_constant = rep.gap / rep.reference;
    rep.passed = rep.gap_lower > 0.0;
    return rep;
}

ConcsingleReport verify_lemma_concsingle(const EntryDistribution& dist, double p, std::int64_t trials,
                                         std::uint64_t seed) {
    if (trials < 10000) throw ValidationError("verify_lemma_concsingle: need at least 10^4 trials");
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("verify_lemma_concsingle: p must lie in (0, 1]");
    Rng mask = make_rng(mix_seed(seed, stream::mask));
    Rng value = make_rng(mix_seed(seed, stream::value));
    std::bernoulli_distribution keep(p);
    EntrySampler draw(dist);
    const double scale = 1.0 / std::sqrt(p);
    std::vector<double> z(trials);
    for (auto& v : z) {
        const bool on = keep(mask);
        const double x = draw(value);
        v = on ? x * scale : 0.0;
    }
    ConcsingleReport rep;
    rep.p = p;
    rep.mu4 = dist.mu4();
    rep.levy = levy_concentration(z, 0.5);
    rep.bound = 1.0 - p / (8.0 * rep.mu4);
    rep.passed = rep.levy.value <= rep.bound + rep.levy.ci_halfwidth;
    for (int i = 0; i <= 4; ++i) {
        const double pi = p * std::ldexp(1.0, -i);
        rep.bound_sweep.emplace_back(pi, 1.0 - pi / (8.0 * rep.mu4));
    }
    return rep;
}

TensorizationReport verify_tensorization(const ScalarSampler& zeta, double lambda, double q,
                                         std::span<const std::int64_t> grid, std::int64_t trials,
                                         std::uint64_t seed, double C) {
    if (!(lambda > 0.0)) throw ValidationError("verify_tensorization: lambda must be positive");
    if (!(q > 0.0 && q <= 1.0)) throw ValidationError("verify_tensorization: q must lie in (0, 1]");
    if (!(C > 0.0)) throw ValidationError("verify_tensorization: C must be positive");
    if (grid.size() < 2) throw ValidationError("verify_tensorization: need at least two grid points");
    if (trials < 1) throw ValidationError("verify_tensorization: trials must be positive");

    TensorizationReport rep;
    rep.lambda = lambda;
    rep.q = q;
    rep.C = C;
    {
        constexpr std::int64_t kCertify = 100000;
        Rng rng = make_rng(mix_seed(seed, stream::probe));
        std::int64_t small = 0;
        for (std::int64_t i = 0; i < kCertify; ++i) {
            if (std::abs(zeta(rng)) <= lambda) ++small;
        }
        rep.small_mass = static_cast<double>(small) / kCertify;
        const Interval ci = clopper_pearson(small, kCertify, 0.99);
        if (ci.low > 1.0 - q) {
            throw ValidationError("verify_tensorization: P{|zeta| <= lambda} ~ " +
                                  std::to_string(rep.small_mass) + " exceeds 1 - q = " +
                                  std::to_string(1.0 - q));
        }
    }

    std::vector<double> xs;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::int64_t N = grid[g];
        if (N < 1) throw ValidationError("verify_tensorization: grid values must be positive");
        const double threshold = C * static_cast<double>(N) * q * lambda * lambda;
        std::vector<double> sums(trials);
        const std::uint64_t cell_seed = mix_seed(seed, 1000 + g);
#pragma omp parallel for schedule(static)
        for (std::int64_t t = 0; t < trials; ++t) {
            Rng rng = make_rng(mix_seed(cell_seed, t));
            double s = 0.0;
            for (std::int64_t j = 0; j < N; ++j) {
                const double z = zeta(rng);
                s += z * z;
            }
            sums[t] = s;
        }
        rep.grid.push_back(N);
        rep.cells.push_back(TailEstimate::from_values(sums, threshold, TailDirection::Lower));
        xs.push_back(static_cast<double>(N));
    }
    rep.fit = fit_log_decay(xs, rep.cells);
    if (rep.fit.status != DecayStatus::Censored) rep.fitted_constant = -rep.fit.slope / q;
    return rep;
}

std::vector<double> small_ball_norms(const ModelParams& params, const SphereVector& x,
                                     std::int64_t trials, std::uint64_t seed) {
    if (x.size() != params.cols()) throw ValidationError("small_ball: vector length differs from n");
    std::vector<double> out(trials);
    const double scale = 1.0 / std::sqrt(params.mean_row_degree());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < trials; ++t) {
        const SparseSample s = prepare(sample_matrix(params, mix_seed(seed, t)), params);
        std::vector<double> y(params.rows());
        kernels::serial::multiply(s.matrix, x.coords(), y);
        double n2 = 0.0;
        for (double v : y) n2 += v * v;
        out[t] = std::sqrt(n2) * scale;
    }
    return out;
}

TailEstimate small_ball_fixed_vector(const ModelParams& params, const SphereVector& x, double tau,
                                     std::int64_t trials, std::uint64_t seed) {
    if (trials < 1000) throw ValidationError("small_ball_fixed_vector: need at least 1000 trials");
    if (!(tau >= 0.0)) throw ValidationError("small_ball_fixed_vector: tau must be non-negative");
    const auto norms = small_ball_norms(params, x, trials, seed);
    return TailEstimate::from_values(norms, tau, TailDirection::Lower);
}

TailRun tail_s1(const ModelParams& params, double K, std::int64_t trials, std::uint64_t seed, double tol) {
    if (trials < 100) throw ValidationError("tail_s1: need at least 100 trials");
    TailRun run;
    run.ratios.resize(trials);
    std::vector<char> conv(trials, 1);
    const double scale = 1.0 / std::sqrt(params.mean_row_degree());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < trials; ++t) {
        const std::uint64_t ts = mix_seed(seed, t);
        const SparseSample s = sample_matrix(params, ts);
        const SpectralSummary sum = largest_sv_lanczos(s, tol, 300, ts);
        run.ratios[t] = sum.s1 * scale;
        conv[t] = sum.converged;
    }
    for (char c : conv) run.nonconverged += c ? 0 : 1;
    run.estimate = TailEstimate::from_values(run.ratios, K, TailDirection::Upper);
    run.median_ratio = median(run.ratios);
    return run;
}

TailRun tail_sn(const ModelParams& params, double tau, std::int64_t trials, std::uint64_t seed,
                SnSolver solver, double tol) {
    if (trials < 100) throw ValidationError("tail_sn: need at least 100 trials");
    if (solver == SnSolver::Dense && params.rows() * params.cols() > kDenseGuard) {
        throw CapacityError("tail_sn: N*n exceeds the dense oracle guard");
    }
    TailRun run;
    run.ratios.resize(trials);
    std::vector<char> conv(trials, 1);
    std::vector<char> deficient(trials, 0);
    const double scale = 1.0 / std::sqrt(params.mean_row_degree());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < trials; ++t) {
        const std::uint64_t ts = mix_seed(seed, t);
        const SparseSample s = sample_matrix(params, ts);
        double sn = 0.0;
        if (solver == SnSolver::Dense) {
            sn = dense_svd_oracle(s).sn;
        } else {
            const ShiftInvertResult r = smallest_sv_shift_invert(s, tol, 300, ts);
            sn = r.sn;
            conv[t] = r.converged;
            deficient[t] = r.rank_deficient;
        }
        run.ratios[t] = sn * scale;
    }
    for (std::int64_t t = 0; t < trials; ++t) {
        run.nonconverged += conv[t] ? 0 : 1;
        run.rank_deficient += deficient[t];
    }
    run.estimate = TailEstimate::from_values(run.ratios, tau, TailDirection::Lower);
    run.median_ratio = median(run.ratios);
    return run;
}

double tau0_reference(double rho, double y, double K) {
    if (!(y > 0.0 && y < 1.0)) throw ValidationError("tau0: y must lie in (0, 1)");
    if (!(K > 0.0) || !(rho > 0.0)) throw ValidationError("tau0: rho and K must be positive");
    const double e2 = std::exp(2.0);
    const double base = rho / (4.0 * std::numbers::sqrt2 * std::pow(5.0, y) * e2 * std::pow(K, y));
    return std::pow(base, 1.0 / (1.0 - y));
}

Tau0Coupling tau0_coupled(double y, double K) {
    if (!(y > 0.0 && y < 1.0)) throw ValidationError("tau0: y must lie in (0, 1)");
    if (!(K > 0.0)) throw ValidationError("tau0: K must be positive");
    // tau^{1-y} = c tau with c = 1 / (2K 4 sqrt2 5^y e^2 K^y), so tau = c^{-1/y}.
    const double c = 1.0 / (2.0 * K * 4.0 * std::numbers::sqrt2 * std::pow(5.0, y) * std::exp(2.0) *
                            std::pow(K, y));
    Tau0Coupling out;
    out.tau0 = std::pow(c, -1.0 / y);
    out.rho0 = out.tau0 / (2.0 * K);
    const double check = tau0_reference(out.rho0, y, K);
    if (!(std::abs(check - out.tau0) <= 1e-9 * out.tau0)) {
        throw InternalError("tau0_coupled: fixed point check failed");
    }
    out.consistent = out.tau0 <= 4.0 * K && out.rho0 < 1.0;
    return out;
}

EnvelopeReport lemma_new_envelope(const ModelParams& params, const SphereVector& x, double rho,
                                  double t, std::int64_t trials, std::uint64_t seed, double c0, double C) {
    if (!(t > 0.0)) throw ValidationError("lemma_new_envelope: t must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("lemma_new_envelope: rho must lie in (0, 1)");
    EnvelopeReport rep;
    rep.t = t;
    rep.rho = rho;
    const auto N = static_cast<double>(params.rows());
    const double first = 2.0 * t / std::sqrt(t * t + rho * rho / 2.0);
    const double second = 2.0 * c0 / C * std::exp(-C * C / 2.0);
    rep.envelope = std::pow(first, N) + std::pow(second, N);
    rep.vacuous = rep.envelope >= 1.0;
    const auto norms = small_ball_norms(params, x, trials, seed);
    rep.estimate = TailEstimate::from_values(norms, t, TailDirection::Lower);
    rep.consistent = rep.estimate.ci.low <= rep.envelope;
    return rep;
}

}  // namespace dilute
