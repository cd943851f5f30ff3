#include "dilute/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dilute/errors.hpp"
#include "dilute/kernels.hpp"
#include "dilute/lanczos.hpp"
#include "dilute/rng.hpp"

namespace dilute {

std::string_view to_string(SpectralMethod method) {
    switch (method) {
        case SpectralMethod::DenseOracle: return "dense_oracle";
        case SpectralMethod::Lanczos: return "lanczos";
        case SpectralMethod::ShiftInvert: return "shift_invert";
    }
    return "unknown";
}

namespace {

void fill_norms(const SparseSample& sample, SpectralSummary& out) {
    const auto [r, c] = row_col_norm_extremes(sample);
    out.max_row_norm = r;
    out.max_col_norm = c;
}

}  // namespace

DenseSvd dense_svd_of(const SparseSample& sample, bool want_vectors) {
    const auto& x = sample.matrix;
    if (x.rows * x.cols > kDenseGuard) {
        throw CapacityError("dense oracle: N*n = " + std::to_string(x.rows * x.cols) +
                            " exceeds the guard " + std::to_string(kDenseGuard));
    }
    return dense_svd(x.to_dense_col_major(), x.rows, x.cols, want_vectors);
}

SpectralSummary dense_svd_oracle(const SparseSample& sample) {
    DenseSvd svd = dense_svd_of(sample, false);
    SpectralSummary out;
    out.method = SpectralMethod::DenseOracle;
    out.iterations = svd.sweeps;
    out.full_spectrum = std::move(svd.values);
    if (!out.full_spectrum.empty()) {
        out.s1 = out.full_spectrum.front();
        out.sn = out.full_spectrum.back();
    }
    fill_norms(sample, out);
    return out;
}

double gram_residual(const CsrMatrix& x, double s, std::span<const double> v) {
    std::vector<double> xv(x.rows);
    std::vector<double> g(x.cols);
    kernels::serial::multiply(x, v, xv);
    kernels::serial::multiply(x.transpose(), xv, g);
    double r2 = 0.0;
    for (std::int64_t i = 0; i < x.cols; ++i) {
        const double d = g[i] - s * s * v[i];
        r2 += d * d;
    }
    return std::sqrt(r2);
}

SpectralSummary largest_sv_lanczos(const SparseSample& sample, double tol, std::int64_t max_iter,
                                   std::uint64_t seed) {
    const auto& m = sample.matrix;
    // Past a quarter fill a dense copy beats CSR plus its transpose.
    const bool dense = m.rows * m.cols <= kDenseOperatorLimit && 4 * m.nnz() >= m.rows * m.cols;
    const LanczosResult r = dense ? largest_sv_lanczos(DenseOperator(m), {tol, max_iter, seed})
                                  : largest_sv_lanczos(CsrOperator(m), {tol, max_iter, seed});
    SpectralSummary out;
    out.method = SpectralMethod::Lanczos;
    out.s1 = r.value;
    out.iterations = r.iterations;
    out.residual = r.residual;
    out.converged = r.converged;
    fill_norms(sample, out);
    return out;
}

double smallest_sv(const SparseSample& sample, std::uint64_t probe_seed, int probes) {
    const SpectralSummary summary = dense_svd_oracle(sample);
    const double sn = summary.sn;
    const auto& x = sample.matrix;
    Rng rng = make_rng(mix_seed(probe_seed, stream::probe));
    std::normal_distribution<double> normal;
    std::vector<double> v(x.cols);
    std::vector<double> xv(x.rows);
    for (int t = 0; t < probes; ++t) {
        double nv = 0.0;
        for (auto& e : v) {
            e = normal(rng);
            nv += e * e;
        }
        nv = std::sqrt(nv);
        for (auto& e : v) e /= nv;
        kernels::serial::multiply(x, v, xv);
        double n2 = 0.0;
        for (double e : xv) n2 += e * e;
        if (std::sqrt(n2) < sn - 1e-8) {
            throw InternalError("smallest_sv: probe norm " + std::to_string(std::sqrt(n2)) +
                                " below sn = " + std::to_string(sn));
        }
    }
    return sn;
}

ShiftInvertResult smallest_sv_shift_invert(const SparseSample& sample, double tol,
                                           std::int64_t max_iter, std::uint64_t seed) {
    const auto& x = sample.matrix;
    const std::int64_t n = x.cols;
    if (n > kShiftInvertGuard) {
        throw CapacityError("shift-invert: n = " + std::to_string(n) + " exceeds " +
                            std::to_string(kShiftInvertGuard));
    }
    ShiftInvertResult out;
    if (n == 0) {
        out.converged = true;
        return out;
    }
    if (x.rows < n) {
        out.rank_deficient = true;
        out.converged = true;
        return out;
    }
    std::vector<double> g(static_cast<std::size_t>(n * n));
    kernels::parallel::gram_upper(x, g);
    if (kernels::parallel::cholesky_upper(g, n) >= 0) {
        out.rank_deficient = true;
        out.converged = true;
        return out;
    }
    const InverseUpperOperator inv(g, n);
    const LanczosResult r = largest_sv_lanczos(inv, {tol, max_iter, seed});
    out.sn = r.value > 0.0 ? 1.0 / r.value : 0.0;
    out.iterations = r.iterations;
    out.residual = r.residual;
    out.converged = r.converged;
    return out;
}

std::pair<double, double> row_col_norm_extremes(const SparseSample& sample) {
    const auto sq = kernels::parallel::row_col_sq_norms(sample.matrix);
    double r = 0.0;
    double c = 0.0;
    for (double v : sq.row) r = std::max(r, v);
    for (double v : sq.col) c = std::max(c, v);
    return {std::sqrt(r), std::sqrt(c)};
}

SeginerReport seginer_sandwich_check(std::span<const SpectralSummary> samples, double max_ratio) {
    if (samples.size() < 30) {
        throw ValidationError("seginer_sandwich_check: need at least 30 samples, got " +
                              std::to_string(samples.size()));
    }
    SeginerReport rep;
    rep.samples = std::ssize(samples);
    rep.max_ratio = max_ratio;
    double sum_s1 = 0.0;
    double sum_norm = 0.0;
    for (const auto& s : samples) {
        const double m = std::max(s.max_row_norm, s.max_col_norm);
        if (m > s.s1 * (1.0 + 1e-10) + 1e-10) ++rep.violations;
        sum_s1 += s.s1;
        sum_norm += m;
    }
    rep.ratio = sum_norm > 0.0 ? sum_s1 / sum_norm : 1.0;
    rep.passed = rep.violations == 0 && rep.ratio >= 1.0 - 1e-12 && rep.ratio <= max_ratio;
    return rep;
}

RowMomentReport row_norm_moment_check(const ModelParams& params, int q, std::int64_t trials,
                                      std::uint64_t seed, double constant) {
    const double qmax = 2.0 * std::log(static_cast<double>(std::max(params.rows(), params.cols())));
    if (q < 2 || q > qmax) {
        throw ValidationError("row_norm_moment_check: q = " + std::to_string(q) +
                              " outside [2, 2 ln max(n, N)] = [2, " + std::to_string(qmax) + "]");
    }
    if (trials < 100) throw ValidationError("row_norm_moment_check: need at least 100 trials");

    std::vector<double> values(trials);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < trials; ++t) {
        SparseSample row = sample_leading_rows(params, mix_seed(seed, t), 1);
        if (params.dist().has_moment_surplus()) row = truncate_center_rescale(row).first;
        double n2 = 0.0;
        for (double v : row.matrix.val) n2 += v * v;
        values[t] = std::pow(n2, 0.5 * q);
    }
    RowMomentReport rep;
    rep.q = q;
    rep.trials = trials;
    rep.constant = constant;
    double sum = 0.0;
    for (double v : values) sum += v;
    rep.estimate = sum / static_cast<double>(trials);
    double ss = 0.0;
    for (double v : values) ss += (v - rep.estimate) * (v - rep.estimate);
    rep.std_error = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));
    rep.root_ratio = std::pow(rep.estimate, 1.0 / q) / std::sqrt(params.mean_row_degree());
    rep.passed = rep.root_ratio <= constant;
    return rep;
}

}  // namespace dilute
