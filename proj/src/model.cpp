#include "dilute/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dilute/errors.hpp"
#include "dilute/rng.hpp"

namespace dilute {

ModelParams::ModelParams(std::int64_t rows, std::int64_t cols, double p, EntryDistribution dist,
                         double trunc_a)
    : rows_(rows), cols_(cols), p_(p), dist_(std::move(dist)), trunc_a_(trunc_a) {
    if (cols_ <= 0 || rows_ <= 0) throw ValidationError("N and n must be positive");
    if (!(cols_ < rows_)) throw ValidationError("need n < N (rectangular regime)");
    if (cols_ > std::numeric_limits<std::int32_t>::max()) throw CapacityError("n exceeds column index range");
    if (!(p_ > 0.0 && p_ <= 1.0)) throw ValidationError("p must lie in (0, 1]");
    if (!(trunc_a_ > 0.0) || !std::isfinite(trunc_a_)) throw ValidationError("trunc_A must be > 0");
}

double ModelParams::kappa() const noexcept {
    const double d = dist_.delta();
    return d / (2.0 * (4.0 + d));
}

double ModelParams::truncation_level() const noexcept {
    return trunc_a_ * std::pow(mean_row_degree(), 0.5 - kappa()) *
           std::log(static_cast<double>(rows_));
}

SparseSample SparseSample::from_dense(std::int64_t rows, std::int64_t cols,
                                      std::span<const double> a) {
    SparseSample s;
    s.matrix = CsrMatrix::from_dense(rows, cols, a);
    return s;
}

namespace {

std::int64_t checked_positions(std::int64_t rows, std::int64_t cols) {
    std::int64_t total = 0;
    if (__builtin_mul_overflow(rows, cols, &total)) {
        throw CapacityError("N * n = " + std::to_string(rows) + " * " + std::to_string(cols) +
                            " overflows the 64-bit index range");
    }
    return total;
}

SparseSample draw_rows(const ModelParams& params, std::uint64_t seed, std::int64_t count) {
    const std::int64_t n = params.cols();
    const std::int64_t total = checked_positions(count, n);
    Rng mask_rng = make_rng(mix_seed(seed, stream::mask));
    Rng value_rng = make_rng(mix_seed(seed, stream::value));
    EntrySampler draw(params.dist());

    SparseSample s;
    s.params = params;
    s.seed = seed;
    CsrMatrix& m = s.matrix;
    m.rows = count;
    m.cols = n;
    m.row_ptr.assign(static_cast<std::size_t>(count) + 1, 0);
    const double expected = static_cast<double>(total) * params.p();
    m.col.reserve(static_cast<std::size_t>(expected + 6.0 * std::sqrt(expected) + 16.0));
    m.val.reserve(m.col.capacity());

    const bool dense = params.p() >= 1.0;
    std::geometric_distribution<std::int64_t> gap(dense ? 0.5 : params.p());
    std::int64_t pos = dense ? 0 : gap(mask_rng);
    std::int64_t row = 0;
    while (pos < total) {
        const std::int64_t r = pos / n;
        while (row < r) m.row_ptr[++row] = static_cast<std::int64_t>(m.val.size());
        m.col.push_back(static_cast<std::int32_t>(pos - r * n));
        m.val.push_back(draw(value_rng));
        pos += dense ? 1 : 1 + gap(mask_rng);
    }
    while (row < count) m.row_ptr[++row] = static_cast<std::int64_t>(m.val.size());
    return s;
}

}  // namespace

SparseSample sample_matrix(const ModelParams& params, std::uint64_t seed) {
    return draw_rows(params, seed, params.rows());
}

SparseSample sample_leading_rows(const ModelParams& params, std::uint64_t seed, std::int64_t count) {
    if (count < 0 || count > params.rows()) throw ValidationError("row count out of range");
    return draw_rows(params, seed, count);
}

TruncationReport truncation_moments(const EntryDistribution& dist, double level) {
    const TailMoments tail = dist.tail_moments(level);
    TruncationReport r;
    r.level = level;
    // E X = 0, so E[X 1{|X| <= L}] = -E[X 1{|X| > L}]
    r.mean_truncated = -tail.first;
    const double var = 1.0 - tail.second - tail.first * tail.first;
    r.sigma_n = var > 0.0 ? std::sqrt(var) : 0.0;
    return r;
}

std::pair<SparseSample, TruncationReport> truncate_center_rescale(
    const SparseSample& sample, std::optional<double> level_override) {
    if (!sample.params) throw ValidationError("truncation needs a model sample");
    const ModelParams& params = *sample.params;
    if (!params.dist().has_moment_surplus()) {
        throw ValidationError("truncation pipeline needs a declared moment surplus delta > 0");
    }
    const double level = level_override.value_or(params.truncation_level());
    TruncationReport rep = truncation_moments(params.dist(), level);
    if (!(rep.sigma_n >= 1e-6)) {
        throw ValidationError("degenerate truncated variance: sigma_n = " +
                              std::to_string(rep.sigma_n) + " at level " + std::to_string(level));
    }
    const double d = params.dist().delta();
    rep.sigma_bound = 2.0 * params.dist().mu4d() /
                      (std::pow(params.trunc_a(), 2.0 + d) *
                       std::pow(params.mean_row_degree(), (2.0 + d) * (0.5 - params.kappa())));

    SparseSample out = sample;
    std::int64_t clipped = 0;
    const double m = rep.mean_truncated;
    const double inv_sigma = 1.0 / rep.sigma_n;
    for (double& v : out.matrix.val) {
        double t = v;
        if (std::abs(v) > level) {
            t = 0.0;
            ++clipped;
        }
        v = (t - m) * inv_sigma;
    }
    rep.frac_entries_clipped =
        sample.nnz() > 0 ? static_cast<double>(clipped) / static_cast<double>(sample.nnz()) : 0.0;
    return {std::move(out), rep};
}

double truncation_mean_norm_bound(const ModelParams& params) {
    if (!params.dist().has_moment_surplus()) {
        throw ValidationError("truncation bound needs a declared moment surplus delta > 0");
    }
    const double level = params.truncation_level();
    const double mean = truncation_moments(params.dist(), level).mean_truncated;
    return static_cast<double>(params.cols()) * params.p() * std::abs(mean);
}

}  // namespace dilute
