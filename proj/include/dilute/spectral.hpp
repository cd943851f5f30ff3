#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "dilute/dense_svd.hpp"
#include "dilute/model.hpp"

namespace dilute {

enum class SpectralMethod { DenseOracle, Lanczos, ShiftInvert };
std::string_view to_string(SpectralMethod method);

/// Extreme singular values and row/column norm extremes of one sample.
struct SpectralSummary {
    double s1 = 0.0;
    double sn = 0.0;  // 0 when the method does not resolve the bottom of the spectrum
    std::vector<double> full_spectrum;  // descending; empty unless the dense oracle ran
    double max_row_norm = 0.0;
    double max_col_norm = 0.0;
    SpectralMethod method = SpectralMethod::DenseOracle;
    std::int64_t iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

/// Largest N * n the dense oracle accepts.
inline constexpr std::int64_t kDenseGuard = 4'000'000;

/// Dense SVD of the sample (values, and right vectors on request). Enforces kDenseGuard.
DenseSvd dense_svd_of(const SparseSample& sample, bool want_vectors = false);

/// Full spectrum through the dense oracle. Throws CapacityError past the guard and
/// ConvergenceError if the bidiagonal QR stalls.
SpectralSummary dense_svd_oracle(const SparseSample& sample);

/// || X^T X v - s^2 v ||_2 for a unit vector v.
double gram_residual(const CsrMatrix& x, double s, std::span<const double> v);

/// s1 by Golub-Kahan-Lanczos; sn is left at 0.
SpectralSummary largest_sv_lanczos(const SparseSample& sample, double tol = 1e-8,
                                   std::int64_t max_iter = 300, std::uint64_t seed = 0);

/// sn from the dense oracle, cross-checked against ||X x|| for `probes` random unit
/// vectors. Throws InternalError if some probe falls below sn - 1e-8.
double smallest_sv(const SparseSample& sample, std::uint64_t probe_seed = 0, int probes = 100);

struct ShiftInvertResult {
    double sn = 0.0;
    std::int64_t iterations = 0;
    double residual = 0.0;     // relative residual of the inverse problem
    bool converged = false;
    bool rank_deficient = false;  // Cholesky of X^T X broke down; sn reported as 0
};

/// Largest N*n for which largest_sv_lanczos may switch to a dense copy of a well filled sample.
inline constexpr std::int64_t kDenseOperatorLimit = std::int64_t{1} << 25;

/// Largest n accepted by smallest_sv_shift_invert (the Gram matrix is n x n dense).
inline constexpr std::int64_t kShiftInvertGuard = 4096;

/// sn as 1 / s1(R^{-1}) where X^T X = R^T R, with the Gram product and Cholesky
/// factorization done by the parallel kernels. Scales past the dense guard.
ShiftInvertResult smallest_sv_shift_invert(const SparseSample& sample, double tol = 1e-8,
                                           std::int64_t max_iter = 300, std::uint64_t seed = 0);

/// (max row norm, max column norm) in one pass over the stored entries.
std::pair<double, double> row_col_norm_extremes(const SparseSample& sample);

struct SeginerReport {
    std::int64_t samples = 0;
    std::int64_t violations = 0;  // samples with max(row, col norm) > s1 beyond rounding
    double ratio = 0.0;           // mean(s1) / mean(max(row, col norm))
    double max_ratio = 10.0;
    bool passed = false;
};

/// Requires at least 30 summaries.
SeginerReport seginer_sandwich_check(std::span<const SpectralSummary> samples, double max_ratio = 10.0);

struct RowMomentReport {
    int q = 2;
    std::int64_t trials = 0;
    double estimate = 0.0;    // Monte Carlo mean of ||X_1.||^q
    double std_error = 0.0;
    double root_ratio = 0.0;  // estimate^{1/q} / sqrt(Np)
    double constant = 8.0;
    bool passed = false;
};

/// Monte Carlo E||X_1.||_2^q over independent first rows. When the law has a moment
/// surplus the rows go through truncate_center_rescale first.
/// Requires 2 <= q <= 2 ln max(n, N) and trials >= 100.
RowMomentReport row_norm_moment_check(const ModelParams& params, int q, std::int64_t trials,
                                      std::uint64_t seed, double constant = 8.0);

}  // namespace dilute
