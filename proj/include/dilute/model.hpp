#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dilute/distribution.hpp"
#include "dilute/sparse.hpp"

namespace dilute {

/// Parameters of the dilute ensemble X = (xi_jk X_jk), N x n, P{xi = 1} = p.
class ModelParams {
public:
    /// Throws ValidationError unless 0 < n < N, p in (0, 1], trunc_a > 0.
    ModelParams(std::int64_t rows, std::int64_t cols, double p, EntryDistribution dist,
                double trunc_a = 1.0);

    std::int64_t rows() const noexcept { return rows_; }
    std::int64_t cols() const noexcept { return cols_; }
    double p() const noexcept { return p_; }
    double aspect() const noexcept { return static_cast<double>(cols_) / static_cast<double>(rows_); }
    const EntryDistribution& dist() const noexcept { return dist_; }
    double trunc_a() const noexcept { return trunc_a_; }

    /// kappa = delta / (2 (4 + delta)), always derived from the distribution.
    double kappa() const noexcept;
    /// N p
    double mean_row_degree() const noexcept { return static_cast<double>(rows_) * p_; }
    /// A (Np)^{1/2 - kappa} ln N
    double truncation_level() const noexcept;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    std::int64_t rows_;
    std::int64_t cols_;
    double p_;
    EntryDistribution dist_;
    double trunc_a_;
};

/// One realization of the ensemble (or a hand-built matrix when params is empty).
struct SparseSample {
    std::optional<ModelParams> params;
    std::uint64_t seed = 0;
    CsrMatrix matrix;

    std::int64_t rows() const noexcept { return matrix.rows; }
    std::int64_t cols() const noexcept { return matrix.cols; }
    std::int64_t nnz() const noexcept { return matrix.nnz(); }

    /// Wrap an explicit row-major dense matrix; exact zeros are not stored.
    static SparseSample from_dense(std::int64_t rows, std::int64_t cols, std::span<const double> a);
};

/// Draw the N x n sample for (params, seed). Mask gaps and entry values come
/// from separate substreams of seed; values are drawn for kept positions only.
/// Throws CapacityError if N * n does not fit the index range.
SparseSample sample_matrix(const ModelParams& params, std::uint64_t seed);

/// First `count` rows of the sample sample_matrix(params, seed) would produce,
/// without materializing the rest.
SparseSample sample_leading_rows(const ModelParams& params, std::uint64_t seed, std::int64_t count);

struct TruncationReport {
    double level = 0.0;           // truncation level used
    double mean_truncated = 0.0;  // E[X 1{|X| <= level}]
    double sigma_n = 1.0;         // sd of the truncated, centered entry
    double frac_entries_clipped = 0.0;  // share of stored entries with |X| > level
    /// 2 mu_{4+delta} / (A^{2+delta} (Np)^{(2+delta)(1/2-kappa)}); only meaningful for model samples.
    double sigma_bound = 0.0;
};

/// Truncated, centered and rescaled entries at the population level, for a given level.
TruncationReport truncation_moments(const EntryDistribution& dist, double level);

/// Replace every stored X by (X 1{|X| <= level} - m) / sigma_n. The mask is unchanged,
/// so centering acts on mask-on positions only. `level_override` replaces the
/// model's truncation level (tests use it to force an active truncation).
/// Requires delta > 0; throws ValidationError if sigma_n < 1e-6.
std::pair<SparseSample, TruncationReport> truncate_center_rescale(
    const SparseSample& sample, std::optional<double> level_override = std::nullopt);

/// || E X~ || = n p |E X~_11| for the truncated (uncentered) model.
double truncation_mean_norm_bound(const ModelParams& params);

}  // namespace dilute
