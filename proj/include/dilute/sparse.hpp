#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dilute {

/// Compressed sparse row storage: per-row lists of (column, value), flattened.
/// Column indices within a row are strictly increasing.
struct CsrMatrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> col;
    std::vector<double> val;

    std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(val.size()); }

    std::span<const std::int32_t> row_cols(std::int64_t i) const noexcept {
        return {col.data() + row_ptr[i], static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
    }
    std::span<const double> row_vals(std::int64_t i) const noexcept {
        return {val.data() + row_ptr[i], static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
    }

    /// Build from a row-major dense array, dropping exact zeros.
    static CsrMatrix from_dense(std::int64_t rows, std::int64_t cols, std::span<const double> a);
    /// Column-major dense copy (rows x cols), the layout the dense oracle works on.
    std::vector<double> to_dense_col_major() const;
    /// Row-major dense copy.
    std::vector<double> to_dense_row_major() const;
    CsrMatrix transpose() const;
    double frobenius_norm() const;

    /// Structural and ordering checks; throws InternalError on violation.
    void validate() const;

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

}  // namespace dilute
