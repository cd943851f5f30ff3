#pragma once

// Data-parallel kernels over CSR and dense symmetric storage.
//
// Every kernel has a straightforward serial reference in kernels::serial and an
// OpenMP version in kernels::parallel. Unless noted, the parallel version
// performs the same floating-point operations in the same order per output
// element, so results are bitwise identical to the reference for any thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "dilute/sparse.hpp"

namespace dilute::kernels {

struct RowColSqNorms {
    std::vector<double> row;  // squared Euclidean norm of each row
    std::vector<double> col;  // squared Euclidean norm of each column
};

namespace serial {

/// y = A x
void multiply(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
/// Squared row and column norms in one sweep over the stored entries.
RowColSqNorms row_col_sq_norms(const CsrMatrix& a);
/// Upper triangle of A^T A into g (cols x cols, row-major). The strict lower triangle is zeroed.
void gram_upper(const CsrMatrix& a, std::span<double> g);
/// In-place upper Cholesky g = R^T R on the upper triangle of an n x n row-major matrix.
/// Returns -1 on success or the index of the first non-positive pivot.
std::int64_t cholesky_upper(std::span<double> g, std::int64_t n);
/// y = A x for a dense row-major rows x cols array.
void dense_multiply(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                    std::span<const double> x, std::span<double> y);
/// y = A^T x for a dense row-major rows x cols array; each y_j accumulates in row order.
void dense_multiply_transpose(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                              std::span<const double> x, std::span<double> y);

}  // namespace serial

namespace parallel {

void multiply(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
/// Column sums are accumulated in fixed row chunks and combined in chunk order:
/// deterministic for any thread count, but may differ from the serial result in the last bits.
RowColSqNorms row_col_sq_norms(const CsrMatrix& a);
void gram_upper(const CsrMatrix& a, std::span<double> g);
std::int64_t cholesky_upper(std::span<double> g, std::int64_t n);
void dense_multiply(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                    std::span<const double> x, std::span<double> y);
/// Parallel over column blocks.
void dense_multiply_transpose(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                              std::span<const double> x, std::span<double> y);

}  // namespace parallel

/// Solve R x = b in place (R upper triangular, row-major n x n).
void solve_upper(std::span<const double> r, std::int64_t n, std::span<double> b);
/// Solve R^T x = b in place.
void solve_upper_transpose(std::span<const double> r, std::int64_t n, std::span<double> b);

/// Worker count from DILUTE_SPECTRA_THREADS, falling back to the number of logical cores.
int configured_threads();
void apply_thread_setting();

}  // namespace dilute::kernels
