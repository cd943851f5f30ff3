#include "dilute/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "dilute/errors.hpp"

namespace dilute::kernels {

namespace {

constexpr std::int64_t kGramBlock = 32;
constexpr std::int64_t kCholBlock = 64;
constexpr std::int64_t kNormChunks = 64;

void check_multiply(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    if (static_cast<std::int64_t>(x.size()) != a.cols ||
        static_cast<std::int64_t>(y.size()) != a.rows) {
        throw ValidationError("multiply: dimension mismatch");
    }
}

// Four independent partial sums break the add latency chain on long rows.
inline double row_dot(const CsrMatrix& a, std::int64_t i, const double* x) {
    const double* v = a.val.data();
    const std::int32_t* c = a.col.data();
    std::int64_t k = a.row_ptr[i];
    const std::int64_t end = a.row_ptr[i + 1];
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (; k + 4 <= end; k += 4) {
        s0 += v[k] * x[c[k]];
        s1 += v[k + 1] * x[c[k + 1]];
        s2 += v[k + 2] * x[c[k + 2]];
        s3 += v[k + 3] * x[c[k + 3]];
    }
    for (; k < end; ++k) s0 += v[k] * x[c[k]];
    return (s0 + s1) + (s2 + s3);
}

// Expand rows [r0, r1) of a into a dense row-major buffer with a.cols columns.
void expand_rows(const CsrMatrix& a, std::int64_t r0, std::int64_t r1, std::vector<double>& buf) {
    const auto n = a.cols;
    std::fill(buf.begin(), buf.begin() + (r1 - r0) * n, 0.0);
    for (std::int64_t r = r0; r < r1; ++r) {
        double* dst = buf.data() + (r - r0) * n;
        for (std::int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) dst[a.col[k]] = a.val[k];
    }
}

// G(i, i:n) += sum_{r in block} B(r, i) * B(r, i:n)
inline void gram_row_update(double* g_row, const double* block, std::int64_t rows_in_block,
                            std::int64_t i, std::int64_t n) {
    for (std::int64_t r = 0; r < rows_in_block; ++r) {
        const double* b = block + r * n;
        const double s = b[i];
        if (s == 0.0) continue;
#pragma omp simd
        for (std::int64_t j = i; j < n; ++j) g_row[j] += s * b[j];
    }
}

void check_gram(const CsrMatrix& a, std::span<double> g) {
    if (static_cast<std::int64_t>(g.size()) != a.cols * a.cols) {
        throw ValidationError("gram_upper: output must be cols x cols");
    }
}

// Factor rows [k0, k1) of the upper factor assuming contributions of rows < k0
// have already been subtracted from them.
std::int64_t factor_panel(double* g, std::int64_t n, std::int64_t k0, std::int64_t k1) {
    for (std::int64_t k = k0; k < k1; ++k) {
        double* rk = g + k * n;
        const double d = rk[k];
        if (!(d > 0.0) || !std::isfinite(d)) return k;
        const double piv = std::sqrt(d);
        rk[k] = piv;
        const double inv = 1.0 / piv;
        for (std::int64_t j = k + 1; j < n; ++j) rk[j] *= inv;
        for (std::int64_t i = k + 1; i < k1; ++i) {
            double* ri = g + i * n;
            const double s = rk[i];
#pragma omp simd
            for (std::int64_t j = i; j < n; ++j) ri[j] -= s * rk[j];
        }
    }
    return -1;
}

inline void trailing_row_update(double* g, std::int64_t n, std::int64_t k0, std::int64_t k1,
                                std::int64_t i) {
    double* ri = g + i * n;
    for (std::int64_t k = k0; k < k1; ++k) {
        const double* rk = g + k * n;
        const double s = rk[i];
#pragma omp simd
        for (std::int64_t j = i; j < n; ++j) ri[j] -= s * rk[j];
    }
}

void zero_lower(std::span<double> g, std::int64_t n) {
    for (std::int64_t i = 1; i < n; ++i) std::fill(g.begin() + i * n, g.begin() + i * n + i, 0.0);
}


void check_dense(std::span<const double> a, std::int64_t rows, std::int64_t cols, std::size_t x_size,
                 std::size_t y_size, std::int64_t want_x, std::int64_t want_y) {
    if (static_cast<std::int64_t>(a.size()) != rows * cols || static_cast<std::int64_t>(x_size) != want_x ||
        static_cast<std::int64_t>(y_size) != want_y) {
        throw ValidationError("dense multiply: dimension mismatch");
    }
}

inline double dense_row_dot(const double* row, const double* x, std::int64_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::int64_t k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += row[k] * x[k];
        s1 += row[k + 1] * x[k + 1];
        s2 += row[k + 2] * x[k + 2];
        s3 += row[k + 3] * x[k + 3];
    }
    for (; k < n; ++k) s0 += row[k] * x[k];
    return (s0 + s1) + (s2 + s3);
}

// y[j0:j1) = sum_i A(i, j0:j1) x_i, rows in increasing order.
inline void dense_columns_update(const double* a, std::int64_t rows, std::int64_t cols, const double* x,
                                 double* y, std::int64_t j0, std::int64_t j1) {
    std::fill(y + j0, y + j1, 0.0);
    for (std::int64_t i = 0; i < rows; ++i) {
        const double xi = x[i];
        const double* row = a + i * cols;
        for (std::int64_t j = j0; j < j1; ++j) y[j] += row[j] * xi;
    }
}

constexpr std::int64_t kDenseColBlock = 256;

}  // namespace

namespace serial {

void multiply(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    check_multiply(a, x, y);
    for (std::int64_t i = 0; i < a.rows; ++i) y[i] = row_dot(a, i, x.data());
}

RowColSqNorms row_col_sq_norms(const CsrMatrix& a) {
    RowColSqNorms out{std::vector<double>(a.rows, 0.0), std::vector<double>(a.cols, 0.0)};
    for (std::int64_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const double v2 = a.val[k] * a.val[k];
            s += v2;
            out.col[a.col[k]] += v2;
        }
        out.row[i] = s;
    }
    return out;
}

void gram_upper(const CsrMatrix& a, std::span<double> g) {
    check_gram(a, g);
    const auto n = a.cols;
    std::fill(g.begin(), g.end(), 0.0);
    std::vector<double> buf(static_cast<std::size_t>(kGramBlock * n));
    for (std::int64_t r0 = 0; r0 < a.rows; r0 += kGramBlock) {
        const auto r1 = std::min(a.rows, r0 + kGramBlock);
        expand_rows(a, r0, r1, buf);
        for (std::int64_t i = 0; i < n; ++i) gram_row_update(g.data() + i * n, buf.data(), r1 - r0, i, n);
    }
}

std::int64_t cholesky_upper(std::span<double> g, std::int64_t n) {
    if (static_cast<std::int64_t>(g.size()) != n * n) throw ValidationError("cholesky: size mismatch");
    for (std::int64_t k0 = 0; k0 < n; k0 += kCholBlock) {
        const auto k1 = std::min(n, k0 + kCholBlock);
        if (auto bad = factor_panel(g.data(), n, k0, k1); bad >= 0) return bad;
        for (std::int64_t i = k1; i < n; ++i) trailing_row_update(g.data(), n, k0, k1, i);
    }
    zero_lower(g, n);
    return -1;
}


void dense_multiply(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                    std::span<const double> x, std::span<double> y) {
    check_dense(a, rows, cols, x.size(), y.size(), cols, rows);
    for (std::int64_t i = 0; i < rows; ++i) y[i] = dense_row_dot(a.data() + i * cols, x.data(), cols);
}

void dense_multiply_transpose(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                              std::span<const double> x, std::span<double> y) {
    check_dense(a, rows, cols, x.size(), y.size(), rows, cols);
    for (std::int64_t j0 = 0; j0 < cols; j0 += kDenseColBlock) {
        dense_columns_update(a.data(), rows, cols, x.data(), y.data(), j0, std::min(cols, j0 + kDenseColBlock));
    }
}

}  // namespace serial

namespace parallel {

void multiply(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    check_multiply(a, x, y);
    const double* xp = x.data();
    double* yp = y.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < a.rows; ++i) yp[i] = row_dot(a, i, xp);
}

RowColSqNorms row_col_sq_norms(const CsrMatrix& a) {
    RowColSqNorms out{std::vector<double>(a.rows, 0.0), std::vector<double>(a.cols, 0.0)};
    const std::int64_t chunks = std::max<std::int64_t>(1, std::min(kNormChunks, a.rows));
    std::vector<double> partial(static_cast<std::size_t>(chunks * a.cols), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::int64_t i0 = a.rows * c / chunks;
        const std::int64_t i1 = a.rows * (c + 1) / chunks;
        double* cp = partial.data() + c * a.cols;
        for (std::int64_t i = i0; i < i1; ++i) {
            double s = 0.0;
            for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                const double v2 = a.val[k] * a.val[k];
                s += v2;
                cp[a.col[k]] += v2;
            }
            out.row[i] = s;
        }
    }
    for (std::int64_t c = 0; c < chunks; ++c) {
        const double* cp = partial.data() + c * a.cols;
        for (std::int64_t j = 0; j < a.cols; ++j) out.col[j] += cp[j];
    }
    return out;
}

void gram_upper(const CsrMatrix& a, std::span<double> g) {
    check_gram(a, g);
    const auto n = a.cols;
    std::fill(g.begin(), g.end(), 0.0);
    std::vector<double> buf(static_cast<std::size_t>(kGramBlock * n));
    for (std::int64_t r0 = 0; r0 < a.rows; r0 += kGramBlock) {
        const auto r1 = std::min(a.rows, r0 + kGramBlock);
        expand_rows(a, r0, r1, buf);
        double* gp = g.data();
        const double* bp = buf.data();
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) gram_row_update(gp + i * n, bp, r1 - r0, i, n);
    }
}

std::int64_t cholesky_upper(std::span<double> g, std::int64_t n) {
    if (static_cast<std::int64_t>(g.size()) != n * n) throw ValidationError("cholesky: size mismatch");
    double* gp = g.data();
    for (std::int64_t k0 = 0; k0 < n; k0 += kCholBlock) {
        const auto k1 = std::min(n, k0 + kCholBlock);
        if (auto bad = factor_panel(gp, n, k0, k1); bad >= 0) return bad;
#pragma omp parallel for schedule(dynamic, 8)
        for (std::int64_t i = k1; i < n; ++i) trailing_row_update(gp, n, k0, k1, i);
    }
    zero_lower(g, n);
    return -1;
}


void dense_multiply(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                    std::span<const double> x, std::span<double> y) {
    check_dense(a, rows, cols, x.size(), y.size(), cols, rows);
    const double* ap = a.data();
    const double* xp = x.data();
    double* yp = y.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) yp[i] = dense_row_dot(ap + i * cols, xp, cols);
}

void dense_multiply_transpose(std::span<const double> a, std::int64_t rows, std::int64_t cols,
                              std::span<const double> x, std::span<double> y) {
    check_dense(a, rows, cols, x.size(), y.size(), rows, cols);
    const double* ap = a.data();
    const double* xp = x.data();
    double* yp = y.data();
    const std::int64_t blocks = (cols + kDenseColBlock - 1) / kDenseColBlock;
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
        const std::int64_t j0 = b * kDenseColBlock;
        dense_columns_update(ap, rows, cols, xp, yp, j0, std::min(cols, j0 + kDenseColBlock));
    }
}

}  // namespace parallel

void solve_upper(std::span<const double> r, std::int64_t n, std::span<double> b) {
    for (std::int64_t i = n - 1; i >= 0; --i) {
        const double* ri = r.data() + i * n;
        double s = b[i];
        for (std::int64_t j = i + 1; j < n; ++j) s -= ri[j] * b[j];
        b[i] = s / ri[i];
    }
}

void solve_upper_transpose(std::span<const double> r, std::int64_t n, std::span<double> b) {
    // Column-oriented forward substitution: row i of R is column i of R^T.
    for (std::int64_t i = 0; i < n; ++i) {
        const double* ri = r.data() + i * n;
        const double xi = b[i] / ri[i];
        b[i] = xi;
#pragma omp simd
        for (std::int64_t j = i + 1; j < n; ++j) b[j] -= ri[j] * xi;
    }
}

int configured_threads() {
    if (const char* env = std::getenv("DILUTE_SPECTRA_THREADS"); env && *env) {
        try {
            const int t = std::stoi(env);
            if (t > 0) return t;
        } catch (const std::exception&) {
        }
        throw ValidationError("DILUTE_SPECTRA_THREADS must be a positive integer");
    }
    return omp_get_num_procs();
}

void apply_thread_setting() { omp_set_num_threads(configured_threads()); }

}  // namespace dilute::kernels
