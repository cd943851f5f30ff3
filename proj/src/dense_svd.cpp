#include "dilute/dense_svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dilute/errors.hpp"

namespace dilute {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Rotation {
    double c = 1.0;
    double s = 0.0;
    double r = 0.0;
};

// [c s] [a]   [r]
// [-s c][b] = [0]
inline Rotation make_rotation(double a, double b) {
    Rotation g;
    if (b == 0.0) {
        g.r = a;
        return g;
    }
    g.r = std::hypot(a, b);
    g.c = a / g.r;
    g.s = b / g.r;
    return g;
}

// (col_i, col_j) <- (c col_i + s col_j, -s col_i + c col_j)
inline void rotate_columns(std::span<double> v, std::int64_t k, std::int64_t i, std::int64_t j,
                           double c, double s) {
    if (v.empty()) return;
    double* vi = v.data() + i * k;
    double* vj = v.data() + j * k;
    for (std::int64_t t = 0; t < k; ++t) {
        const double a = vi[t];
        const double b = vj[t];
        vi[t] = c * a + s * b;
        vj[t] = -s * a + c * b;
    }
}

// One implicit-shift QR step on the unreduced block d[lo..hi], e[lo..hi-1].
void golub_kahan_step(std::vector<double>& d, std::vector<double>& e, std::int64_t lo,
                      std::int64_t hi, std::span<double> v, std::int64_t k) {
    // Wilkinson shift from the trailing 2x2 of B^T B.
    const double dm = d[hi - 1];
    const double dn = d[hi];
    const double em = e[hi - 1];
    const double el = hi - 1 > lo ? e[hi - 2] : 0.0;
    const double t11 = dm * dm + el * el;
    const double t22 = dn * dn + em * em;
    const double t12 = dm * em;
    const double half = 0.5 * (t11 - t22);
    const double root = std::hypot(half, t12);
    const double mu = half >= 0.0 ? t22 - t12 * t12 / (half + root)
                                  : t22 + t12 * t12 / (root - half);

    double y = d[lo] * d[lo] - mu;
    double z = d[lo] * e[lo];
    for (std::int64_t i = lo; i < hi; ++i) {
        Rotation g = make_rotation(y, z);
        if (i > lo) e[i - 1] = g.r;
        double f = g.c * d[i] + g.s * e[i];
        e[i] = -g.s * d[i] + g.c * e[i];
        double bulge = g.s * d[i + 1];
        d[i + 1] = g.c * d[i + 1];
        rotate_columns(v, k, i, i + 1, g.c, g.s);

        g = make_rotation(f, bulge);
        d[i] = g.r;
        f = g.c * e[i] + g.s * d[i + 1];
        d[i + 1] = -g.s * e[i] + g.c * d[i + 1];
        if (i + 1 < hi) {
            y = f;
            z = g.s * e[i + 1];
            e[i + 1] = g.c * e[i + 1];
        } else {
            e[i] = f;
        }
    }
}

// d[i] == 0 inside the block: chase e[i] to the right with left rotations (U only).
void chase_zero_diagonal_right(std::vector<double>& d, std::vector<double>& e, std::int64_t i,
                               std::int64_t hi) {
    double f = e[i];
    e[i] = 0.0;
    for (std::int64_t j = i + 1; j <= hi && f != 0.0; ++j) {
        const Rotation g = make_rotation(d[j], f);
        d[j] = g.r;
        if (j < hi) {
            f = -g.s * e[j];
            e[j] = g.c * e[j];
        }
    }
}

// d[hi] == 0: chase e[hi-1] upward with right rotations (touches V).
void chase_zero_diagonal_up(std::vector<double>& d, std::vector<double>& e, std::int64_t lo,
                            std::int64_t hi, std::span<double> v, std::int64_t k) {
    double f = e[hi - 1];
    e[hi - 1] = 0.0;
    for (std::int64_t j = hi - 1; j >= lo && f != 0.0; --j) {
        const Rotation g = make_rotation(d[j], f);
        d[j] = g.r;
        rotate_columns(v, k, j, hi, g.c, g.s);
        if (j > lo) {
            f = -g.s * e[j - 1];
            e[j - 1] = g.c * e[j - 1];
        }
    }
}

// Householder vector for x (length len, stride 1): on return x[0] = beta,
// x[1..] = v[1..] (v[0] = 1), result is tau. H = I - tau v v^T, H x = beta e1.
double householder(double* x, std::int64_t len) {
    if (len <= 1) return 0.0;
    double tail = 0.0;
    for (std::int64_t i = 1; i < len; ++i) tail += x[i] * x[i];
    if (tail == 0.0) return 0.0;
    const double alpha = x[0];
    const double norm = std::sqrt(alpha * alpha + tail);
    const double beta = alpha >= 0.0 ? -norm : norm;
    const double scale = 1.0 / (alpha - beta);
    for (std::int64_t i = 1; i < len; ++i) x[i] *= scale;
    x[0] = beta;
    return (beta - alpha) / beta;
}

void bidiagonalize(std::vector<double>& a, std::int64_t m, std::int64_t n, std::vector<double>& d,
                   std::vector<double>& e, std::vector<double>* v) {
    d.assign(n, 0.0);
    e.assign(n > 0 ? n - 1 : 0, 0.0);
    std::vector<double> right_tau(n, 0.0);
    std::vector<double> u(n);
    std::vector<double> w(m);
    auto at = [&](std::int64_t i, std::int64_t j) -> double& { return a[i + j * m]; };

    for (std::int64_t k = 0; k < n; ++k) {
        // Left reflector on column k, rows k..m-1.
        double* col = &at(k, k);
        const double tau = householder(col, m - k);
        d[k] = col[0];
        if (tau != 0.0) {
            const double beta = col[0];
            col[0] = 1.0;
#pragma omp parallel for schedule(static)
            for (std::int64_t j = k + 1; j < n; ++j) {
                double* cj = &at(k, j);
                double s = 0.0;
                for (std::int64_t i = 0; i < m - k; ++i) s += col[i] * cj[i];
                s *= tau;
                for (std::int64_t i = 0; i < m - k; ++i) cj[i] -= s * col[i];
            }
            col[0] = beta;
        }
        if (k + 1 >= n) break;

        // Right reflector on row k, columns k+1..n-1.
        const std::int64_t len = n - k - 1;
        for (std::int64_t j = 0; j < len; ++j) u[j] = at(k, k + 1 + j);
        const double rtau = householder(u.data(), len);
        e[k] = u[0];
        right_tau[k] = rtau;
        at(k, k + 1) = e[k];
        for (std::int64_t j = 1; j < len; ++j) at(k, k + 1 + j) = u[j];
        if (rtau != 0.0) {
            u[0] = 1.0;
            const std::int64_t r0 = k + 1;
            const std::int64_t rows = m - r0;
            // w = A(r0:, k+1:) u, then A(r0:, k+1:) -= tau w u^T; row blocks are independent.
            constexpr std::int64_t kRowBlock = 256;
#pragma omp parallel for schedule(static)
            for (std::int64_t b0 = 0; b0 < rows; b0 += kRowBlock) {
                const std::int64_t b1 = std::min(rows, b0 + kRowBlock);
                double* wb = w.data() + b0;
                std::fill(wb, wb + (b1 - b0), 0.0);
                for (std::int64_t j = 0; j < len; ++j) {
                    const double uj = u[j];
                    const double* cj = &at(r0 + b0, k + 1 + j);
                    for (std::int64_t i = 0; i < b1 - b0; ++i) wb[i] += cj[i] * uj;
                }
                for (std::int64_t i = 0; i < b1 - b0; ++i) wb[i] *= rtau;
                for (std::int64_t j = 0; j < len; ++j) {
                    const double uj = u[j];
                    double* cj = &at(r0 + b0, k + 1 + j);
                    for (std::int64_t i = 0; i < b1 - b0; ++i) cj[i] -= wb[i] * uj;
                }
            }
        }
    }

    if (v) {
        // V = P_0 P_1 ... P_{n-3}; accumulate backwards into the identity.
        v->assign(static_cast<std::size_t>(n * n), 0.0);
        for (std::int64_t i = 0; i < n; ++i) (*v)[i + i * n] = 1.0;
        for (std::int64_t k = n - 2; k >= 0; --k) {
            const double tau = right_tau[k];
            if (tau == 0.0) continue;
            const std::int64_t len = n - k - 1;
            u[0] = 1.0;
            for (std::int64_t j = 1; j < len; ++j) u[j] = at(k, k + 1 + j);
            // Rows k+1.. of V, columns k+1..: V <- (I - tau u u^T) V
            for (std::int64_t c = k + 1; c < n; ++c) {
                double* vc = v->data() + c * n + (k + 1);
                double s = 0.0;
                for (std::int64_t j = 0; j < len; ++j) s += u[j] * vc[j];
                s *= tau;
                for (std::int64_t j = 0; j < len; ++j) vc[j] -= s * u[j];
            }
        }
    }
}

}  // namespace

std::vector<double> bidiagonal_svd(std::vector<double> d, std::vector<double> e,
                                   std::span<double> right, std::int64_t* sweeps,
                                   std::int64_t max_sweeps) {
    const auto k = static_cast<std::int64_t>(d.size());
    if (k == 0) return {};
    if (static_cast<std::int64_t>(e.size()) != k - 1) throw ValidationError("bidiagonal_svd: e must have length k-1");
    if (!right.empty() && static_cast<std::int64_t>(right.size()) != k * k) {
        throw ValidationError("bidiagonal_svd: right must be k x k");
    }
    if (max_sweeps < 0) max_sweeps = 100 * std::max<std::int64_t>(k, 1);

    double anorm = 0.0;
    for (std::int64_t i = 0; i < k; ++i) {
        anorm = std::max(anorm, std::abs(d[i]) + (i + 1 < k ? std::abs(e[i]) : 0.0));
    }
    const double small = kEps * anorm;

    std::int64_t steps = 0;
    std::int64_t hi = k - 1;
    while (hi > 0) {
        for (std::int64_t i = 0; i < hi; ++i) {
            if (std::abs(e[i]) <= kEps * (std::abs(d[i]) + std::abs(d[i + 1])) ||
                std::abs(e[i]) <= std::numeric_limits<double>::min()) {
                e[i] = 0.0;
            }
        }
        if (e[hi - 1] == 0.0) {
            --hi;
            continue;
        }
        std::int64_t lo = hi - 1;
        while (lo > 0 && e[lo - 1] != 0.0) --lo;

        bool chased = false;
        for (std::int64_t i = lo; i <= hi; ++i) {
            if (std::abs(d[i]) <= small) {
                d[i] = 0.0;
                if (i < hi) {
                    chase_zero_diagonal_right(d, e, i, hi);
                } else {
                    chase_zero_diagonal_up(d, e, lo, hi, right, k);
                }
                chased = true;
                break;
            }
        }
        if (chased) continue;

        if (++steps > max_sweeps) {
            throw ConvergenceError("bidiagonal QR did not converge after " +
                                   std::to_string(max_sweeps) + " sweeps");
        }
        golub_kahan_step(d, e, lo, hi, right, k);
    }
    if (sweeps) *sweeps = steps;

    for (std::int64_t i = 0; i < k; ++i) {
        if (d[i] < 0.0) {
            d[i] = -d[i];
            if (!right.empty()) {
                for (std::int64_t t = 0; t < k; ++t) right[i * k + t] = -right[i * k + t];
            }
        }
    }
    std::vector<std::int64_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return d[x] > d[y]; });
    std::vector<double> values(k);
    for (std::int64_t i = 0; i < k; ++i) values[i] = d[order[i]];
    if (!right.empty()) {
        std::vector<double> sorted(right.begin(), right.end());
        for (std::int64_t i = 0; i < k; ++i) {
            std::copy_n(right.data() + order[i] * k, k, sorted.data() + i * k);
        }
        std::copy(sorted.begin(), sorted.end(), right.begin());
    }
    return values;
}

DenseSvd dense_svd(std::vector<double> a, std::int64_t rows, std::int64_t cols, bool want_vectors) {
    if (static_cast<std::int64_t>(a.size()) != rows * cols) throw ValidationError("dense_svd: size mismatch");
    DenseSvd out;
    if (rows == 0 || cols == 0) {
        out.values.assign(cols, 0.0);
        return out;
    }
    if (rows < cols) {
        if (want_vectors) throw ValidationError("dense_svd: right vectors need rows >= cols");
        std::vector<double> t(a.size());
        for (std::int64_t j = 0; j < cols; ++j) {
            for (std::int64_t i = 0; i < rows; ++i) t[j + i * cols] = a[i + j * rows];
        }
        DenseSvd sub = dense_svd(std::move(t), cols, rows, false);
        out.values = std::move(sub.values);
        out.values.resize(cols, 0.0);
        out.sweeps = sub.sweeps;
        return out;
    }
    std::vector<double> d;
    std::vector<double> e;
    std::vector<double> v;
    bidiagonalize(a, rows, cols, d, e, want_vectors ? &v : nullptr);
    out.values = bidiagonal_svd(std::move(d), std::move(e), v, &out.sweeps);
    out.right = std::move(v);
    return out;
}

}  // namespace dilute
