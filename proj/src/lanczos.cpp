#include "dilute/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dilute/dense_svd.hpp"
#include "dilute/errors.hpp"
#include "dilute/kernels.hpp"
#include "dilute/rng.hpp"

namespace dilute {

CsrOperator::CsrOperator(const CsrMatrix& a) : a_(&a), at_(a.transpose()) {}

void CsrOperator::apply(std::span<const double> x, std::span<double> y) const {
    kernels::parallel::multiply(*a_, x, y);
}

void CsrOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
    kernels::parallel::multiply(at_, x, y);
}

DenseOperator::DenseOperator(const CsrMatrix& a)
    : rows_(a.rows), cols_(a.cols), a_(a.to_dense_row_major()) {}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
    kernels::parallel::dense_multiply(a_, rows_, cols_, x, y);
}

void DenseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
    kernels::parallel::dense_multiply_transpose(a_, rows_, cols_, x, y);
}

void InverseUpperOperator::apply(std::span<const double> x, std::span<double> y) const {
    std::copy(x.begin(), x.end(), y.begin());
    kernels::solve_upper(r_, n_, y);
}

void InverseUpperOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
    std::copy(x.begin(), x.end(), y.begin());
    kernels::solve_upper_transpose(r_, n_, y);
}

namespace {

double dot(const double* a, const double* b, std::int64_t n) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a.data(), a.data(), std::ssize(a))); }

// Two passes of classical Gram-Schmidt against the stored basis.
void reorthogonalize(std::vector<double>& w, const std::vector<double>& basis, std::int64_t count) {
    const auto len = std::ssize(w);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::int64_t j = 0; j < count; ++j) {
            const double* q = basis.data() + j * len;
            const double c = dot(q, w.data(), len);
            for (std::int64_t i = 0; i < len; ++i) w[i] -= c * q[i];
        }
    }
}

struct RitzPair {
    double theta = 0.0;
    std::vector<double> w;  // right singular vector of B
};

RitzPair top_ritz(const std::vector<double>& alpha, const std::vector<double>& beta, std::int64_t k) {
    std::vector<double> d(alpha.begin(), alpha.begin() + k);
    std::vector<double> e(beta.begin(), beta.begin() + (k - 1));
    std::vector<double> right(static_cast<std::size_t>(k * k), 0.0);
    for (std::int64_t i = 0; i < k; ++i) right[i * k + i] = 1.0;
    const auto values = bidiagonal_svd(std::move(d), std::move(e), right);
    RitzPair out;
    out.theta = values.front();
    out.w.assign(right.begin(), right.begin() + k);
    return out;
}

}  // namespace

LanczosResult largest_sv_lanczos(const LinearOperator& op, const LanczosOptions& options) {
    if (!(options.tol > 0.0)) throw ValidationError("lanczos: tol must be positive");
    if (options.max_iter < 1) throw ValidationError("lanczos: max_iter must be at least 1");
    const std::int64_t m = op.rows();
    const std::int64_t n = op.cols();
    LanczosResult result;
    result.right_vector.assign(n, 0.0);
    if (m == 0 || n == 0) {
        result.converged = true;
        return result;
    }
    const std::int64_t kmax = std::min<std::int64_t>(options.max_iter, n);

    std::vector<double> vbasis;
    std::vector<double> ubasis;
    vbasis.reserve(static_cast<std::size_t>(std::min<std::int64_t>(kmax + 1, 64) * n));
    ubasis.reserve(static_cast<std::size_t>(std::min<std::int64_t>(kmax, 64) * m));
    std::vector<double> alpha;
    std::vector<double> beta;

    std::vector<double> v(n);
    {
        Rng rng = make_rng(mix_seed(options.seed, stream::start_vector));
        std::normal_distribution<double> normal;
        for (auto& x : v) x = normal(rng);
        const double nv = norm(v);
        for (auto& x : v) x /= nv;
    }
    std::vector<double> u(m);
    std::vector<double> w(n);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(double(m + n));

    double scale = 0.0;
    RitzPair ritz;
    std::int64_t k = 0;
    bool exhausted = false;
    while (true) {
        // v holds v_{k+1}; extend U.
        vbasis.insert(vbasis.end(), v.begin(), v.end());
        op.apply(v, u);
        if (k > 0) {
            const double b = beta.back();
            const double* uprev = ubasis.data() + (k - 1) * m;
            for (std::int64_t i = 0; i < m; ++i) u[i] -= b * uprev[i];
        }
        reorthogonalize(u, ubasis, k);
        const double a = norm(u);
        scale = std::max(scale, a);
        alpha.push_back(a);
        ++k;
        if (a <= 1e-13 * scale || a == 0.0) {
            alpha.back() = 0.0;
            exhausted = true;
            break;
        }
        for (auto& x : u) x /= a;
        ubasis.insert(ubasis.end(), u.begin(), u.end());

        op.apply_transpose(u, w);
        for (std::int64_t i = 0; i < n; ++i) w[i] -= a * v[i];
        reorthogonalize(w, vbasis, k);
        const double b = norm(w);
        scale = std::max(scale, b);
        beta.push_back(b);
        if (b <= 1e-13 * scale || k >= n) {
            exhausted = true;
            break;
        }

        const bool check = k <= 64 || k % 4 == 0 || k >= kmax;
        if (check) {
            ritz = top_ritz(alpha, beta, k);
            const double estimate = ritz.theta > 0.0
                ? std::abs(b * a * ritz.w[k - 1]) / (ritz.theta * ritz.theta)
                : std::numeric_limits<double>::infinity();
            if (estimate <= options.tol || k >= kmax) break;
        }
        for (std::int64_t i = 0; i < n; ++i) v[i] = w[i] / b;
    }

    // B_k including a possibly zero trailing alpha; the beta that closed the loop is not part of it.
    ritz = top_ritz(alpha, beta, k);
    result.iterations = k;
    result.value = ritz.theta;
    for (std::int64_t j = 0; j < k; ++j) {
        const double c = ritz.w[j];
        const double* q = vbasis.data() + j * n;
        for (std::int64_t i = 0; i < n; ++i) result.right_vector[i] += c * q[i];
    }
    const double rn = norm(result.right_vector);
    if (rn > 0.0) {
        for (auto& x : result.right_vector) x /= rn;
    }
    if (result.value == 0.0) {
        result.residual = 0.0;
        result.converged = true;
        return result;
    }
    std::vector<double> y(m);
    op.apply(result.right_vector, y);
    op.apply_transpose(y, w);
    const double t2 = result.value * result.value;
    double r2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = w[i] - t2 * result.right_vector[i];
        r2 += d * d;
    }
    result.residual = std::sqrt(r2) / t2;
    result.converged = result.residual <= std::max(options.tol, floor) || exhausted;
    return result;
}

}  // namespace dilute
