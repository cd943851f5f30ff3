#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dilute/errors.hpp"
#include "dilute/lanczos.hpp"
#include "dilute/model.hpp"
#include "dilute/rng.hpp"
#include "dilute/spectral.hpp"
#include "dilute/stats.hpp"
#include "oracles.hpp"

using namespace dilute;

namespace {

SparseSample gaussian_sample(std::int64_t rows, std::int64_t cols, double p, std::uint64_t seed) {
    return sample_matrix(ModelParams(rows, cols, p, EntryDistribution::gaussian()), seed);
}

std::vector<double> unit_vector(std::int64_t n, Rng& rng) {
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    double s = 0.0;
    for (double& v : x) {
        v = g(rng);
        s += v * v;
    }
    for (double& v : x) v /= std::sqrt(s);
    return x;
}

double image_norm(const CsrMatrix& a, const std::vector<double>& x) {
    double s = 0.0;
    for (std::int64_t i = 0; i < a.rows; ++i) {
        double r = 0.0;
        const auto c = a.row_cols(i);
        const auto v = a.row_vals(i);
        for (std::size_t k = 0; k < c.size(); ++k) r += v[k] * x[c[k]];
        s += r * r;
    }
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("oracle on a diagonal matrix") {
    const std::vector<double> a = {1, 0, 0, 2, 0, 0};
    const auto s = dense_svd_oracle(SparseSample::from_dense(3, 2, a));
    REQUIRE(s.full_spectrum.size() == 2);
    CHECK(s.full_spectrum[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.full_spectrum[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.s1 == s.full_spectrum.front());
    CHECK(s.sn == s.full_spectrum.back());
    const auto [r, c] = row_col_norm_extremes(SparseSample::from_dense(3, 2, a));
    CHECK(r == 2.0);
    CHECK(c == 2.0);
}

TEST_CASE("oracle on a single column") {
    const std::vector<double> a = {3, 4};
    const auto s = dense_svd_oracle(SparseSample::from_dense(2, 1, a));
    CHECK(s.s1 == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(s.sn == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("row and column extremes of the all-ones matrix") {
    const std::vector<double> a(6, 1.0);
    const auto [r, c] = row_col_norm_extremes(SparseSample::from_dense(3, 2, a));
    CHECK(r == doctest::Approx(std::sqrt(2.0)));
    CHECK(c == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("oracle squared spectrum matches jacobi eigenvalues of the gram matrix") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto x = gaussian_sample(50, 30, seed == 1 ? 1.0 : 0.3, seed);
        const auto s = dense_svd_oracle(x);
        const auto ev = oracle::jacobi_eigenvalues(oracle::gram(x.matrix), 30);
        REQUIRE(s.full_spectrum.size() == 30);
        CHECK(std::is_sorted(s.full_spectrum.rbegin(), s.full_spectrum.rend()));
        for (int i = 0; i < 30; ++i) {
            const double sq = s.full_spectrum[i] * s.full_spectrum[i];
            CHECK(sq == doctest::Approx(std::max(ev[i], 0.0)).epsilon(1e-8).scale(1e-8 * ev[0]));
        }
    }
}

TEST_CASE("oracle right vectors satisfy the gram residual bound") {
    const auto x = gaussian_sample(120, 40, 0.2, 8);
    const DenseSvd d = dense_svd_of(x, true);
    const double s1 = d.values.front();
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        std::span<const double> v(d.right.data() + i * 40, 40);
        CHECK(gram_residual(x.matrix, d.values[i], v) <= 1e-8 * s1 * s1);
    }
}

TEST_CASE("bidiagonal svd of an identity-like bidiagonal") {
    std::vector<double> v(9, 0.0);
    v[0] = v[4] = v[8] = 1.0;
    const auto s = bidiagonal_svd({3.0, 2.0, 1.0}, {0.0, 0.0}, v);
    CHECK(s == std::vector<double>{3.0, 2.0, 1.0});
    // a 2x2 bidiagonal [[1,1],[0,1]] has singular values golden ratio and its inverse
    const auto g = bidiagonal_svd({1.0, 1.0}, {1.0}, {});
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(g[0] == doctest::Approx(phi).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(1.0 / phi).epsilon(1e-14));
}

TEST_CASE("oracle enforces the size guard") {
    const auto x = gaussian_sample(4001, 1000, 1e-4, 1);
    CHECK_THROWS_AS(dense_svd_oracle(x), CapacityError);
}

TEST_CASE("lanczos agrees with the oracle on random instances") {
    Rng rng = make_rng(99);
    std::uniform_int_distribution<int> rows(20, 400);
    std::uniform_real_distribution<double> pu(0.02, 1.0);
    int worst_iter = 0;
    for (int t = 0; t < 100; ++t) {
        const std::int64_t N = rows(rng);
        const std::int64_t n = std::uniform_int_distribution<std::int64_t>(1, std::min<std::int64_t>(N - 1, 100000 / N))(rng);
        const auto x = gaussian_sample(N, n, pu(rng), 1000 + t);
        const auto oracle = dense_svd_oracle(x);
        const auto lz = largest_sv_lanczos(x, 1e-8, 300, t);
        CHECK(lz.converged);
        CHECK(lz.method == SpectralMethod::Lanczos);
        CHECK(lz.sn == 0.0);
        CHECK(std::abs(lz.s1 - oracle.s1) <= 1e-6 * oracle.s1);
        worst_iter = std::max<int>(worst_iter, static_cast<int>(lz.iterations));
    }
    CHECK(worst_iter <= 300);
}

TEST_CASE("lanczos on a rank-one matrix") {
    const std::vector<double> u = {1, -2, 0.5, 3, 1};
    const std::vector<double> v = {2, 0, -1, 0.25};
    std::vector<double> a;
    for (double ui : u)
        for (double vj : v) a.push_back(ui * vj);
    const auto x = SparseSample::from_dense(5, 4, a);
    const auto lz = largest_sv_lanczos(x, 1e-10, 300, 3);
    double nu = 0.0, nv = 0.0;
    for (double ui : u) nu += ui * ui;
    for (double vj : v) nv += vj * vj;
    CHECK(lz.converged);
    CHECK(lz.iterations <= 2);
    CHECK(lz.s1 == doctest::Approx(std::sqrt(nu * nv)).epsilon(1e-12));
}

TEST_CASE("lanczos on the zero matrix") {
    const std::vector<double> a(12, 0.0);
    const auto x = SparseSample::from_dense(4, 3, a);
    CHECK(x.nnz() == 0);
    const auto lz = largest_sv_lanczos(x, 1e-8, 300, 0);
    CHECK(lz.s1 == 0.0);
    CHECK(lz.converged);
}

TEST_CASE("lanczos flags non-convergence at the iteration cap") {
    const auto x = gaussian_sample(300, 200, 1.0, 4);
    const auto lz = largest_sv_lanczos(x, 1e-14, 2, 0);
    CHECK_FALSE(lz.converged);
    CHECK(lz.iterations == 2);
    CHECK(lz.s1 > 0.0);
}

TEST_CASE("smallest singular value of an orthogonal-column matrix is one") {
    // 4x3 with orthonormal columns (a scaled Hadamard slice)
    const std::vector<double> h = {0.5, 0.5, 0.5, 0.5, -0.5, 0.5, 0.5, 0.5, -0.5, 0.5, -0.5, -0.5};
    const auto x = SparseSample::from_dense(4, 3, h);
    CHECK(smallest_sv(x, 1) == doctest::Approx(1.0).epsilon(1e-14));
    const auto si = smallest_sv_shift_invert(x, 1e-12, 300, 1);
    CHECK(si.sn == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("a zero column forces sn = 0") {
    auto x = gaussian_sample(60, 10, 1.0, 2);
    auto d = x.matrix.to_dense_row_major();
    for (int i = 0; i < 60; ++i) d[i * 10 + 7] = 0.0;
    const auto z = SparseSample::from_dense(60, 10, d);
    CHECK(smallest_sv(z, 3) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const auto si = smallest_sv_shift_invert(z);
    CHECK(si.rank_deficient);
    CHECK(si.sn == 0.0);
}

TEST_CASE("shift-invert matches the oracle's smallest singular value") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto x = gaussian_sample(400, 150, 0.2, seed);
        const auto oracle = dense_svd_oracle(x);
        const auto si = smallest_sv_shift_invert(x, 1e-10, 300, seed);
        CHECK(si.converged);
        CHECK_FALSE(si.rank_deficient);
        CHECK(si.sn == doctest::Approx(oracle.sn).epsilon(1e-7));
    }
}

TEST_CASE("images of unit vectors lie between sn and s1") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto x = gaussian_sample(200, 80, 0.15, seed);
        const auto s = dense_svd_oracle(x);
        Rng rng = make_rng(seed + 50);
        for (int t = 0; t < 1000; ++t) {
            const double v = image_norm(x.matrix, unit_vector(80, rng));
            CHECK(v >= s.sn - 1e-10);
            CHECK(v <= s.s1 + 1e-10);
        }
    }
}

TEST_CASE("scaling the entries scales the spectrum exactly") {
    const auto x = gaussian_sample(150, 60, 0.2, 12);
    SparseSample y = x;
    for (double& v : y.matrix.val) v *= 2.0;
    CHECK(y.matrix.col == x.matrix.col);
    const auto a = dense_svd_oracle(x).full_spectrum;
    const auto b = dense_svd_oracle(y).full_spectrum;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == 2.0 * a[i]);
}

TEST_CASE("row and column norms never exceed s1") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = gaussian_sample(300, 100, 0.05, seed);
        const auto s = dense_svd_oracle(x);
        CHECK(std::max(s.max_row_norm, s.max_col_norm) <= s.s1 + 1e-10);
    }
}

TEST_CASE("seginer ratio for sparse gaussian samples") {
    std::vector<SpectralSummary> runs;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) runs.push_back(dense_svd_oracle(gaussian_sample(400, 200, 0.1, seed)));
    const auto rep = seginer_sandwich_check(runs);
    CHECK(rep.violations == 0);
    CHECK(rep.ratio >= 1.0);
    CHECK(rep.ratio <= 10.0);
    CHECK(rep.passed);
    runs.pop_back();
    CHECK_THROWS_AS(seginer_sandwich_check(runs), ValidationError);
}

TEST_CASE("seginer ratio for dense rademacher samples") {
    std::vector<SpectralSummary> runs;
    const ModelParams params(200, 100, 1.0, EntryDistribution::rademacher());
    for (std::uint64_t seed = 1; seed <= 30; ++seed) runs.push_back(dense_svd_oracle(sample_matrix(params, seed)));
    const auto rep = seginer_sandwich_check(runs);
    CHECK(rep.violations == 0);
    CHECK(rep.passed);
}

TEST_CASE("second row moment equals n p") {
    const ModelParams params(500, 200, 0.05, EntryDistribution::gaussian());
    const auto rep = row_norm_moment_check(params, 2, 4000, 17);
    CHECK(std::abs(rep.estimate - 200 * 0.05) <= 3.0 * rep.std_error);
    CHECK(rep.passed);
}

TEST_CASE("fourth row moment against exhaustive enumeration") {
    const std::int64_t n = 3;
    const double p = 0.4;
    // enumerate masks and signs of a 3-entry rademacher row
    double exact = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        for (int sign = 0; sign < 8; ++sign) {
            double prob = 1.0 / 8.0;
            double sq = 0.0;
            for (int k = 0; k < n; ++k) {
                const bool on = mask >> k & 1;
                prob *= on ? p : 1.0 - p;
                if (on) sq += 1.0;  // (+-1)^2
            }
            exact += prob * sq * sq;
        }
    }
    const ModelParams params(10, n, p, EntryDistribution::rademacher());
    const auto rep = row_norm_moment_check(params, 4, 40000, 5);
    CHECK(std::abs(rep.estimate - exact) <= 3.0 * rep.std_error);
}

TEST_CASE("dense gaussian rows have second moment n") {
    const ModelParams params(100, 40, 1.0, EntryDistribution::gaussian());
    const auto rep = row_norm_moment_check(params, 2, 2000, 3);
    CHECK(std::abs(rep.estimate - 40.0) <= 3.0 * rep.std_error);
}

TEST_CASE("row moment order outside the admissible range is rejected") {
    const ModelParams params(10, 3, 0.5, EntryDistribution::rademacher());
    CHECK_THROWS_AS(row_norm_moment_check(params, 6, 1000, 1), ValidationError);
    CHECK_THROWS_AS(row_norm_moment_check(params, 1, 1000, 1), ValidationError);
    CHECK_THROWS_AS(row_norm_moment_check(params, 2, 99, 1), ValidationError);
}

TEST_CASE("smallest singular value at the marchenko-pastur edge" * doctest::timeout(600)) {
    std::vector<double> ratios;
    const ModelParams params(2000, 500, 1.0, EntryDistribution::gaussian());
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ratios.push_back(smallest_sv(sample_matrix(params, seed), seed) / std::sqrt(2000.0));
    }
    CHECK(median(ratios) == doctest::Approx(0.5).epsilon(0.08));
}
