// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dilute/concentration.hpp"
#include "dilute/geometry.hpp"
#include "dilute/ladder.hpp"
#include "dilute/model.hpp"
#include "dilute/rng.hpp"
#include "dilute/spectral.hpp"
#include "dilute/stats.hpp"
#include "oracles.hpp"

using namespace dilute;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs f, appends its runtime and fails the outcome when it exceeds the budget.
template <class F>
void timed(Outcome& out, const std::string& label, double budget_s, F f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double s = seconds_since(t0);
    out.note(label + " " + fmt("%.1f s", s));
    out.require(s < budget_s, label + " over its " + fmt("%.0f s", budget_s) + " budget");
}

SparseSample gaussian_sample(std::int64_t rows, std::int64_t cols, double p, std::uint64_t seed) {
    return sample_matrix(ModelParams(rows, cols, p, EntryDistribution::gaussian()), seed);
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

const std::vector<std::int64_t> kRegimeGrid = {512, 1024, 2048, 4096};

double log_power_p(std::int64_t N, double B, double alpha) {
    return std::min(1.0, B * std::pow(std::log(double(N)), alpha) / double(N));
}

Outcome oracle_equivalences() {
    Outcome out;
    timed(out, "distance", 10.0, [&] {
        Rng rng = make_rng(101);
        int mismatches = 0;
        for (int t = 0; t < 500; ++t) {
            const std::int64_t n = 2 + t % 9;
            std::int64_t k = 0;
            double delta = 0.0;
            while (k == 0) {
                delta = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
                k = static_cast<std::int64_t>(std::floor(delta * n));
            }
            auto x = SphereVector::uniform(n, rng);
            std::vector<double> c(x.coords().begin(), x.coords().end());
            if (t % 5 == 0) {
                c[n - 1] = -c[0];
                x = SphereVector::normalized(c);
                c.assign(x.coords().begin(), x.coords().end());
            }
            mismatches += distance_to_sparse(x, delta).distance != oracle::brute_force_sparse_distance(c, k);
        }
        out.require(mismatches == 0, std::to_string(mismatches) + " distance mismatches");
    });
    timed(out, "levy", 10.0, [&] {
        Rng rng = make_rng(102);
        std::normal_distribution<double> g;
        std::uniform_int_distribution<int> size(2, 200);
        const double eps_set[] = {0.01, 0.2, 0.3, 1.0};
        int mismatches = 0;
        for (int t = 0; t < 500; ++t) {
            std::vector<double> s(size(rng));
            for (double& v : s) v = t % 3 == 0 ? std::round(3.0 * g(rng)) / 3.0 : g(rng);
            const double eps = t % 2 ? eps_set[t / 2 % 4] : std::uniform_real_distribution<double>(0.005, 1.5)(rng);
            mismatches += levy_concentration(s, eps).value != oracle::brute_force_levy(s, eps);
        }
        out.require(mismatches == 0, std::to_string(mismatches) + " levy mismatches");
    });
    timed(out, "jacobi", 30.0, [&] {
        Rng rng = make_rng(103);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto x = gaussian_sample(50, 30, std::uniform_real_distribution<double>(0.3, 1.0)(rng), 2000 + t);
            const auto s = dense_svd_oracle(x).full_spectrum;
            const auto ev = oracle::jacobi_eigenvalues(oracle::gram(x.matrix), 30);
            for (int i = 0; i < 30; ++i) worst = std::max(worst, std::abs(s[i] * s[i] - ev[i]) / ev[i]);
        }
        out.note("worst relative sigma^2 error " + fmt("%.2e", worst));
        out.require(worst <= 1e-8, "oracle disagrees with jacobi");
    });
    timed(out, "lanczos", 60.0, [&] {
        Rng rng = make_rng(104);
        std::uniform_int_distribution<std::int64_t> rows(20, 1000);
        double worst = 0.0;
        int nonconverged = 0;
        for (int t = 0; t < 100; ++t) {
            const std::int64_t N = rows(rng);
            const std::int64_t n = std::uniform_int_distribution<std::int64_t>(1, std::min<std::int64_t>(N - 1, 100000 / N))(rng);
            const auto x = gaussian_sample(N, n, std::uniform_real_distribution<double>(0.02, 1.0)(rng), 3000 + t);
            const double exact = dense_svd_oracle(x).s1;
            const auto lz = largest_sv_lanczos(x, 1e-8, 300, t);
            nonconverged += !lz.converged;
            worst = std::max(worst, std::abs(lz.s1 - exact) / exact);
        }
        out.note("worst relative s1 error " + fmt("%.2e", worst));
        out.require(worst <= 1e-6 && nonconverged == 0, "lanczos disagrees with the oracle");
    });
    return out;
}

Outcome deterministic_inequalities() {
    Outcome out;
    Rng rng = make_rng(201);
    int violations = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::int64_t N = std::uniform_int_distribution<std::int64_t>(10, 200)(rng);
        const std::int64_t n = std::uniform_int_distribution<std::int64_t>(1, N - 1)(rng);
        const auto x = gaussian_sample(N, n, std::uniform_real_distribution<double>(0.01, 1.0)(rng), 4000 + t);
        const auto s = dense_svd_oracle(x);
        violations += std::max(s.max_row_norm, s.max_col_norm) > s.s1 * (1.0 + 1e-10);
    }
    out.require(violations == 0, std::to_string(violations) + " norm violations");
    out.note("row/col norms vs s1 on 1000 samples");
    int outside = 0;
    std::normal_distribution<double> g;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = gaussian_sample(300, 120, 0.1, 5000 + seed);
        const auto s = dense_svd_oracle(x);
        for (int t = 0; t < 1000; ++t) {
            std::vector<double> v(120);
            double nrm = 0.0;
            for (double& c : v) {
                c = g(rng);
                nrm += c * c;
            }
            for (double& c : v) c /= std::sqrt(nrm);
            const double img = image_norm(x.matrix, v);
            outside += img < s.sn - 1e-10 * s.s1 || img > s.s1 * (1.0 + 1e-10);
        }
    }
    out.require(outside == 0, std::to_string(outside) + " images outside [sn, s1]");
    out.note("20000 images within [sn, s1]");
    return out;
}

Outcome ladder_certificates() {
    Outcome out;
    timed(out, "ladder grid", 5.0, [&] {
        int failures = 0;
        std::vector<double> gamma;
        for (int i = 0; i < 50; ++i) {
            // N = 2^11 .. 2^40, geometrically spaced
            const auto N = static_cast<std::int64_t>(std::llround(std::pow(2.0, 11.0 + 29.0 * i / 49.0)));
            const double p = log_power_p(N, 25.0, 2.0);
            const auto s = build_schedule(N, p, 0.1);
            const double r = s.ratio;
            bool ok = s.L >= 1 && std::pow(r, double(s.L - 1)) <= (1.0 / p) * (1.0 + 1e-12) &&
                      1.0 / p <= std::pow(r, double(s.L)) * (1.0 + 1e-12);
            for (std::int64_t nu = 1; nu <= s.L; ++nu) {
                ok = ok && s.p_seq[nu] >= s.p_hat_seq[nu] && s.delta_seq[nu] >= s.delta_hat_seq[nu] &&
                     s.p_seq[nu] >= p;
            }
            failures += !ok;
            gamma.push_back(std::min(s.gamma0, 1.0));
        }
        const double lo = *std::min_element(gamma.begin(), gamma.end());
        const double hi = *std::max_element(gamma.begin(), gamma.end());
        out.require(failures == 0, std::to_string(failures) + " grid points violate a certificate");
        out.note("min(delta_L, 1) ranges " + fmt("%.3g", lo) + " .. " + fmt("%.3g", hi));
        out.require(lo > 0.0 && hi / lo <= 10.0, "terminal delta unstable");
    });
    return out;
}

Outcome s1_regime() {
    Outcome out;
    timed(out, "grid", 600.0, [&] {
        for (std::size_t c = 0; c < kRegimeGrid.size(); ++c) {
            const std::int64_t N = kRegimeGrid[c];
            const ModelParams params(N, N / 2, log_power_p(N, 1.0, 6.0), EntryDistribution::gaussian(4.0));
            const TailRun r = tail_s1(params, 10.0, 200, mix_seed(401, c));
            out.require(r.estimate.hits == 0, "hits at N=" + std::to_string(N));
            out.require(r.estimate.ci.high <= 0.019, "upper bound above 0.019 at N=" + std::to_string(N));
            out.require(r.nonconverged == 0, "lanczos did not converge at N=" + std::to_string(N));
            if (N == kRegimeGrid.back()) {
                out.note("median at N=" + std::to_string(N) + " " + fmt("%.4f", r.median_ratio));
                out.require(std::abs(r.median_ratio - (1.0 + std::sqrt(0.5))) <= 0.15, "median off the edge");
            }
        }
    });
    return out;
}

Outcome sn_regime() {
    Outcome out;
    timed(out, "grid", 600.0, [&] {
        for (std::size_t c = 0; c < kRegimeGrid.size(); ++c) {
            const std::int64_t N = kRegimeGrid[c];
            const ModelParams params(N, N / 2, log_power_p(N, 25.0, 2.0), EntryDistribution::gaussian());
            const TailRun r = tail_sn(params, 0.05, 200, mix_seed(501, c), SnSolver::ShiftInvert);
            out.require(r.estimate.hits == 0, "hits at N=" + std::to_string(N));
            out.require(r.nonconverged == 0, "solver did not converge at N=" + std::to_string(N));
            if (N == 2048) {
                out.note("median at N=2048 " + fmt("%.4f", r.median_ratio));
                out.require(std::abs(r.median_ratio - (1.0 - std::sqrt(0.5))) <= 0.10, "median off the edge");
            }
        }
    });
    return out;
}

// sup_v P{|Y - v| <= eps} for a finite law; some optimal window has an atom at its left end.
double exact_levy(const std::vector<std::pair<double, double>>& atoms, double eps) {
    double best = 0.0;
    for (const auto& [a, pa] : atoms) {
        double mass = 0.0;
        for (const auto& [b, pb] : atoms) mass += (b >= a && b <= a + 2.0 * eps) ? pb : 0.0;
        best = std::max(best, mass);
    }
    return best;
}

Outcome concsingle_rademacher() {
    Outcome out;
    const double r = std::sqrt(2.0);
    const double exact = exact_levy({{-r, 0.25}, {0.0, 0.5}, {r, 0.25}}, 0.5);
    const auto rep = verify_lemma_concsingle(EntryDistribution::rademacher(), 0.5, 10000, 601);
    out.note("exact " + fmt("%.4f", exact) + ", bound " + fmt("%.4f", rep.bound) + ", estimate " +
             fmt("%.4f", rep.levy.value));
    out.require(exact == 0.5 && exact <= rep.bound, "exact value or bound wrong");
    out.require(std::abs(rep.bound - 0.9375) <= 1e-12, "bound is not 0.9375");
    out.require(std::abs(rep.levy.value - 0.5) <= 0.02, "estimate more than 0.02 from 0.5");
    return out;
}

Outcome chi_square_anchor() {
    Outcome out;
    for (std::int64_t N : {100, 400}) {
        const ModelParams params(N, 2, 1.0, EntryDistribution::gaussian());
        const boost::math::chi_squared_distribution<double> chi2{static_cast<double>(N)};
        int inside = 0;
        int k = 0;
        for (double z : {-1.5, -0.75, 0.0, 0.75, 1.5}) {
            const double tau = std::sqrt(1.0 + z * std::sqrt(2.0 / double(N)));
            const auto est = small_ball_fixed_vector(params, SphereVector::basis(2, 0), tau, 4000,
                                                     mix_seed(701, std::uint64_t(N * 10 + k++)));
            const double truth = boost::math::cdf(chi2, tau * tau * double(N));
            inside += est.ci.low <= truth && truth <= est.ci.high;
        }
        out.note("N=" + std::to_string(N) + " " + std::to_string(inside) + "/5");
        out.require(inside >= 4, "too few points inside at N=" + std::to_string(N));
    }
    return out;
}

Outcome decay_slopes() {
    Outcome out;
    const std::vector<std::int64_t> grid = {50, 100, 200, 400};
    auto judge = [&](const std::string& label, const DecayFit& fit) {
        out.note(label + " " + std::string(to_string(fit.status)) + " (min hits " + std::to_string(fit.min_hits) + ")");
        out.require(fit.status != DecayStatus::NotDecreasing, label + " not decreasing");
    };
    const ScalarSampler gaussian = [](Rng& rng) { return std::normal_distribution<double>()(rng); };
    judge("tensorization", verify_tensorization(gaussian, 1.0, 0.31731050786291415, grid, 20000, 801, 2.5).fit);

    std::vector<TailEstimate> cells;
    std::vector<double> xs;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::int64_t N = grid[g];
        const ModelParams params(N, N / 2, 0.5, EntryDistribution::gaussian());
        cells.push_back(small_ball_fixed_vector(params, SphereVector::basis(N / 2, 0), 0.9, 5000, mix_seed(802, g)));
        xs.push_back(params.mean_row_degree());
    }
    judge("small ball", fit_log_decay(xs, cells));
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility() {
    Outcome out;
    const fs::path dir = fs::temp_directory_path() / "dilute_acceptance";
    fs::create_directories(dir);
    std::string csv[2];
    for (int i = 0; i < 2; ++i) {
        const fs::path path = dir / ("run" + std::to_string(i) + ".csv");
        fs::remove(path);
        const std::string cmd = std::string(DILUTE_CLI) + " verify-all --config " + DILUTE_SMOKE_CONFIG +
                                " --out " + path.string() + " > " + (dir / "cli.log").string() + " 2>&1";
        const int rc = std::system(cmd.c_str());
        const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        out.require(code == 0 || code == 2, "verify-all exited with " + std::to_string(code));
        csv[i] = slurp(path);
    }
    out.require(!csv[0].empty(), "empty output");
    out.require(csv[0] == csv[1], "outputs differ");
    out.note(std::to_string(std::count(csv[0].begin(), csv[0].end(), '\n')) + " lines, byte-identical");
    return out;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "exact-oracle equivalences", oracle_equivalences},
        {2, "deterministic inequalities", deterministic_inequalities},
        {3, "ladder certificates", ladder_certificates},
        {4, "largest singular value regime", s1_regime},
        {5, "smallest singular value regime", sn_regime},
        {6, "single-entry concentration for rademacher", concsingle_rademacher},
        {7, "small-ball chi-square anchor", chi_square_anchor},
        {8, "exponential decay", decay_slopes},
        {9, "verify-all reproducibility", reproducibility},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::printf("criterion %d %s: %s (%s) [%.1f s]\n", c.id, c.title, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
