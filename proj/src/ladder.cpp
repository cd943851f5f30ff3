#include "dilute/ladder.hpp"

#include <cmath>
#include <string>

#include "dilute/errors.hpp"

namespace dilute {

namespace {

void check_inputs(std::int64_t N, double p, double delta0) {
    if (N < 2) throw ValidationError("ladder: N must be at least 2");
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("ladder: p must lie in (0, 1]");
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw ValidationError("ladder: delta0 must lie in (0, 1)");
}

double scaled(double delta0, double x) { return delta0 * x / (1.0 + std::abs(std::log(x))); }

}  // namespace

double ladder_ratio(std::int64_t N, double p, double delta0) {
    check_inputs(N, p, delta0);
    return delta0 * static_cast<double>(N) * p / (1.0 + std::abs(std::log(p)));
}

bool dense_branch_applies(std::int64_t N, double p, double D) {
    return static_cast<double>(N) * p * p / (1.0 + std::abs(std::log(p))) > D;
}

std::int64_t compute_L(std::int64_t N, double p, double delta0) {
    const double r = ladder_ratio(N, p, delta0);
    if (!(r > 1.0)) {
        throw ValidationError("ladder: delta0 N p / (1 + |ln p|) = " + std::to_string(r) +
                              " must exceed 1; outside this regime use the dense branch "
                              "(N p^2 / (1 + |ln p|) > D)");
    }
    if (p == 1.0) return 0;
    const double target = -std::log(p);  // ln(1/p) > 0
    const double lr = std::log(r);
    auto L = static_cast<std::int64_t>(std::ceil(target / lr));
    if (L < 1) L = 1;
    // 1/p = r^{L-1} up to rounding: both L-1 and L satisfy the display.
    if (L > 1 && std::abs(double(L - 1) * lr - target) <= 1e-12 * std::max(1.0, target)) --L;
    return L;
}

LadderSchedule build_schedule(std::int64_t N, double p, double delta0) {
    LadderSchedule s;
    s.N = N;
    s.p = p;
    s.delta0 = delta0;
    s.ratio = ladder_ratio(N, p, delta0);
    s.L = compute_L(N, p, delta0);
    const double np = static_cast<double>(N) * p;

    s.p_seq.push_back(p);
    s.delta_seq.push_back(scaled(delta0, p));
    s.p_hat_seq.push_back(p);
    s.delta_hat_seq.push_back(s.delta_seq[0] / s.ratio);
    for (std::int64_t nu = 1; nu <= s.L; ++nu) {
        s.p_seq.push_back(np * s.delta_seq[nu - 1]);
        s.delta_seq.push_back(scaled(delta0, s.p_seq[nu]));
        // p^_1 = N p delta_0N, evaluated exactly as p_1 so the nu = 1 case coincides bitwise.
        const double rpow = std::pow(s.ratio, double(nu - 1));
        s.p_hat_seq.push_back(rpow * (np * s.delta_seq[0]));
        s.delta_hat_seq.push_back(rpow * s.delta_seq[0]);
    }
    s.gamma0 = s.delta_seq.back();
    s.gamma1 = s.p_seq.back();

    for (std::int64_t nu = 1; nu <= s.L; ++nu) {
        const std::string at = " at nu = " + std::to_string(nu);
        if (!(s.p_seq[nu] >= s.p_hat_seq[nu])) throw InternalError("ladder: p_nu < p^_nu" + at);
        if (!(s.delta_seq[nu] >= s.delta_hat_seq[nu])) throw InternalError("ladder: delta_nu < delta^_nu" + at);
        if (!(s.p_seq[nu] >= p)) throw InternalError("ladder: p_nu < p" + at);
    }
    return s;
}

std::pair<double, double> terminal_constants(const LadderSchedule& schedule) {
    return {schedule.delta_seq.back(), schedule.p_seq.back()};
}

double ladder_growth_constant(std::int64_t N, std::int64_t L) {
    const double ln = std::log(static_cast<double>(N));
    return static_cast<double>(L) * std::log(ln) / ln;
}

}  // namespace dilute
