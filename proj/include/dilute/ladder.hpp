#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dilute {

/// The sparsity ladder p_0 = p, delta_0N = delta0 p / (1 + |ln p|),
/// p_nu = N p delta_{nu-1}, delta_nu = delta0 p_nu / (1 + |ln p_nu|), nu = 1..L,
/// together with the closed-form lower bounds
/// p^_nu = r^nu p, delta^_nu = r^{nu-1} delta0 p / (1 + |ln p|), r = delta0 N p / (1 + |ln p|).
struct LadderSchedule {
    std::int64_t N = 0;
    double p = 0.0;
    double delta0 = 0.0;
    double ratio = 0.0;  // r
    std::int64_t L = 0;
    std::vector<double> p_seq;
    std::vector<double> delta_seq;
    std::vector<double> p_hat_seq;
    std::vector<double> delta_hat_seq;
    double gamma0 = 0.0;  // delta_seq[L]
    double gamma1 = 0.0;  // p_seq[L]
};

/// r = delta0 N p / (1 + |ln p|).
double ladder_ratio(std::int64_t N, double p, double delta0);

/// True when N p^2 / (1 + |ln p|) > D, the regime handled without the ladder.
bool dense_branch_applies(std::int64_t N, double p, double D = 1.0);

/// The integer L with r^{L-1} <= 1/p <= r^L; the smaller one when 1/p is a power of r
/// to within 1e-12. Throws ValidationError unless r > 1.
std::int64_t compute_L(std::int64_t N, double p, double delta0);

/// Builds all sequences through nu = L and checks the domination and floor
/// properties; throws InternalError if any fails.
LadderSchedule build_schedule(std::int64_t N, double p, double delta0);

/// (delta_L, p_L).
std::pair<double, double> terminal_constants(const LadderSchedule& schedule);

/// L ln ln N / ln N, the constant in the L = O(ln N / ln ln N) growth.
double ladder_growth_constant(std::int64_t N, std::int64_t L);

}  // namespace dilute
