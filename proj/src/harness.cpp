#include "dilute/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "dilute/concentration.hpp"
#include "dilute/errors.hpp"
#include "dilute/geometry.hpp"
#include "dilute/ladder.hpp"
#include "dilute/model.hpp"
#include "dilute/spectral.hpp"

namespace dilute {

bool RunResult::partial_failure() const {
    for (const auto& r : rows) {
        if (r.status == status::failed || r.status == status::error) return true;
    }
    return false;
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::int64_t index) {
    return mix_seed(master_seed, static_cast<std::uint64_t>(index));
}

namespace {

// Fixed parameters of the global decay checks in verify-all and concentration mode.
const std::vector<std::int64_t> kDecayGrid{50, 100, 200, 400};
constexpr double kGaussianOutsideOne = 0.31731050786291415;  // P{|g| > 1}
constexpr double kTensorC = 2.5;
constexpr double kSmallBallP = 0.5;
constexpr double kSmallBallTau = 0.9;

class Recorder {
public:
    Recorder(const ExperimentConfig& cfg, RunResult& res, std::string mode)
        : cfg_(cfg), res_(res), mode_(std::move(mode)) {}

    void at(const Cell& cell, std::uint64_t seed) {
        cell_ = cell;
        seed_ = seed;
    }

    void add(const std::string& metric, std::optional<double> value, std::int64_t trials,
             const std::string& st = status::ok, std::optional<double> lo = std::nullopt,
             std::optional<double> hi = std::nullopt) {
        CsvRow r;
        r.mode = mode_;
        r.cell = cell_.index;
        r.N = cell_.N;
        r.n = cell_.n;
        r.p = cell_.p;
        r.metric = metric;
        r.value = value;
        r.ci_low = lo;
        r.ci_high = hi;
        r.trials = trials;
        r.seed = seed_;
        r.status = st;
        res_.rows.push_back(std::move(r));
    }

    void add_tail(const std::string& metric, const TailEstimate& t, const std::string& st = status::ok) {
        add(metric, t.p_hat, t.trials, st, t.ci.low, t.ci.high);
        add(metric + "_hits", static_cast<double>(t.hits), t.trials, status::info);
    }

    // Runs f, timing it; recoverable errors become an error row named after the block.
    template <class F>
    void block(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            f();
        } catch (const InternalError&) {
            throw;
        } catch (const std::exception& e) {
            add(name, std::nullopt, 0, status::error);
            res_.warnings.push_back(mode_ + " cell " + std::to_string(cell_.index) + " " + name + ": " + e.what());
            std::cerr << "error: " << res_.warnings.back() << "\n";
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res_.timings.push_back({cell_.index, name, s});
    }

    const ExperimentConfig& cfg() const { return cfg_; }
    RunResult& result() { return res_; }
    const Cell& cell() const { return cell_; }
    std::uint64_t seed() const { return seed_; }

private:
    const ExperimentConfig& cfg_;
    RunResult& res_;
    std::string mode_;
    Cell cell_;
    std::uint64_t seed_ = 0;
};

ModelParams params_for(const ExperimentConfig& cfg, const Cell& cell) {
    return ModelParams(cell.N, cell.n, cell.p, cfg.dist.build(), cfg.trunc_A);
}

const char* pass(bool ok) { return ok ? status::ok : status::failed; }

void run_sample(Recorder& rec) {
    const auto& cfg = rec.cfg();
    rec.block("sample", [&] {
        const ModelParams params = params_for(cfg, rec.cell());
        const SparseSample s = sample_matrix(params, rec.seed());
        rec.add("nnz", static_cast<double>(s.nnz()), 1);
        rec.add("nnz_expected", static_cast<double>(params.rows()) * params.cols() * params.p(), 1, status::info);
        rec.add("truncation_level", params.truncation_level(), 1, status::info);
        if (params.dist().has_moment_surplus()) {
            const auto [out, report] = truncate_center_rescale(s);
            rec.add("sigma_n", report.sigma_n, 1);
            rec.add("mean_truncated", report.mean_truncated, 1, status::info);
            rec.add("frac_entries_clipped", report.frac_entries_clipped, 1, status::info);
            rec.add("sigma_bound_check", std::abs(1.0 - report.sigma_n * report.sigma_n), 1,
                    pass(std::abs(1.0 - report.sigma_n * report.sigma_n) <= report.sigma_bound + 1e-12),
                    std::nullopt, report.sigma_bound);
            rec.add("mean_norm_bound", truncation_mean_norm_bound(params), 1, status::info);
        }
    });
}

void run_spectrum(Recorder& rec) {
    const auto& cfg = rec.cfg();
    rec.block("spectrum", [&] {
        const ModelParams params = params_for(cfg, rec.cell());
        const SparseSample s = sample_matrix(params, rec.seed());
        const double root = std::sqrt(params.mean_row_degree());
        const SpectralSummary top = largest_sv_lanczos(s, cfg.lanczos_tol, 300, rec.seed());
        rec.add("s1", top.s1, 1, top.converged ? status::ok : status::failed);
        rec.add("s1_ratio", top.s1 / root, 1, status::info);
        rec.add("s1_iterations", static_cast<double>(top.iterations), 1, status::info);
        rec.add("s1_residual", top.residual, 1, status::info);
        rec.add("max_row_norm", top.max_row_norm, 1, status::info);
        rec.add("max_col_norm", top.max_col_norm, 1, status::info);
        const double m = std::max(top.max_row_norm, top.max_col_norm);
        rec.add("norm_sandwich_lower", m / top.s1, 1, pass(m <= top.s1 * (1.0 + cfg.lanczos_tol) + 1e-10));
        double sn = 0.0;
        if (cfg.sn_solver == "dense") {
            sn = dense_svd_oracle(s).sn;
        } else {
            const ShiftInvertResult r = smallest_sv_shift_invert(s, cfg.lanczos_tol, 300, rec.seed());
            sn = r.sn;
            rec.add("sn_rank_deficient", r.rank_deficient ? 1.0 : 0.0, 1, status::info);
        }
        rec.add("sn", sn, 1);
        rec.add("sn_ratio", sn / root, 1, status::info);
    });
}

void run_ladder(Recorder& rec) {
    const auto& cfg = rec.cfg();
    rec.block("ladder", [&] {
        const Cell& cell = rec.cell();
        rec.add("ladder_ratio", ladder_ratio(cell.N, cell.p, cfg.delta0), 0, status::info);
        const LadderSchedule s = build_schedule(cell.N, cell.p, cfg.delta0);
        rec.add("L", static_cast<double>(s.L), 0);
        rec.add("gamma0", s.gamma0, 0);
        rec.add("gamma1", s.gamma1, 0);
        rec.add("growth_constant", ladder_growth_constant(cell.N, s.L), 0, status::info);
        std::ostringstream t;
        char line[160];
        std::snprintf(line, sizeof line, "N = %lld  p = %.6g  delta0 = %.6g  r = %.6g  L = %lld\n",
                      static_cast<long long>(s.N), s.p, s.delta0, s.ratio, static_cast<long long>(s.L));
        t << line;
        std::snprintf(line, sizeof line, "%4s %14s %14s %14s %14s\n", "nu", "p_nu", "delta_nu", "p_hat_nu",
                      "delta_hat_nu");
        t << line;
        for (std::int64_t nu = 0; nu <= s.L; ++nu) {
            const std::string k = "[" + std::to_string(nu) + "]";
            rec.add("p_nu" + k, s.p_seq[nu], 0);
            rec.add("delta_nu" + k, s.delta_seq[nu], 0);
            rec.add("p_hat_nu" + k, s.p_hat_seq[nu], 0);
            rec.add("delta_hat_nu" + k, s.delta_hat_seq[nu], 0);
            std::snprintf(line, sizeof line, "%4lld %14.6g %14.6g %14.6g %14.6g\n", static_cast<long long>(nu),
                          s.p_seq[nu], s.delta_seq[nu], s.p_hat_seq[nu], s.delta_hat_seq[nu]);
            t << line;
        }
        rec.result().report += t.str();
    });
}

void run_tail_s1(Recorder& rec, std::int64_t trials, bool assert_zero) {
    const auto& cfg = rec.cfg();
    rec.block("tail_s1", [&] {
        const ModelParams params = params_for(cfg, rec.cell());
        const TailRun r = tail_s1(params, cfg.K, trials, rec.seed(), cfg.lanczos_tol);
        rec.add_tail("tail_s1", r.estimate, assert_zero ? pass(r.estimate.hits == 0) : status::ok);
        rec.add("s1_median_ratio", r.median_ratio, trials, status::info);
        rec.add("s1_edge_reference", 1.0 + std::sqrt(params.aspect()), trials, status::info);
        rec.add("s1_nonconverged", static_cast<double>(r.nonconverged), trials,
                r.nonconverged == 0 ? status::ok : status::failed);
    });
}

void run_tail_sn(Recorder& rec, std::int64_t trials, bool assert_zero) {
    const auto& cfg = rec.cfg();
    rec.block("tail_sn", [&] {
        const ModelParams params = params_for(cfg, rec.cell());
        const SnSolver solver = cfg.sn_solver == "dense" ? SnSolver::Dense : SnSolver::ShiftInvert;
        const TailRun r = tail_sn(params, cfg.tau, trials, rec.seed(), solver, cfg.lanczos_tol);
        rec.add_tail("tail_sn", r.estimate, assert_zero ? pass(r.estimate.hits == 0) : status::ok);
        rec.add("sn_median_ratio", r.median_ratio, trials, status::info);
        rec.add("sn_edge_reference", 1.0 - std::sqrt(params.aspect()), trials, status::info);
        rec.add("sn_nonconverged", static_cast<double>(r.nonconverged), trials,
                r.nonconverged == 0 ? status::ok : status::failed);
        rec.add("sn_rank_deficient", static_cast<double>(r.rank_deficient), trials, status::info);
    });
}

void run_concentration_cell(Recorder& rec) {
    const auto& cfg = rec.cfg();
    const Cell& cell = rec.cell();
    rec.block("concsingle", [&] {
        const std::int64_t trials = std::max<std::int64_t>(cfg.trials, 10000);
        const ConcsingleReport r = verify_lemma_concsingle(cfg.dist.build(), cell.p, trials, mix_seed(rec.seed(), 1));
        rec.add("concsingle_levy", r.levy.value, trials, pass(r.passed), r.levy.value - r.levy.ci_halfwidth,
                r.levy.value + r.levy.ci_halfwidth);
        rec.add("concsingle_bound", r.bound, trials, status::info);
    });
    rec.block("concentr", [&] {
        const ModelParams params = params_for(cfg, cell);
        const LadderSchedule s = build_schedule(cell.N, cell.p, cfg.delta0);
        if (s.L < 1) {
            rec.add("concentr_skipped_dense", 0.0, 0, status::info);
            return;
        }
        const std::int64_t trials = std::max<std::int64_t>(cfg.trials, 2000);
        std::vector<std::int64_t> levels{1};
        if (s.L > 1) levels.push_back(s.L);
        for (auto nu : levels) {
            const ConcentrReport r = verify_lemma_concentr(params, s, nu, cfg.rho, trials, mix_seed(rec.seed(), 2 + nu));
            const std::string k = "[" + std::to_string(nu) + "]";
            rec.add("concentr_gap" + k, r.gap, trials, pass(r.passed), r.gap_lower, r.gap + r.levy.ci_halfwidth);
            rec.add("concentr_constant" + k, r.fitted_constant, trials, status::info);
        }
    });
    rec.block("small_ball", [&] {
        const ModelParams params = params_for(cfg, cell);
        const std::int64_t trials = std::max<std::int64_t>(cfg.trials, 1000);
        const SphereVector x = sample_incompressible(cell.n, {0.1, cfg.rho}, mix_seed(rec.seed(), 100));
        const TailEstimate t = small_ball_fixed_vector(params, x, cfg.tau, trials, mix_seed(rec.seed(), 101));
        rec.add_tail("small_ball", t, status::ok);
        const EnvelopeReport e =
            lemma_new_envelope(params, x, cfg.rho, cfg.rho / 4.0, trials, mix_seed(rec.seed(), 101));
        rec.add("lemma_new_envelope", e.envelope, trials,
                e.vacuous ? status::vacuous : pass(e.consistent), e.estimate.ci.low, e.estimate.ci.high);
    });
    rec.block("tau0", [&] {
        const double y = static_cast<double>(cell.n) / static_cast<double>(cell.N);
        rec.add("tau0_reference", tau0_reference(cfg.rho, y, cfg.K), 0, status::info);
        const Tau0Coupling c = tau0_coupled(y, cfg.K);
        rec.add("tau0_coupled", c.tau0, 0, status::info);
        rec.add("rho0_coupled", c.rho0, 0, c.consistent ? status::info : status::vacuous);
    });
}

void run_decay_checks(Recorder& rec, std::int64_t trials) {
    const auto& cfg = rec.cfg();
    Cell global;
    global.index = -1;
    rec.at(global, cell_seed(cfg.master_seed, 1u << 20));
    rec.block("tensorization", [&] {
        const ScalarSampler gaussian = [](Rng& rng) { return std::normal_distribution<double>()(rng); };
        const TensorizationReport r =
            verify_tensorization(gaussian, 1.0, kGaussianOutsideOne, kDecayGrid, trials, rec.seed(), kTensorC);
        for (std::size_t g = 0; g < r.grid.size(); ++g) {
            rec.add_tail("tensorization[N=" + std::to_string(r.grid[g]) + "]", r.cells[g], status::info);
        }
        const char* st = r.fit.status == DecayStatus::Censored ? status::censored
                                                              : pass(r.fit.status == DecayStatus::Decreasing);
        rec.add("tensorization_decay_slope", r.fit.slope, trials, st);
    });
    rec.block("small_ball_decay", [&] {
        std::vector<TailEstimate> cells;
        std::vector<double> xs;
        for (std::size_t g = 0; g < kDecayGrid.size(); ++g) {
            const std::int64_t N = kDecayGrid[g];
            const ModelParams params(N, N / 2, kSmallBallP, EntryDistribution::gaussian());
            const std::uint64_t s = mix_seed(rec.seed(), 10 + g);
            const SphereVector x = SphereVector::basis(N / 2, 0);
            cells.push_back(small_ball_fixed_vector(params, x, kSmallBallTau, std::max<std::int64_t>(trials, 1000), s));
            xs.push_back(params.mean_row_degree());
            rec.add_tail("small_ball[N=" + std::to_string(N) + "]", cells.back(), status::info);
        }
        const DecayFit fit = fit_log_decay(xs, cells);
        const char* st = fit.status == DecayStatus::Censored ? status::censored
                                                            : pass(fit.status == DecayStatus::Decreasing);
        rec.add("small_ball_decay_slope", fit.slope, std::max<std::int64_t>(trials, 1000), st);
    });
}

void run_verify_cell(Recorder& rec) {
    const auto& cfg = rec.cfg();
    const Cell& cell = rec.cell();
    run_ladder(rec);
    run_sample(rec);
    rec.block("seginer", [&] {
        const ModelParams params = params_for(cfg, cell);
        const std::int64_t count = std::max<std::int64_t>(30, std::min<std::int64_t>(cfg.trials, 100));
        std::vector<SpectralSummary> sums(count);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t t = 0; t < count; ++t) {
            const std::uint64_t ts = mix_seed(rec.seed(), 500 + t);
            sums[t] = largest_sv_lanczos(sample_matrix(params, ts), 1e-10, 300, ts);
        }
        const SeginerReport r = seginer_sandwich_check(sums);
        rec.add("seginer_violations", static_cast<double>(r.violations), count, pass(r.violations == 0));
        rec.add("seginer_ratio", r.ratio, count, pass(r.passed), 1.0, r.max_ratio);
    });
    rec.block("oracle", [&] {
        const ModelParams params = params_for(cfg, cell);
        if (params.rows() * params.cols() > kDenseGuard) {
            rec.add("oracle_skipped", 1.0, 0, status::info);
            return;
        }
        const SparseSample s = sample_matrix(params, mix_seed(rec.seed(), 900));
        const SpectralSummary d = dense_svd_oracle(s);
        const double sn = smallest_sv(s, mix_seed(rec.seed(), 901));
        const SpectralSummary l = largest_sv_lanczos(s, 1e-10, 300, rec.seed());
        rec.add("oracle_s1", d.s1, 1, pass(std::abs(l.s1 - d.s1) <= 1e-6 * d.s1));
        rec.add("oracle_sn", sn, 1, pass(sn <= d.s1));
        if (params.cols() <= kShiftInvertGuard) {
            const ShiftInvertResult si = smallest_sv_shift_invert(s, 1e-10, 300, rec.seed());
            rec.add("shift_invert_sn", si.sn, 1,
                    pass(si.rank_deficient || std::abs(si.sn - sn) <= 1e-6 * std::max(d.s1, 1e-300)));
        }
    });
    rec.block("row_moment", [&] {
        const ModelParams params = params_for(cfg, cell);
        const std::int64_t trials = std::max<std::int64_t>(cfg.trials, 100);
        const double qmax = 2.0 * std::log(static_cast<double>(std::max(cell.N, cell.n)));
        for (int q : {2, 4}) {
            if (q > qmax) continue;
            const RowMomentReport r = row_norm_moment_check(params, q, trials, mix_seed(rec.seed(), 700 + q));
            rec.add("row_moment_root_ratio[q=" + std::to_string(q) + "]", r.root_ratio, trials, pass(r.passed),
                    std::nullopt, r.constant);
            if (q == 2) {
                const double exact = static_cast<double>(cell.n) * cell.p;
                rec.add("row_moment_q2", r.estimate, trials,
                        pass(std::abs(r.estimate - exact) <= 4.0 * r.std_error + 1e-12 * exact),
                        r.estimate - 3.0 * r.std_error, r.estimate + 3.0 * r.std_error);
            }
        }
    });
    const std::int64_t tail_trials = std::max<std::int64_t>(cfg.trials, 100);
    run_tail_s1(rec, tail_trials, true);
    run_tail_sn(rec, tail_trials, true);
    run_concentration_cell(rec);
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    res.config_digest = config_digest(config);
    const std::vector<Cell> cells = expand_cells(config);
    for (const auto& c : cells) {
        if (c.clamped) {
            res.warnings.push_back("cell " + std::to_string(c.index) + ": p = " + std::to_string(c.p_requested) +
                                   " at N = " + std::to_string(c.N) + " clamped to 1");
            std::cerr << "warning: " << res.warnings.back() << "\n";
        }
    }
    // the tail estimators need at least 100 trials per cell
    const bool tail_mode = config.mode == Mode::TailS1 || config.mode == Mode::TailSn;
    const std::int64_t tail_trials = std::max<std::int64_t>(config.trials, 100);
    if (tail_mode && tail_trials != config.trials) {
        res.warnings.push_back("trials raised from " + std::to_string(config.trials) + " to 100");
        std::cerr << "warning: " << res.warnings.back() << "\n";
    }
    Recorder rec(config, res, std::string(to_string(config.mode)));
    for (const auto& cell : cells) {
        rec.at(cell, cell_seed(config.master_seed, cell.index));
        switch (config.mode) {
            case Mode::Sample: run_sample(rec); break;
            case Mode::Spectrum: run_spectrum(rec); break;
            case Mode::Ladder: run_ladder(rec); break;
            case Mode::TailS1: run_tail_s1(rec, tail_trials, false); break;
            case Mode::TailSn: run_tail_sn(rec, tail_trials, false); break;
            case Mode::Concentration: run_concentration_cell(rec); break;
            case Mode::VerifyAll: run_verify_cell(rec); break;
        }
    }
    if (config.mode == Mode::Concentration || config.mode == Mode::VerifyAll) {
        run_decay_checks(rec, std::max<std::int64_t>(config.trials, 2000));
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string num(std::optional<double> v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

std::string to_csv(const std::vector<CsvRow>& rows) {
    std::ostringstream out;
    out << kCsvHeader << "\r\n";
    for (const auto& r : rows) {
        out << quote(r.mode) << ',' << r.cell << ',' << r.N << ',' << r.n << ',' << num(r.p) << ','
            << quote(r.metric) << ',' << num(r.value) << ',' << num(r.ci_low) << ',' << num(r.ci_high) << ','
            << r.trials << ',' << r.seed << ',' << quote(r.status) << "\r\n";
    }
    return out.str();
}

std::string summary_json(const RunResult& result, const ExperimentConfig& config) {
    nlohmann::json j;
    j["config_digest"] = result.config_digest;
    j["tool_version"] = result.tool_version;
    j["config"] = to_json(config);
    j["warnings"] = result.warnings;
    j["seconds"] = result.seconds;
    std::map<std::string, std::int64_t> counts;
    for (const auto& r : result.rows) ++counts[r.status];
    j["status_counts"] = counts;
    j["partial_failure"] = result.partial_failure();
    nlohmann::json timings = nlohmann::json::array();
    for (const auto& t : result.timings) {
        timings.push_back({{"cell", t.cell}, {"block", t.block}, {"seconds", t.seconds}});
    }
    j["timings"] = timings;
    return j.dump(2) + "\n";
}

void write_outputs(const RunResult& result, const ExperimentConfig& config) {
    {
        std::ofstream out(config.output_path, std::ios::binary);
        if (!out) throw ValidationError("output_path: cannot write '" + config.output_path + "'");
        out << to_csv(result.rows);
    }
    std::ofstream sum(config.output_path + ".summary.json", std::ios::binary);
    if (!sum) throw ValidationError("output_path: cannot write the summary next to '" + config.output_path + "'");
    sum << summary_json(result, config);
}

}  // namespace dilute
