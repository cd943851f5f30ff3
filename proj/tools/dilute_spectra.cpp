// Command-line driver for the dilute random matrix experiments.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dilute/config.hpp"
#include "dilute/errors.hpp"
#include "dilute/harness.hpp"
#include "dilute/kernels.hpp"

namespace {

using dilute::ExperimentConfig;
using dilute::Mode;

struct Overrides {
    std::string config;
    std::optional<std::int64_t> N;
    std::optional<std::int64_t> n;
    std::optional<double> p;
    std::optional<std::int64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> delta0;
    std::optional<double> K;
    std::optional<double> tau;
    std::optional<double> rho;
    std::optional<std::string> dist;
};

void add_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON experiment config");
    cmd->add_option("--N", o.N, "Rows; replaces the sweep with this single N");
    cmd->add_option("--n", o.n, "Columns (single-cell runs); default floor(y N)");
    cmd->add_option("--p", o.p, "Dilution probability in (0, 1]; switches to a fixed-p schedule");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per cell");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--out", o.out, "CSV output path (summary goes to <out>.summary.json)");
    cmd->add_option("--delta0", o.delta0, "Ladder constant delta0 in (0, 1)");
    cmd->add_option("--K", o.K, "Threshold K for P{s1 >= K sqrt(Np)}");
    cmd->add_option("--tau", o.tau, "Threshold tau for P{sn <= tau sqrt(Np)} and small-ball checks");
    cmd->add_option("--rho", o.rho, "Compressibility distance rho in (0, 1)");
    cmd->add_option("--dist", o.dist, "Entry law: gaussian, rademacher, symmetric_pareto, two_point");
}

ExperimentConfig defaults_for(Mode mode) {
    ExperimentConfig c;
    c.mode = mode;
    c.name = std::string(dilute::to_string(mode));
    switch (mode) {
        case Mode::TailS1:
            // kappa = 1/4 for delta = 4, so N p = B ln^6 N.
            c.dist.delta = 4.0;
            c.grid = {512, 1024, 2048, 4096};
            c.rule = dilute::PRule::NpLogPower;
            c.B = 1.0;
            c.alpha = 6.0;
            break;
        case Mode::TailSn:
            c.grid = {512, 1024, 2048, 4096};
            c.rule = dilute::PRule::NpLogPower;
            c.B = 25.0;
            c.alpha = 2.0;
            break;
        case Mode::VerifyAll:
            c.grid = {128, 256};
            c.rule = dilute::PRule::NpLogPower;
            c.B = 25.0;
            c.alpha = 2.0;
            c.trials = 100;
            break;
        default:
            break;
    }
    c.output_path = c.name + ".csv";
    return c;
}

bool needs_cell_flags(Mode mode) {
    return mode == Mode::Sample || mode == Mode::Spectrum || mode == Mode::Ladder || mode == Mode::Concentration;
}

int execute(Mode mode, const Overrides& o) {
    ExperimentConfig c;
    if (!o.config.empty()) {
        c = dilute::load_config(o.config);
        c.mode = mode;
    } else {
        if (needs_cell_flags(mode) && (!o.N || !o.p)) {
            std::cerr << "error: --N and --p are required without --config (see --help)\n";
            return 1;
        }
        c = defaults_for(mode);
    }
    if (o.N) {
        c.N = *o.N;
        c.grid.clear();
    }
    if (o.n) c.n = *o.n;
    if (o.p) {
        c.p = *o.p;
        c.rule = dilute::PRule::FixedP;
    }
    if (o.trials) c.trials = *o.trials;
    if (o.seed) c.master_seed = *o.seed;
    if (o.out) c.output_path = *o.out;
    if (o.delta0) c.delta0 = *o.delta0;
    if (o.K) c.K = *o.K;
    if (o.tau) c.tau = *o.tau;
    if (o.rho) c.rho = *o.rho;
    if (o.dist) c.dist.kind = *o.dist;
    dilute::validate(c);

    const dilute::RunResult result = dilute::run(c);
    dilute::write_outputs(result, c);
    if (!result.report.empty()) std::cout << result.report;
    std::size_t bad = 0;
    for (const auto& r : result.rows) {
        if (r.status == dilute::status::failed || r.status == dilute::status::error) ++bad;
    }
    std::cout << dilute::to_string(mode) << ": " << result.rows.size() << " rows, " << bad
              << " failed or errored, digest " << result.config_digest << ", wrote " << c.output_path << "\n";
    return result.partial_failure() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for extreme singular values of dilute random matrices"};
    app.footer(
        "Every subcommand accepts:\n"
        "  --config PATH   JSON experiment config; the flags below override it\n"
        "  --N INT         rows (single cell)      --n INT      columns (single cell)\n"
        "  --p REAL        dilution probability    --trials INT Monte Carlo trials per cell\n"
        "  --seed INT      master seed             --out PATH   CSV output path\n"
        "  --delta0 REAL   ladder constant         --K REAL     s1 threshold\n"
        "  --tau REAL      sn threshold            --rho REAL   compressibility distance\n"
        "  --dist NAME     gaussian, rademacher, symmetric_pareto, two_point\n"
        "  sample, spectrum, ladder and concentration need --N and --p without --config.\n"
        "CSV columns: mode,cell,N,n,p,metric,value,ci_low,ci_high,trials,seed,status\n"
        "  one row per cell and metric; seed reproduces the row's cell; status is one of\n"
        "  ok, failed, error, censored, vacuous, info.\n"
        "Environment: DILUTE_SPECTRA_THREADS sets the worker count (default: logical cores).\n"
        "Exit codes: 0 success, 1 invalid input, 2 some check failed or errored, 3 internal error.");
    app.require_subcommand(1);

    const std::pair<const char*, Mode> commands[] = {
        {"sample", Mode::Sample},         {"spectrum", Mode::Spectrum},
        {"ladder", Mode::Ladder},         {"tail-s1", Mode::TailS1},
        {"tail-sn", Mode::TailSn},        {"concentration", Mode::Concentration},
        {"verify-all", Mode::VerifyAll},
    };
    app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");
    const char* descriptions[] = {
        "Draw one sample per cell and report nnz and truncation statistics",
        "Extreme singular values and row/column norm extremes of one sample per cell",
        "Print the sparsity ladder schedule",
        "Estimate P{s1 >= K sqrt(Np)} over the sweep",
        "Estimate P{sn <= tau sqrt(Np)} over the sweep",
        "Levy concentration, small-ball and tensorization checks",
        "Run every check at the configured scale",
    };
    Overrides o;
    std::optional<Mode> chosen;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        CLI::App* cmd = app.add_subcommand(commands[i].first, descriptions[i]);
        add_flags(cmd, o);
        const Mode m = commands[i].second;
        cmd->callback([&chosen, m] { chosen = m; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        dilute::kernels::apply_thread_setting();
        return execute(*chosen, o);
    } catch (const dilute::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const dilute::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dilute::CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
