#include "dilute/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dilute/errors.hpp"

namespace dilute {

using nlohmann::json;

namespace {

constexpr std::pair<Mode, std::string_view> kModes[] = {
    {Mode::Sample, "sample"},         {Mode::Spectrum, "spectrum"},
    {Mode::Ladder, "ladder"},         {Mode::TailS1, "tail_s1"},
    {Mode::TailSn, "tail_sn"},        {Mode::Concentration, "concentration"},
    {Mode::VerifyAll, "verify_all"},
};

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> known) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) throw ValidationError(where + (where.empty() ? "" : ".") + key + ": unknown field");
    }
}

template <class T>
void read(const json& j, const char* key, const std::string& where, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + "." + key + ": wrong type");
    }
}

void read_u64(const json& j, const char* key, const std::string& where, std::uint64_t& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
        throw ValidationError(where + "." + key + ": expected a non-negative integer");
    }
    out = it->get<std::uint64_t>();
}

void read_i64(const json& j, const char* key, const std::string& where, std::int64_t& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_number_integer()) throw ValidationError(where + "." + key + ": expected an integer");
    out = it->get<std::int64_t>();
}

void read_num(const json& j, const char* key, const std::string& where, double& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_number()) throw ValidationError(where + "." + key + ": expected a number");
    out = it->get<double>();
}

}  // namespace

std::string_view to_string(Mode mode) {
    for (const auto& [m, s] : kModes) {
        if (m == mode) return s;
    }
    return "unknown";
}

Mode mode_from_string(std::string_view name) {
    for (const auto& [m, s] : kModes) {
        if (s == name) return m;
    }
    throw ValidationError("mode: unknown value '" + std::string(name) + "'");
}

std::string_view to_string(PRule rule) { return rule == PRule::FixedP ? "fixed_p" : "np_log_power"; }

EntryDistribution DistConfig::build() const {
    switch (dist_kind_from_string(kind)) {
        case DistKind::Gaussian: return EntryDistribution::gaussian(delta);
        case DistKind::Rademacher: return EntryDistribution::rademacher(delta);
        case DistKind::SymmetricPareto: return EntryDistribution::symmetric_pareto(tail_exponent, delta);
        case DistKind::TwoPoint: return EntryDistribution::two_point(prob, delta);
    }
    throw ValidationError("model.dist.kind: unknown");
}

ExperimentConfig parse_config(const json& j) {
    reject_unknown(j, "", {"name", "mode", "model", "sweep", "trials", "master_seed", "thresholds",
                           "solver", "output_path"});
    ExperimentConfig c;
    read(j, "name", "config", c.name);
    if (auto it = j.find("mode"); it != j.end()) {
        if (!it->is_string()) throw ValidationError("mode: expected a string");
        c.mode = mode_from_string(it->get<std::string>());
    }
    if (auto it = j.find("model"); it != j.end()) {
        const json& m = *it;
        reject_unknown(m, "model", {"N", "n", "y", "p", "dist", "trunc_A"});
        read_i64(m, "N", "model", c.N);
        if (m.contains("n")) {
            std::int64_t n = 0;
            read_i64(m, "n", "model", n);
            c.n = n;
        }
        read_num(m, "y", "model", c.y);
        read_num(m, "p", "model", c.p);
        read_num(m, "trunc_A", "model", c.trunc_A);
        if (auto d = m.find("dist"); d != m.end()) {
            reject_unknown(*d, "model.dist", {"kind", "delta", "tail_exponent", "prob"});
            read(*d, "kind", "model.dist", c.dist.kind);
            read_num(*d, "delta", "model.dist", c.dist.delta);
            read_num(*d, "tail_exponent", "model.dist", c.dist.tail_exponent);
            read_num(*d, "prob", "model.dist", c.dist.prob);
        }
    }
    if (auto it = j.find("sweep"); it != j.end()) {
        const json& s = *it;
        reject_unknown(s, "sweep", {"N", "rule", "B", "alpha"});
        if (auto g = s.find("N"); g != s.end()) {
            if (!g->is_array()) throw ValidationError("sweep.N: expected an array of integers");
            for (const auto& v : *g) {
                if (!v.is_number_integer()) throw ValidationError("sweep.N: expected an array of integers");
                c.grid.push_back(v.get<std::int64_t>());
            }
        }
        if (auto r = s.find("rule"); r != s.end()) {
            const std::string rule = r->is_string() ? r->get<std::string>() : "";
            if (rule == "fixed_p") {
                c.rule = PRule::FixedP;
            } else if (rule == "np_log_power") {
                c.rule = PRule::NpLogPower;
            } else {
                throw ValidationError("sweep.rule: expected \"fixed_p\" or \"np_log_power\"");
            }
        }
        read_num(s, "B", "sweep", c.B);
        read_num(s, "alpha", "sweep", c.alpha);
    }
    read_i64(j, "trials", "config", c.trials);
    read_u64(j, "master_seed", "config", c.master_seed);
    if (auto it = j.find("thresholds"); it != j.end()) {
        reject_unknown(*it, "thresholds", {"K", "tau", "rho", "delta0", "epsilon"});
        read_num(*it, "K", "thresholds", c.K);
        read_num(*it, "tau", "thresholds", c.tau);
        read_num(*it, "rho", "thresholds", c.rho);
        read_num(*it, "delta0", "thresholds", c.delta0);
        read_num(*it, "epsilon", "thresholds", c.epsilon);
    }
    if (auto it = j.find("solver"); it != j.end()) {
        reject_unknown(*it, "solver", {"lanczos_tol", "sn_solver"});
        read_num(*it, "lanczos_tol", "solver", c.lanczos_tol);
        read(*it, "sn_solver", "solver", c.sn_solver);
    }
    read(j, "output_path", "config", c.output_path);
    validate(c);
    return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw ValidationError(field + ": " + msg);
    };
    if (c.N < 2) fail("model.N", "must be at least 2");
    if (c.n && (*c.n < 1 || *c.n >= c.N)) fail("model.n", "must satisfy 0 < n < N");
    if (!(c.y > 0.0 && c.y < 1.0)) fail("model.y", "must lie in (0, 1)");
    if (!(c.p > 0.0 && c.p <= 1.0)) fail("model.p", "must lie in (0, 1]");
    if (!(c.trunc_A > 0.0)) fail("model.trunc_A", "must be positive");
    if (!(c.dist.delta >= 0.0)) fail("model.dist.delta", "must be non-negative");
    try {
        (void)c.dist.build();
    } catch (const ValidationError& e) {
        fail("model.dist", e.what());
    }
    for (auto N : c.grid) {
        if (N < 2) fail("sweep.N", "grid values must be at least 2");
    }
    if (!(c.B > 0.0)) fail("sweep.B", "must be positive");
    if (!(c.alpha >= 0.0)) fail("sweep.alpha", "must be non-negative");
    if (c.trials < 1) fail("trials", "must be positive");
    if (!(c.K > 0.0)) fail("thresholds.K", "must be positive");
    if (!(c.tau >= 0.0)) fail("thresholds.tau", "must be non-negative");
    if (!(c.rho > 0.0 && c.rho < 1.0)) fail("thresholds.rho", "must lie in (0, 1)");
    if (!(c.delta0 > 0.0 && c.delta0 < 1.0)) fail("thresholds.delta0", "must lie in (0, 1)");
    if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) fail("thresholds.epsilon", "must lie in (0, 1]");
    if (!(c.lanczos_tol > 0.0)) fail("solver.lanczos_tol", "must be positive");
    if (c.sn_solver != "shift_invert" && c.sn_solver != "dense") {
        fail("solver.sn_solver", "expected \"shift_invert\" or \"dense\"");
    }
    if (c.output_path.empty()) fail("output_path", "must not be empty");
}

json to_json(const ExperimentConfig& c) {
    json model = {{"N", c.N},
                  {"y", c.y},
                  {"p", c.p},
                  {"trunc_A", c.trunc_A},
                  {"dist",
                   {{"kind", c.dist.kind},
                    {"delta", c.dist.delta},
                    {"tail_exponent", c.dist.tail_exponent},
                    {"prob", c.dist.prob}}}};
    if (c.n) model["n"] = *c.n;
    json j = {{"name", c.name},
              {"mode", std::string(to_string(c.mode))},
              {"model", model},
              {"sweep", {{"N", c.grid}, {"rule", std::string(to_string(c.rule))}, {"B", c.B}, {"alpha", c.alpha}}},
              {"trials", c.trials},
              {"master_seed", c.master_seed},
              {"thresholds",
               {{"K", c.K}, {"tau", c.tau}, {"rho", c.rho}, {"delta0", c.delta0}, {"epsilon", c.epsilon}}},
              {"solver", {{"lanczos_tol", c.lanczos_tol}, {"sn_solver", c.sn_solver}}},
              {"output_path", c.output_path}};
    return j;
}

std::string canonical_text(const ExperimentConfig& config) { return to_json(config).dump(); }

std::string config_digest(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<Cell> expand_cells(const ExperimentConfig& c) {
    validate(c);
    std::vector<std::int64_t> grid = c.grid.empty() ? std::vector<std::int64_t>{c.N} : c.grid;
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Cell cell;
        cell.index = static_cast<std::int64_t>(i);
        cell.N = grid[i];
        if (c.n && c.grid.empty()) {
            cell.n = *c.n;
        } else {
            cell.n = static_cast<std::int64_t>(std::floor(c.y * static_cast<double>(cell.N)));
        }
        if (cell.n < 1 || cell.n >= cell.N) {
            throw ValidationError("sweep.N: cell N = " + std::to_string(cell.N) + " gives n = " +
                                  std::to_string(cell.n) + " outside (0, N)");
        }
        const double lnN = std::log(static_cast<double>(cell.N));
        cell.p_requested = c.rule == PRule::FixedP ? c.p : c.B * std::pow(lnN, c.alpha) / static_cast<double>(cell.N);
        cell.p = cell.p_requested;
        if (cell.p > 1.0) {
            cell.p = 1.0;
            cell.clamped = true;
        }
        if (!(cell.p > 0.0)) {
            throw ValidationError("sweep: p = " + std::to_string(cell.p_requested) + " at N = " +
                                  std::to_string(cell.N) + " is not in (0, 1]");
        }
        cells.push_back(cell);
    }
    return cells;
}

}  // namespace dilute
