#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dilute/config.hpp"
#include "dilute/errors.hpp"
#include "dilute/harness.hpp"
#include "dilute/spectral.hpp"

using namespace dilute;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "dilute_harness_test";
    fs::create_directories(dir);
    return dir / name;
}

int cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " DILUTE_CLI " " + args + " > " + scratch("cli.log").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const CsvRow* find_row(const RunResult& r, const std::string& metric, std::int64_t cell = 0) {
    for (const auto& row : r.rows) {
        if (row.metric == metric && row.cell == cell) return &row;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("config round trip") {
    const ExperimentConfig c = load_config(DILUTE_SMOKE_CONFIG);
    CHECK(c.name == "smoke");
    CHECK(c.mode == Mode::VerifyAll);
    CHECK(c.grid == std::vector<std::int64_t>{128, 256});
    CHECK(c.rule == PRule::NpLogPower);
    const ExperimentConfig again = parse_config_text(canonical_text(c));
    CHECK(again == c);
    CHECK(canonical_text(again) == canonical_text(c));
    CHECK(config_digest(again) == config_digest(c));

    ExperimentConfig d = c;
    d.n = 77;
    d.dist.kind = "symmetric_pareto";
    d.dist.tail_exponent = 7.0;
    CHECK(parse_config(to_json(d)) == d);
}

TEST_CASE("canonical text does not depend on key order") {
    const auto a = parse_config_text(R"({"trials": 5, "model": {"p": 0.2, "N": 40}})");
    const auto b = parse_config_text(R"({"model": {"N": 40, "p": 0.2}, "trials": 5})");
    CHECK(canonical_text(a) == canonical_text(b));
}

TEST_CASE("config digest") {
    ExperimentConfig c;
    const std::string d = config_digest(c);
    CHECK(d.size() == 16);
    CHECK(d.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(config_digest(c) == d);
    c.master_seed += 1;
    CHECK(config_digest(c) != d);
}

TEST_CASE("unknown config fields are rejected by name") {
    auto message = [](const std::string& text) {
        try {
            (void)parse_config_text(text);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(R"({"trails": 5})").find("trails") != std::string::npos);
    CHECK(message(R"({"model": {"NN": 5}})").find("model.NN") != std::string::npos);
    CHECK(message(R"({"model": {"dist": {"knd": "gaussian"}}})").find("model.dist.knd") != std::string::npos);
    CHECK(message(R"({"thresholds": {"K": "ten"}})").find("thresholds.K") != std::string::npos);
    CHECK(message(R"({"model": {"p": 1.5}})").find("model.p") != std::string::npos);
    CHECK(message(R"({"mode": "everything"})").find("mode") != std::string::npos);
    CHECK(message("{not json").size() > 0);
}

TEST_CASE("sweep expansion clamps p") {
    ExperimentConfig c;
    c.grid = {64, 4096};
    c.rule = PRule::NpLogPower;
    c.B = 25.0;
    c.alpha = 2.0;
    const auto cells = expand_cells(c);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].clamped);
    CHECK(cells[0].p == 1.0);
    CHECK(cells[0].p_requested == doctest::Approx(25.0 * std::pow(std::log(64.0), 2) / 64.0));
    CHECK_FALSE(cells[1].clamped);
    CHECK(cells[1].p == doctest::Approx(25.0 * std::pow(std::log(4096.0), 2) / 4096.0));
    CHECK(cells[1].n == 2048);
    CHECK(cells[1].index == 1);

    ExperimentConfig single;
    single.N = 300;
    single.n = 40;
    const auto one = expand_cells(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0].n == 40);
    CHECK(one[0].p == single.p);
}

TEST_CASE("cell seeds are distinct") {
    CHECK(cell_seed(1, 0) != cell_seed(1, 1));
    CHECK(cell_seed(1, 0) != cell_seed(2, 0));
    CHECK(cell_seed(5, 3) == cell_seed(5, 3));
}

TEST_CASE("ladder mode reproduces the worked example") {
    ExperimentConfig c;
    c.mode = Mode::Ladder;
    c.N = 10000;
    c.p = 0.01;
    c.delta0 = 0.1;
    const RunResult r = run(c);
    const CsvRow* L = find_row(r, "L");
    REQUIRE(L != nullptr);
    CHECK(*L->value == 8.0);
    for (int nu = 0; nu <= 8; ++nu) CHECK(find_row(r, "p_nu[" + std::to_string(nu) + "]") != nullptr);
    CHECK(r.report.find("L = 8") != std::string::npos);
    CHECK_FALSE(r.partial_failure());
}

TEST_CASE("tail mode on a tiny single cell") {
    ExperimentConfig c;
    c.mode = Mode::TailS1;
    c.N = 200;
    c.p = 0.1;
    c.trials = 10;
    const RunResult r = run(c);
    const CsvRow* hits = find_row(r, "tail_s1_hits");
    REQUIRE(hits != nullptr);
    CHECK(*hits->value >= 0.0);
    CHECK(*hits->value <= double(hits->trials));
    CHECK(hits->trials == 100);
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("recorded seeds reproduce a cell in isolation") {
    ExperimentConfig c;
    c.mode = Mode::Spectrum;
    c.grid = {300, 600};
    c.p = 0.05;
    c.sn_solver = "dense";
    const RunResult r = run(c);
    for (std::int64_t cell = 0; cell < 2; ++cell) {
        const CsvRow* sn = find_row(r, "sn", cell);
        REQUIRE(sn != nullptr);
        const ModelParams params(sn->N, sn->n, sn->p, c.dist.build(), c.trunc_A);
        CHECK(dense_svd_oracle(sample_matrix(params, sn->seed)).sn == *sn->value);
    }
}

TEST_CASE("csv layout") {
    std::vector<CsvRow> rows(2);
    rows[0].mode = "sample";
    rows[0].metric = "odd,\"name\"";
    rows[0].value = 0.1;
    rows[1].mode = "sample";
    rows[1].metric = "plain";
    const std::string csv = to_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == std::string(kCsvHeader) + "\r");
    std::getline(in, line);
    CHECK(line == "sample,0,0,0,0,\"odd,\"\"name\"\"\",0.10000000000000001,,,0,0,ok\r");
    std::getline(in, line);
    CHECK(line == "sample,0,0,0,0,plain,,,,0,0,ok\r");
}

TEST_CASE("a failed block makes the run a partial failure") {
    ExperimentConfig c;
    c.mode = Mode::Ladder;
    c.N = 100;
    c.p = 0.05;
    const RunResult r = run(c);
    CHECK(r.partial_failure());
    const CsvRow* e = find_row(r, "ladder");
    REQUIRE(e != nullptr);
    CHECK(e->status == "error");
    CHECK_FALSE(e->value.has_value());
}

TEST_CASE("outputs are written with a summary") {
    ExperimentConfig c;
    c.mode = Mode::Sample;
    c.grid = {100, 200};
    c.p = 0.1;
    c.output_path = scratch("sample.csv").string();
    const RunResult r = run(c);
    write_outputs(r, c);
    CHECK(slurp(c.output_path) == to_csv(r.rows));
    const auto summary = nlohmann::json::parse(slurp(c.output_path + ".summary.json"));
    CHECK(summary["config_digest"] == config_digest(c));
    CHECK(summary["tool_version"] == kToolVersion);
    CHECK(summary["timings"].size() == r.timings.size());
    CHECK(summary["config"] == to_json(c));
}

TEST_CASE("reruns produce identical csv") {
    const ExperimentConfig c = load_config(DILUTE_SMOKE_CONFIG);
    ExperimentConfig small = c;
    small.trials = 20;
    CHECK(to_csv(run(small).rows) == to_csv(run(small).rows));
}

TEST_CASE("command line exit codes") {
    CHECK(cli("--help") == 0);
    const std::string help = slurp(scratch("cli.log"));
    for (const char* flag : {"--config", "--N", "--p", "--trials", "--seed", "--out", "DILUTE_SPECTRA_THREADS"}) {
        CHECK(help.find(flag) != std::string::npos);
    }
    CHECK(cli("ladder --help") == 0);
    CHECK(slurp(scratch("cli.log")).find("--delta0") != std::string::npos);

    const std::string out = scratch("ladder.csv").string();
    CHECK(cli("ladder --N 10000 --p 0.01 --delta0 0.1 --out " + out) == 0);
    CHECK(slurp(out).rfind(kCsvHeader, 0) == 0);
    CHECK(fs::exists(out + ".summary.json"));

    CHECK(cli("ladder") == 1);
    CHECK(cli("spectrum --N 100") == 1);
    CHECK(cli("ladder --N 10 --p 2 --out " + out) == 1);
    CHECK(cli("verify-all --config /nonexistent/config.json") == 1);
    CHECK(cli("frobnicate") != 0);
    CHECK(cli("ladder --N 100 --p 0.05 --out " + out) == 2);
    CHECK(cli("ladder --N 10000 --p 0.01 --out " + out, "DILUTE_SPECTRA_THREADS=abc") == 1);
    CHECK(cli("ladder --N 10000 --p 0.01 --out " + out, "DILUTE_SPECTRA_THREADS=2") == 0);
}

TEST_CASE("verify-all through the command line is deterministic" * doctest::timeout(300)) {
    const std::string a = scratch("va_a.csv").string();
    const std::string b = scratch("va_b.csv").string();
    const int ra = cli(std::string("verify-all --config ") + DILUTE_SMOKE_CONFIG + " --trials 20 --out " + a);
    const int rb = cli(std::string("verify-all --config ") + DILUTE_SMOKE_CONFIG + " --trials 20 --out " + b);
    CHECK((ra == 0 || ra == 2));
    CHECK(ra == rb);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("shipped configs parse and expand") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(DILUTE_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        const ExperimentConfig c = load_config(entry.path().string());
        CHECK_FALSE(expand_cells(c).empty());
        ++seen;
    }
    CHECK(seen >= 3);
    const auto s1 = expand_cells(load_config(std::string(DILUTE_CONFIG_DIR) + "/s1_regime.json"));
    REQUIRE(s1.size() == 4);
    for (const auto& cell : s1) CHECK(cell.p == 1.0);
}
