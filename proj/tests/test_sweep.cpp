#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kz/sweep.hpp"

using namespace kz;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("kz_sweep_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunConfig tiny_config(const fs::path& out_dir) {
    RunConfig cfg = parse_config_text(R"(
[model]
kind = tfim
[protocol]
tau_q = 2, 4, 8
dt = 0.05
[sweep]
n = 8, 12
method = expect, mc_sz
chi_max = 32
[mc]
n_traj = 200
seed = 7
[fit]
window = 2, 8
)");
    cfg.output_dir = out_dir.string();
    return cfg;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// results.csv body with the wall-time column blanked (timing differs
// between runs by construction).
std::string stable_body(const fs::path& csv) {
    std::istringstream in(read_file(csv));
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() == 10) fields[8] = "-";
        for (std::size_t i = 0; i < fields.size(); ++i)
            out << fields[i] << (i + 1 < fields.size() ? "," : "");
        out << "\n";
    }
    return out.str();
}

} // namespace

TEST_CASE("sweep writes the exact CSV schema and fit output", "[sweep]") {
    TempDir dir("schema");
    RunConfig cfg = tiny_config(dir.path / "out");
    cfg.workers = 2;
    std::ostringstream log;
    REQUIRE(run_sweep(cfg, false, log) == 0);

    std::istringstream csv(read_file(dir.path / "out" / "results.csv"));
    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(line == "# config=" + hash_hex(cfg.hash()));
    REQUIRE(std::getline(csv, line));
    CHECK(line == std::string(results_csv_header));
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 12);  // 2 N x 3 tau x 2 methods

    ParsedResults parsed = parse_results_csv((dir.path / "out" / "results.csv").string());
    CHECK(parsed.rows.size() == 12);
    for (const auto& row : parsed.rows) CHECK(row.status == "ok");

    // every (N, tau, method) appears exactly once
    std::set<std::string> keys;
    for (const auto& row : parsed.rows)
        CHECK(keys.insert(method_name(row.method) + "/" + std::to_string(row.n) + "/" +
                          format_double(row.tau_q))
                  .second);

    CHECK(fs::exists(dir.path / "out" / "fit.json"));
    CHECK(fs::exists(dir.path / "out" / "meta.json"));
    CHECK(fs::exists(dir.path / "out" / "hist_mc_sz_n8_tau2.csv"));
    CHECK(fs::exists(dir.path / "out" / "plot_expect_n8.csv"));

    // MC defect densities agree with the projector expectations
    for (const auto& row : parsed.rows) {
        if (row.method != Method::McSzOnly) continue;
        for (const auto& ref : parsed.rows) {
            if (ref.method == Method::Expect && ref.n == row.n && ref.tau_q == row.tau_q)
                CHECK(std::abs(row.point.eta - ref.point.eta) <= 4.0 * row.point.stderr_val);
        }
    }
}

TEST_CASE("single-cell config yields a flagged fit", "[sweep]") {
    TempDir dir("single");
    RunConfig cfg = tiny_config(dir.path / "out");
    cfg.n_list = {8};
    cfg.tau_list = {2.0};
    cfg.methods = {Method::Expect};
    std::ostringstream log;
    REQUIRE(run_sweep(cfg, false, log) == 0);
    ParsedResults parsed = parse_results_csv((dir.path / "out" / "results.csv").string());
    CHECK(parsed.rows.size() == 1);

    nlohmann::json fit;
    std::ifstream(dir.path / "out" / "fit.json") >> fit;
    REQUIRE(fit.contains("expect"));
    CHECK(fit["expect"].contains("status"));
    CHECK(fit["expect"]["status"].get<std::string>().find("insufficient points") == 0);
}

TEST_CASE("repeat runs and worker counts give identical bodies", "[sweep]") {
    TempDir dir("determinism");
    std::vector<std::string> bodies;
    for (int workers : {1, 4, 1}) {
        const fs::path out = dir.path / ("out_" + std::to_string(bodies.size()));
        RunConfig cfg = tiny_config(out);
        cfg.workers = workers;
        std::ostringstream log;
        REQUIRE(run_sweep(cfg, false, log) == 0);
        bodies.push_back(stable_body(out / "results.csv"));
    }
    CHECK(bodies[0] == bodies[1]);
    CHECK(bodies[0] == bodies[2]);
}

TEST_CASE("resume completes only the missing cells", "[sweep]") {
    TempDir dir("resume");
    RunConfig cfg = tiny_config(dir.path / "out");
    std::ostringstream log;
    REQUIRE(run_sweep(cfg, false, log) == 0);
    const fs::path csv = dir.path / "out" / "results.csv";

    // drop the last two data rows and poison one kept eta value; resume
    // must trust kept rows verbatim and only recompute what is missing
    std::istringstream in(read_file(csv));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 14);
    lines.resize(12);
    {
        // edit the eta and chi_m fields of the (expect, 8, 4) row in place
        std::vector<std::string> fields;
        std::stringstream ss(lines[4]);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        REQUIRE(fields[1] == "expect");
        fields[4] = "0.25";
        fields[7] = "99";
        std::string rebuilt;
        for (std::size_t i = 0; i < fields.size(); ++i)
            rebuilt += fields[i] + (i + 1 < fields.size() ? "," : "");
        lines[4] = rebuilt;
    }
    {
        std::ofstream out(csv, std::ios::trunc);
        for (const auto& l : lines) out << l << "\n";
    }

    REQUIRE(run_sweep(cfg, true, log) == 0);
    ParsedResults parsed = parse_results_csv(csv.string());
    CHECK(parsed.rows.size() == 12);
    bool saw_poisoned = false;
    for (const auto& row : parsed.rows)
        if (row.method == Method::Expect && row.n == 8 && row.tau_q == 4.0)
            saw_poisoned = row.point.eta == 0.25 && row.point.chi_m == 99;
    CHECK(saw_poisoned);
}

TEST_CASE("mixed-config result directories are rejected", "[sweep]") {
    TempDir dir("mixed");
    RunConfig cfg = tiny_config(dir.path / "out");
    cfg.n_list = {8};
    cfg.tau_list = {2.0};
    cfg.methods = {Method::Expect};
    std::ostringstream log;
    REQUIRE(run_sweep(cfg, false, log) == 0);
    cfg.tau_list = {4.0};
    CHECK_THROWS_AS(run_sweep(cfg, false, log), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(cfg, true, log), std::invalid_argument);
}

TEST_CASE("bench reports per-method timings with the expected shape", "[sweep]") {
    TempDir dir("bench");
    RunConfig cfg = tiny_config(dir.path / "out");
    cfg.n_list = {8, 32};
    cfg.tau_list = {2.0};
    cfg.methods = {Method::Expect, Method::McSzOnly};
    cfg.n_traj = 400;
    std::ostringstream log;
    REQUIRE(run_bench(cfg, log) == 0);

    std::istringstream in(read_file(dir.path / "out" / "bench.csv"));
    std::string line;
    std::getline(in, line);  // hash comment
    std::getline(in, line);
    REQUIRE(line == "axis,n,tau_q,method,evolve_s,estimate_s,chi_m");
    std::map<std::string, double> estimate;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string axis, n, tau, method, ev, est, chi;
        std::getline(ss, axis, ',');
        std::getline(ss, n, ',');
        std::getline(ss, tau, ',');
        std::getline(ss, method, ',');
        std::getline(ss, ev, ',');
        std::getline(ss, est, ',');
        std::getline(ss, chi, ',');
        estimate[axis + "/" + n + "/" + method] = std::stod(est);
    }
    // projector sweeps scale up with N; sampling dominates the projector
    CHECK(estimate.at("vary_n/32/expect") > estimate.at("vary_n/8/expect"));
    CHECK(estimate.at("vary_n/32/mc_sz") > 5.0 * estimate.at("vary_n/32/expect"));
}

TEST_CASE("corrupted golden values fail the oracle check by name", "[sweep]") {
    TempDir dir("golden");
    std::ostringstream log;
    // regenerate a private corpus, then corrupt one case
    REQUIRE(run_oracle_check(dir.path.string(), true, log) == 0);
    const fs::path victim = dir.path / "golden_tfim_forward.json";
    nlohmann::json j;
    std::ifstream(victim) >> j;
    j["eta"] = j["eta"].get<double>() + 1e-3;
    {
        std::ofstream out(victim, std::ios::trunc);
        out << j.dump(2) << "\n";
    }
    std::ostringstream report;
    CHECK(run_oracle_check(dir.path.string(), false, report) == 1);
    CHECK(report.str().find("FAIL tfim_forward") != std::string::npos);
}

TEST_CASE("loose truncation breaks oracle equivalence", "[sweep]") {
    for (const OracleCase& c : oracle_cases()) {
        if (c.name != "tfim_forward") continue;
        const double eta_ref = oracle_dense_eta(c);
        CHECK(std::abs(oracle_mps_eta(c, 1e-12) - eta_ref) <= 1e-6);
        CHECK(std::abs(oracle_mps_eta(c, 1e-2) - eta_ref) > 1e-6);
    }
}

TEST_CASE("command line surface", "[sweep]") {
    TempDir dir("cli");
    const std::string tool = KZ_TOOL_PATH;

    // config errors exit with code 2
    const fs::path bad = dir.path / "bad.cfg";
    std::ofstream(bad) << "[model]\nkind = tfim\nchi_mx = 2\n";
    const int bad_rc = std::system((tool + " sweep --config " + bad.string() + " 2>" +
                                    (dir.path / "err.txt").string())
                                       .c_str());
    CHECK(WEXITSTATUS(bad_rc) == 2);
    CHECK(read_file(dir.path / "err.txt").find("unknown key") != std::string::npos);

    // --help lists every config key
    const int help_rc = std::system(
        (tool + " --help >" + (dir.path / "help.txt").string()).c_str());
    CHECK(WEXITSTATUS(help_rc) == 0);
    const std::string help = read_file(dir.path / "help.txt");
    for (const auto& [key, text] : config_key_help())
        CHECK(help.find(key) != std::string::npos);

    // circuit export round trip through the CLI
    const fs::path circuit_cfg = dir.path / "digital.cfg";
    std::ofstream(circuit_cfg) << R"(
[model]
kind = essh_digital
delta = 3.0
[protocol]
tau_q = 1
dt = 0.5
[sweep]
n = 4
method = expect
)";
    const int circ_rc = std::system((tool + " circuit-export --config " + circuit_cfg.string() +
                                     " --out " + (dir.path / "circuit.txt").string())
                                        .c_str());
    CHECK(WEXITSTATUS(circ_rc) == 0);
    std::istringstream circuit(read_file(dir.path / "circuit.txt"));
    std::string line;
    int gates = 0;
    while (std::getline(circuit, line)) {
        std::istringstream row(line);
        int layer, a, b;
        double al, be, ga;
        REQUIRE((row >> layer >> a >> b >> al >> be >> ga));
        ++gates;
    }
    CHECK(gates == 4 * 3);  // 4 steps x (2 AB + 1 BA gates)
}
