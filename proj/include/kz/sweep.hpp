#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kz/config.hpp"
#include "kz/defects.hpp"
#include "kz/dense.hpp"
#include "kz/digital.hpp"
#include "kz/evolve.hpp"
#include "kz/fit.hpp"
#include "kz/version.hpp"

namespace kz {

inline constexpr const char* results_csv_header =
    "model,method,n,tau_q,eta,eta_partial,stderr,chi_m,wall_s,status";

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline int resolve_workers(const RunConfig& cfg) {
    if (const char* env = std::getenv("KZ_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    if (cfg.workers > 0) return cfg.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct ResultRow {
    std::string model;
    Method method = Method::Expect;
    int n = 0;
    double tau_q = 0.0;
    SweepPoint point;
    std::string status = "ok";

    std::string csv() const {
        std::ostringstream out;
        out << model << ',' << method_name(method) << ',' << n << ',' << format_double(tau_q)
            << ',' << format_double(point.eta) << ','
            << (point.eta_partial ? format_double(*point.eta_partial) : std::string()) << ','
            << format_double(point.stderr_val) << ',' << point.chi_m << ','
            << format_double(point.wall_seconds) << ',' << status;
        return out.str();
    }
};

struct ParsedResults {
    std::string config_hash;
    std::vector<ResultRow> rows;
};

inline ParsedResults parse_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("results: cannot open " + path);
    ParsedResults out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# config=", 0) == 0) {
            out.config_hash = line.substr(9);
            continue;
        }
        if (!header_seen) {
            if (line != results_csv_header)
                throw std::runtime_error("results: unexpected header in " + path);
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 10) throw std::runtime_error("results: malformed row: " + line);
        ResultRow row;
        row.model = fields[0];
        if (fields[1] == "expect") row.method = Method::Expect;
        else if (fields[1] == "mc_full") row.method = Method::McFullBasis;
        else if (fields[1] == "mc_sz") row.method = Method::McSzOnly;
        else throw std::runtime_error("results: unknown method " + fields[1]);
        row.n = std::stoi(fields[2]);
        row.tau_q = std::stod(fields[3]);
        row.point.n_sites = row.n;
        row.point.tau_q = row.tau_q;
        row.point.method = row.method;
        row.point.eta = std::stod(fields[4]);
        if (!fields[5].empty()) row.point.eta_partial = std::stod(fields[5]);
        row.point.stderr_val = std::stod(fields[6]);
        row.point.chi_m = std::stol(fields[7]);
        row.point.wall_seconds = std::stod(fields[8]);
        row.status = fields[9];
        out.rows.push_back(std::move(row));
    }
    return out;
}

// --- fitting a result set ----------------------------------------------------

inline nlohmann::json fit_rows(const std::vector<ResultRow>& rows, const RunConfig& cfg) {
    nlohmann::json report;
    report["config_hash"] = hash_hex(cfg.hash());
    report["version"] = version_string;
    for (Method method : cfg.methods) {
        std::map<int, std::vector<FitPoint>> per_n;
        for (const auto& row : rows) {
            if (row.method != method || row.status != "ok") continue;
            per_n[row.n].push_back({row.tau_q, row.point.eta, row.point.stderr_val});
        }
        nlohmann::json entry;
        try {
            FitResult fit = analyze_sweep(per_n, cfg.window, cfg.extrapolation);
            entry = fit_result_json(fit);
            if (cfg.has_long_window) {
                nlohmann::json regimes = nlohmann::json::array();
                for (const auto& [n, points] : per_n) {
                    auto [short_fit, long_fit] =
                        two_regime_fit(points, cfg.window, cfg.long_window);
                    regimes.push_back({{"n", n},
                                       {"mu_sq", short_fit.mu},
                                       {"sigma_sq", short_fit.sigma},
                                       {"mu_lq", long_fit.mu},
                                       {"sigma_lq", long_fit.sigma}});
                }
                entry["two_regime"] = regimes;
            }
        } catch (const std::exception& e) {
            entry = {{"status", std::string("insufficient points: ") + e.what()}};
        }
        report[method_name(method)] = entry;
    }
    return report;
}

inline void write_plot_data(const std::vector<ResultRow>& rows, const RunConfig& cfg,
                            const std::filesystem::path& dir) {
    for (Method method : cfg.methods) {
        std::map<int, std::vector<FitPoint>> per_n;
        for (const auto& row : rows) {
            if (row.method != method || row.status != "ok") continue;
            per_n[row.n].push_back({row.tau_q, row.point.eta, row.point.stderr_val});
        }
        for (const auto& [n, points] : per_n) {
            try {
                PowerLawFit fit = fit_power_law(points, cfg.window);
                std::ofstream out(dir / ("plot_" + method_name(method) + "_n" +
                                         std::to_string(n) + ".csv"));
                out << "# config=" << hash_hex(cfg.hash()) << "\n" << plot_data_csv(fit);
            } catch (const std::exception&) {
                // not enough points for this size; skip the figure file
            }
        }
    }
}

// --- the sweep driver --------------------------------------------------------

struct SweepCaches {
    std::map<int, Mps> initial;
    std::map<int, Mps> final_ground;  // eta_effective reference states
};

inline SweepCaches prepare_caches(const RunConfig& cfg, int workers, std::ostream& log) {
    SweepCaches caches;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::vector<int> sizes = cfg.n_list;

    auto work = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= sizes.size()) return;
            const int n = sizes[k];
            QuenchProtocol p = cfg.protocol_for(cfg.tau_list.front());
            Mps initial = prepare_initial_state(cfg.model, p, n, cfg.chi_max, cfg.trunc_cutoff);
            std::optional<Mps> ground;
            if (cfg.use_eta_effective) {
                DmrgConfig dcfg;
                dcfg.chi_max = cfg.chi_max;
                dcfg.trunc_cutoff = std::min(cfg.trunc_cutoff, 1e-10);
                ground = ground_state(cfg.model, p, window_end(p), n, dcfg).state;
            }
            std::lock_guard<std::mutex> lock(mu);
            caches.initial.emplace(n, std::move(initial));
            if (ground) caches.final_ground.emplace(n, std::move(*ground));
            log << "prepared initial state for n=" << n << "\n";
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(sizes.size())); ++w)
        pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return caches;
}

// One (n, tau_q) evolution with every requested method estimated from the
// shared final state.
inline std::vector<ResultRow> run_cell(const RunConfig& cfg, const SweepCaches& caches, int n,
                                       double tau_q, int mc_threads) {
    std::vector<ResultRow> rows;
    const std::string model = model_name(cfg.model);
    try {
        QuenchProtocol protocol = cfg.protocol_for(tau_q);
        Mps initial = caches.initial.at(n);
        initial.set_chi_max(cfg.chi_max);
        initial.set_trunc_cutoff(cfg.trunc_cutoff);

        EvolveOptions opts;
        opts.swap_plan = cfg.swap_plan;
        opts.half_swap_block = cfg.half_swap_block;
        auto [final_state, record] = evolve(std::move(initial), cfg.model, protocol, opts);
        const ErrorBasis basis = error_basis_for(cfg.model, n);

        for (Method method : cfg.methods) {
            ResultRow row;
            row.model = model;
            row.method = method;
            row.n = n;
            row.tau_q = tau_q;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                if (method == Method::Expect) {
                    row.point = cfg.use_eta_effective
                                    ? eta_effective(final_state, caches.final_ground.at(n), basis)
                                    : eta_expectation(final_state, basis, cfg.record_partial);
                } else {
                    McOptions mc;
                    mc.n_trajectories = cfg.n_traj;
                    mc.base_seed = cfg.seed;
                    mc.tau_q_seed_key = tau_q;
                    mc.threads = mc_threads;
                    auto [point, hist] = eta_monte_carlo(final_state, cfg.model, basis, method, mc);
                    row.point = point;
                    std::ostringstream name;
                    name << "hist_" << method_name(method) << "_n" << n << "_tau"
                         << format_double(tau_q) << ".csv";
                    std::ofstream hist_out(std::filesystem::path(cfg.output_dir) / name.str());
                    hist_out << histogram_csv(hist);
                }
            } catch (const std::exception& e) {
                row.status = std::string("failed:") + e.what();
            }
            row.point.n_sites = n;
            row.point.tau_q = tau_q;
            row.point.method = method;
            row.point.chi_m = record.chi_m;
            row.point.wall_seconds =
                record.wall_seconds +
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back(std::move(row));
        }
    } catch (const std::exception& e) {
        for (Method method : cfg.methods) {
            ResultRow row;
            row.model = model;
            row.method = method;
            row.n = n;
            row.tau_q = tau_q;
            row.status = std::string("failed:") + e.what();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// Runs the sweep: one worker per (n, tau_q) cell, all methods sharing the
// cell's evolution, rows streamed to the CSV in deterministic config
// order. Returns 0 on full success, 1 if any run failed.
inline int run_sweep(const RunConfig& cfg, bool resume, std::ostream& log) {
    validate_config(cfg);
    const int workers = resolve_workers(cfg);
    const std::string hash = hash_hex(cfg.hash());
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path csv_path = std::filesystem::path(cfg.output_dir) / "results.csv";

    // resume bookkeeping: runs already recorded with ok status are kept
    std::set<std::string> done;
    std::vector<ResultRow> kept_rows;
    const bool existing = std::filesystem::exists(csv_path);
    if (existing) {
        ParsedResults previous = parse_results_csv(csv_path.string());
        if (previous.config_hash != hash)
            throw std::invalid_argument(
                "sweep: output directory holds results for a different config (hash " +
                previous.config_hash + " vs " + hash + ")");
        if (resume) {
            for (const auto& row : previous.rows)
                if (row.status == "ok") {
                    done.insert(method_name(row.method) + "/" + std::to_string(row.n) + "/" +
                                format_double(row.tau_q));
                    kept_rows.push_back(row);
                }
        }
    }

    struct Cell {
        int n;
        double tau_q;
        bool needed;
    };
    std::vector<Cell> cells;
    for (int n : cfg.n_list)
        for (double tau : cfg.tau_list) {
            bool needed = false;
            for (Method m : cfg.methods)
                needed = needed || !done.count(method_name(m) + "/" + std::to_string(n) + "/" +
                                               format_double(tau));
            cells.push_back({n, tau, needed});
        }

    const auto t_start = std::chrono::steady_clock::now();
    log << "sweep: " << cells.size() << " cells, " << workers << " workers, config " << hash
        << "\n";
    SweepCaches caches = prepare_caches(cfg, workers, log);

    std::ofstream csv;
    if (resume && existing) {
        csv.open(csv_path, std::ios::app);
    } else {
        csv.open(csv_path, std::ios::trunc);
        csv << "# config=" << hash << "\n" << results_csv_header << "\n";
        csv.flush();
    }

    std::vector<std::optional<std::vector<ResultRow>>> results(cells.size());
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cells.size()) return;
            std::vector<ResultRow> rows;
            if (cells[k].needed) {
                const long remaining = static_cast<long>(cells.size()) - static_cast<long>(k) - 1;
                const int mc_threads =
                    remaining + 1 < workers ? workers - static_cast<int>(remaining) : 1;
                rows = run_cell(cfg, caches, cells[k].n, cells[k].tau_q, mc_threads);
            }
            {
                std::lock_guard<std::mutex> lock(mu);
                results[k] = std::move(rows);
            }
            cv.notify_one();
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);

    bool any_failed = false;
    std::vector<ResultRow> all_rows = kept_rows;
    {
        std::unique_lock<std::mutex> lock(mu);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            cv.wait(lock, [&] { return results[k].has_value(); });
            for (const auto& row : *results[k]) {
                const std::string key = method_name(row.method) + "/" +
                                        std::to_string(row.n) + "/" + format_double(row.tau_q);
                if (done.count(key)) continue;
                csv << row.csv() << "\n";
                csv.flush();
                any_failed = any_failed || row.status != "ok";
                all_rows.push_back(row);
                log << "row " << row.csv() << "\n";
            }
            results[k].reset();  // free memory early
        }
    }
    for (auto& t : pool) t.join();

    // fit + figure data + provenance
    nlohmann::json fits = fit_rows(all_rows, cfg);
    {
        std::ofstream out(std::filesystem::path(cfg.output_dir) / "fit.json");
        out << fits.dump(2) << "\n";
    }
    write_plot_data(all_rows, cfg, cfg.output_dir);
    {
        nlohmann::json meta;
        meta["config_hash"] = hash;
        meta["version"] = version_string;
        meta["workers"] = workers;
        meta["canonical_config"] = cfg.canonical_text();
        meta["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        meta["runs"] = nlohmann::json::array();
        for (const auto& row : all_rows)
            meta["runs"].push_back({{"method", method_name(row.method)},
                                    {"n", row.n},
                                    {"tau_q", row.tau_q},
                                    {"chi_m", row.point.chi_m},
                                    {"wall_s", row.point.wall_seconds},
                                    {"status", row.status}});
        std::ofstream out(std::filesystem::path(cfg.output_dir) / "meta.json");
        out << meta.dump(2) << "\n";
    }
    return any_failed ? 1 : 0;
}

// --- bench -------------------------------------------------------------------

// Per-method time-to-solution of the defect-density computation, single
// threaded for fairness; the evolution cost is reported alongside.
inline int run_bench(const RunConfig& cfg, std::ostream& out) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream csv(std::filesystem::path(cfg.output_dir) / "bench.csv");
    csv << "# config=" << hash_hex(cfg.hash()) << "\n";
    csv << "axis,n,tau_q,method,evolve_s,estimate_s,chi_m\n";

    auto bench_point = [&](const char* axis, int n, double tau) {
        QuenchProtocol protocol = cfg.protocol_for(tau);
        Mps initial = prepare_initial_state(cfg.model, protocol, n, cfg.chi_max,
                                            cfg.trunc_cutoff);
        auto [final_state, record] = evolve(std::move(initial), cfg.model, protocol);
        const ErrorBasis basis = error_basis_for(cfg.model, n);
        for (Method method : cfg.methods) {
            const auto t0 = std::chrono::steady_clock::now();
            if (method == Method::Expect) {
                (void)eta_expectation(final_state, basis, cfg.record_partial);
            } else {
                McOptions mc;
                mc.n_trajectories = cfg.n_traj;
                mc.base_seed = cfg.seed;
                mc.tau_q_seed_key = tau;
                mc.threads = 1;
                (void)eta_monte_carlo(final_state, cfg.model, basis, method, mc);
            }
            const double est =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            csv << axis << ',' << n << ',' << format_double(tau) << ',' << method_name(method)
                << ',' << format_double(record.wall_seconds) << ',' << format_double(est) << ','
                << record.chi_m << "\n";
            csv.flush();
            out << axis << " n=" << n << " tau_q=" << tau << " " << method_name(method)
                << ": evolve " << record.wall_seconds << " s, estimate " << est << " s\n";
        }
    };

    const double fixed_tau = cfg.tau_list.front();
    for (int n : cfg.n_list) bench_point("vary_n", n, fixed_tau);
    const int fixed_n = cfg.n_list.back();
    for (double tau : cfg.tau_list) bench_point("vary_tau", fixed_n, tau);
    return 0;
}

// --- oracle corpus -----------------------------------------------------------

struct OracleCase {
    std::string name;
    ModelSpec model;
    double g_start = defaults::ramp_start;
    SwapPlan swap_plan = SwapPlan::None;
    bool effective = false;  // compare eta_eff instead of eta
    int n = 8;
    double tau_q = 4.0;
    double dt = defaults::dt;
};

inline std::vector<OracleCase> oracle_cases() {
    std::vector<OracleCase> cases;
    auto add = [&](std::string name, ModelSpec m, auto... mods) {
        OracleCase c;
        c.name = std::move(name);
        c.model = m;
        (mods(c), ...);
        cases.push_back(c);
    };
    ModelSpec tfim;
    add("tfim_forward", tfim);
    ModelSpec tfim_rev = tfim;
    tfim_rev.direction = Direction::Reverse;
    add("tfim_reverse", tfim_rev);
    ModelSpec inhom;
    inhom.kind = ModelKind::TFIM_INHOM;
    inhom.alpha = 0.5;
    inhom.q = 2.0;
    add("tfim_inhom", inhom);
    ModelSpec ssh;
    ssh.kind = ModelKind::SSH;
    add("ssh_forward", ssh);
    ModelSpec essh;
    essh.kind = ModelKind::ESSH;
    essh.delta = 1.0;
    add("essh_delta1", essh);
    essh.delta = 3.0;
    add("essh_delta3", essh);
    ModelSpec afm;
    afm.kind = ModelKind::ESSH;
    afm.essh_ramp = EsshRamp::Anisotropy;
    afm.v = 1.0;
    afm.w = 2.0;
    add("essh_afm_spt", afm, [](OracleCase& c) { c.effective = true; });
    ModelSpec rev;
    rev.kind = ModelKind::ESSH;
    rev.direction = Direction::Reverse;
    rev.delta = 0.5;
    add("essh_reverse", rev);
    ModelSpec dig;
    dig.kind = ModelKind::ESSH_DIGITAL;
    dig.delta = 3.0;
    add("essh_digital", dig);
    add("essh_digital_halfswap", dig, [](OracleCase& c) { c.swap_plan = SwapPlan::Half; });
    add("essh_digital_fullswap", dig, [](OracleCase& c) { c.swap_plan = SwapPlan::Full; });
    return cases;
}

inline double oracle_dense_eta(const OracleCase& c) {
    QuenchProtocol p = make_protocol(c.model, c.tau_q, c.dt, c.g_start);
    DenseState initial = prepare_initial_dense(c.model, p, c.n);
    DenseState final_state = evolve_dense(initial, c.model, p, c.swap_plan);
    const ErrorBasis basis = error_basis_for(c.model, c.n);
    double eta = dense_eta(final_state, basis).eta;
    if (c.effective) {
        DenseState ground = dense_ground_state(c.model, p, window_end(p), c.n).first;
        eta -= dense_eta(ground, basis).eta;
    }
    return eta;
}

inline double oracle_mps_eta(const OracleCase& c, double cutoff = 1e-12) {
    QuenchProtocol p = make_protocol(c.model, c.tau_q, c.dt, c.g_start);
    // default is the kernel-headroom cutoff; the production cutoff's
    // per-gate discarded weight accumulates past 1e-6 over a full window
    Mps initial = prepare_initial_state(c.model, p, c.n, 256, cutoff);
    EvolveOptions opts;
    opts.swap_plan = c.swap_plan;
    auto [final_state, record] = evolve(std::move(initial), c.model, p, opts);
    const ErrorBasis basis = error_basis_for(c.model, c.n);
    if (c.effective) {
        DmrgConfig dcfg;
        dcfg.trunc_cutoff = 1e-12;
        dcfg.energy_tol = 1e-12;
        Mps ground = ground_state(c.model, p, window_end(p), c.n, dcfg).state;
        return eta_expectation(final_state, basis).eta - eta_expectation(ground, basis).eta;
    }
    return eta_expectation(final_state, basis).eta;
}

inline nlohmann::json oracle_case_json(const OracleCase& c, double eta) {
    nlohmann::json j;
    j["model"] = {{"kind", model_name(c.model)},
                  {"direction", c.model.direction == Direction::Forward ? "forward" : "reverse"},
                  {"essh_ramp",
                   c.model.essh_ramp == EsshRamp::Hopping ? "hopping" : "anisotropy"},
                  {"delta", c.model.delta},
                  {"v", c.model.v},
                  {"w", c.model.w},
                  {"j0", c.model.j0},
                  {"alpha", c.model.alpha},
                  {"q", c.model.q}};
    QuenchProtocol p = make_protocol(c.model, c.tau_q, c.dt, c.g_start);
    j["protocol"] = {{"schedule", p.schedule == Schedule::LinearSingle    ? "linear_single"
                                  : p.schedule == Schedule::TwoHamRamp ? "two_ham_ramp"
                                                                        : "inhom_ramp"},
                     {"g_start", c.g_start},
                     {"swap_plan", swap_plan_name(c.swap_plan)},
                     {"effective", c.effective}};
    j["n"] = c.n;
    j["tau_q"] = c.tau_q;
    j["dt"] = c.dt;
    j["eta"] = eta;
    return j;
}

// Regenerates or checks the golden corpus, then verifies MPS/dense
// equivalence case by case. Nonzero exit names the offending case.
inline int run_oracle_check(const std::string& golden_dir, bool regenerate, std::ostream& out,
                            double mps_tolerance = 1e-6) {
    std::filesystem::create_directories(golden_dir);
    int failures = 0;
    double worst = 0.0;
    for (const OracleCase& c : oracle_cases()) {
        const std::filesystem::path path =
            std::filesystem::path(golden_dir) / ("golden_" + c.name + ".json");
        const double eta_dense_value = oracle_dense_eta(c);
        if (regenerate) {
            std::ofstream file(path);
            file << oracle_case_json(c, eta_dense_value).dump(2) << "\n";
            out << "regenerated " << path.string() << " eta=" << format_double(eta_dense_value)
                << "\n";
        } else {
            std::ifstream file(path);
            if (!file) {
                out << "FAIL " << c.name << ": golden file missing: " << path.string() << "\n";
                ++failures;
                continue;
            }
            nlohmann::json j;
            file >> j;
            const double golden = j.at("eta").get<double>();
            if (std::abs(golden - eta_dense_value) > 1e-9) {
                out << "FAIL " << c.name << ": dense eta " << format_double(eta_dense_value)
                    << " deviates from golden " << format_double(golden) << "\n";
                ++failures;
                continue;
            }
        }
        const double eta_mps_value = oracle_mps_eta(c);
        const double dev = std::abs(eta_mps_value - eta_dense_value);
        worst = std::max(worst, dev);
        if (dev > mps_tolerance) {
            out << "FAIL " << c.name << ": |eta_mps - eta_dense| = " << format_double(dev)
                << " above " << format_double(mps_tolerance) << "\n";
            ++failures;
        } else {
            out << "ok   " << c.name << ": dense=" << format_double(eta_dense_value)
                << " mps=" << format_double(eta_mps_value) << " dev=" << format_double(dev)
                << "\n";
        }
    }
    out << "oracle-check: worst deviation " << format_double(worst) << ", " << failures
        << " failure(s)\n";
    return failures == 0 ? 0 : 1;
}

} // namespace kz
