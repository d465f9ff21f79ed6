// kz: quench-dynamics laboratory for defect scaling in driven spin chains.
//
// Subcommands: sweep, fit, bench, oracle-check, plot-data, circuit-export.
// Exit codes: 0 success, 1 run failures, 2 configuration errors.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "kz/config.hpp"
#include "kz/digital.hpp"
#include "kz/sweep.hpp"
#include "kz/version.hpp"

namespace {

std::string config_keys_help() {
    std::string out = "Config file keys ([section] headers, key = value lines):\n";
    for (const auto& [key, help] : kz::config_key_help())
        out += "  " + key + ": " + help + "\n";
    return out;
}

} // namespace

int main(int argc, char** argv) {
    kz::pin_blas_single_thread();

    CLI::App app{"kz - Kibble-Zurek defect-scaling laboratory"};
    app.set_version_flag("--version", kz::version_string);
    app.footer(config_keys_help());
    app.require_subcommand(1);

    std::string config_path, csv_path, out_path, golden_dir = "data/golden";
    bool resume = false, regenerate = false, decomposed = false;

    auto* sweep_cmd = app.add_subcommand("sweep", "run the (N, tau_Q) grid and fit");
    sweep_cmd->add_option("--config", config_path, "config file")->required();
    sweep_cmd->add_flag("--resume", resume, "complete only missing runs");

    auto* fit_cmd = app.add_subcommand("fit", "re-fit an existing results CSV");
    fit_cmd->add_option("--config", config_path, "config file")->required();
    fit_cmd->add_option("--csv", csv_path, "results.csv path (default from config)");

    auto* bench_cmd = app.add_subcommand("bench", "single-threaded time-to-solution profile");
    bench_cmd->add_option("--config", config_path, "config file")->required();

    auto* oracle_cmd = app.add_subcommand("oracle-check", "MPS vs dense equivalence corpus");
    oracle_cmd->add_option("--golden", golden_dir, "golden file directory");
    oracle_cmd->add_flag("--regenerate", regenerate, "rewrite golden files from the oracle");

    auto* plot_cmd = app.add_subcommand("plot-data", "emit per-figure CSVs from a results CSV");
    plot_cmd->add_option("--config", config_path, "config file")->required();
    plot_cmd->add_option("--csv", csv_path, "results.csv path (default from config)");

    auto* circuit_cmd = app.add_subcommand("circuit-export", "write the digital-protocol circuit");
    circuit_cmd->add_option("--config", config_path, "config file")->required();
    circuit_cmd->add_option("--out", out_path, "output file (default stdout)");
    circuit_cmd->add_flag("--decomposed", decomposed, "emit CNOT/RZ/RY lines");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep_cmd->parsed()) {
            kz::RunConfig cfg = kz::load_config(config_path);
            return kz::run_sweep(cfg, resume, std::cout);
        }
        if (fit_cmd->parsed() || plot_cmd->parsed()) {
            kz::RunConfig cfg = kz::load_config(config_path);
            kz::validate_config(cfg);
            if (csv_path.empty())
                csv_path = (std::filesystem::path(cfg.output_dir) / "results.csv").string();
            kz::ParsedResults results = kz::parse_results_csv(csv_path);
            if (results.config_hash != kz::hash_hex(cfg.hash()))
                throw std::invalid_argument("results CSV was produced by a different config");
            if (fit_cmd->parsed()) {
                nlohmann::json report = kz::fit_rows(results.rows, cfg);
                std::filesystem::create_directories(cfg.output_dir);
                std::ofstream out(std::filesystem::path(cfg.output_dir) / "fit.json");
                out << report.dump(2) << "\n";
                std::cout << report.dump(2) << "\n";
            } else {
                std::filesystem::create_directories(cfg.output_dir);
                kz::write_plot_data(results.rows, cfg, cfg.output_dir);
                std::cout << "plot data written to " << cfg.output_dir << "\n";
            }
            return 0;
        }
        if (bench_cmd->parsed()) {
            kz::RunConfig cfg = kz::load_config(config_path);
            return kz::run_bench(cfg, std::cout);
        }
        if (oracle_cmd->parsed()) {
            return kz::run_oracle_check(golden_dir, regenerate, std::cout);
        }
        if (circuit_cmd->parsed()) {
            kz::RunConfig cfg = kz::load_config(config_path);
            kz::validate_config(cfg);
            kz::QuenchProtocol protocol = cfg.protocol_for(cfg.tau_list.front());
            kz::CompiledCircuit circuit =
                kz::compile_digital(cfg.model, protocol, cfg.n_list.front());
            kz::inject_swaps(circuit, cfg.swap_plan, cfg.half_swap_block);
            const std::string text = kz::export_circuit_text(circuit, decomposed);
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(out_path);
                out << text;
            }
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
