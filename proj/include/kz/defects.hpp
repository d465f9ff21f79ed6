#pragma once

#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "kz/models.hpp"
#include "kz/mps.hpp"
#include "kz/rng.hpp"
#include "kz/sampling.hpp"

namespace kz {

enum class Method { Expect, McFullBasis, McSzOnly };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Expect: return "expect";
        case Method::McFullBasis: return "mc_full";
        case Method::McSzOnly: return "mc_sz";
    }
    return "?";
}

struct SweepPoint {
    int n_sites = 0;
    double tau_q = 0.0;
    Method method = Method::Expect;
    double eta = 0.0;
    std::optional<double> eta_partial;
    double stderr_val = 0.0;   // 0 for projector expectations
    long n_trajectories = 0;
    long chi_m = 0;
    double wall_seconds = 0.0;
};

struct DefectHistogram {
    std::map<long, long> counts;
    long n_trajectories = 0;
    double kappa1 = 0.0;  // mean defect number
    double kappa2 = 0.0;  // variance of the defect number
};

// Method 1: defect density from reference-projector expectations,
// eta = (1/N) sum_cells (1 - <P_ref>). The optional partial density keeps
// only the density-fluctuation projectors.
inline SweepPoint eta_expectation(const Mps& state, const ErrorBasis& basis,
                                  bool with_partial = false) {
    const int n = state.n_sites();
    Mps work = state;  // center moves during the sweep; input stays frozen
    const ComplexMatrix p_ref = basis.reference_projector();
    const ComplexMatrix p_density = basis.density_projector();

    double errors = 0.0;
    double density = 0.0;
    for (int first : basis.cell_first) {
        work.move_center_to(first);
        errors += 1.0 - work.expect_hermitian(LocalOperator(first, p_ref));
        if (with_partial && !basis.density.empty())
            density += work.expect_hermitian(LocalOperator(first, p_density));
    }

    SweepPoint point;
    point.n_sites = n;
    point.method = Method::Expect;
    point.eta = errors / n;
    if (with_partial && !basis.density.empty()) point.eta_partial = density / n;
    point.chi_m = state.max_bond_dim();
    return point;
}

// Corrected defect density for quenches whose final ground state carries
// intrinsic reference-projector weight: eta_eff = eta(final) - eta(ground).
inline SweepPoint eta_effective(const Mps& final_state, const Mps& ground,
                                const ErrorBasis& basis) {
    if (final_state.n_sites() != ground.n_sites())
        throw std::invalid_argument("eta_effective: length mismatch");
    SweepPoint point = eta_expectation(final_state, basis);
    const double eta_ground = eta_expectation(ground, basis).eta;
    double eta_eff = point.eta - eta_ground;
    if (eta_eff < -1e-10)
        throw std::runtime_error(
            "eta_effective: negative beyond tolerance; ground state does not match the "
            "protocol's final Hamiltonian");
    if (eta_eff < 0.0) {
        std::cerr << "eta_effective: clipping small negative value " << eta_eff << " to 0\n";
        eta_eff = 0.0;
    }
    point.eta = eta_eff;
    point.eta_partial.reset();
    return point;
}

namespace detail {

struct SamplingSetup {
    std::vector<CellBasis> cells;
    // indices into `cells` of the cells that count toward the defect
    // number; empty for bitstring post-processing models.
    std::vector<std::size_t> counted;
    bool count_domain_walls = false;  // TFIM-family sigma_z post-processing
    bool density_pairs = false;       // SSH-family sigma_z post-processing
    std::vector<int> pair_first;      // cell sites for density_pairs counting
};

inline CellBasis sigma_z_cell(int site) {
    CellBasis c;
    c.first_site = site;
    c.span = 1;
    c.labels = {"0", "1"};
    ComplexVector up(2), down(2);
    up << 1, 0;
    down << 0, 1;
    c.kets = {up, down};
    return c;
}

inline SamplingSetup sampling_setup(const ModelSpec& m, const ErrorBasis& basis, Method method,
                                    int n) {
    SamplingSetup setup;
    const bool ssh = is_ssh_family(m.kind);
    const bool tfim = m.kind == ModelKind::TFIM || m.kind == ModelKind::TFIM_INHOM;

    if (method == Method::McSzOnly) {
        if (!(tfim && m.direction == Direction::Forward) && !ssh)
            throw std::invalid_argument(
                "eta_monte_carlo: sigma_z sampling unsupported for this model/direction");
        for (int i = 0; i < n; ++i) setup.cells.push_back(sigma_z_cell(i));
        if (tfim) {
            setup.count_domain_walls = true;
        } else {
            setup.density_pairs = true;
            setup.pair_first = basis.cell_first;
        }
        return setup;
    }

    if (basis.cells_overlap)
        throw std::invalid_argument(
            "eta_monte_carlo: projector windows overlap; sampling needs a cell partition");

    int next = 0;
    for (int first : basis.cell_first) {
        while (next < first) setup.cells.push_back(sigma_z_cell(next++));
        CellBasis cell;
        cell.first_site = first;
        cell.span = basis.cell_size;
        cell.labels = basis.labels;
        cell.kets = basis.kets;
        setup.counted.push_back(setup.cells.size());
        setup.cells.push_back(std::move(cell));
        next = first + basis.cell_size;
    }
    while (next < n) setup.cells.push_back(sigma_z_cell(next++));
    return setup;
}

} // namespace detail

struct McOptions {
    long n_trajectories = 1000;
    std::uint64_t base_seed = 1;
    double tau_q_seed_key = 0.0;  // folded into per-trajectory seeds
    int threads = 1;
};

// Method 2: Monte-Carlo sampling in the error basis (or sigma_z-only shot
// simulation), returning the defect density plus the defect-number
// histogram and its first two cumulants.
inline std::pair<SweepPoint, DefectHistogram> eta_monte_carlo(const Mps& state,
                                                              const ModelSpec& model,
                                                              const ErrorBasis& basis,
                                                              Method method,
                                                              const McOptions& opts) {
    if (method == Method::Expect)
        throw std::invalid_argument("eta_monte_carlo: use eta_expectation for Method 1");
    if (opts.n_trajectories < 1)
        throw std::invalid_argument("eta_monte_carlo: need at least one trajectory");

    const int n = state.n_sites();
    detail::SamplingSetup setup = detail::sampling_setup(model, basis, method, n);
    validate_cells(n, setup.cells);

    Mps frozen = state;
    frozen.canonicalize(0);

    // reference outcomes resolved to indices once
    std::vector<char> is_reference(basis.labels.size(), 0);
    std::vector<char> is_density(basis.labels.size(), 0);
    for (int r : basis.reference) is_reference[r] = 1;
    for (int d : basis.density) is_density[d] = 1;

    const long m_traj = opts.n_trajectories;
    std::vector<long> defect_count(m_traj, 0);
    std::vector<long> density_count(m_traj, 0);

    auto run_range = [&](long begin, long end) {
        std::vector<int> outcomes;
        for (long k = begin; k < end; ++k) {
            SplitMix64 rng(trajectory_seed(opts.base_seed, n, opts.tau_q_seed_key, k));
            outcomes = sample_once(frozen, setup.cells, rng, false);
            long defects = 0, density = 0;
            if (setup.count_domain_walls) {
                for (int b = 0; b + 1 < n; ++b)
                    if (outcomes[b] != outcomes[b + 1]) ++defects;
            } else if (setup.density_pairs) {
                for (int first : setup.pair_first)
                    if (outcomes[first] == outcomes[first + 1]) ++defects;
                density = defects;
            } else {
                for (std::size_t idx : setup.counted) {
                    const int out = outcomes[idx];
                    if (!is_reference[out]) ++defects;
                    if (is_density[out]) ++density;
                }
            }
            defect_count[k] = defects;
            density_count[k] = density;
        }
    };

    const int threads = std::max(1, opts.threads);
    if (threads == 1 || m_traj < 2 * threads) {
        run_range(0, m_traj);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (m_traj + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const long begin = w * chunk;
            const long end = std::min(m_traj, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    // reductions in fixed index order
    DefectHistogram hist;
    hist.n_trajectories = m_traj;
    double sum = 0.0, density_sum = 0.0;
    for (long k = 0; k < m_traj; ++k) {
        ++hist.counts[defect_count[k]];
        sum += static_cast<double>(defect_count[k]);
        density_sum += static_cast<double>(density_count[k]);
    }
    const double mean = sum / static_cast<double>(m_traj);
    double var = 0.0;
    for (long k = 0; k < m_traj; ++k) {
        const double d = static_cast<double>(defect_count[k]) - mean;
        var += d * d;
    }
    hist.kappa1 = mean;
    hist.kappa2 = var / static_cast<double>(m_traj);

    SweepPoint point;
    point.n_sites = n;
    point.method = method;
    point.eta = mean / n;
    point.n_trajectories = m_traj;
    point.chi_m = state.max_bond_dim();
    if (m_traj > 1)
        point.stderr_val = std::sqrt(var / static_cast<double>(m_traj - 1)) /
                           (std::sqrt(static_cast<double>(m_traj)) * n);
    if (!setup.counted.empty() && !basis.density.empty())
        point.eta_partial = density_sum / static_cast<double>(m_traj) / n;
    return {point, hist};
}

inline std::string histogram_csv(const DefectHistogram& hist) {
    std::string out = "defects,count\n";
    for (const auto& [defects, count] : hist.counts)
        out += std::to_string(defects) + "," + std::to_string(count) + "\n";
    return out;
}

} // namespace kz
