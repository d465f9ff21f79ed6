#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kz/defects.hpp"
#include "kz/dmrg.hpp"
#include "kz/models.hpp"
#include "kz/mps.hpp"

namespace kz {

enum class SwapPlan { None, Half, Full };

inline std::string swap_plan_name(SwapPlan p) {
    switch (p) {
        case SwapPlan::None: return "none";
        case SwapPlan::Half: return "half";
        case SwapPlan::Full: return "full";
    }
    return "?";
}

struct TruncationEvent {
    long step = 0;
    int bond = 0;
    double discarded_weight = 0.0;
};

struct EvolutionRecord {
    std::vector<double> times;           // end time of each step
    std::vector<long> chi_max_reached;   // per step
    std::vector<double> eta_trace;       // per step, when requested
    std::vector<TruncationEvent> saturation_log;
    long chi_m = 1;                      // maximum over the whole evolution
    double wall_seconds = 0.0;
};

struct EvolveOptions {
    bool record_eta_trace = false;
    SwapPlan swap_plan = SwapPlan::None;
    int half_swap_block = 2;  // which block tag receives SWAPs in Half mode
};

inline ComplexMatrix swap_gate() {
    ComplexMatrix s = ComplexMatrix::Zero(4, 4);
    s(0, 0) = s(1, 2) = s(2, 1) = s(3, 3) = 1.0;
    return s;
}

// SWAP-noise injection: prepend a SWAP to every gate of the selected
// blocks. Half -> only the block tagged `half_block`; Full -> blocks 1
// and 2. Only meaningful for SSH-family two-site layers.
inline void apply_swap_plan(std::vector<GateLayer>& layers, SwapPlan plan,
                            const ModelSpec& model, int half_block = 2) {
    if (plan == SwapPlan::None) return;
    if (!is_ssh_family(model.kind))
        throw std::invalid_argument("swap injection: supported for SSH-family layers only");
    if (half_block != 1 && half_block != 2)
        throw std::invalid_argument("swap injection: block tag must be 1 or 2");
    static const ComplexMatrix swap = swap_gate();
    for (auto& layer : layers)
        for (auto& g : layer.gates) {
            if (g.span != 2)
                throw std::invalid_argument("swap injection: needs two-site layers");
            const bool hit = plan == SwapPlan::Full ? (g.block_tag == 1 || g.block_tag == 2)
                                                    : g.block_tag == half_block;
            if (hit) g.u = ComplexMatrix(g.u * swap);  // SWAP acts first
        }
}

// TEBD evolution of `state` across the protocol window. Layers are applied
// in alternating sweep directions to keep orthogonality-center movement
// linear in N per step.
inline std::pair<Mps, EvolutionRecord> evolve(Mps state, const ModelSpec& model,
                                              const QuenchProtocol& protocol,
                                              const EvolveOptions& opts = {}) {
    const auto t_begin = std::chrono::steady_clock::now();
    const int n = state.n_sites();
    validate_model(model, n);

    const ErrorBasis trace_basis =
        opts.record_eta_trace ? error_basis_for(model, n) : ErrorBasis{};

    EvolutionRecord record;
    const auto steps = time_steps(protocol);
    long step_index = 0;
    for (const TimeStep& step : steps) {
        auto layers = trotter_layers(model, protocol, step.t, step.dt, n);
        apply_swap_plan(layers, opts.swap_plan, model, opts.half_swap_block);

        long chi_step = 1;
        for (const auto& layer : layers) {
            if (layer.gates.empty()) continue;
            const bool span1 = layer.gates.front().span == 1;
            const bool descending =
                !span1 && state.ortho_center() > layer.gates.back().first_site;
            const auto apply_gate = [&](const Gate& g) {
                TruncationInfo info;
                if (g.span == 1) {
                    state.apply_one_site_gate(g.first_site, g.u);
                    return;
                }
                if (g.span == 2) {
                    info = state.apply_two_site_gate(
                        g.first_site, g.u,
                        descending ? MoveCenter::Left : MoveCenter::Right);
                } else {
                    info = state.apply_three_site_gate(g.first_site, g.u);
                }
                chi_step = std::max(chi_step, info.chi);
                if (info.saturated && info.discarded_weight > state.trunc_cutoff())
                    record.saturation_log.push_back(
                        {step_index, g.first_site, info.discarded_weight});
            };
            if (descending) {
                for (auto it = layer.gates.rbegin(); it != layer.gates.rend(); ++it)
                    apply_gate(*it);
            } else {
                for (const auto& g : layer.gates) apply_gate(g);
            }
        }

        chi_step = std::max(chi_step, state.max_bond_dim());
        record.times.push_back(step.t + step.dt);
        record.chi_max_reached.push_back(chi_step);
        record.chi_m = std::max(record.chi_m, chi_step);
        if (opts.record_eta_trace)
            record.eta_trace.push_back(eta_expectation(state, trace_basis).eta);

        if (!std::isfinite(state.norm()))
            throw std::runtime_error("evolve: state became non-finite at step " +
                                     std::to_string(step_index));
        ++step_index;
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return {std::move(state), std::move(record)};
}

// <psi|H(t)|psi> summed over the model's local terms.
inline double energy_expectation(const Mps& state, const ModelSpec& model,
                                 const QuenchProtocol& protocol, double t) {
    Mps work = state;
    double energy = 0.0;
    for (const auto& term : local_terms(model, protocol, t, state.n_sites())) {
        work.move_center_to(term.first_site);
        energy += work.expect_hermitian(term);
    }
    return energy;
}

// Initial state for a protocol: the digital eSSH ramp starts from the
// analytic AB-singlet Bell product; every other protocol starts from the
// DMRG ground state of H(window start). The tiny symmetry-breaking field
// is enabled for the classical ferromagnetic start of the reverse Ising
// quench and never enters the evolution itself.
inline Mps prepare_initial_state(const ModelSpec& model, const QuenchProtocol& protocol,
                                 int n_sites, long chi_max, double trunc_cutoff,
                                 const DmrgConfig* dmrg_override = nullptr) {
    validate_model(model, n_sites);
    if (model.kind == ModelKind::ESSH_DIGITAL) {
        const double s = 1.0 / std::sqrt(2.0);
        ComplexVector singlet(4);
        singlet << 0.0, s, -s, 0.0;
        std::vector<ComplexVector> cells(n_sites / 2, singlet);
        Mps psi = Mps::product_state(cells, chi_max, trunc_cutoff);
        return psi;
    }

    DmrgConfig cfg;
    if (dmrg_override) cfg = *dmrg_override;
    cfg.chi_max = chi_max;
    if (!dmrg_override) {
        cfg.trunc_cutoff = std::min(trunc_cutoff, 1e-10);
        cfg.energy_tol = 1e-11;
        if (model.kind == ModelKind::TFIM && model.direction == Direction::Reverse)
            cfg.sym_break_field = 1e-6;
    }
    DmrgResult r = ground_state(model, protocol, window_start(protocol), n_sites, cfg);
    r.state.set_chi_max(chi_max);
    r.state.set_trunc_cutoff(trunc_cutoff);
    return std::move(r.state);
}

} // namespace kz
