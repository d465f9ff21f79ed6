#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "kz/evolve.hpp"
#include "kz/linalg.hpp"
#include "kz/models.hpp"
#include "kz/sampling.hpp"

// Dense state-vector mirror of the MPS machinery. Exists to verify, not to
// scale: states cap at 14 sites, full Hamiltonians at 12.

namespace kz {

inline constexpr int dense_max_sites = 14;
inline constexpr int dense_max_ed_sites = 12;

struct DenseState {
    int n = 0;
    ComplexVector amp;  // 2^n amplitudes, site 0 = most significant bit

    static DenseState zero_state(int n_sites) {
        check_size(n_sites);
        DenseState s;
        s.n = n_sites;
        s.amp = ComplexVector::Zero(1L << n_sites);
        s.amp[0] = 1.0;
        return s;
    }

    static void check_size(int n_sites) {
        if (n_sites < 1 || n_sites > dense_max_sites)
            throw std::invalid_argument("dense: supported sizes are 1..14 sites");
    }

    double norm() const { return amp.norm(); }
};

// Product state from 2- and 4-vectors, same cell convention as
// Mps::product_state.
inline DenseState dense_product_state(const std::vector<ComplexVector>& local_kets) {
    ComplexVector acc = ComplexVector::Ones(1);
    int n = 0;
    for (const auto& ket : local_kets) {
        if (ket.size() != 2 && ket.size() != 4)
            throw std::invalid_argument("dense_product_state: kets must have dimension 2 or 4");
        ComplexVector next(acc.size() * ket.size());
        for (Eigen::Index i = 0; i < acc.size(); ++i)
            for (Eigen::Index k = 0; k < ket.size(); ++k)
                next[i * ket.size() + k] = acc[i] * ket[k];
        acc = std::move(next);
        n += ket.size() == 2 ? 1 : 2;
    }
    DenseState::check_size(n);
    DenseState s;
    s.n = n;
    s.amp = std::move(acc);
    return s;
}

// Apply a 2^span x 2^span matrix on adjacent sites [first, first+span).
inline void apply_dense_gate(DenseState& state, const ComplexMatrix& u, int first_site,
                             int span) {
    const int n = state.n;
    if (first_site < 0 || first_site + span > n)
        throw std::invalid_argument("apply_dense_gate: window outside chain");
    const long d = 1L << span;
    if (u.rows() != d || u.cols() != d)
        throw std::invalid_argument("apply_dense_gate: matrix dimension mismatch");

    const int low_bits = n - first_site - span;
    const long low = 1L << low_bits;
    const long high = 1L << first_site;
    ComplexVector scratch(d);
    for (long h = 0; h < high; ++h) {
        for (long l = 0; l < low; ++l) {
            const long base = h * (d * low) + l;
            for (long m = 0; m < d; ++m) scratch[m] = state.amp[base + m * low];
            for (long m = 0; m < d; ++m) {
                Complex acc(0.0, 0.0);
                for (long k = 0; k < d; ++k) acc += u(m, k) * scratch[k];
                state.amp[base + m * low] = acc;
            }
        }
    }
}

inline Complex dense_overlap(const DenseState& a, const DenseState& b) {
    if (a.n != b.n) throw std::invalid_argument("dense_overlap: length mismatch");
    return (a.amp.adjoint() * b.amp)(0, 0);
}

inline ComplexMatrix dense_hamiltonian(const ModelSpec& m, const QuenchProtocol& p, double t,
                                       int n_sites) {
    if (n_sites > dense_max_ed_sites)
        throw std::invalid_argument("dense_hamiltonian: capped at 12 sites");
    const long dim = 1L << n_sites;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (const auto& term : local_terms(m, p, t, n_sites))
        h += embed_in_window(term.matrix, term.first_site, term.span, n_sites);
    return h;
}

inline Complex dense_expectation(const DenseState& state, const ComplexMatrix& op,
                                 int first_site, int span) {
    DenseState tmp = state;
    apply_dense_gate(tmp, op, first_site, span);
    return dense_overlap(state, tmp);
}

// Ground state by exact diagonalization; returns (state, energy).
inline std::pair<DenseState, double> dense_ground_state(const ModelSpec& m,
                                                        const QuenchProtocol& p, double t,
                                                        int n_sites,
                                                        double sym_break_field = 0.0) {
    ComplexMatrix h = dense_hamiltonian(m, p, t, n_sites);
    if (sym_break_field != 0.0)
        h += embed_in_window(ComplexMatrix(-sym_break_field * pauli_z()), 0, 1, n_sites);
    EigResult eig = herm_eig(h);
    DenseState s;
    s.n = n_sites;
    s.amp = eig.vectors.col(0);
    return {std::move(s), eig.values[0]};
}

// Oracle mirror of prepare_initial_state: exact diagonalization instead of
// DMRG, the same analytic Bell product for the digital ramp.
inline DenseState prepare_initial_dense(const ModelSpec& m, const QuenchProtocol& p,
                                        int n_sites) {
    if (m.kind == ModelKind::ESSH_DIGITAL) {
        const double s = 1.0 / std::sqrt(2.0);
        ComplexVector singlet(4);
        singlet << 0.0, s, -s, 0.0;
        return dense_product_state(std::vector<ComplexVector>(n_sites / 2, singlet));
    }
    const bool classical_start =
        m.kind == ModelKind::TFIM && m.direction == Direction::Reverse;
    return dense_ground_state(m, p, window_start(p), n_sites, classical_start ? 1e-6 : 0.0)
        .first;
}

// Oracle mirror of evolve(): identical step grid, layer order and midpoint
// convention, with every gate applied as a dense matrix.
inline DenseState evolve_dense(DenseState state, const ModelSpec& m, const QuenchProtocol& p,
                               SwapPlan swap_plan = SwapPlan::None, int half_swap_block = 2) {
    DenseState::check_size(state.n);
    validate_model(m, state.n);
    for (const TimeStep& step : time_steps(p)) {
        auto layers = trotter_layers(m, p, step.t, step.dt, state.n);
        apply_swap_plan(layers, swap_plan, m, half_swap_block);
        for (const auto& layer : layers)
            for (const auto& g : layer.gates) apply_dense_gate(state, g.u, g.first_site, g.span);
    }
    return state;
}

// Reference propagator: full-Hamiltonian midpoint exponentials on a finer
// grid; pins the Trotter-order ratio tests.
inline DenseState evolve_dense_expm(DenseState state, const ModelSpec& m,
                                    const QuenchProtocol& p, double dt_ref) {
    QuenchProtocol fine = p;
    fine.dt = dt_ref;
    for (const TimeStep& step : time_steps(fine)) {
        ComplexMatrix u =
            expm_i_hermitian(dense_hamiltonian(m, p, step.t + 0.5 * step.dt, state.n),
                             -step.dt);
        state.amp = u * state.amp;
    }
    return state;
}

// Same defect-density definitions as the estimator module, computed
// densely.
struct DenseEta {
    double eta = 0.0;
    std::optional<double> eta_partial;
};

inline DenseEta dense_eta(const DenseState& state, const ErrorBasis& basis) {
    const int n = state.n;
    const ComplexMatrix p_ref = basis.reference_projector();
    const ComplexMatrix p_density = basis.density_projector();
    double errors = 0.0, density = 0.0;
    for (int first : basis.cell_first) {
        errors += 1.0 - dense_expectation(state, p_ref, first, basis.cell_size).real();
        if (!basis.density.empty())
            density += dense_expectation(state, p_density, first, basis.cell_size).real();
    }
    DenseEta out;
    out.eta = errors / n;
    if (!basis.density.empty()) out.eta_partial = density / n;
    return out;
}

} // namespace kz
