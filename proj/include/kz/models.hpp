#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kz/linalg.hpp"
#include "kz/mps.hpp"

namespace kz {

enum class ModelKind { TFIM, SSH, ESSH, CLUSTER, ESSH_DIGITAL, TFIM_INHOM };
enum class Direction { Forward, Reverse };
enum class EsshRamp { Hopping, Anisotropy };
enum class Schedule { LinearSingle, TwoHamRamp, InhomRamp };

struct ModelSpec {
    ModelKind kind = ModelKind::TFIM;
    Direction direction = Direction::Forward;
    // eSSH forward quenches either ramp the AB hopping (trivial -> SPT) or
    // the ZZ anisotropy (AFM -> SPT).
    EsshRamp essh_ramp = EsshRamp::Hopping;
    double delta = 0.0;  // eSSH anisotropy where fixed
    double v = 1.0;      // AB strength where fixed
    double w = 1.0;      // BA strength where fixed
    double j0 = 1.0;     // inhomogeneous chain: center coupling
    double alpha = 0.0;  // inhomogeneous depth in [0, 1)
    double q = 2.0;      // inhomogeneous power >= 1
};

struct QuenchProtocol {
    Schedule schedule = Schedule::LinearSingle;
    double tau_q = 1.0;
    double g_start = defaults::ramp_start;  // initial ramp value, LinearSingle only
    double dt = defaults::dt;
};

inline bool is_ssh_family(ModelKind kind) {
    return kind == ModelKind::SSH || kind == ModelKind::ESSH ||
           kind == ModelKind::ESSH_DIGITAL;
}

inline std::string model_name(const ModelSpec& m) {
    switch (m.kind) {
        case ModelKind::TFIM: return "tfim";
        case ModelKind::SSH: return "ssh";
        case ModelKind::ESSH: return "essh";
        case ModelKind::CLUSTER: return "cluster";
        case ModelKind::ESSH_DIGITAL: return "essh_digital";
        case ModelKind::TFIM_INHOM: return "tfim_inhom";
    }
    return "?";
}

inline void validate_model(const ModelSpec& m, int n_sites) {
    if (n_sites < 4) throw std::invalid_argument("model: need at least 4 sites");
    if (is_ssh_family(m.kind) && n_sites % 2 != 0)
        throw std::invalid_argument("model: SSH-family chains need even N");
    if (m.kind == ModelKind::TFIM_INHOM) {
        if (m.alpha < 0.0 || m.alpha >= 1.0)
            throw std::invalid_argument("model: inhomogeneous alpha must be in [0, 1)");
        if (m.q < 1.0) throw std::invalid_argument("model: inhomogeneous q must be >= 1");
        if (m.direction != Direction::Forward)
            throw std::invalid_argument("model: inhomogeneous chain supports forward only");
    }
    if ((m.kind == ModelKind::SSH || m.kind == ModelKind::CLUSTER ||
         m.kind == ModelKind::ESSH_DIGITAL) &&
        m.direction == Direction::Reverse)
        throw std::invalid_argument("model: reverse quench unsupported for " + model_name(m));
    if (!std::isfinite(m.delta) || !std::isfinite(m.v) || !std::isfinite(m.w) ||
        !std::isfinite(m.j0))
        throw std::invalid_argument("model: non-finite coupling");
}

inline Schedule schedule_for(const ModelSpec& m) {
    if (m.kind == ModelKind::ESSH_DIGITAL) return Schedule::TwoHamRamp;
    if (m.kind == ModelKind::TFIM_INHOM) return Schedule::InhomRamp;
    if (m.kind == ModelKind::TFIM && m.direction == Direction::Reverse)
        return Schedule::TwoHamRamp;
    return Schedule::LinearSingle;
}

inline QuenchProtocol make_protocol(const ModelSpec& m, double tau_q,
                                    double dt = defaults::dt,
                                    double g_start = defaults::ramp_start) {
    if (tau_q <= 0.0) throw std::invalid_argument("protocol: tau_q must be positive");
    if (dt <= 0.0) throw std::invalid_argument("protocol: dt must be positive");
    QuenchProtocol p;
    p.schedule = schedule_for(m);
    p.tau_q = tau_q;
    p.dt = dt;
    p.g_start = g_start;
    if (p.schedule == Schedule::LinearSingle && g_start <= 1.0)
        throw std::invalid_argument("protocol: g_start must sit beyond the critical point");
    return p;
}

inline double window_start(const QuenchProtocol& p) {
    return p.schedule == Schedule::LinearSingle ? -p.g_start * p.tau_q : -p.tau_q;
}

inline double window_end(const QuenchProtocol& p) {
    return p.schedule == Schedule::LinearSingle ? 0.0 : p.tau_q;
}

inline double linear_ramp(const QuenchProtocol& p, double t) { return -t / p.tau_q; }
inline double v_prime(const QuenchProtocol& p, double t) { return 1.0 - t / p.tau_q; }
inline double w_prime(const QuenchProtocol& p, double t) { return 1.0 + t / p.tau_q; }

struct TimeStep {
    double t = 0.0;
    double dt = 0.0;
};

// Uniform steps of protocol.dt with the final partial step shortened to
// land exactly on the window end. MPS and dense engines iterate the same
// list so their Trotter grids match bit for bit.
inline std::vector<TimeStep> time_steps(const QuenchProtocol& p) {
    const double t0 = window_start(p);
    const double t1 = window_end(p);
    std::vector<TimeStep> steps;
    const double span = t1 - t0;
    if (span <= 0.0) return steps;
    const long whole = static_cast<long>(std::floor(span / p.dt + 1e-9));
    steps.reserve(whole + 1);
    for (long k = 0; k < whole; ++k) steps.push_back({t0 + k * p.dt, p.dt});
    const double done = t0 + whole * p.dt;
    if (t1 - done > 1e-9 * std::max(1.0, std::abs(t1)))
        steps.push_back({done, t1 - done});
    return steps;
}

// Normalized signed bond position: bond midpoints scaled so the chain
// center maps to 0 and the outermost bonds to +-1.
inline std::vector<double> coupling_profile(const ModelSpec& m, int n_sites) {
    if (m.kind != ModelKind::TFIM_INHOM)
        throw std::invalid_argument("coupling_profile: model has uniform couplings");
    validate_model(m, n_sites);
    const int bonds = n_sites - 1;
    std::vector<double> j(bonds);
    for (int b = 0; b < bonds; ++b) {
        const double pos = bonds == 1 ? 0.0 : (2.0 * b - (bonds - 1)) / (bonds - 1);
        j[b] = m.j0 * (1.0 - m.alpha * std::pow(std::abs(pos), m.q));
    }
    return j;
}

// Instantaneous couplings of H(t), one entry per nearest-neighbor bond.
struct BondCoupling {
    double xx = 0.0, yy = 0.0, zz = 0.0;
};

inline std::vector<BondCoupling> bond_couplings_at(const ModelSpec& m,
                                                   const QuenchProtocol& p, double t,
                                                   int n_sites) {
    std::vector<BondCoupling> bonds(n_sites - 1);
    auto set_xxz = [&](int b, double strength, double delta) {
        bonds[b].xx = bonds[b].yy = 0.5 * strength;
        bonds[b].zz = 0.5 * strength * delta;
    };
    switch (m.kind) {
        case ModelKind::TFIM:
            for (auto& b : bonds)
                b.zz = m.direction == Direction::Forward ? -1.0 : -v_prime(p, t);
            break;
        case ModelKind::TFIM_INHOM: {
            const auto profile = coupling_profile(m, n_sites);
            for (int b = 0; b < n_sites - 1; ++b) bonds[b].zz = -profile[b];
            break;
        }
        case ModelKind::SSH:
        case ModelKind::ESSH: {
            const double delta = m.kind == ModelKind::SSH ? 0.0 : m.delta;
            for (int b = 0; b < n_sites - 1; ++b) {
                const bool ab_cell = b % 2 == 0;
                if (m.direction == Direction::Forward && m.essh_ramp == EsshRamp::Anisotropy) {
                    // AFM -> SPT: fixed hoppings, ramped anisotropy
                    set_xxz(b, ab_cell ? m.v : m.w, linear_ramp(p, t));
                } else if (m.direction == Direction::Forward) {
                    // trivial -> SPT: AB strength ramps down through v = w
                    set_xxz(b, ab_cell ? m.w * linear_ramp(p, t) : m.w, delta);
                } else {
                    // reverse: BA strength ramps down at fixed AB strength
                    set_xxz(b, ab_cell ? m.v : m.v * linear_ramp(p, t), delta);
                }
            }
            break;
        }
        case ModelKind::ESSH_DIGITAL:
            for (int b = 0; b < n_sites - 1; ++b)
                set_xxz(b, b % 2 == 0 ? v_prime(p, t) : w_prime(p, t), m.delta);
            break;
        case ModelKind::CLUSTER:
            break;  // three-site terms handled separately
    }
    return bonds;
}

// Coefficient of the per-site sigma_x term in H(t).
inline double field_x_at(const ModelSpec& m, const QuenchProtocol& p, double t) {
    switch (m.kind) {
        case ModelKind::TFIM:
            return m.direction == Direction::Forward ? -linear_ramp(p, t) : -w_prime(p, t);
        case ModelKind::CLUSTER:
            return -linear_ramp(p, t);
        case ModelKind::TFIM_INHOM:
            return -m.j0 * (1.0 - t / p.tau_q);
        default:
            return 0.0;
    }
}

inline bool has_cluster_terms(const ModelSpec& m) { return m.kind == ModelKind::CLUSTER; }

// Full instantaneous Hamiltonian as a list of local terms (fields kept as
// their own single-site terms). Shared by the dense oracle, the MPO
// builder and the gate tests.
inline std::vector<LocalOperator> local_terms(const ModelSpec& m, const QuenchProtocol& p,
                                              double t, int n_sites) {
    validate_model(m, n_sites);
    std::vector<LocalOperator> terms;
    const ComplexMatrix xx = kron(pauli_x(), pauli_x());
    const ComplexMatrix yy = kron(pauli_y(), pauli_y());
    const ComplexMatrix zz = kron(pauli_z(), pauli_z());

    const auto bonds = bond_couplings_at(m, p, t, n_sites);
    for (int b = 0; b < n_sites - 1; ++b) {
        const auto& c = bonds[b];
        if (c.xx == 0.0 && c.yy == 0.0 && c.zz == 0.0) continue;
        terms.emplace_back(b, ComplexMatrix(c.xx * xx + c.yy * yy + c.zz * zz));
    }
    if (has_cluster_terms(m)) {
        const ComplexMatrix zxz = kron(kron(pauli_z(), pauli_x()), pauli_z());
        for (int i = 0; i + 2 < n_sites; ++i)
            terms.emplace_back(i, ComplexMatrix(-zxz));
    }
    const double f = field_x_at(m, p, t);
    if (f != 0.0) {
        for (int i = 0; i < n_sites; ++i)
            terms.emplace_back(i, ComplexMatrix(f * pauli_x()));
    }
    return terms;
}

// --- Trotter gate layers ---------------------------------------------------

struct Gate {
    int first_site = 0;
    int span = 2;
    int block_tag = 0;  // 1 = AB-cell layer, 2 = BA-cell layer, 0 = other
    ComplexMatrix u;
};

struct GateLayer {
    std::vector<Gate> gates;
};

namespace detail {

inline ComplexMatrix bond_hamiltonian(const BondCoupling& c, double field, int bond,
                                      int n_sites) {
    static const ComplexMatrix xx = kron(pauli_x(), pauli_x());
    static const ComplexMatrix yy = kron(pauli_y(), pauli_y());
    static const ComplexMatrix zz = kron(pauli_z(), pauli_z());
    static const ComplexMatrix xi = kron(pauli_x(), identity_matrix(2));
    static const ComplexMatrix ix = kron(identity_matrix(2), pauli_x());
    ComplexMatrix h = c.xx * xx + c.yy * yy + c.zz * zz;
    if (field != 0.0) {
        // half the field of each interior site into each adjacent bond;
        // edge sites put full weight into their only bond
        const double wl = bond == 0 ? 1.0 : 0.5;
        const double wr = bond == n_sites - 2 ? 1.0 : 0.5;
        h += field * (wl * xi + wr * ix);
    }
    return h;
}

inline GateLayer bond_layer(const std::vector<BondCoupling>& bonds, double field,
                            double step, int parity, int n_sites) {
    GateLayer layer;
    for (int b = parity; b < n_sites - 1; b += 2) {
        Gate g;
        g.first_site = b;
        g.span = 2;
        g.block_tag = b % 2 == 0 ? 1 : 2;
        g.u = expm_i_hermitian(bond_hamiltonian(bonds[b], field, b, n_sites), -step);
        layer.gates.push_back(std::move(g));
    }
    return layer;
}

} // namespace detail

// Gate layers advancing the state from t to t + dt, couplings evaluated at
// the step midpoint. Nearest-neighbor models get the symmetric
// odd/even/odd splitting; the cluster chain gets field/ZXZ/field with the
// three-site terms emitted as dedicated gates; the digital protocol
// mirrors its circuit with one AB and one BA block per step.
inline std::vector<GateLayer> trotter_layers(const ModelSpec& m, const QuenchProtocol& p,
                                             double t, double dt, int n_sites) {
    validate_model(m, n_sites);
    const double tm = t + 0.5 * dt;
    std::vector<GateLayer> layers;

    if (m.kind == ModelKind::CLUSTER) {
        const double f = field_x_at(m, p, tm);
        GateLayer field_half;
        if (f != 0.0) {
            ComplexMatrix u = expm_i_hermitian(pauli_x(), -f * 0.5 * dt);
            for (int i = 0; i < n_sites; ++i) {
                Gate g;
                g.first_site = i;
                g.span = 1;
                g.u = u;
                field_half.gates.push_back(std::move(g));
            }
        }
        GateLayer zxz;
        const ComplexMatrix h = -kron(kron(pauli_z(), pauli_x()), pauli_z());
        const ComplexMatrix u = expm_i_hermitian(h, -dt);
        for (int i = 0; i + 2 < n_sites; ++i) {
            Gate g;
            g.first_site = i;
            g.span = 3;
            g.u = u;
            zxz.gates.push_back(std::move(g));
        }
        if (!field_half.gates.empty()) layers.push_back(field_half);
        layers.push_back(std::move(zxz));
        if (!field_half.gates.empty()) layers.push_back(std::move(field_half));
        return layers;
    }

    const auto bonds = bond_couplings_at(m, p, tm, n_sites);
    const double field = field_x_at(m, p, tm);

    if (m.kind == ModelKind::ESSH_DIGITAL) {
        layers.push_back(detail::bond_layer(bonds, field, dt, 0, n_sites));
        layers.push_back(detail::bond_layer(bonds, field, dt, 1, n_sites));
        return layers;
    }

    GateLayer odd_half = detail::bond_layer(bonds, field, 0.5 * dt, 0, n_sites);
    layers.push_back(odd_half);
    layers.push_back(detail::bond_layer(bonds, field, dt, 1, n_sites));
    layers.push_back(std::move(odd_half));
    return layers;
}

// --- Error bases -----------------------------------------------------------

// Complete orthonormal per-cell basis with designated no-error outcomes.
// Cells may overlap (projector windows: TFIM bonds, cluster triples), in
// which case the basis serves Method 1 only; sampling requires a
// partition.
struct ErrorBasis {
    int cell_size = 1;
    std::vector<std::string> labels;
    std::vector<ComplexVector> kets;
    std::vector<int> reference;       // indices of no-error outcomes
    std::vector<int> density;         // indices counted as density fluctuations
    std::vector<int> cell_first;      // first site of each cell
    bool cells_overlap = false;

    ComplexMatrix projector_for(const std::vector<int>& which) const {
        const Eigen::Index d = 1 << cell_size;
        ComplexMatrix p = ComplexMatrix::Zero(d, d);
        for (int idx : which) p += kets[idx] * kets[idx].adjoint();
        return p;
    }
    ComplexMatrix reference_projector() const { return projector_for(reference); }
    ComplexMatrix density_projector() const { return projector_for(density); }
};

namespace detail {

inline ComplexVector basis2(Complex a0, Complex a1) {
    ComplexVector v(2);
    v << a0, a1;
    return v;
}

inline ComplexVector basis4(Complex a, Complex b, Complex c, Complex d) {
    ComplexVector v(4);
    v << a, b, c, d;
    return v;
}

} // namespace detail

// Singlet/density/phase cell basis shared by the SSH family.
inline void fill_ssh_cell_basis(ErrorBasis& basis) {
    const double s = 1.0 / std::sqrt(2.0);
    basis.cell_size = 2;
    basis.labels = {"-", "0", "1", "+"};
    basis.kets = {detail::basis4(0, s, -s, 0), detail::basis4(1, 0, 0, 0),
                  detail::basis4(0, 0, 0, 1), detail::basis4(0, s, s, 0)};
    basis.reference = {0};
    basis.density = {1, 2};
}

inline ErrorBasis error_basis_for(const ModelSpec& m, int n_sites) {
    validate_model(m, n_sites);
    ErrorBasis basis;
    switch (m.kind) {
        case ModelKind::TFIM:
        case ModelKind::TFIM_INHOM:
            if (m.direction == Direction::Forward) {
                // ferromagnetic reference: degenerate groundspace projector
                // |00><00| + |11><11| per bond detects domain walls
                basis.cell_size = 2;
                basis.labels = {"00", "11", "01", "10"};
                basis.kets = {detail::basis4(1, 0, 0, 0), detail::basis4(0, 0, 0, 1),
                              detail::basis4(0, 1, 0, 0), detail::basis4(0, 0, 1, 0)};
                basis.reference = {0, 1};
                basis.cells_overlap = true;
                for (int b = 0; b < n_sites - 1; ++b) basis.cell_first.push_back(b);
            } else {
                // paramagnetic reference |+>^N, single-site cells
                const double s = 1.0 / std::sqrt(2.0);
                basis.cell_size = 1;
                basis.labels = {"+", "-"};
                basis.kets = {detail::basis2(s, s), detail::basis2(s, -s)};
                basis.reference = {0};
                for (int i = 0; i < n_sites; ++i) basis.cell_first.push_back(i);
            }
            break;
        case ModelKind::SSH:
        case ModelKind::ESSH:
        case ModelKind::ESSH_DIGITAL:
            fill_ssh_cell_basis(basis);
            if (m.direction == Direction::Forward) {
                for (int i = 1; i + 1 < n_sites; i += 2) basis.cell_first.push_back(i);
            } else {
                for (int i = 0; i + 1 < n_sites; i += 2) basis.cell_first.push_back(i);
            }
            break;
        case ModelKind::CLUSTER: {
            // eigenbasis of ZXZ; the +1 subspace is the cluster groundspace
            basis.cell_size = 3;
            const ComplexMatrix zxz = kron(kron(pauli_z(), pauli_x()), pauli_z());
            EigResult eig = herm_eig(zxz);
            for (int j = 0; j < 8; ++j) {
                basis.kets.push_back(eig.vectors.col(j));
                const bool ground = eig.values[j] > 0.0;
                basis.labels.push_back((ground ? "+" : "-") + std::to_string(j));
                if (ground) basis.reference.push_back(j);
            }
            basis.cells_overlap = true;
            for (int i = 0; i + 2 < n_sites; ++i) basis.cell_first.push_back(i);
            break;
        }
    }
    return basis;
}

// --- MPO -------------------------------------------------------------------

// Sparse-block matrix product operator; entry (a, b) of each site tensor is
// a 2x2 operator. Left boundary selects the last row, right boundary the
// first column.
struct Mpo {
    struct Site {
        long dl = 1, dr = 1;
        std::vector<ComplexMatrix> op;  // dl * dr entries, row-major

        const ComplexMatrix& at(long a, long b) const { return op[a * dr + b]; }
        ComplexMatrix& at(long a, long b) { return op[a * dr + b]; }
    };
    std::vector<Site> sites;

    int n_sites() const { return static_cast<int>(sites.size()); }

    // Dense matrix for small-n verification.
    ComplexMatrix to_dense() const {
        std::vector<ComplexMatrix> acc(sites[0].dr);
        for (long b = 0; b < sites[0].dr; ++b) acc[b] = sites[0].at(0, b);
        for (int i = 1; i < n_sites(); ++i) {
            const Site& s = sites[i];
            std::vector<ComplexMatrix> next(s.dr);
            const Eigen::Index dim = acc[0].rows() * 2;
            for (long b = 0; b < s.dr; ++b) {
                next[b] = ComplexMatrix::Zero(dim, dim);
                for (long a = 0; a < s.dl; ++a) next[b] += kron(acc[a], s.at(a, b));
            }
            acc = std::move(next);
        }
        return acc[0];
    }
};

// MPO of H(t) + optional symmetry-breaking -field*Z on site 0 (degenerate
// starts; the field never enters the evolution).
inline Mpo build_mpo(const ModelSpec& m, const QuenchProtocol& p, double t, int n_sites,
                     double sym_break_field = 0.0) {
    validate_model(m, n_sites);
    const ComplexMatrix id = identity_matrix(2);
    const ComplexMatrix zero = ComplexMatrix::Zero(2, 2);

    if (m.kind == ModelKind::CLUSTER) {
        const double f = field_x_at(m, p, t);
        const long d = 4;
        Mpo mpo;
        for (int i = 0; i < n_sites; ++i) {
            Mpo::Site s;
            s.dl = i == 0 ? 1 : d;
            s.dr = i == n_sites - 1 ? 1 : d;
            s.op.assign(s.dl * s.dr, zero);
            auto row = [&](long r) { return i == 0 ? 0 : r; };
            auto col = [&](long c) { return i == n_sites - 1 ? 0 : c; };
            // states: 0 done, 1 Z placed, 2 ZX placed, 3 idle
            if (i != n_sites - 1) s.at(row(3), col(3)) = id;
            if (i != 0) s.at(row(0), col(0)) = id;
            ComplexMatrix start = f * pauli_x();
            if (i == 0 && sym_break_field != 0.0) start += -sym_break_field * pauli_z();
            s.at(row(3), col(0)) = start;
            if (i + 2 < n_sites) s.at(row(3), col(1)) = pauli_z();
            if (i >= 1 && i + 1 < n_sites) s.at(row(1), col(2)) = pauli_x();
            if (i >= 2) s.at(row(2), col(0)) = -pauli_z();
            mpo.sites.push_back(std::move(s));
        }
        return mpo;
    }

    const auto bonds = bond_couplings_at(m, p, t, n_sites);
    const double f = field_x_at(m, p, t);
    const long d = 5;  // done, X, Y, Z, idle
    Mpo mpo;
    for (int i = 0; i < n_sites; ++i) {
        Mpo::Site s;
        s.dl = i == 0 ? 1 : d;
        s.dr = i == n_sites - 1 ? 1 : d;
        s.op.assign(s.dl * s.dr, zero);
        auto row = [&](long r) { return i == 0 ? 0 : r; };
        auto col = [&](long c) { return i == n_sites - 1 ? 0 : c; };
        if (i != n_sites - 1) s.at(row(4), col(4)) = id;
        if (i != 0) s.at(row(0), col(0)) = id;
        ComplexMatrix onsite = f * pauli_x();
        if (i == 0 && sym_break_field != 0.0) onsite += -sym_break_field * pauli_z();
        s.at(row(4), col(0)) = onsite;
        if (i + 1 < n_sites) {
            const auto& c = bonds[i];
            if (c.xx != 0.0) s.at(row(4), col(1)) = c.xx * pauli_x();
            if (c.yy != 0.0) s.at(row(4), col(2)) = c.yy * pauli_y();
            if (c.zz != 0.0) s.at(row(4), col(3)) = c.zz * pauli_z();
        }
        if (i != 0) {
            s.at(row(1), col(0)) = pauli_x();
            s.at(row(2), col(0)) = pauli_y();
            s.at(row(3), col(0)) = pauli_z();
        }
        mpo.sites.push_back(std::move(s));
    }
    return mpo;
}

} // namespace kz
