#pragma once

#include <stdexcept>
#include <vector>

#include "kz/models.hpp"
#include "kz/mps.hpp"
#include "kz/rng.hpp"

namespace kz {

struct DmrgConfig {
    int max_sweeps = 24;
    double energy_tol = 1e-10;      // absolute per-sweep change
    long chi_max = defaults::chi_max;
    double trunc_cutoff = defaults::trunc_cutoff;
    double local_solver_tol = 1e-12;
    double sym_break_field = 0.0;   // tiny -f*Z on site 0 for degenerate starts
    std::uint64_t rng_seed = 7;     // random initial state

    void validate() const {
        if (max_sweeps < 1 || energy_tol < 1e-12 || chi_max < 1 || trunc_cutoff < 0.0 ||
            local_solver_tol <= 0.0)
            throw std::invalid_argument("DmrgConfig: invalid parameter");
    }
};

struct DmrgResult {
    Mps state;
    double energy = 0.0;
    bool converged = false;
    int sweeps = 0;
};

namespace detail {

// Per-bond environments carry one bra x ket matrix per MPO channel.
using Environment = std::vector<ComplexMatrix>;

inline Environment left_edge() { return {ComplexMatrix::Ones(1, 1)}; }
inline Environment right_edge() { return {ComplexMatrix::Ones(1, 1)}; }

inline Environment grow_left(const Environment& left, const Mpo::Site& w, const SiteTensor& t) {
    const long chi = t.chi_r();
    Environment out(w.dr, ComplexMatrix::Zero(chi, chi));
    for (long a = 0; a < w.dl; ++a) {
        if (left[a].size() == 0) continue;
        ComplexMatrix la[2];  // L[a] * A_s
        for (int s = 0; s < 2; ++s) la[s] = left[a] * Mps::physical_slice(t, s);
        for (long b = 0; b < w.dr; ++b) {
            const ComplexMatrix& op = w.at(a, b);
            if (max_abs(op) == 0.0) continue;
            for (int sp = 0; sp < 2; ++sp)
                for (int s = 0; s < 2; ++s) {
                    if (op(sp, s) == Complex(0.0, 0.0)) continue;
                    out[b].noalias() +=
                        op(sp, s) * (Mps::physical_slice(t, sp).adjoint() * la[s]);
                }
        }
    }
    return out;
}

inline Environment grow_right(const Environment& right, const Mpo::Site& w, const SiteTensor& t) {
    const long chi = t.chi_l();
    Environment out(w.dl, ComplexMatrix::Zero(chi, chi));
    for (long b = 0; b < w.dr; ++b) {
        if (right[b].size() == 0) continue;
        ComplexMatrix ra[2];  // A_s * R[b]^T  (R indexed ket x bra after transpose)
        for (int s = 0; s < 2; ++s) ra[s] = Mps::physical_slice(t, s) * right[b].transpose();
        for (long a = 0; a < w.dl; ++a) {
            const ComplexMatrix& op = w.at(a, b);
            if (max_abs(op) == 0.0) continue;
            for (int sp = 0; sp < 2; ++sp)
                for (int s = 0; s < 2; ++s) {
                    if (op(sp, s) == Complex(0.0, 0.0)) continue;
                    // (x, x') = ra[s] * A_sp^dag, stored transposed as (bra, ket)
                    out[a].noalias() +=
                        op(sp, s) *
                        (ra[s] * Mps::physical_slice(t, sp).adjoint()).transpose();
                }
        }
    }
    return out;
}

// Effective two-site Hamiltonian acting on theta (x, s1, s2, y) flattened
// row-major.
struct EffectiveHamiltonian {
    const Environment* left;
    const Environment* right;  // indexed (bra, ket)
    const Mpo::Site* w1;
    const Mpo::Site* w2;
    long xdim, ydim;

    long dim() const { return xdim * 4 * ydim; }

    ComplexVector apply(const ComplexVector& v) const {
        const long x = xdim, y = ydim;
        const long dl = w1->dl, dm = w1->dr, dr = w2->dr;

        // F[a] = L[a] * V, V as (x, 4y)
        Eigen::Map<const ComplexMatrix> vmat(v.data(), x, 4 * y);
        std::vector<ComplexMatrix> f(dl);
        for (long a = 0; a < dl; ++a) {
            if ((*left)[a].size() == 0) continue;
            f[a] = (*left)[a] * vmat;  // (x', 4y), left env indexed (bra, ket)
        }

        // G[c](x', s1', s2, y) = sum_{a, s1} W1(a,c)(s1', s1) F[a]
        std::vector<ComplexMatrix> g(dm);
        for (long a = 0; a < dl; ++a) {
            if (f[a].size() == 0) continue;
            for (long c = 0; c < dm; ++c) {
                const ComplexMatrix& op = w1->at(a, c);
                if (max_abs(op) == 0.0) continue;
                if (g[c].size() == 0) g[c] = ComplexMatrix::Zero(x * 2, 2 * y);
                Eigen::Map<const ComplexMatrix> fa(f[a].data(), x * 2, 2 * y);
                for (long xp = 0; xp < x; ++xp)
                    g[c].middleRows(xp * 2, 2).noalias() += op * fa.middleRows(xp * 2, 2);
            }
        }

        // H[b](x', s1', s2', y) = sum_{c, s2} W2(c,b)(s2', s2) G[c]
        std::vector<ComplexMatrix> h(dr);
        for (long c = 0; c < dm; ++c) {
            if (g[c].size() == 0) continue;
            Eigen::Map<const ComplexMatrix> gc(g[c].data(), x * 4, y);
            for (long b = 0; b < dr; ++b) {
                const ComplexMatrix& op = w2->at(c, b);
                if (max_abs(op) == 0.0) continue;
                if (h[b].size() == 0) h[b] = ComplexMatrix::Zero(x * 4, y);
                for (long row = 0; row < x * 2; ++row)
                    h[b].middleRows(row * 2, 2).noalias() += op * gc.middleRows(row * 2, 2);
            }
        }

        // w = sum_b H[b] * R[b]^T, right env indexed (bra, ket)
        ComplexVector out = ComplexVector::Zero(dim());
        Eigen::Map<ComplexMatrix> omat(out.data(), x * 4, y);
        for (long b = 0; b < dr; ++b) {
            if (h[b].size() == 0 || (*right)[b].size() == 0) continue;
            omat.noalias() += h[b] * (*right)[b].transpose();
        }
        return out;
    }

    // Dense matrix built column by column; fallback path for stubborn
    // Lanczos cases.
    ComplexMatrix to_dense() const {
        const long d = dim();
        ComplexMatrix m(d, d);
        ComplexVector e = ComplexVector::Zero(d);
        for (long j = 0; j < d; ++j) {
            e[j] = 1.0;
            m.col(j) = apply(e);
            e[j] = 0.0;
        }
        return m;
    }
};

// Lanczos smallest eigenpair with full reorthogonalization.
struct LanczosResult {
    double value = 0.0;
    ComplexVector vector;
    bool converged = false;
};

inline LanczosResult lanczos_ground(const EffectiveHamiltonian& heff, const ComplexVector& seed,
                                    double tolerance, int max_iter = 200) {
    const long d = heff.dim();
    LanczosResult result;
    if (d == 1) {
        ComplexVector one = ComplexVector::Ones(1);
        result.value = heff.apply(one)(0).real();
        result.vector = one;
        result.converged = true;
        return result;
    }
    max_iter = static_cast<int>(std::min<long>(max_iter, d));

    std::vector<ComplexVector> basis;
    std::vector<double> alpha, beta;
    ComplexVector q = seed;
    if (q.norm() < 1e-12) q = ComplexVector::Ones(d);
    q /= q.norm();
    basis.push_back(q);

    double prev = std::numeric_limits<double>::max();
    Eigen::VectorXd ritz;
    for (int k = 0; k < max_iter; ++k) {
        ComplexVector r = heff.apply(basis[k]);
        const double a = (basis[k].adjoint() * r)(0, 0).real();
        alpha.push_back(a);
        r -= a * basis[k];
        if (k > 0) r -= beta[k - 1] * basis[k - 1];
        for (const auto& qv : basis) r -= (qv.adjoint() * r)(0, 0) * qv;

        // Ritz values of the current tridiagonal block
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) tri(i, i) = alpha[i];
        for (int i = 0; i + 1 < m; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        ritz = es.eigenvectors().col(0);
        const double value = es.eigenvalues()(0);

        const double b = r.norm();
        const bool value_settled = std::abs(value - prev) < tolerance;
        prev = value;
        if (value_settled || b < 1e-14 || k + 1 == max_iter) {
            result.value = value;
            result.vector = ComplexVector::Zero(d);
            for (int i = 0; i < m; ++i) result.vector += ritz(i) * basis[i];
            result.vector /= result.vector.norm();
            result.converged = value_settled || b < 1e-14;
            return result;
        }
        beta.push_back(b);
        basis.push_back(r / b);
    }
    return result;
}

inline Mps random_mps_state(int n, long chi, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Mps psi(n, chi, defaults::trunc_cutoff);
    long left = 1;
    for (int i = 0; i < n; ++i) {
        const long right_cap = 1L << std::min<long>(30, n - 1 - i);
        const long right = i == n - 1 ? 1 : std::min({chi, 2 * left, right_cap});
        SiteTensor t;
        t.m.resize(left * 2, right);
        for (Eigen::Index r = 0; r < t.m.rows(); ++r)
            for (Eigen::Index c = 0; c < t.m.cols(); ++c)
                t.m(r, c) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        psi.tensor(i) = std::move(t);
        left = right;
    }
    psi.canonicalize(0);
    return psi;
}

} // namespace detail

// Two-site DMRG on the given MPO. Starts from a random bond-dimension-8
// state, sweeps until the per-sweep energy change drops below
// energy_tol, and reports the best state either way.
inline DmrgResult dmrg_ground_state(const Mpo& mpo, const DmrgConfig& cfg) {
    cfg.validate();
    const int n = mpo.n_sites();
    if (n < 4) throw std::invalid_argument("dmrg: need at least 4 sites");

    Mps psi = detail::random_mps_state(n, 8, cfg.rng_seed);
    psi.set_chi_max(cfg.chi_max);
    psi.set_trunc_cutoff(cfg.trunc_cutoff);

    // right environments for bonds 0..n-2: right_env[i] covers sites > i+1
    std::vector<detail::Environment> right_env(n);
    right_env[n - 1] = detail::right_edge();
    for (int i = n - 1; i >= 2; --i)
        right_env[i - 1] = detail::grow_right(right_env[i], mpo.sites[i], psi.tensor(i));

    std::vector<detail::Environment> left_env(n);
    left_env[0] = detail::left_edge();

    DmrgResult result;
    double last_energy = std::numeric_limits<double>::max();
    double energy = 0.0;

    auto theta_of = [&](int i) {
        return ComplexMatrix(psi.tensor(i).grouped_left() * psi.tensor(i + 1).grouped_right());
    };

    auto local_update = [&](int i, MoveCenter move) {
        detail::EffectiveHamiltonian heff{&left_env[i], &right_env[i + 1], &mpo.sites[i],
                                          &mpo.sites[i + 1], psi.tensor(i).chi_l(),
                                          psi.tensor(i + 1).chi_r()};
        ComplexMatrix theta = theta_of(i);
        ComplexVector seed = Eigen::Map<const ComplexVector>(theta.data(), theta.size());
        detail::LanczosResult local =
            detail::lanczos_ground(heff, seed, cfg.local_solver_tol);
        if (!local.converged && heff.dim() <= 1024) {
            EigResult dense = herm_eig(heff.to_dense());
            local.value = dense.values[0];
            local.vector = dense.vectors.col(0);
        }
        energy = local.value;
        ComplexMatrix new_theta =
            Eigen::Map<const ComplexMatrix>(local.vector.data(), theta.rows(), theta.cols());
        psi.set_two_site(i, new_theta, move);
    };

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        for (int i = 0; i + 1 < n; ++i) {
            local_update(i, MoveCenter::Right);
            left_env[i + 1] = detail::grow_left(left_env[i], mpo.sites[i], psi.tensor(i));
        }
        for (int i = n - 2; i >= 0; --i) {
            local_update(i, MoveCenter::Left);
            right_env[i] = detail::grow_right(right_env[i + 1], mpo.sites[i + 1],
                                              psi.tensor(i + 1));
        }
        result.sweeps = sweep + 1;
        if (std::abs(energy - last_energy) < cfg.energy_tol) {
            result.converged = true;
            break;
        }
        last_energy = energy;
    }

    psi.canonicalize(0);
    result.state = std::move(psi);
    result.energy = energy;
    return result;
}

// Ground state of H(t) for the given model; the symmetry-breaking field
// (if any) exists only inside this solve.
inline DmrgResult ground_state(const ModelSpec& m, const QuenchProtocol& p, double t,
                               int n_sites, const DmrgConfig& cfg) {
    return dmrg_ground_state(build_mpo(m, p, t, n_sites, cfg.sym_break_field), cfg);
}

} // namespace kz
