#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kz/linalg.hpp"
#include "kz/tolerances.hpp"

namespace kz {

// Rank-3 site tensor (chi_l, 2, chi_r), physical dimension fixed to 2.
// Stored row-major as a (chi_l*2) x chi_r matrix; the alternative grouping
// chi_l x (2*chi_r) is the same memory reinterpreted, which is what makes
// the QR/LQ/SVD reshapes below copy-free.
struct SiteTensor {
    ComplexMatrix m;  // (chi_l*2) x chi_r

    long chi_l() const { return m.rows() / 2; }
    long chi_r() const { return m.cols(); }

    Eigen::Map<const ComplexMatrix> grouped_left() const {
        return {m.data(), m.rows(), m.cols()};
    }
    Eigen::Map<const ComplexMatrix> grouped_right() const {
        return {m.data(), chi_l(), 2 * chi_r()};
    }
};

// Operator on 1-3 contiguous sites; matrix dimension 2^span.
struct LocalOperator {
    int first_site = 0;
    int span = 1;
    ComplexMatrix matrix;

    LocalOperator() = default;
    LocalOperator(int first, ComplexMatrix op) : first_site(first), matrix(std::move(op)) {
        const Eigen::Index d = matrix.rows();
        if (matrix.cols() != d || (d != 2 && d != 4 && d != 8))
            throw std::invalid_argument("LocalOperator: matrix must be 2^k x 2^k, k in 1..3");
        span = d == 2 ? 1 : (d == 4 ? 2 : 3);
    }
};

struct TruncationInfo {
    double discarded_weight = 0.0;  // relative to the total spectral weight
    long chi = 0;
    bool saturated = false;  // chi_max cap hit with the cutoff unreachable
};

enum class MoveCenter { Left, Right };

// Open-boundary matrix product state with an explicit orthogonality center:
// tensors left of the center are left-isometric, tensors right of it
// right-isometric, and the center tensor carries the norm.
class Mps {
public:
    Mps() = default;

    Mps(int n_sites, long chi_max, double trunc_cutoff)
        : chi_max_(chi_max), trunc_cutoff_(trunc_cutoff) {
        if (n_sites < 1) throw std::invalid_argument("Mps: need at least one site");
        if (chi_max < 1) throw std::invalid_argument("Mps: chi_max must be positive");
        tensors_.resize(n_sites);
    }

    // Product state from per-site 2-vectors and/or per-cell 4-vectors. A
    // 4-vector occupies two adjacent sites and may carry entanglement
    // inside the cell (bond dimension up to 2); bonds between cells have
    // dimension 1.
    static Mps product_state(const std::vector<ComplexVector>& local_kets,
                             long chi_max = defaults::chi_max,
                             double trunc_cutoff = defaults::trunc_cutoff) {
        int n = 0;
        for (const auto& ket : local_kets) {
            if (ket.size() != 2 && ket.size() != 4)
                throw std::invalid_argument("product_state: kets must have dimension 2 or 4");
            if (std::abs(ket.norm() - 1.0) > 1e-10)
                throw std::invalid_argument("product_state: ket not normalized");
            n += ket.size() == 2 ? 1 : 2;
        }
        if (n == 0) throw std::invalid_argument("product_state: no sites");

        Mps psi(n, chi_max, trunc_cutoff);
        int site = 0;
        for (const auto& ket : local_kets) {
            if (ket.size() == 2) {
                SiteTensor t;
                t.m.resize(2, 1);
                t.m(0, 0) = ket[0];
                t.m(1, 0) = ket[1];
                psi.tensors_[site++] = std::move(t);
            } else {
                // Split the 2x2 amplitude matrix across the in-cell bond.
                ComplexMatrix amp(2, 2);
                amp(0, 0) = ket[0];
                amp(0, 1) = ket[1];
                amp(1, 0) = ket[2];
                amp(1, 1) = ket[3];
                SvdResult d = svd(amp);
                long k = d.s.size();
                if (d.s[k - 1] < 1e-14) k = 1;
                SiteTensor a, b;
                a.m = d.u.leftCols(k);  // (1*2) x k
                ComplexMatrix sv = d.s.head(k).cast<Complex>().asDiagonal() * d.vh.topRows(k);
                b.m = Eigen::Map<ComplexMatrix>(sv.data(), 2 * k, 1);
                psi.tensors_[site] = std::move(a);
                psi.tensors_[site + 1] = std::move(b);
                site += 2;
            }
        }
        psi.center_ = -1;
        psi.canonicalize(0);
        return psi;
    }

    int n_sites() const { return static_cast<int>(tensors_.size()); }
    int ortho_center() const { return center_; }
    long chi_max() const { return chi_max_; }
    double trunc_cutoff() const { return trunc_cutoff_; }
    void set_chi_max(long chi) { chi_max_ = chi; }
    void set_trunc_cutoff(double cutoff) { trunc_cutoff_ = cutoff; }

    const SiteTensor& tensor(int site) const { return tensors_.at(site); }
    SiteTensor& tensor(int site) { return tensors_.at(site); }

    long bond_dim(int bond) const { return tensors_.at(bond).chi_r(); }
    long max_bond_dim() const {
        long chi = 1;
        for (const auto& t : tensors_) chi = std::max(chi, t.chi_r());
        return chi;
    }

    double norm() const {
        if (center_ >= 0) return tensors_[center_].m.norm();
        Complex ov = overlap(*this, *this);
        return std::sqrt(std::abs(ov));
    }

    // Full left/right isometrization around `center`; leaves the state
    // normalized.
    void canonicalize(int center) {
        check_site(center);
        for (int i = 0; i < center; ++i) isometrize_left(i);
        for (int i = n_sites() - 1; i > center; --i) isometrize_right(i);
        center_ = center;
        const double nrm = tensors_[center_].m.norm();
        if (nrm <= 0.0) throw std::runtime_error("canonicalize: zero-norm state");
        tensors_[center_].m /= nrm;
    }

    void move_center_to(int site) {
        check_site(site);
        if (center_ < 0) {
            canonicalize(site);
            return;
        }
        while (center_ < site) isometrize_left(center_++);
        while (center_ > site) isometrize_right(center_--);
    }

    // Single-site unitaries commute with the isometry conditions, so they
    // apply in place at any position.
    void apply_one_site_gate(int site, const ComplexMatrix& gate) {
        check_site(site);
        if (gate.rows() != 2 || gate.cols() != 2)
            throw std::invalid_argument("apply_one_site_gate: gate must be 2x2");
        SiteTensor& t = tensors_[site];
        const long chi_l = t.chi_l(), chi_r = t.chi_r();
        for (long a = 0; a < chi_l; ++a) {
            Eigen::Map<ComplexMatrix> block(t.m.data() + a * 2 * chi_r, 2, chi_r);
            block = (gate * block).eval();
        }
    }

    TruncationInfo apply_two_site_gate(int left_site, const ComplexMatrix& gate,
                                       MoveCenter move = MoveCenter::Right) {
        check_site(left_site);
        check_site(left_site + 1);
        if (gate.rows() != 4 || gate.cols() != 4)
            throw std::invalid_argument("apply_two_site_gate: gate must be 4x4");
        if (!is_unitary(gate, tol::gate_unitarity))
            throw std::invalid_argument("apply_two_site_gate: gate not unitary");
        if (center_ != left_site && center_ != left_site + 1)
            move_center_to(move == MoveCenter::Right ? left_site : left_site + 1);

        SiteTensor& a = tensors_[left_site];
        SiteTensor& b = tensors_[left_site + 1];
        const long chi_l = a.chi_l(), chi_r = b.chi_r();

        ComplexMatrix theta = a.grouped_left() * b.grouped_right();  // (chi_l*2) x (2*chi_r)
        apply_gate_blocks(theta, gate, chi_l, chi_r);

        return split_theta(theta, left_site, chi_l, chi_r, move);
    }

    // Three-site gate via two sequential two-site splittings; the center
    // ends on the rightmost site.
    TruncationInfo apply_three_site_gate(int first_site, const ComplexMatrix& gate) {
        check_site(first_site);
        check_site(first_site + 2);
        if (gate.rows() != 8 || gate.cols() != 8)
            throw std::invalid_argument("apply_three_site_gate: gate must be 8x8");
        if (!is_unitary(gate, tol::gate_unitarity))
            throw std::invalid_argument("apply_three_site_gate: gate not unitary");
        if (center_ < first_site || center_ > first_site + 2) move_center_to(first_site);

        SiteTensor& a = tensors_[first_site];
        SiteTensor& b = tensors_[first_site + 1];
        SiteTensor& c = tensors_[first_site + 2];
        const long chi_l = a.chi_l(), chi_r = c.chi_r();

        ComplexMatrix pair = a.grouped_left() * b.grouped_right();  // (chi_l*4) x chi_mid via reshape
        Eigen::Map<ComplexMatrix> pair_flat(pair.data(), 4 * chi_l, b.chi_r());
        ComplexMatrix theta = pair_flat * c.grouped_right();  // (chi_l*4) x (2*chi_r)
        apply_gate_blocks(theta, gate, chi_l, chi_r);

        // First split: site tensor | two-site remainder.
        Eigen::Map<ComplexMatrix> theta_left(theta.data(), 2 * chi_l, 4 * chi_r);
        SvdResult d1 = svd(theta_left);
        TruncationInfo info1 = truncation_rank(d1.s);
        const long k1 = info1.chi;
        a.m = d1.u.leftCols(k1);
        RealVector s1 = renormalized(d1.s.head(k1));
        ComplexMatrix rest = s1.cast<Complex>().asDiagonal() * d1.vh.topRows(k1);  // k1 x (4*chi_r)

        // Second split inside the remainder.
        Eigen::Map<ComplexMatrix> rest_flat(rest.data(), 2 * k1, 2 * chi_r);
        SvdResult d2 = svd(rest_flat);
        TruncationInfo info2 = truncation_rank(d2.s);
        const long k2 = info2.chi;
        b.m = d2.u.leftCols(k2);
        RealVector s2 = renormalized(d2.s.head(k2));
        ComplexMatrix tail = s2.cast<Complex>().asDiagonal() * d2.vh.topRows(k2);  // k2 x (2*chi_r)
        c.m = Eigen::Map<ComplexMatrix>(tail.data(), 2 * k2, chi_r);
        center_ = first_site + 2;

        TruncationInfo info;
        info.discarded_weight = info1.discarded_weight + info2.discarded_weight;
        info.chi = std::max(k1, k2);
        info.saturated = info1.saturated || info2.saturated;
        return info;
    }

    // Replace the two-site block starting at left_site with a new wavefunction
    // theta, grouped as (chi_l*2) x (2*chi_r); used by variational updates.
    TruncationInfo set_two_site(int left_site, ComplexMatrix theta, MoveCenter move) {
        check_site(left_site);
        check_site(left_site + 1);
        const long chi_l = tensors_[left_site].chi_l();
        const long chi_r = tensors_[left_site + 1].chi_r();
        if (theta.rows() != 2 * chi_l || theta.cols() != 2 * chi_r)
            throw std::invalid_argument("set_two_site: theta dimension mismatch");
        return split_theta(theta, left_site, chi_l, chi_r, move);
    }

    // <psi|O|psi> for a 1-3 site operator. Contraction starts at the
    // orthogonality center, so the state is not modified; the cost grows
    // with the distance between the center and the operator window.
    Complex expect_local(const LocalOperator& op) const {
        const int s = op.first_site, k = op.span;
        if (s < 0 || s + k > n_sites())
            throw std::invalid_argument("expect_local: operator window outside chain");
        if (center_ < 0) throw std::runtime_error("expect_local: state not canonical");

        if (center_ < s) {
            ComplexMatrix env = transfer_right(center_, s - 1);
            return window_expectation(op, env, false);
        }
        if (center_ >= s + k) {
            ComplexMatrix env = transfer_left(center_, s + k);
            return window_expectation(op, env, true);
        }
        return window_expectation(op, ComplexMatrix(), false);
    }

    double expect_hermitian(const LocalOperator& op) const {
        Complex v = expect_local(op);
        if (std::abs(v.imag()) > tol::expectation_imag)
            throw std::runtime_error("expect_hermitian: imaginary part above tolerance");
        return v.real();
    }

    static Complex overlap(const Mps& a, const Mps& b) {
        if (a.n_sites() != b.n_sites())
            throw std::invalid_argument("overlap: length mismatch");
        ComplexMatrix env = ComplexMatrix::Ones(1, 1);
        for (int i = 0; i < a.n_sites(); ++i) {
            const SiteTensor& ta = a.tensors_[i];
            const SiteTensor& tb = b.tensors_[i];
            ComplexMatrix next = ComplexMatrix::Zero(ta.chi_r(), tb.chi_r());
            for (int s = 0; s < 2; ++s)
                next.noalias() += physical_slice(ta, s).adjoint() * env * physical_slice(tb, s);
            env = std::move(next);
        }
        return env(0, 0);
    }

    // Dense amplitude vector ordered with site 0 as the most significant
    // bit. Intended for cross-checks at small n.
    ComplexVector to_dense() const {
        if (n_sites() > 24) throw std::invalid_argument("to_dense: chain too long");
        ComplexMatrix acc = ComplexMatrix::Ones(1, 1);
        for (int i = 0; i < n_sites(); ++i) {
            const SiteTensor& t = tensors_[i];
            ComplexMatrix next(acc.rows() * 2, t.chi_r());
            for (int s = 0; s < 2; ++s) {
                // amplitude rows interleave so that site i contributes the
                // next binary digit
                ComplexMatrix part = acc * physical_slice(t, s);
                for (Eigen::Index r = 0; r < acc.rows(); ++r)
                    next.row(r * 2 + s) = part.row(r);
            }
            acc = std::move(next);
        }
        return ComplexVector(Eigen::Map<ComplexVector>(acc.data(), acc.rows()));
    }

    // Isometry and norm checks used by tests and debug assertions.
    bool check_canonical(double tolerance = tol::isometry) const {
        if (center_ < 0) return false;
        for (int i = 0; i < n_sites(); ++i) {
            const SiteTensor& t = tensors_[i];
            if (i < center_) {
                ComplexMatrix g = t.grouped_left().adjoint() * t.grouped_left();
                if (max_abs(g - identity_matrix(t.chi_r())) > tolerance) return false;
            } else if (i > center_) {
                ComplexMatrix g = t.grouped_right() * t.grouped_right().adjoint();
                if (max_abs(g - identity_matrix(t.chi_l())) > tolerance) return false;
            }
        }
        return std::abs(norm() - 1.0) <= tolerance;
    }

    // --- binary snapshot -------------------------------------------------

    void save_snapshot(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("save_snapshot: cannot open " + path);
        const char magic[8] = {'K', 'Z', 'S', 'N', 'A', 'P', '0', '1'};
        out.write(magic, 8);
        write_i64(out, n_sites());
        write_i64(out, chi_max_);
        out.write(reinterpret_cast<const char*>(&trunc_cutoff_), sizeof(double));
        write_i64(out, center_);
        for (const auto& t : tensors_) {
            write_i64(out, t.chi_l());
            write_i64(out, 2);
            write_i64(out, t.chi_r());
            out.write(reinterpret_cast<const char*>(t.m.data()),
                      static_cast<std::streamsize>(sizeof(Complex) * t.m.size()));
        }
        if (!out) throw std::runtime_error("save_snapshot: write failed for " + path);
    }

    static Mps load_snapshot(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("load_snapshot: cannot open " + path);
        char magic[8];
        in.read(magic, 8);
        if (!in || std::string(magic, 8) != "KZSNAP01")
            throw std::runtime_error("load_snapshot: bad magic in " + path);
        const std::int64_t n = read_i64(in);
        const std::int64_t chi_max = read_i64(in);
        double cutoff = 0.0;
        in.read(reinterpret_cast<char*>(&cutoff), sizeof(double));
        const std::int64_t center = read_i64(in);
        if (n < 1 || chi_max < 1) throw std::runtime_error("load_snapshot: corrupt header");
        Mps psi(static_cast<int>(n), chi_max, cutoff);
        for (int i = 0; i < n; ++i) {
            const std::int64_t chi_l = read_i64(in);
            const std::int64_t d = read_i64(in);
            const std::int64_t chi_r = read_i64(in);
            if (d != 2 || chi_l < 1 || chi_r < 1)
                throw std::runtime_error("load_snapshot: corrupt tensor header");
            psi.tensors_[i].m.resize(chi_l * 2, chi_r);
            in.read(reinterpret_cast<char*>(psi.tensors_[i].m.data()),
                    static_cast<std::streamsize>(sizeof(Complex) * chi_l * 2 * chi_r));
        }
        if (!in) throw std::runtime_error("load_snapshot: truncated file " + path);
        psi.center_ = static_cast<int>(center);
        return psi;
    }

    // chi_l x chi_r slice of a site tensor at fixed physical index.
    static Eigen::Map<const ComplexMatrix, 0, Eigen::OuterStride<>> physical_slice(
        const SiteTensor& t, int s) {
        return {t.m.data() + static_cast<std::ptrdiff_t>(s) * t.chi_r(), t.chi_l(), t.chi_r(),
                Eigen::OuterStride<>(2 * t.chi_r())};
    }

private:
    std::vector<SiteTensor> tensors_;
    int center_ = -1;
    long chi_max_ = defaults::chi_max;
    double trunc_cutoff_ = defaults::trunc_cutoff;

    void check_site(int site) const {
        if (site < 0 || site >= n_sites()) throw std::invalid_argument("site index out of range");
    }

    void isometrize_left(int site) {
        SiteTensor& t = tensors_[site];
        ComplexMatrix q, r;
        qr_thin(t.m, q, r);
        t.m = std::move(q);
        SiteTensor& next = tensors_[site + 1];
        ComplexMatrix merged = r * next.grouped_right();
        next.m = Eigen::Map<ComplexMatrix>(merged.data(), 2 * r.rows(), next.chi_r());
    }

    void isometrize_right(int site) {
        SiteTensor& t = tensors_[site];
        ComplexMatrix l, q;
        Eigen::Map<const ComplexMatrix> grouped(t.m.data(), t.chi_l(), 2 * t.chi_r());
        lq_thin(grouped, l, q);
        const long k = q.rows();
        const long chi_r = t.chi_r();
        t.m = Eigen::Map<ComplexMatrix>(q.data(), 2 * k, chi_r);
        SiteTensor& prev = tensors_[site - 1];
        prev.m = prev.grouped_left() * l;
    }

    static void apply_gate_blocks(ComplexMatrix& theta, const ComplexMatrix& gate,
                                  long chi_l, long chi_r) {
        const long d = gate.rows();
        for (long a = 0; a < chi_l; ++a) {
            Eigen::Map<ComplexMatrix> block(theta.data() + a * d * chi_r, d, chi_r);
            block = (gate * block).eval();
        }
    }

    TruncationInfo truncation_rank(const RealVector& s) const {
        const long len = s.size();
        double total = 0.0;
        for (long i = 0; i < len; ++i) total += s[i] * s[i];
        if (total <= 0.0) throw std::runtime_error("truncation: zero spectral weight");

        long keep = len;
        double tail = 0.0;
        while (keep > 1) {
            const double candidate = tail + s[keep - 1] * s[keep - 1];
            if (candidate > trunc_cutoff_ * total) break;
            tail = candidate;
            --keep;
        }
        TruncationInfo info;
        info.saturated = keep > chi_max_;
        if (info.saturated) {
            for (long i = chi_max_; i < keep; ++i) tail += s[i] * s[i];
            keep = chi_max_;
        }
        info.chi = keep;
        info.discarded_weight = tail / total;
        return info;
    }

    static RealVector renormalized(const RealVector& s) {
        return s / s.norm();
    }

    TruncationInfo split_theta(ComplexMatrix& theta, int left_site, long chi_l, long chi_r,
                               MoveCenter move) {
        Eigen::Map<ComplexMatrix> flat(theta.data(), 2 * chi_l, 2 * chi_r);
        SvdResult d = svd(flat);
        TruncationInfo info = truncation_rank(d.s);
        const long k = info.chi;
        RealVector s = renormalized(d.s.head(k));

        SiteTensor& a = tensors_[left_site];
        SiteTensor& b = tensors_[left_site + 1];
        if (move == MoveCenter::Right) {
            a.m = d.u.leftCols(k);
            ComplexMatrix sv = s.cast<Complex>().asDiagonal() * d.vh.topRows(k);
            b.m = Eigen::Map<ComplexMatrix>(sv.data(), 2 * k, chi_r);
            center_ = left_site + 1;
        } else {
            a.m = d.u.leftCols(k) * s.cast<Complex>().asDiagonal();
            ComplexMatrix vh = d.vh.topRows(k);
            b.m = Eigen::Map<ComplexMatrix>(vh.data(), 2 * k, chi_r);
            center_ = left_site;
        }
        return info;
    }

    // Accumulated bra-ket transfer matrix from the center (inclusive)
    // rightwards up to site `last` (inclusive).
    ComplexMatrix transfer_right(int from, int last) const {
        ComplexMatrix env = identity_matrix(tensors_[from].chi_l());
        for (int i = from; i <= last; ++i) {
            const SiteTensor& t = tensors_[i];
            ComplexMatrix next = ComplexMatrix::Zero(t.chi_r(), t.chi_r());
            for (int s = 0; s < 2; ++s)
                next.noalias() += physical_slice(t, s).adjoint() * env * physical_slice(t, s);
            env = std::move(next);
        }
        return env;
    }

    ComplexMatrix transfer_left(int from, int last) const {
        ComplexMatrix env = identity_matrix(tensors_[from].chi_r());
        for (int i = from; i >= last; --i) {
            const SiteTensor& t = tensors_[i];
            ComplexMatrix next = ComplexMatrix::Zero(t.chi_l(), t.chi_l());
            for (int s = 0; s < 2; ++s)
                next.noalias() += physical_slice(t, s) * env * physical_slice(t, s).adjoint();
            env = std::move(next);
        }
        return env;
    }

    // Expectation over the operator window given a one-sided environment.
    // env_from_left: env sits at the window's left bond when true (center is
    // to the left... the center lies inside or left of the window), at the
    // right bond when false.
    Complex window_expectation(const LocalOperator& op, const ComplexMatrix& env,
                               bool env_on_right) const {
        const int s0 = op.first_site, k = op.span;
        // Window tensor W: (chi_left, 2^k, chi_right) built left to right.
        ComplexMatrix w = tensors_[s0].m;  // (chi*2) x chi_r
        long chi_left = tensors_[s0].chi_l();
        for (int j = 1; j < k; ++j) {
            const SiteTensor& t = tensors_[s0 + j];
            ComplexMatrix merged = Eigen::Map<const ComplexMatrix>(w.data(), chi_left << j,
                                                                   t.chi_l()) *
                                   t.grouped_right();
            w = std::move(merged);
        }
        const long dim = 1L << k;
        const long chi_right = tensors_[s0 + k - 1].chi_r();

        // Apply the operator on the physical indices.
        ComplexMatrix w_flat = Eigen::Map<const ComplexMatrix>(w.data(), chi_left * dim, chi_right);
        ComplexMatrix ow = w_flat;
        for (long a = 0; a < chi_left; ++a) {
            Eigen::Map<ComplexMatrix> block(ow.data() + a * dim * chi_right, dim, chi_right);
            block = (op.matrix * block).eval();
        }

        auto ket_block = [&](const ComplexMatrix& src, long a) {
            return Eigen::Map<const ComplexMatrix>(src.data() + a * dim * chi_right, dim,
                                                   chi_right);
        };

        Complex value(0.0, 0.0);
        if (env.size() == 0) {
            value = (Eigen::Map<const ComplexVector>(w_flat.data(), w_flat.size()).adjoint() *
                     Eigen::Map<const ComplexVector>(ow.data(), ow.size()))(0, 0);
        } else if (!env_on_right) {
            // env indexed [bra, ket] at the window's left bond; right side
            // closes with the identity.
            for (long a = 0; a < chi_left; ++a)
                for (long b = 0; b < chi_left; ++b) {
                    if (env(b, a) == Complex(0.0, 0.0)) continue;
                    value += env(b, a) * (ket_block(w_flat, b).conjugate()
                                              .cwiseProduct(ket_block(ow, a)))
                                             .sum();
                }
        } else {
            // env indexed [ket, bra] at the window's right bond; left side
            // closes with the identity.
            for (long a = 0; a < chi_left; ++a)
                value += (ket_block(w_flat, a).conjugate()
                              .cwiseProduct(ComplexMatrix(ket_block(ow, a) * env)))
                             .sum();
        }
        return value;
    }

    static void write_i64(std::ofstream& out, std::int64_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    static std::int64_t read_i64(std::ifstream& in) {
        std::int64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    }
};

} // namespace kz
