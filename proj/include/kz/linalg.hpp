#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "kz/tolerances.hpp"

extern "C" void openblas_set_num_threads(int);

namespace kz {

using Complex = std::complex<double>;

// Row-major dense complex matrix; backing store for gates, local
// Hamiltonians and projectors, and the flattened views of MPS tensors.
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RealVector = Eigen::VectorXd;

// All decompositions here run on small dense blocks; parallelism lives at
// the sweep level, so BLAS is pinned to one thread per process.
inline void pin_blas_single_thread() { openblas_set_num_threads(1); }

inline double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

inline bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::hermiticity) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, max_abs(m));
    return max_abs(m - m.adjoint()) <= tolerance * scale;
}

inline bool is_unitary(const ComplexMatrix& m, double tolerance) {
    if (m.rows() != m.cols()) return false;
    ComplexMatrix d = m.adjoint() * m;
    d -= ComplexMatrix::Identity(m.rows(), m.cols());
    return max_abs(d) <= tolerance;
}

struct SvdResult {
    ComplexMatrix u;   // m x k, orthonormal columns
    RealVector s;      // k non-negative values, descending
    ComplexMatrix vh;  // k x n, orthonormal rows
};

// Thin SVD via LAPACK divide-and-conquer, with the classic QR-iteration
// driver as a fallback on the rare zgesdd convergence failure.
inline SvdResult svd(const ComplexMatrix& m) {
    if (m.size() == 0) throw std::invalid_argument("svd: empty matrix");
    if (!all_finite(m)) throw std::invalid_argument("svd: non-finite entries");
    const lapack_int rows = static_cast<lapack_int>(m.rows());
    const lapack_int cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);

    SvdResult out;
    out.u.resize(rows, k);
    out.s.resize(k);
    out.vh.resize(k, cols);

    ComplexMatrix work = m;
    lapack_int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'S', rows, cols,
                                     work.data(), cols, out.s.data(),
                                     out.u.data(), k, out.vh.data(), cols);
    if (info != 0) {
        work = m;
        RealVector superb(std::max<lapack_int>(1, k - 1));
        info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'S', 'S', rows, cols,
                              work.data(), cols, out.s.data(), out.u.data(), k,
                              out.vh.data(), cols, superb.data());
    }
    if (info != 0) {
        throw std::runtime_error("svd: did not converge for " +
                                 std::to_string(rows) + "x" + std::to_string(cols) +
                                 " matrix (info=" + std::to_string(info) + ")");
    }
    return out;
}

struct EigResult {
    RealVector values;      // ascending
    ComplexMatrix vectors;  // column j pairs with values[j]
};

inline EigResult herm_eig(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("herm_eig: matrix not square");
    if (!is_hermitian(h)) throw std::invalid_argument("herm_eig: matrix not Hermitian");
    const lapack_int n = static_cast<lapack_int>(h.rows());

    EigResult out;
    out.values.resize(n);
    out.vectors = h;
    lapack_int info = LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'V', 'L', n,
                                     out.vectors.data(), n, out.values.data());
    if (info != 0) {
        throw std::runtime_error("herm_eig: zheevd failed for " + std::to_string(n) +
                                 "x" + std::to_string(n) + " matrix (info=" +
                                 std::to_string(info) + ")");
    }
    return out;
}

// exp(i * scale * h) for Hermitian h, via eigendecomposition.
inline ComplexMatrix expm_i_hermitian(const ComplexMatrix& h, double scale) {
    EigResult eig = herm_eig(h);
    const Eigen::Index n = h.rows();
    ComplexVector phases(n);
    for (Eigen::Index j = 0; j < n; ++j)
        phases[j] = std::exp(Complex(0.0, scale * eig.values[j]));
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

// Thin QR: a = q * r with q (m x k) left-isometric and r (k x n) upper
// triangular. Used to shift the MPS orthogonality center.
inline void qr_thin(const ComplexMatrix& a, ComplexMatrix& q, ComplexMatrix& r) {
    const lapack_int rows = static_cast<lapack_int>(a.rows());
    const lapack_int cols = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(rows, cols);
    ComplexMatrix work = a;
    ComplexVector tau(k);
    lapack_int info = LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, rows, cols, work.data(), cols, tau.data());
    if (info != 0) throw std::runtime_error("qr_thin: zgeqrf failed");
    r = work.topRows(k).triangularView<Eigen::Upper>();
    info = LAPACKE_zungqr(LAPACK_ROW_MAJOR, rows, k, k, work.data(), cols, tau.data());
    if (info != 0) throw std::runtime_error("qr_thin: zungqr failed");
    q = work.leftCols(k);
}

// Thin LQ: a = l * q with l (m x k) lower triangular and q (k x n)
// right-isometric.
inline void lq_thin(const ComplexMatrix& a, ComplexMatrix& l, ComplexMatrix& q) {
    const lapack_int rows = static_cast<lapack_int>(a.rows());
    const lapack_int cols = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(rows, cols);
    ComplexMatrix work = a;
    ComplexVector tau(k);
    lapack_int info = LAPACKE_zgelqf(LAPACK_ROW_MAJOR, rows, cols, work.data(), cols, tau.data());
    if (info != 0) throw std::runtime_error("lq_thin: zgelqf failed");
    l = work.leftCols(k).triangularView<Eigen::Lower>();
    info = LAPACKE_zunglq(LAPACK_ROW_MAJOR, k, cols, k, work.data(), cols, tau.data());
    if (info != 0) throw std::runtime_error("lq_thin: zunglq failed");
    q = work.topRows(k);
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline ComplexMatrix identity_matrix(Eigen::Index n) {
    return ComplexMatrix::Identity(n, n);
}

inline ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

inline ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// Operator acting on `span` adjacent sites embedded at offset `pos`
// (0-based) within a window of `width` sites.
inline ComplexMatrix embed_in_window(const ComplexMatrix& op, int pos, int span, int width) {
    ComplexMatrix out = identity_matrix(1 << pos);
    out = kron(out, op);
    const int right = width - pos - span;
    if (right > 0) out = kron(out, identity_matrix(1 << right));
    return out;
}

} // namespace kz
