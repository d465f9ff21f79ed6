#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kz/linalg.hpp"

using namespace kz;

namespace {

ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937& gen) {
    std::normal_distribution<double> dist(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = Complex(dist(gen), dist(gen));
    return m;
}

ComplexMatrix random_hermitian(Eigen::Index n, std::mt19937& gen) {
    ComplexMatrix m = random_complex(n, n, gen);
    return ComplexMatrix(0.5 * (m + m.adjoint()));
}

} // namespace

TEST_CASE("svd of identity", "[linalg]") {
    auto r = svd(identity_matrix(2));
    REQUIRE(r.s.size() == 2);
    CHECK(r.s[0] == Catch::Approx(1.0).margin(1e-14));
    CHECK(r.s[1] == Catch::Approx(1.0).margin(1e-14));
    CHECK(max_abs(ComplexMatrix(r.u * r.s.asDiagonal().toDenseMatrix().cast<Complex>() * r.vh) -
                  identity_matrix(2)) < 1e-14);
}

TEST_CASE("svd of diagonal matrix", "[linalg]") {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 3.0;
    auto r = svd(m);
    CHECK(r.s[0] == Catch::Approx(3.0).margin(1e-14));
    CHECK(r.s[1] == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("svd reconstructs a random rectangular matrix", "[linalg]") {
    std::mt19937 gen(7);
    ComplexMatrix m = random_complex(8, 4, gen);
    auto r = svd(m);
    ComplexMatrix back = r.u * r.s.cast<Complex>().asDiagonal() * r.vh;
    CHECK(max_abs(back - m) <= tol::svd_reconstruction * max_abs(m));
}

TEST_CASE("svd properties over random sizes", "[linalg]") {
    std::mt19937 gen(21);
    std::uniform_int_distribution<int> size(1, 64);
    for (int trial = 0; trial < 24; ++trial) {
        const Eigen::Index rows = size(gen), cols = size(gen);
        ComplexMatrix m = random_complex(rows, cols, gen);
        auto r = svd(m);
        const Eigen::Index k = std::min(rows, cols);

        ComplexMatrix back = r.u * r.s.cast<Complex>().asDiagonal() * r.vh;
        CHECK(max_abs(back - m) <= tol::svd_reconstruction * std::max(1.0, max_abs(m)));
        CHECK(max_abs(ComplexMatrix(r.u.adjoint() * r.u) - identity_matrix(k)) < 1e-12);
        CHECK(max_abs(ComplexMatrix(r.vh * r.vh.adjoint()) - identity_matrix(k)) < 1e-12);
        for (Eigen::Index i = 0; i + 1 < k; ++i) CHECK(r.s[i] >= r.s[i + 1]);
        CHECK(r.s[k - 1] >= 0.0);
    }
}

TEST_CASE("svd rejects non-finite input", "[linalg]") {
    ComplexMatrix m = identity_matrix(2);
    m(0, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(svd(m), std::invalid_argument);
}

TEST_CASE("herm_eig on Pauli matrices", "[linalg]") {
    auto rz = herm_eig(pauli_z());
    CHECK(rz.values[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(rz.values[1] == Catch::Approx(1.0).margin(1e-12));

    auto rx = herm_eig(pauli_x());
    CHECK(rx.values[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(rx.values[1] == Catch::Approx(1.0).margin(1e-12));
    // Eigenvectors are (|0> -+ |1>)/sqrt(2) up to phase: check componentwise
    // magnitudes and the eigen relation.
    for (int j = 0; j < 2; ++j) {
        ComplexVector v = rx.vectors.col(j);
        CHECK(std::abs(v[0]) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
        CHECK(std::abs(v[1]) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
        ComplexVector residual = pauli_x() * v - rx.values[j] * v;
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("herm_eig of classical Ising bond", "[linalg]") {
    ComplexMatrix h = -kron(pauli_z(), pauli_z());
    auto r = herm_eig(h);
    CHECK(r.values[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(r.values[1] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(r.values[2] == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.values[3] == Catch::Approx(1.0).margin(1e-12));
    // Ground space spanned by |00>, |11>: both eigenvectors live entirely on
    // those basis states.
    for (int j = 0; j < 2; ++j) {
        ComplexVector v = r.vectors.col(j);
        CHECK(std::abs(v[1]) < 1e-12);
        CHECK(std::abs(v[2]) < 1e-12);
    }
}

TEST_CASE("herm_eig orthonormality and eigen relation on random input", "[linalg]") {
    std::mt19937 gen(5);
    ComplexMatrix h = random_hermitian(16, gen);
    auto r = herm_eig(h);
    CHECK(max_abs(ComplexMatrix(r.vectors.adjoint() * r.vectors) - identity_matrix(16)) < 1e-12);
    ComplexMatrix resid = h * r.vectors - r.vectors * r.values.cast<Complex>().asDiagonal();
    CHECK(max_abs(resid) < 1e-10);
    for (Eigen::Index i = 0; i + 1 < r.values.size(); ++i)
        CHECK(r.values[i] <= r.values[i + 1]);
}

TEST_CASE("herm_eig rejects non-Hermitian input", "[linalg]") {
    ComplexMatrix m(2, 2);
    m << 0, 1, 0, 0;
    CHECK_THROWS_AS(herm_eig(m), std::invalid_argument);
}

TEST_CASE("expm_i_hermitian at scale zero is the identity", "[linalg]") {
    std::mt19937 gen(11);
    ComplexMatrix h = random_hermitian(4, gen);
    CHECK(max_abs(expm_i_hermitian(h, 0.0) - identity_matrix(4)) < 1e-14);
}

TEST_CASE("expm of the Heisenberg generator at pi/4 gives SWAP", "[linalg]") {
    // XX + YY + ZZ = 2*SWAP - I, so exp(i pi/4 (XX+YY+ZZ)) = e^{i pi/4} SWAP.
    ComplexMatrix h = kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y()) +
                      kron(pauli_z(), pauli_z());
    ComplexMatrix u = expm_i_hermitian(h, M_PI / 4.0);
    ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
    swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
    ComplexMatrix expected = std::exp(Complex(0.0, M_PI / 4.0)) * swap;
    CHECK(max_abs(u - expected) < 1e-12);
}

TEST_CASE("expm_i_hermitian returns a unitary", "[linalg]") {
    std::mt19937 gen(13);
    ComplexMatrix h = random_hermitian(4, gen);
    ComplexMatrix u = expm_i_hermitian(h, 0.37);
    CHECK(is_unitary(u, tol::kernel_unitarity));
}

TEST_CASE("expm_i_hermitian is additive in the scale", "[linalg]") {
    std::mt19937 gen(17);
    for (int trial = 0; trial < 8; ++trial) {
        ComplexMatrix h = random_hermitian(8, gen);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        const double s1 = dist(gen), s2 = dist(gen);
        ComplexMatrix lhs = expm_i_hermitian(h, s1) * expm_i_hermitian(h, s2);
        ComplexMatrix rhs = expm_i_hermitian(h, s1 + s2);
        CHECK(max_abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("qr and lq produce isometries", "[linalg]") {
    std::mt19937 gen(23);
    ComplexMatrix a = random_complex(12, 5, gen);
    ComplexMatrix q, r;
    qr_thin(a, q, r);
    CHECK(max_abs(ComplexMatrix(q * r) - a) < 1e-12);
    CHECK(max_abs(ComplexMatrix(q.adjoint() * q) - identity_matrix(5)) < 1e-12);

    ComplexMatrix b = random_complex(5, 12, gen);
    ComplexMatrix l, q2;
    lq_thin(b, l, q2);
    CHECK(max_abs(ComplexMatrix(l * q2) - b) < 1e-12);
    CHECK(max_abs(ComplexMatrix(q2 * q2.adjoint()) - identity_matrix(5)) < 1e-12);
}
