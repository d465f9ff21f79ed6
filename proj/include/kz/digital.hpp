#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kz/evolve.hpp"
#include "kz/linalg.hpp"
#include "kz/models.hpp"

namespace kz {

// exp[i (alpha XX + beta YY + gamma ZZ)]
inline ComplexMatrix canonical_gate(double alpha, double beta, double gamma) {
    ComplexMatrix h = alpha * kron(pauli_x(), pauli_x()) + beta * kron(pauli_y(), pauli_y()) +
                      gamma * kron(pauli_z(), pauli_z());
    return expm_i_hermitian(h, 1.0);
}

struct DecomposedOp {
    enum class Kind { Cnot, Rz, Ry } kind;
    int a = 0;       // rotation site, or CNOT control
    int b = 0;       // CNOT target
    double angle = 0.0;
};

// Three-CNOT realization of the canonical gate on qubits (q0, q1), exact
// up to a global phase. The fixed Clifford dressing comes from
// CX(q1,q0) H_q0 CX(q0,q1) = (H x S) CX(q0,q1) (S x S^dag).
inline std::vector<DecomposedOp> decompose_canonical(double alpha, double beta, double gamma,
                                                     int q0, int q1) {
    using K = DecomposedOp::Kind;
    const double pi = M_PI;
    return {
        {K::Rz, q0, 0, pi / 2},   {K::Rz, q1, 0, -pi / 2},
        {K::Cnot, q0, q1, 0},
        {K::Rz, q0, 0, pi},       {K::Ry, q0, 0, pi / 2},
        {K::Rz, q1, 0, pi / 2},   {K::Rz, q0, 0, 2 * beta},
        {K::Cnot, q1, q0, 0},
        {K::Rz, q0, 0, -2 * alpha}, {K::Rz, q1, 0, -2 * gamma},
        {K::Rz, q0, 0, pi},       {K::Ry, q0, 0, pi / 2},
        {K::Cnot, q0, q1, 0},
    };
}

// Recompose a two-qubit sequence into a 4x4 matrix; `q0` labels the first
// (most significant) qubit of the pair.
inline ComplexMatrix recompose(const std::vector<DecomposedOp>& ops, int q0, int q1) {
    auto rz = [](double t) {
        ComplexMatrix m = ComplexMatrix::Zero(2, 2);
        m(0, 0) = std::exp(Complex(0, -t / 2));
        m(1, 1) = std::exp(Complex(0, t / 2));
        return m;
    };
    auto ry = [](double t) {
        ComplexMatrix m(2, 2);
        m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
        return m;
    };
    ComplexMatrix cx01 = ComplexMatrix::Zero(4, 4);
    cx01(0, 0) = cx01(1, 1) = cx01(2, 3) = cx01(3, 2) = 1.0;
    ComplexMatrix cx10 = ComplexMatrix::Zero(4, 4);
    cx10(0, 0) = cx10(1, 3) = cx10(2, 2) = cx10(3, 1) = 1.0;

    ComplexMatrix u = identity_matrix(4);
    for (const auto& op : ops) {
        ComplexMatrix g;
        switch (op.kind) {
            case DecomposedOp::Kind::Cnot:
                if (op.a == q0 && op.b == q1) g = cx01;
                else if (op.a == q1 && op.b == q0) g = cx10;
                else throw std::invalid_argument("recompose: CNOT off the qubit pair");
                break;
            case DecomposedOp::Kind::Rz:
                g = op.a == q0 ? kron(rz(op.angle), identity_matrix(2))
                               : kron(identity_matrix(2), rz(op.angle));
                break;
            case DecomposedOp::Kind::Ry:
                g = op.a == q0 ? kron(ry(op.angle), identity_matrix(2))
                               : kron(identity_matrix(2), ry(op.angle));
                break;
        }
        u = g * u;
    }
    return u;
}

inline double distance_up_to_phase(const ComplexMatrix& a, const ComplexMatrix& b) {
    const Complex tr = (a.adjoint() * b).trace();
    if (std::abs(tr) < 1e-12) return max_abs(a - b);
    const Complex phase = tr / std::abs(tr);
    return max_abs(ComplexMatrix(a * phase - b));
}

struct CompiledGate {
    int layer_tag = 1;  // 1 = AB block, 2 = BA block
    int site_a = 0;
    int site_b = 0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

struct CompiledCircuit {
    int n_sites = 0;
    double tau_q = 0.0;
    double dt = 0.0;
    double delta = 0.0;
    std::vector<CompiledGate> gates;  // application order
};

// Digital-protocol circuit: per Trotter step one AB block at strength
// v'(t) and one BA block at strength w'(t), couplings evaluated at the
// step midpoint, each gate exp[i(a XX + b YY + c ZZ)] with
// (a, b, c) = -(J dt / 2)(1, 1, delta).
inline CompiledCircuit compile_digital(const ModelSpec& model, const QuenchProtocol& protocol,
                                       int n_sites) {
    if (model.kind != ModelKind::ESSH_DIGITAL)
        throw std::invalid_argument("compile_digital: model must be the digital eSSH ramp");
    if (protocol.schedule != Schedule::TwoHamRamp)
        throw std::invalid_argument("compile_digital: protocol must be the two-Hamiltonian ramp");
    validate_model(model, n_sites);

    CompiledCircuit circuit;
    circuit.n_sites = n_sites;
    circuit.tau_q = protocol.tau_q;
    circuit.dt = protocol.dt;
    circuit.delta = model.delta;

    for (const TimeStep& step : time_steps(protocol)) {
        const double tm = step.t + 0.5 * step.dt;
        const double strengths[2] = {v_prime(protocol, tm), w_prime(protocol, tm)};
        for (int block = 0; block < 2; ++block) {
            for (int b = block; b + 1 < n_sites; b += 2) {
                CompiledGate g;
                g.layer_tag = block + 1;
                g.site_a = b;
                g.site_b = b + 1;
                g.alpha = g.beta = -0.5 * strengths[block] * step.dt;
                g.gamma = g.alpha * model.delta;
                circuit.gates.push_back(g);
            }
        }
    }
    return circuit;
}

// SWAP injection on a compiled circuit. Because the canonical-gate
// generators commute and SWAP = e^{-i pi/4} exp[i pi/4 (XX+YY+ZZ)],
// prepending a SWAP shifts all three angles by pi/4.
inline void inject_swaps(CompiledCircuit& circuit, SwapPlan plan, int half_block = 2) {
    if (plan == SwapPlan::None) return;
    if (half_block != 1 && half_block != 2)
        throw std::invalid_argument("inject_swaps: block tag must be 1 or 2");
    for (auto& g : circuit.gates) {
        const bool hit = plan == SwapPlan::Full ? true : g.layer_tag == half_block;
        if (!hit) continue;
        g.alpha += M_PI / 4;
        g.beta += M_PI / 4;
        g.gamma += M_PI / 4;
    }
}

// Plain-text exports: one gate per line, either the canonical-angle form
// or the CNOT + rotation sequence.
inline std::string export_circuit_text(const CompiledCircuit& circuit, bool decomposed) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& g : circuit.gates) {
        if (!decomposed) {
            out << g.layer_tag << ' ' << g.site_a << ' ' << g.site_b << ' ' << g.alpha << ' '
                << g.beta << ' ' << g.gamma << '\n';
            continue;
        }
        for (const auto& op : decompose_canonical(g.alpha, g.beta, g.gamma, g.site_a, g.site_b)) {
            switch (op.kind) {
                case DecomposedOp::Kind::Cnot:
                    out << "CNOT " << op.a << ' ' << op.b << '\n';
                    break;
                case DecomposedOp::Kind::Rz:
                    out << "RZ " << op.a << ' ' << op.angle << '\n';
                    break;
                case DecomposedOp::Kind::Ry:
                    out << "RY " << op.a << ' ' << op.angle << '\n';
                    break;
            }
        }
    }
    return out.str();
}

} // namespace kz
