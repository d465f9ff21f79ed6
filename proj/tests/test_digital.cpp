#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "kz/dense.hpp"
#include "kz/digital.hpp"

using namespace kz;

namespace {

ModelSpec digital_model(double delta = 3.0) {
    ModelSpec m;
    m.kind = ModelKind::ESSH_DIGITAL;
    m.delta = delta;
    return m;
}

} // namespace

TEST_CASE("zero-angle decomposition is the identity up to phase", "[digital]") {
    auto ops = decompose_canonical(0, 0, 0, 0, 1);
    CHECK(distance_up_to_phase(recompose(ops, 0, 1), identity_matrix(4)) < 1e-12);
}

TEST_CASE("decomposition recomposes the canonical gate", "[digital]") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double a = dist(gen), b = dist(gen), c = dist(gen);
        ComplexMatrix u = canonical_gate(a, b, c);
        ComplexMatrix v = recompose(decompose_canonical(a, b, c, 0, 1), 0, 1);
        worst = std::max(worst, distance_up_to_phase(v, u));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("equal pi/4 angles give the SWAP gate", "[digital]") {
    ComplexMatrix u = canonical_gate(M_PI / 4, M_PI / 4, M_PI / 4);
    ComplexMatrix expected = std::exp(Complex(0, M_PI / 4)) * swap_gate();
    CHECK(max_abs(u - expected) < 1e-12);
}

TEST_CASE("compiled circuit mirrors the trotter layers", "[digital]") {
    ModelSpec m = digital_model();
    QuenchProtocol p = make_protocol(m, 2.0);
    const int n = 8;
    CompiledCircuit circuit = compile_digital(m, p, n);

    const auto steps = time_steps(p);
    const std::size_t gates_per_step = (n / 2) + (n / 2 - 1);
    REQUIRE(circuit.gates.size() == steps.size() * gates_per_step);

    std::size_t k = 0;
    for (const auto& step : steps) {
        auto layers = trotter_layers(m, p, step.t, step.dt, n);
        for (const auto& layer : layers)
            for (const auto& g : layer.gates) {
                const CompiledGate& cg = circuit.gates[k++];
                CHECK(cg.layer_tag == g.block_tag);
                CHECK(cg.site_a == g.first_site);
                CHECK(max_abs(canonical_gate(cg.alpha, cg.beta, cg.gamma) - g.u) < 1e-12);
            }
    }
}

TEST_CASE("window start leaves the BA block inactive", "[digital]") {
    ModelSpec m = digital_model();
    QuenchProtocol p = make_protocol(m, 4.0);
    // the schedule itself vanishes for the BA block at t = -tau_q
    const double w0 = w_prime(p, -p.tau_q);
    CHECK(w0 == Catch::Approx(0.0));
    CHECK(max_abs(canonical_gate(-0.5 * w0 * p.dt, -0.5 * w0 * p.dt,
                                 -0.5 * w0 * p.dt * m.delta) -
                  identity_matrix(4)) < 1e-14);
    // with midpoint evaluation the first emitted BA gates carry O(dt/tau)
    CompiledCircuit circuit = compile_digital(m, p, 8);
    for (const auto& g : circuit.gates) {
        if (g.layer_tag != 2) continue;
        CHECK(std::abs(g.alpha) <= 0.5 * p.dt * (p.dt / (2 * p.tau_q)) + 1e-12);
        break;
    }
}

TEST_CASE("swap injection shifts the canonical angles by pi/4", "[digital]") {
    ModelSpec m = digital_model();
    QuenchProtocol p = make_protocol(m, 2.0);
    CompiledCircuit plain = compile_digital(m, p, 8);
    CompiledCircuit half = plain;
    inject_swaps(half, SwapPlan::Half);
    CompiledCircuit full = plain;
    inject_swaps(full, SwapPlan::Full);

    for (std::size_t k = 0; k < plain.gates.size(); ++k) {
        const auto& g0 = plain.gates[k];
        ComplexMatrix swapped = ComplexMatrix(canonical_gate(g0.alpha, g0.beta, g0.gamma) *
                                              swap_gate());
        const auto& gh = half.gates[k];
        ComplexMatrix uh = canonical_gate(gh.alpha, gh.beta, gh.gamma);
        if (g0.layer_tag == 2)
            CHECK(distance_up_to_phase(uh, swapped) < 1e-12);
        else
            CHECK(max_abs(uh - canonical_gate(g0.alpha, g0.beta, g0.gamma)) < 1e-14);
        const auto& gf = full.gates[k];
        CHECK(distance_up_to_phase(canonical_gate(gf.alpha, gf.beta, gf.gamma), swapped) <
              1e-12);
    }
}

TEST_CASE("compiled circuit reproduces the MPS evolution", "[digital]") {
    ModelSpec m = digital_model();
    QuenchProtocol p = make_protocol(m, 2.0);
    const int n = 8;

    DenseState state = prepare_initial_dense(m, p, n);
    for (const auto& g : compile_digital(m, p, n).gates)
        apply_dense_gate(state, canonical_gate(g.alpha, g.beta, g.gamma), g.site_a, 2);

    Mps initial = prepare_initial_state(m, p, n, 128, 0.0);
    auto [final_state, record] = evolve(initial, m, p);
    const ErrorBasis basis = error_basis_for(m, n);
    CHECK(std::abs(dense_eta(state, basis).eta - eta_expectation(final_state, basis).eta) <
          1e-10);
}

TEST_CASE("circuit text export formats", "[digital]") {
    ModelSpec m = digital_model();
    QuenchProtocol p = make_protocol(m, 1.0, 0.5);
    CompiledCircuit circuit = compile_digital(m, p, 4);

    std::istringstream plain(export_circuit_text(circuit, false));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(plain, line)) {
        std::istringstream row(line);
        int layer, a, b;
        double al, be, ga;
        REQUIRE((row >> layer >> a >> b >> al >> be >> ga));
        CHECK((layer == 1 || layer == 2));
        CHECK(b == a + 1);
        ++lines;
    }
    CHECK(lines == circuit.gates.size());

    std::istringstream rich(export_circuit_text(circuit, true));
    std::size_t cnots = 0, rotations = 0;
    while (std::getline(rich, line)) {
        std::istringstream row(line);
        std::string kind;
        row >> kind;
        if (kind == "CNOT") {
            int a, b;
            REQUIRE((row >> a >> b));
            ++cnots;
        } else {
            REQUIRE((kind == "RZ" || kind == "RY"));
            int site;
            double angle;
            REQUIRE((row >> site >> angle));
            ++rotations;
        }
    }
    CHECK(cnots == 3 * circuit.gates.size());
}

TEST_CASE("compile_digital validates its inputs", "[digital]") {
    ModelSpec tfim;
    QuenchProtocol p = make_protocol(digital_model(), 1.0);
    CHECK_THROWS_AS(compile_digital(tfim, p, 8), std::invalid_argument);
    ModelSpec m = digital_model();
    QuenchProtocol linear = make_protocol(tfim, 1.0);
    CHECK_THROWS_AS(compile_digital(m, linear, 8), std::invalid_argument);
}
