#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kz/mps.hpp"
#include "kz/rng.hpp"

namespace kz {

// One measurement cell: an orthonormal, complete basis over 1 or 2
// adjacent sites.
struct CellBasis {
    int first_site = 0;
    int span = 1;
    std::vector<std::string> labels;
    std::vector<ComplexVector> kets;
};

inline void validate_cells(int n_sites, const std::vector<CellBasis>& cells) {
    int expected = 0;
    for (const auto& cell : cells) {
        if (cell.first_site != expected)
            throw std::invalid_argument("sample_once: cells must partition the chain left to right");
        if (cell.span != 1 && cell.span != 2)
            throw std::invalid_argument("sample_once: cells span 1 or 2 sites");
        const Eigen::Index d = 1 << cell.span;
        if (static_cast<Eigen::Index>(cell.kets.size()) != d)
            throw std::invalid_argument("sample_once: incomplete cell basis");
        ComplexMatrix sum = ComplexMatrix::Zero(d, d);
        for (const auto& ket : cell.kets) {
            if (ket.size() != d) throw std::invalid_argument("sample_once: ket dimension mismatch");
            sum += ket * ket.adjoint();
        }
        if (max_abs(sum - identity_matrix(d)) > 1e-12)
            throw std::invalid_argument("sample_once: cell basis not complete/orthonormal");
        expected += cell.span;
    }
    if (expected != n_sites)
        throw std::invalid_argument("sample_once: cells do not cover the chain");
}

// One projective sample of every cell, left to right, with exact Born
// probabilities conditioned on the earlier outcomes. This is the
// project-and-renormalize sweep in streamed form: the boundary vector is
// the projected, renormalized conditional state, and the input MPS stays
// frozen. Requires the orthogonality center at site 0.
inline std::vector<int> sample_once(const Mps& state, const std::vector<CellBasis>& cells,
                                    SplitMix64& rng, bool validate = true) {
    if (state.ortho_center() != 0)
        throw std::invalid_argument("sample_once: state must be canonicalized at site 0");
    if (validate) validate_cells(state.n_sites(), cells);

    std::vector<int> outcomes;
    outcomes.reserve(cells.size());

    Eigen::Matrix<Complex, 1, Eigen::Dynamic> boundary(1);
    boundary(0) = Complex(1.0, 0.0);

    for (const auto& cell : cells) {
        // Conditional cell amplitudes G (2^span x chi_right).
        ComplexMatrix g1 = boundary * state.tensor(cell.first_site).grouped_right();
        ComplexMatrix g = Eigen::Map<ComplexMatrix>(g1.data(), 2, g1.size() / 2);
        if (cell.span == 2) {
            ComplexMatrix g2 = g * state.tensor(cell.first_site + 1).grouped_right();
            g = Eigen::Map<ComplexMatrix>(g2.data(), 4, g2.size() / 4);
        }

        const int d = static_cast<int>(cell.kets.size());
        std::vector<ComplexMatrix> projected(d);
        std::vector<double> prob(d);
        double total = 0.0;
        for (int k = 0; k < d; ++k) {
            projected[k] = cell.kets[k].adjoint() * g;  // 1 x chi_right
            prob[k] = projected[k].squaredNorm();
            total += prob[k];
        }

        const double r = rng.uniform() * total;
        double cumulative = 0.0;
        int chosen = d - 1;
        for (int k = 0; k < d; ++k) {
            cumulative += prob[k];
            if (r < cumulative) {
                chosen = k;
                break;
            }
        }
        outcomes.push_back(chosen);
        boundary = projected[chosen] / std::sqrt(prob[chosen]);
    }
    return outcomes;
}

inline std::string outcome_string(const std::vector<CellBasis>& cells,
                                  const std::vector<int>& outcomes) {
    std::string s;
    for (std::size_t i = 0; i < outcomes.size(); ++i) s += cells[i].labels[outcomes[i]];
    return s;
}

} // namespace kz
