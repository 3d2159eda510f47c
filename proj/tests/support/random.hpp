#pragma once

// Seeded random operators for property tests.

#include <algorithm>
#include <random>
#include <vector>

#include "mifisher/mifisher.hpp"

namespace mifisher::testing {

using Rng = std::mt19937_64;

inline CMatrix random_complex(std::size_t rows, std::size_t cols, Rng &rng) {
    std::normal_distribution<double> g;
    CMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

inline CMatrix random_hermitian(std::size_t d, Rng &rng, double scale = 1.0) {
    return hermitian_part(random_complex(d, d, rng)) * scale;
}

inline CMatrix random_unitary(std::size_t d, Rng &rng) { return expi_hermitian(random_hermitian(d, rng, 2.0)); }

// Full rank with probability one when rank == d.
inline CMatrix random_density(std::size_t d, Rng &rng, std::size_t rank = 0) {
    const CMatrix g = random_complex(d, rank == 0 ? d : rank, rng);
    CMatrix rho = g * g.adjoint();
    return hermitian_part(rho * (1.0 / rho.trace().real()));
}

inline CVector random_state_vector(std::size_t d, Rng &rng) {
    CVector v = random_complex(d, 1, rng).col(0);
    const double n = norm(v);
    for (auto &x : v) x /= n;
    return v;
}

// exp(-i theta G) rho0 exp(i theta G) with random full-rank rho0 and random G.
inline Family random_generator_family(std::size_t d, Rng &rng, std::optional<BipartiteDims> dims = std::nullopt) {
    return Family::generator(DensityMatrix(random_density(d, rng), dims), random_hermitian(d, rng));
}

inline Povm random_projective(std::size_t d, Rng &rng) { return projective_from_unitary(random_unitary(d, rng)); }

// K-outcome POVM S^{-1/2} A_i S^{-1/2} with random positive A_i.
inline Povm random_povm(std::size_t d, std::size_t outcomes, Rng &rng) {
    std::vector<CMatrix> a;
    CMatrix s = CMatrix::zeros(d);
    std::uniform_int_distribution<std::size_t> rank_dist(1, d);
    std::size_t total_rank = 0;
    for (std::size_t i = 0; i < outcomes; ++i) {
        // S must be invertible, so the ranks have to add up to at least d
        const std::size_t rank = i + 1 == outcomes ? std::max(rank_dist(rng), d - std::min(d, total_rank)) : rank_dist(rng);
        total_rank += rank;
        const CMatrix g = random_complex(d, rank, rng);
        a.push_back(g * g.adjoint());
        s += a.back();
    }
    const CMatrix s_inv_sqrt = spectral_apply(herm_eig(hermitian_part(s)), [](double l) { return cplx(1.0 / std::sqrt(l)); });
    std::vector<CMatrix> els;
    for (const auto &x : a) els.push_back(hermitian_part(s_inv_sqrt * x * s_inv_sqrt));
    return Povm(std::move(els));
}

// Kraus operators cut from an isometry C^d -> C^{d*kraus_count}.
inline QuantumChannel random_channel(std::size_t d, std::size_t kraus_count, Rng &rng) {
    const CMatrix u = random_unitary(d * kraus_count, rng);
    std::vector<CMatrix> ks;
    for (std::size_t mu = 0; mu < kraus_count; ++mu) {
        CMatrix k(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) k(i, j) = u(mu * d + i, j);
        ks.push_back(std::move(k));
    }
    return QuantumChannel(std::move(ks), "random");
}

}  // namespace mifisher::testing
