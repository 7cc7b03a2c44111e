#pragma once

#include <random>

#include "failsafe/failsafe.hpp"

namespace fixtures {

using namespace failsafe;

// Entries with degree below `max_deg`, each nonzero with probability 1/2.
inline PolyMatrix random_matrix(const PrimeField& f, std::size_t rows, std::size_t cols, std::size_t order,
                                std::size_t max_deg, std::mt19937_64& rng) {
    PolyMatrix m(rows, cols, order);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            if (uniform_below(rng, 2)) continue;
            const std::size_t d = std::min(order, max_deg);
            for (std::size_t k = 0; k < d; ++k) m(i, j)[k] = f.random_element(rng);
        }
    return m;
}

// I + x M with M dense of degree below order - 1.
inline PolyMatrix random_unipotent(const PrimeField& f, std::size_t n, std::size_t order, std::mt19937_64& rng) {
    PolyMatrix m = PolyMatrix::identity(n, order);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 1; k < order; ++k)
                if (uniform_below(rng, 3) == 0) m(i, j)[k] = f.random_element(rng);
    return m;
}

// Random constant term (invertible with high probability) plus random higher terms.
inline PolyMatrix random_unit_matrix(const PrimeField& f, std::size_t n, std::size_t order, std::mt19937_64& rng) {
    PolyMatrix m(n, n, order);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < order; ++k) m(i, j)[k] = f.random_element(rng);
    return m;
}

// Column degrees spread over [0, order - 1] roughly geometrically, so every
// bucket of the degree-aware product is populated.
inline PolyMatrix skewed_matrix(const PrimeField& f, std::size_t rows, std::size_t cols, std::size_t order,
                                std::mt19937_64& rng) {
    PolyMatrix m(rows, cols, order);
    for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t cap = (uniform_below(rng, 4) == 0) ? order
                                                             : std::size_t{1} << uniform_below(rng, 1 + ntt::log2_ceil(order));
        const std::size_t col_deg = uniform_below(rng, std::min(order, cap));
        for (std::size_t i = 0; i < rows; ++i) {
            if (uniform_below(rng, 3) == 0) continue;
            const std::size_t d = uniform_below(rng, col_deg + 1);
            for (std::size_t k = 0; k <= d; ++k) m(i, j)[k] = f.random_element(rng);
        }
        if (uniform_below(rng, 6) == 0)
            for (std::size_t i = 0; i < rows; ++i) m(i, j) = TruncatedPoly(order);
    }
    return m;
}

inline WeightedDigraph random_graph(std::size_t n, int max_weight, std::mt19937_64& rng, double density = -1) {
    if (density < 0) density = std::min(0.9, 3.0 / static_cast<double>(n) + 0.05 * static_cast<double>(uniform_below(rng, 4)));
    return random_digraph(n, max_weight, density, rng);
}

}  // namespace fixtures
