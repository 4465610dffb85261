#pragma once

// Shared test fixtures: deterministic random instance generators and
// independent brute-force oracles. Everything here is test-only and must not
// depend on the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "povmkit/matrix.hpp"
#include "povmkit/observable.hpp"

namespace povm::testsupport {

using Rng = std::mt19937_64;

inline Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    return g;
}

inline Matrix random_hermitian(std::size_t dim, Rng& rng) {
    const Matrix g = ginibre(dim, dim, rng);
    return (0.5 * (g + g.adjoint())).hermitized();
}

/// Haar-ish random unitary: modified Gram-Schmidt on a Ginibre matrix.
inline Matrix random_unitary(std::size_t dim, Rng& rng) {
    Matrix g = ginibre(dim, dim, rng);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            Complex proj{};
            for (std::size_t i = 0; i < dim; ++i) proj += std::conj(g(i, k)) * g(i, j);
            for (std::size_t i = 0; i < dim; ++i) g(i, j) -= proj * g(i, k);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) norm += std::norm(g(i, j));
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < dim; ++i) g(i, j) /= norm;
    }
    return g;
}

/// Random PSD matrix of the requested rank (zero matrix for rank 0).
inline Matrix random_psd(std::size_t dim, std::size_t rank, Rng& rng) {
    if (rank == 0) return Matrix::zero(dim);
    const Matrix g = ginibre(dim, rank, rng);
    return (g * g.adjoint()).hermitized();
}

/// Random POVM with the given effect ranks: A_i ~ PSD(rank_i), then
/// symmetrized normalization E_i = S^{-1/2} A_i S^{-1/2} with S the sum.
/// The ranks must cover the space (sum >= dim) for S to be invertible;
/// ill-conditioned draws are rejected and retried.
inline DiscreteObservable random_povm(std::size_t dim, const std::vector<std::size_t>& ranks,
                                      Rng& rng) {
    std::size_t rank_sum = 0;
    for (std::size_t r : ranks) rank_sum += r;
    if (rank_sum < dim)
        throw std::invalid_argument("random_povm: ranks do not cover the space");

    for (int attempt = 0;; ++attempt) {
        std::vector<Matrix> raw;
        Matrix s = Matrix::zero(dim);
        for (std::size_t r : ranks) {
            raw.push_back(random_psd(dim, r, rng));
            s += raw.back();
        }
        const EigResult eig = herm_eig(s);
        if (eig.eigenvalues.front() < 1e-6 && attempt < 64) continue;
        Matrix inv_root(dim, dim);
        for (std::size_t k = 0; k < dim; ++k) {
            const double w = 1.0 / std::sqrt(eig.eigenvalues[k]);
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j)
                    inv_root(i, j) += w * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
        }
        DiscreteObservable obs;
        obs.space_dim = dim;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            obs.outcomes.push_back("x" + std::to_string(i + 1));
            obs.effects.push_back((inv_root * raw[i] * inv_root).hermitized());
        }
        return obs;
    }
}

inline DiscreteObservable random_povm(std::size_t dim, std::size_t n_outcomes, Rng& rng) {
    std::uniform_int_distribution<std::size_t> rank_dist(1, dim);
    std::vector<std::size_t> ranks(n_outcomes);
    for (;;) {
        std::size_t sum = 0;
        for (auto& r : ranks) sum += (r = rank_dist(rng));
        if (sum >= dim) break;
    }
    return random_povm(dim, ranks, rng);
}

/// Random PVM: the standard basis of a random unitary frame, partitioned
/// into n_outcomes groups (empty groups give zero effects).
inline DiscreteObservable random_pvm(std::size_t dim, std::size_t n_outcomes, Rng& rng,
                                     bool allow_zero_effects = false) {
    const Matrix u = random_unitary(dim, rng);
    std::vector<std::size_t> group(dim);
    std::uniform_int_distribution<std::size_t> pick(0, n_outcomes - 1);
    for (std::size_t i = 0; i < dim; ++i) group[i] = pick(rng);
    if (!allow_zero_effects) {
        // Force every outcome nonempty when possible.
        std::vector<std::size_t> perm(dim);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t k = 0; k < std::min(n_outcomes, dim); ++k) group[perm[k]] = k;
    }
    DiscreteObservable obs;
    obs.space_dim = dim;
    for (std::size_t o = 0; o < n_outcomes; ++o) {
        Matrix p = Matrix::zero(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            if (group[i] != o) continue;
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b < dim; ++b) p(a, b) += u(a, i) * std::conj(u(b, i));
        }
        obs.outcomes.push_back("p" + std::to_string(o + 1));
        obs.effects.push_back(p.hermitized());
    }
    return obs;
}

/// Pushforward E o f^{-1} under an outcome map (target count inferred).
inline DiscreteObservable pushforward(const DiscreteObservable& obs,
                                      const std::vector<std::size_t>& map,
                                      std::size_t n_targets) {
    DiscreteObservable out;
    out.space_dim = obs.space_dim;
    for (std::size_t y = 0; y < n_targets; ++y) {
        out.outcomes.push_back("y" + std::to_string(y + 1));
        Matrix sum = Matrix::zero(obs.space_dim);
        for (std::size_t x = 0; x < map.size(); ++x)
            if (map[x] == y) sum += obs.effects[x];
        out.effects.push_back(sum);
    }
    return out;
}

/// Split every effect of `obs` into `pieces` fractions summing to it. The
/// result is a POVM that has `obs` as a coarse graining by construction.
inline DiscreteObservable refine(const DiscreteObservable& obs, std::size_t pieces, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    DiscreteObservable out;
    out.space_dim = obs.space_dim;
    for (std::size_t i = 0; i < obs.effects.size(); ++i) {
        std::vector<double> w(pieces);
        double total = 0.0;
        for (auto& v : w) total += (v = unit(rng));
        for (std::size_t k = 0; k < pieces; ++k) {
            out.outcomes.push_back(obs.outcomes[i] + "_" + std::to_string(k + 1));
            out.effects.push_back((w[k] / total) * obs.effects[i]);
        }
    }
    return out;
}

// --- Paper fixtures ---------------------------------------------------------

/// The scalar measure E with weights (1/8, 1/8, 3/8, 3/8) on {x1..x4}.
inline DiscreteObservable remark1_E() {
    return DiscreteObservable::scalar_measure({1.0 / 8, 1.0 / 8, 3.0 / 8, 3.0 / 8},
                                              {"x1", "x2", "x3", "x4"});
}

/// The scalar measure E1 with weights (1/8, 1/8, 1/8, 5/8) on {y1..y4}.
inline DiscreteObservable remark1_E1() {
    return DiscreteObservable::scalar_measure({1.0 / 8, 1.0 / 8, 1.0 / 8, 5.0 / 8},
                                              {"y1", "y2", "y3", "y4"});
}

/// Qubit trine POVM: three effects (2/3)|psi_k><psi_k| at 120 degrees.
inline DiscreteObservable trine() {
    DiscreteObservable obs;
    obs.space_dim = 2;
    for (int k = 0; k < 3; ++k) {
        const double theta = 2.0 * M_PI * k / 3.0;
        const double c = std::cos(theta), s = std::sin(theta);
        Matrix e(2, 2);
        e(0, 0) = (2.0 / 3) * c * c;
        e(0, 1) = (2.0 / 3) * c * s;
        e(1, 0) = (2.0 / 3) * s * c;
        e(1, 1) = (2.0 / 3) * s * s;
        obs.outcomes.push_back("t" + std::to_string(k + 1));
        obs.effects.push_back(e);
    }
    return obs;
}

// --- Oracles ----------------------------------------------------------------

/// Brute-force function search: enumerate all |Omega_1|^|Omega| maps and
/// return the first one (in lexicographic map order) carrying e onto e1.
inline std::optional<std::vector<std::size_t>> brute_force_function(
    const DiscreteObservable& e, const DiscreteObservable& e1, double eq_tol) {
    const std::size_t n = e.n_outcomes();
    const std::size_t m = e1.n_outcomes();
    std::vector<std::size_t> map(n, 0);
    while (true) {
        bool match = true;
        for (std::size_t y = 0; y < m && match; ++y) {
            Matrix sum = Matrix::zero(e.space_dim);
            for (std::size_t x = 0; x < n; ++x)
                if (map[x] == y) sum += e.effects[x];
            if (frob_dist(sum, e1.effects[y]) > eq_tol) match = false;
        }
        if (match) return map;
        std::size_t pos = 0;
        while (pos < n && ++map[pos] == m) map[pos++] = 0;
        if (pos == n) return std::nullopt;
    }
}

} // namespace povm::testsupport
