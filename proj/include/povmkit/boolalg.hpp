#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "povmkit/effect_index.hpp"
#include "povmkit/linalg.hpp"
#include "povmkit/matrix.hpp"

namespace povm {

inline constexpr std::size_t kClosureElementCap = std::size_t{1} << 20;

/// Finite Boolean algebra of commuting projections, closed under
/// meet (operator product), join (de Morgan) and relative complement.
/// `unit` is the top element: the identity for algebras on the whole space,
/// a projection for the relative algebras produced by decompose().
struct ProjectionAlgebra {
    std::size_t space_dim = 0;
    Matrix unit;
    std::vector<Matrix> elements;        // deduplicated, insertion order, [0] = O
    std::vector<std::size_t> atoms;      // indices of minimal nonzero elements
    std::vector<std::size_t> generators; // indices of the generating projections

    std::size_t size() const { return elements.size(); }
};

namespace detail {

inline void require_projection(const Matrix& p, std::size_t index, std::size_t dim,
                               const Tolerance& tol) {
    if (p.rows() != dim || p.cols() != dim)
        throw NotProjection("generator " + std::to_string(index) + " has shape " +
                            p.shape_string() + " on a dim-" + std::to_string(dim) + " space");
    if (!p.is_hermitian(tol.eq))
        throw NotProjection("generator " + std::to_string(index) + " is not Hermitian");
    if (frob_dist(p * p, p) > tol.eq)
        throw NotProjection("generator " + std::to_string(index) + " is not idempotent (defect " +
                            std::to_string(frob_dist(p * p, p)) + ")");
}

} // namespace detail

/// Smallest Boolean algebra of projections containing the generators:
/// worklist fixed point under products, complements and de Morgan joins.
inline ProjectionAlgebra boolean_closure(const std::vector<Matrix>& generators,
                                         std::size_t space_dim, const Tolerance& tol = {}) {
    for (std::size_t i = 0; i < generators.size(); ++i)
        detail::require_projection(generators[i], i, space_dim, tol);
    for (std::size_t i = 0; i < generators.size(); ++i)
        for (std::size_t j = i + 1; j < generators.size(); ++j)
            if (frob_dist(generators[i] * generators[j], generators[j] * generators[i]) > tol.eq)
                throw NonCommuting("generators " + std::to_string(i) + " and " +
                                   std::to_string(j) + " do not commute");

    const Matrix identity = Matrix::identity(space_dim);
    ProjectionAlgebra alg;
    alg.space_dim = space_dim;
    alg.unit = identity;

    EffectIndex index(tol);
    std::deque<std::size_t> worklist;
    auto add = [&](const Matrix& m) -> std::size_t {
        auto [id, inserted] = index.insert(m.hermitized());
        if (inserted) {
            if (index.size() > kClosureElementCap)
                throw AlgebraTooLarge("boolean_closure: more than " +
                                      std::to_string(kClosureElementCap) + " elements");
            alg.elements.push_back(index.representative(id));
            worklist.push_back(id);
        }
        return id;
    };

    add(Matrix::zero(space_dim));
    add(identity);
    for (const Matrix& g : generators) alg.generators.push_back(add(g));

    while (!worklist.empty()) {
        const std::size_t id = worklist.front();
        worklist.pop_front();
        const Matrix p = alg.elements[id]; // copy: elements may reallocate
        add(identity - p);
        for (std::size_t other = 0; other < alg.elements.size(); ++other) {
            const Matrix q = alg.elements[other];
            add(p * q);                                      // meet
            add(identity - (identity - p) * (identity - q)); // join, de Morgan
        }
    }
    return alg;
}

/// Minimal nonzero elements. For each nonzero candidate, minimality means the
/// only elements below it in the Loewner order are O and itself.
inline std::vector<std::size_t> find_atoms(const ProjectionAlgebra& alg,
                                           const Tolerance& tol = {}) {
    std::vector<std::size_t> atoms;
    for (std::size_t i = 0; i < alg.elements.size(); ++i) {
        const Matrix& p = alg.elements[i];
        if (p.frob_norm() <= tol.eq) continue;
        bool minimal = true;
        for (std::size_t j = 0; j < alg.elements.size() && minimal; ++j) {
            if (j == i) continue;
            const Matrix& q = alg.elements[j];
            if (q.frob_norm() <= tol.eq) continue;
            if (loewner_leq(q, p, tol) && frob_dist(q, p) > tol.eq) minimal = false;
        }
        if (minimal) atoms.push_back(i);
    }
    return atoms;
}

inline ProjectionAlgebra with_atoms(ProjectionAlgebra alg, const Tolerance& tol = {}) {
    alg.atoms = find_atoms(alg, tol);
    return alg;
}

/// The atomic/atomless split of Prop-style decompositions: a0 is the join of
/// all atoms, B1 everything below a0, B2 everything below its complement.
/// Finite-dimensional algebras are atomic, so a0 = I and B2 = {O}.
struct Decomposition {
    Matrix a0;
    ProjectionAlgebra atomic_part;   // unit a0
    ProjectionAlgebra atomless_part; // unit I - a0
};

inline Decomposition decompose(const ProjectionAlgebra& alg, const Tolerance& tol = {}) {
    const Matrix identity = Matrix::identity(alg.space_dim);
    const std::vector<std::size_t> atoms = alg.atoms.empty() ? find_atoms(alg, tol) : alg.atoms;

    // Atoms are pairwise orthogonal, so their join is their sum.
    Matrix a0 = Matrix::zero(alg.space_dim);
    for (std::size_t a : atoms) a0 += alg.elements[a];
    const Matrix a0c = identity - a0;

    Decomposition dec;
    dec.a0 = a0;
    dec.atomic_part.space_dim = alg.space_dim;
    dec.atomic_part.unit = a0;
    dec.atomless_part.space_dim = alg.space_dim;
    dec.atomless_part.unit = a0c;

    for (const Matrix& e : alg.elements) {
        // Eq-style identity: every element splits across the atomic cut.
        const Matrix below = e * a0;       // e ^ a0
        const Matrix above = e * a0c;      // e ^ a0'
        const Matrix rejoined = below + above; // orthogonal parts: join = sum
        if (frob_dist(rejoined, e) > tol.eq)
            throw DecompositionDefect("element does not split across a0 (defect " +
                                      std::to_string(frob_dist(rejoined, e)) + ")");
        if (loewner_leq(e, a0, tol)) dec.atomic_part.elements.push_back(e);
        if (loewner_leq(e, a0c, tol)) dec.atomless_part.elements.push_back(e);
    }
    return dec;
}

/// Power-set certificate: N = |atoms| with |elements| = 2^N, every element
/// the join of a unique atom subset, and 1 <= N <= dim.
inline std::size_t certify_power_set(const ProjectionAlgebra& alg, const Tolerance& tol = {}) {
    const std::vector<std::size_t> atoms = alg.atoms.empty() ? find_atoms(alg, tol) : alg.atoms;
    const std::size_t n = atoms.size();
    if (n < 1 || n > alg.space_dim)
        throw CertificateFailure("atom count " + std::to_string(n) + " outside [1, " +
                                 std::to_string(alg.space_dim) + "]");
    if (n >= 8 * sizeof(std::uint64_t) || alg.size() != (std::size_t{1} << n))
        throw CertificateFailure("element count " + std::to_string(alg.size()) + " != 2^" +
                                 std::to_string(n));
    std::vector<bool> subset_seen(std::size_t{1} << n, false);
    for (const Matrix& e : alg.elements) {
        std::uint64_t bits = 0;
        Matrix joined = Matrix::zero(alg.space_dim);
        for (std::size_t k = 0; k < n; ++k) {
            if (loewner_leq(alg.elements[atoms[k]], e, tol)) {
                bits |= (std::uint64_t{1} << k);
                joined += alg.elements[atoms[k]]; // orthogonal atoms: join = sum
            }
        }
        if (frob_dist(joined, e) > tol.eq)
            throw CertificateFailure("element is not the join of the atoms below it (defect " +
                                     std::to_string(frob_dist(joined, e)) + ")");
        if (subset_seen[bits])
            throw CertificateFailure("two elements share the atom subset " + std::to_string(bits));
        subset_seen[bits] = true;
    }
    return n;
}

} // namespace povm
