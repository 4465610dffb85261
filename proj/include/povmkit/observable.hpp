#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "povmkit/effect_index.hpp"
#include "povmkit/linalg.hpp"
#include "povmkit/matrix.hpp"

namespace povm {

/// Outcome subsets are bitmasks over outcome indices (bit i = outcome i).
using SubsetMask = std::uint32_t;

inline constexpr std::size_t kDefaultOutcomeCap = 16;

/// Discrete observable: a POVM with one effect per labeled outcome,
/// effects summing to the identity.
struct DiscreteObservable {
    std::size_t space_dim = 0;
    std::vector<std::string> outcomes;
    std::vector<Matrix> effects;

    std::size_t n_outcomes() const { return outcomes.size(); }

    /// E(X) as the exact sum of atom effects over the mask.
    Matrix effect_of(SubsetMask mask) const {
        Matrix sum = Matrix::zero(space_dim);
        for (std::size_t i = 0; i < effects.size(); ++i)
            if (mask & (SubsetMask{1} << i)) sum += effects[i];
        return sum;
    }

    /// Scalar measure on a one-dimensional space from outcome weights.
    static DiscreteObservable scalar_measure(const std::vector<double>& weights,
                                             std::vector<std::string> labels = {}) {
        DiscreteObservable obs;
        obs.space_dim = 1;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            obs.outcomes.push_back(labels.size() == weights.size() ? labels[i]
                                                                   : "x" + std::to_string(i + 1));
            obs.effects.push_back(Matrix::scalar(weights[i]));
        }
        return obs;
    }
};

inline std::vector<std::size_t> mask_to_indices(SubsetMask mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; mask >> i; ++i)
        if (mask & (SubsetMask{1} << i)) idx.push_back(i);
    return idx;
}

/// Lexicographic order on subsets viewed as ascending index sequences,
/// e.g. {x1} < {x1,x2} < {x2}.
inline bool subset_lex_less(SubsetMask a, SubsetMask b) {
    while (a != 0 && b != 0) {
        const SubsetMask la = a & (~a + 1);
        const SubsetMask lb = b & (~b + 1);
        if (la != lb) return la < lb;
        a ^= la;
        b ^= lb;
    }
    return a == 0 && b != 0;
}

inline std::string subset_to_string(SubsetMask mask, const std::vector<std::string>& labels) {
    std::string s = "{";
    bool first = true;
    for (std::size_t i : mask_to_indices(mask)) {
        if (!first) s += ",";
        s += i < labels.size() ? labels[i] : std::to_string(i);
        first = false;
    }
    return s + "}";
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
    std::vector<std::string> issues;
    std::vector<std::pair<std::size_t, double>> non_psd; // effect index, min eigenvalue
    double normalization_defect = 0.0;                   // ||sum E_i - I||_F

    bool valid() const { return issues.empty(); }
};

/// Report-style POVM check: every violated invariant is listed, nothing thrown.
inline ValidationReport validate(const DiscreteObservable& obs, const Tolerance& tol = {}) {
    ValidationReport rep;
    if (obs.space_dim == 0) rep.issues.push_back("space dimension must be positive");
    if (obs.outcomes.empty()) rep.issues.push_back("outcome set is empty");
    if (obs.outcomes.size() != obs.effects.size())
        rep.issues.push_back("outcome/effect count mismatch: " +
                             std::to_string(obs.outcomes.size()) + " labels vs " +
                             std::to_string(obs.effects.size()) + " effects");
    {
        std::set<std::string> seen;
        for (const auto& label : obs.outcomes)
            if (!seen.insert(label).second)
                rep.issues.push_back("duplicate outcome label '" + label + "'");
    }
    if (obs.n_outcomes() > 8 * sizeof(SubsetMask))
        rep.issues.push_back("more outcomes than subset masks can address");

    bool shapes_ok = true;
    for (std::size_t i = 0; i < obs.effects.size(); ++i) {
        const Matrix& e = obs.effects[i];
        if (e.rows() != obs.space_dim || e.cols() != obs.space_dim) {
            rep.issues.push_back("effect " + std::to_string(i) + " has shape " + e.shape_string() +
                                 ", expected " + std::to_string(obs.space_dim) + "x" +
                                 std::to_string(obs.space_dim));
            shapes_ok = false;
        }
    }
    if (!shapes_ok || obs.effects.empty()) return rep;

    for (std::size_t i = 0; i < obs.effects.size(); ++i) {
        const Matrix& e = obs.effects[i];
        if (!e.is_hermitian(tol.eq)) {
            rep.issues.push_back("effect " + std::to_string(i) + " is not Hermitian (defect " +
                                 std::to_string(e.hermiticity_defect()) + ")");
            continue;
        }
        const double lam = herm_eig(e, tol).eigenvalues.front();
        if (lam < -tol.psd) {
            rep.non_psd.emplace_back(i, lam);
            rep.issues.push_back("effect " + std::to_string(i) +
                                 " is not positive semidefinite (min eigenvalue " +
                                 std::to_string(lam) + ")");
        }
    }

    Matrix sum = Matrix::zero(obs.space_dim);
    for (const Matrix& e : obs.effects)
        if (e.rows() == obs.space_dim && e.cols() == obs.space_dim) sum += e;
    rep.normalization_defect = frob_dist(sum, Matrix::identity(obs.space_dim));
    if (rep.normalization_defect > tol.eq)
        rep.issues.push_back("effects do not sum to the identity (defect " +
                             std::to_string(rep.normalization_defect) + ")");
    return rep;
}

/// True iff every atom effect is idempotent within tolerance.
inline bool is_projection_valued(const DiscreteObservable& obs, const Tolerance& tol = {}) {
    for (const Matrix& e : obs.effects)
        if (frob_dist(e * e, e) > tol.eq) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Range enumeration
// ---------------------------------------------------------------------------

/// One distinct value E(X) of the range, with every subset realizing it.
struct RangeElement {
    Matrix effect;                    // exact subset sum for subsets.front()
    std::vector<SubsetMask> subsets;  // ascending mask order
};

/// The deduplicated range E(A) of an observable over all 2^n subsets.
class RangeIndex {
public:
    RangeIndex(std::size_t n_outcomes, std::size_t dim, Tolerance tol)
        : n_outcomes_(n_outcomes), dim_(dim), tol_(tol), index_(tol),
          element_of_subset_(std::size_t{1} << n_outcomes, -1) {}

    std::size_t n_outcomes() const { return n_outcomes_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return elements_.size(); }
    SubsetMask full_mask() const {
        return static_cast<SubsetMask>((std::uint64_t{1} << n_outcomes_) - 1);
    }

    const std::vector<RangeElement>& elements() const { return elements_; }
    const RangeElement& element(std::size_t id) const { return elements_[id]; }
    std::size_t element_of(SubsetMask mask) const {
        return static_cast<std::size_t>(element_of_subset_[mask]);
    }
    std::size_t zero_id() const { return element_of(0); }
    std::size_t identity_id() const { return element_of(full_mask()); }
    std::size_t complement_of(std::size_t id) const {
        return element_of(full_mask() ^ elements_[id].subsets.front());
    }

    /// Lexicographically smallest subset realizing element `id`.
    SubsetMask representative_subset(std::size_t id) const {
        SubsetMask best = elements_[id].subsets.front();
        for (SubsetMask m : elements_[id].subsets)
            if (subset_lex_less(m, best)) best = m;
        return best;
    }

    /// Element equal to m within tolerance, if the range contains one.
    std::optional<std::size_t> find(const Matrix& m) const { return index_.find(m); }

    void add(SubsetMask mask, const Matrix& effect) {
        auto [id, inserted] = index_.insert(effect);
        if (inserted) elements_.push_back(RangeElement{effect, {}});
        elements_[id].subsets.push_back(mask);
        element_of_subset_[mask] = static_cast<std::int32_t>(id);
    }

private:
    std::size_t n_outcomes_;
    std::size_t dim_;
    Tolerance tol_;
    EffectIndex index_;
    std::vector<RangeElement> elements_;
    std::vector<std::int32_t> element_of_subset_;
};

/// Enumerate E(X) over all subsets, deduplicated within tolerance.
inline RangeIndex enumerate_range(const DiscreteObservable& obs, const Tolerance& tol = {},
                                  std::size_t outcome_cap = kDefaultOutcomeCap) {
    const std::size_t n = obs.n_outcomes();
    if (n > outcome_cap)
        throw TooManyOutcomes("enumerate_range: " + std::to_string(n) + " outcomes exceed cap " +
                              std::to_string(outcome_cap));
    RangeIndex range(n, obs.space_dim, tol);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask)
        range.add(static_cast<SubsetMask>(mask), obs.effect_of(static_cast<SubsetMask>(mask)));
    return range;
}

// ---------------------------------------------------------------------------
// Range-structure classifiers
// ---------------------------------------------------------------------------

struct RegularityResult {
    bool regular = false;
    std::optional<SubsetMask> witness; // subset with E(X) comparable to E(X')
};

/// Regularity: no nontrivial range element is Loewner-comparable with its
/// complement.
inline RegularityResult is_regular(const DiscreteObservable& obs, const RangeIndex& range,
                                   const Tolerance& tol = {}) {
    const Matrix identity = Matrix::identity(obs.space_dim);
    const std::size_t zero_id = range.zero_id();
    const std::size_t identity_id = range.identity_id();
    for (std::size_t id = 0; id < range.size(); ++id) {
        if (id == zero_id || id == identity_id) continue;
        const Matrix& e = range.element(id).effect;
        const Matrix comp = identity - e;
        if (loewner_leq(e, comp, tol) || loewner_leq(comp, e, tol))
            return {false, range.representative_subset(id)};
    }
    return {true, std::nullopt};
}

inline RegularityResult is_regular(const DiscreteObservable& obs, const Tolerance& tol = {},
                                   std::size_t outcome_cap = kDefaultOutcomeCap) {
    const RangeIndex range = enumerate_range(obs, tol, outcome_cap);
    return is_regular(obs, range, tol);
}

inline constexpr std::size_t kLatticeCheckCap = 4096; // distinct range elements

struct DeltaWitness {
    std::size_t a, b, c; // element ids, a <= b <= c
};

struct DeltaClosedResult {
    bool closed = false;
    std::optional<DeltaWitness> witness;
};

/// Literal Delta-closedness: for every pairwise orthogonal triple of range
/// elements (orthogonality A <= I - B in the Loewner order; repeated elements
/// allowed when self-orthogonal), the sum is again a range element. This is a
/// diagnostic companion to is_regular, not an asserted equivalence.
inline DeltaClosedResult is_delta_closed(const DiscreteObservable& obs, const RangeIndex& range,
                                         const Tolerance& tol = {}) {
    const std::size_t r = range.size();
    if (r > kLatticeCheckCap)
        throw AlgebraTooLarge("is_delta_closed: range has " + std::to_string(r) + " elements");
    const Matrix identity = Matrix::identity(obs.space_dim);

    std::vector<std::vector<bool>> orth(r, std::vector<bool>(r, false));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i; j < r; ++j) {
            const bool o = loewner_leq(range.element(i).effect,
                                       identity - range.element(j).effect, tol);
            orth[i][j] = orth[j][i] = o;
        }

    for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = a; b < r; ++b) {
            if (!orth[a][b]) continue;
            for (std::size_t c = b; c < r; ++c) {
                if (!orth[a][c] || !orth[b][c]) continue;
                const Matrix sum =
                    range.element(a).effect + range.element(b).effect + range.element(c).effect;
                if (!range.find(sum)) return {false, DeltaWitness{a, b, c}};
            }
        }
    }
    return {true, std::nullopt};
}

struct RangeBooleanResult {
    bool boolean = false;
    std::vector<std::size_t> atoms;     // element ids on success
    std::string failed_law;             // violated law on failure
    std::vector<std::size_t> offenders; // element ids involved in the failure
};

namespace detail {

// Fixed-capacity bitset over element ids.
class IdSet {
public:
    explicit IdSet(std::size_t n) : words_((n + 63) / 64, 0) {}
    void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    static IdSet intersect(const IdSet& a, const IdSet& b) {
        IdSet r = a;
        for (std::size_t k = 0; k < r.words_.size(); ++k) r.words_[k] &= b.words_[k];
        return r;
    }
    bool contains(const IdSet& sub) const {
        for (std::size_t k = 0; k < words_.size(); ++k)
            if ((sub.words_[k] & ~words_[k]) != 0) return false;
        return true;
    }
    template <typename Fn>
    void for_each(Fn fn) const {
        for (std::size_t k = 0; k < words_.size(); ++k) {
            std::uint64_t w = words_[k];
            while (w) {
                const int bit = std::countr_zero(w);
                fn(k * 64 + static_cast<std::size_t>(bit));
                w &= w - 1;
            }
        }
    }

private:
    std::vector<std::uint64_t> words_;
};

// Greatest element of `bounds` (a down- or up-set intersection), if one exists:
// the unique c in bounds whose cone contains all of bounds.
inline std::optional<std::size_t> extremum(const IdSet& bounds,
                                           const std::vector<IdSet>& cones) {
    std::optional<std::size_t> found;
    bounds.for_each([&](std::size_t c) {
        if (!found && cones[c].contains(bounds)) found = c;
    });
    return found;
}

} // namespace detail

/// Boolean structure of (E(A), <=, ') as a poset in its own right: pairwise
/// meets/joins must exist, every a must satisfy a ^ a' = O and a v a' = I,
/// and the lattice must be distributive. Atoms are returned as certificate.
inline RangeBooleanResult is_range_boolean(const DiscreteObservable& obs, const RangeIndex& range,
                                           const Tolerance& tol = {}) {
    const std::size_t r = range.size();
    if (r > kLatticeCheckCap)
        throw AlgebraTooLarge("is_range_boolean: range has " + std::to_string(r) + " elements");

    // Loewner order restricted to the range.
    std::vector<detail::IdSet> down(r, detail::IdSet(r)); // down[i] = {c : c <= i}
    std::vector<detail::IdSet> up(r, detail::IdSet(r));   // up[i]   = {c : i <= c}
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            if (loewner_leq(range.element(j).effect, range.element(i).effect, tol)) {
                down[i].set(j);
                up[j].set(i);
            }

    const std::size_t zero_id = range.zero_id();
    const std::size_t identity_id = range.identity_id();

    std::vector<std::int32_t> meet(r * r, -1), join(r * r, -1);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i; j < r; ++j) {
            const auto m = detail::extremum(detail::IdSet::intersect(down[i], down[j]), down);
            if (!m) return {false, {}, "meet missing", {i, j}};
            const auto v = detail::extremum(detail::IdSet::intersect(up[i], up[j]), up);
            if (!v) return {false, {}, "join missing", {i, j}};
            meet[i * r + j] = meet[j * r + i] = static_cast<std::int32_t>(*m);
            join[i * r + j] = join[j * r + i] = static_cast<std::int32_t>(*v);
        }
    }

    for (std::size_t i = 0; i < r; ++i) {
        const std::size_t comp = range.complement_of(i);
        if (static_cast<std::size_t>(meet[i * r + comp]) != zero_id)
            return {false, {}, "complementation: a ^ a' != O", {i, comp}};
        if (static_cast<std::size_t>(join[i * r + comp]) != identity_id)
            return {false, {}, "complementation: a v a' != I", {i, comp}};
    }

    // Atoms: minimal nonzero elements.
    std::vector<std::size_t> atoms;
    for (std::size_t i = 0; i < r; ++i)
        if (i != zero_id && down[i].count() == 2) atoms.push_back(i);

    // Distributivity. Small lattices are checked triple by triple. Larger
    // ones are checked through the atom decomposition: once every element is
    // the unique join of the atoms below it and meets/joins agree with atom
    // set intersection/union, the lattice embeds in a power set and
    // distributivity follows.
    constexpr std::size_t kTripleCap = 512;
    if (r <= kTripleCap) {
        for (std::size_t a = 0; a < r; ++a)
            for (std::size_t b = 0; b < r; ++b)
                for (std::size_t c = 0; c < r; ++c) {
                    const auto bc = static_cast<std::size_t>(join[b * r + c]);
                    const auto lhs = meet[a * r + bc];
                    const auto ab = static_cast<std::size_t>(meet[a * r + b]);
                    const auto ac = static_cast<std::size_t>(meet[a * r + c]);
                    const auto rhs = join[ab * r + ac];
                    if (lhs != rhs)
                        return {false, {}, "distributivity: a^(bvc) != (a^b)v(a^c)", {a, b, c}};
                }
    } else {
        if (atoms.size() > 20 || (std::size_t{1} << atoms.size()) < r)
            return {false, {}, "atom decomposition: too few atoms for element count", {}};
        std::vector<std::uint64_t> atom_bits(r, 0);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t k = 0; k < atoms.size(); ++k)
                if (down[i].test(atoms[k])) atom_bits[i] |= (std::uint64_t{1} << k);
        std::vector<std::int64_t> elem_of_bits(std::size_t{1} << atoms.size(), -1);
        for (std::size_t i = 0; i < r; ++i) {
            if (elem_of_bits[atom_bits[i]] != -1)
                return {false,
                        {},
                        "atom decomposition not unique",
                        {static_cast<std::size_t>(elem_of_bits[atom_bits[i]]), i}};
            elem_of_bits[atom_bits[i]] = static_cast<std::int64_t>(i);
        }
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i; j < r; ++j) {
                const auto m = static_cast<std::size_t>(meet[i * r + j]);
                const auto v = static_cast<std::size_t>(join[i * r + j]);
                if (atom_bits[m] != (atom_bits[i] & atom_bits[j]) ||
                    atom_bits[v] != (atom_bits[i] | atom_bits[j]))
                    return {false, {}, "lattice operations disagree with atom sets", {i, j}};
            }
    }

    return {true, atoms, "", {}};
}

inline RangeBooleanResult is_range_boolean(const DiscreteObservable& obs,
                                           const Tolerance& tol = {},
                                           std::size_t outcome_cap = kDefaultOutcomeCap) {
    const RangeIndex range = enumerate_range(obs, tol, outcome_cap);
    return is_range_boolean(obs, range, tol);
}

// ---------------------------------------------------------------------------
// Booleanness inside the full effect order
// ---------------------------------------------------------------------------

struct ProductWitness {
    SubsetMask subset;   // X with E(X)E(X') != O
    Matrix product;      // E(X)E(X')
    double product_norm; // ||E(X)E(X')||_F
};

/// Non-projection-valued observables cannot have a Boolean range inside the
/// effect order: for a non-idempotent atom E_i, the product E(X)E(X') with
/// X = {i} is a nonzero positive lower bound of E(X) and E(X'). Returns that
/// witness, or nullopt when the observable is projection valued.
inline std::optional<ProductWitness> boolean_in_effects_witness(const DiscreteObservable& obs,
                                                                const Tolerance& tol = {}) {
    const Matrix identity = Matrix::identity(obs.space_dim);
    for (std::size_t i = 0; i < obs.effects.size(); ++i) {
        const Matrix& e = obs.effects[i];
        if (frob_dist(e * e, e) <= tol.eq) continue;
        const Matrix product = e * (identity - e);
        return ProductWitness{SubsetMask{1} << i, product, product.frob_norm()};
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Coarse graining
// ---------------------------------------------------------------------------

struct CoarseGrainingResult {
    bool coarse_graining = false;
    /// Per distinct element of range(e1): (lex-smallest subset of Omega_1,
    /// lex-smallest subset of Omega realizing the same effect).
    std::vector<std::pair<SubsetMask, SubsetMask>> table;
    std::optional<SubsetMask> unmatched; // subset of Omega_1 on failure
};

// ---------------------------------------------------------------------------
// Classification summary
// ---------------------------------------------------------------------------

struct Classification {
    ValidationReport validation;
    bool projection_valued = false;
    std::size_t range_size = 0;
    RegularityResult regularity;
    DeltaClosedResult delta; // diagnostic, see is_delta_closed
    RangeBooleanResult range_boolean;
};

inline Classification classify(const DiscreteObservable& obs, const Tolerance& tol = {},
                               std::size_t outcome_cap = kDefaultOutcomeCap) {
    Classification c;
    c.validation = validate(obs, tol);
    if (!c.validation.valid()) return c;
    c.projection_valued = is_projection_valued(obs, tol);
    const RangeIndex range = enumerate_range(obs, tol, outcome_cap);
    c.range_size = range.size();
    c.regularity = is_regular(obs, range, tol);
    c.delta = is_delta_closed(obs, range, tol);
    c.range_boolean = is_range_boolean(obs, range, tol);
    return c;
}

/// Whether range(e1) is contained in range(e), with realizing subsets.
inline CoarseGrainingResult coarse_graining_check(const DiscreteObservable& e1,
                                                  const DiscreteObservable& e,
                                                  const Tolerance& tol = {},
                                                  std::size_t outcome_cap = kDefaultOutcomeCap) {
    if (e1.space_dim != e.space_dim)
        throw DimensionMismatch("coarse_graining_check: space dims " +
                                std::to_string(e1.space_dim) + " vs " +
                                std::to_string(e.space_dim));
    const RangeIndex r1 = enumerate_range(e1, tol, outcome_cap);
    const RangeIndex r = enumerate_range(e, tol, outcome_cap);

    CoarseGrainingResult res;
    res.coarse_graining = true;
    for (std::size_t id = 0; id < r1.size(); ++id) {
        const auto hit = r.find(r1.element(id).effect);
        if (!hit) {
            res.coarse_graining = false;
            res.unmatched = r1.representative_subset(id);
            return res;
        }
        res.table.emplace_back(r1.representative_subset(id), r.representative_subset(*hit));
    }
    return res;
}

} // namespace povm
