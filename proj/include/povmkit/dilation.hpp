#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "povmkit/linalg.hpp"
#include "povmkit/matrix.hpp"
#include "povmkit/observable.hpp"

namespace povm {

/// Minimal Naimark dilation in block form. K carries one coordinate block per
/// outcome with a nonzero effect; the spectral measure's atoms are the
/// coordinate projections onto those blocks, and V stacks the weighted
/// eigenvector blocks of the effects, so that V* Etilde({i}) V = E({i}).
struct Dilation {
    struct Block {
        std::size_t offset = 0;
        std::size_t width = 0; // zero for zero effects
    };

    std::size_t dim_h = 0;
    std::size_t dim_k = 0;
    Matrix v; // dim_k x dim_h isometry
    std::vector<Block> blocks;
    std::vector<Matrix> atom_projections; // dim_k x dim_k coordinate projections

    std::size_t n_outcomes() const { return blocks.size(); }

    /// Union of the coordinate blocks selected by an outcome subset.
    Matrix spectral_projection(SubsetMask mask) const {
        Matrix p = Matrix::zero(dim_k);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (!(mask & (SubsetMask{1} << i))) continue;
            for (std::size_t r = 0; r < blocks[i].width; ++r)
                p(blocks[i].offset + r, blocks[i].offset + r) = 1.0;
        }
        return p;
    }

    /// V* Etilde(X) V, computed from the isometry's rows.
    Matrix compress(SubsetMask mask) const {
        Matrix c = Matrix::zero(dim_h);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (!(mask & (SubsetMask{1} << i))) continue;
            for (std::size_t r = 0; r < blocks[i].width; ++r) {
                const std::size_t row = blocks[i].offset + r;
                for (std::size_t a = 0; a < dim_h; ++a)
                    for (std::size_t b = 0; b < dim_h; ++b)
                        c(a, b) += std::conj(v(row, a)) * v(row, b);
            }
        }
        return c;
    }
};

/// Build the minimal dilation: each effect contributes its support as a
/// block, with rows sqrt(lambda_r) u_r* for the positive eigenpairs of E_i.
/// dim K = sum of effect ranks, which is exactly the minimal dimension.
inline Dilation minimal_naimark(const DiscreteObservable& obs, const Tolerance& tol = {}) {
    const std::size_t dim = obs.space_dim;
    Dilation dil;
    dil.dim_h = dim;

    struct Row {
        double weight;
        std::vector<Complex> vec;
    };
    std::vector<Row> rows;
    for (const Matrix& e : obs.effects) {
        const EigResult eig = herm_eig(e, tol);
        Dilation::Block block;
        block.offset = rows.size();
        // Eigenvalues descending; deterministic phase: the largest-magnitude
        // entry (first index on ties) is made real positive.
        for (std::size_t k = eig.eigenvalues.size(); k-- > 0;) {
            const double lam = eig.eigenvalues[k];
            if (lam <= tol.rank) continue;
            std::vector<Complex> u(dim);
            for (std::size_t i = 0; i < dim; ++i) u[i] = eig.vectors(i, k);
            std::size_t pivot = 0;
            for (std::size_t i = 1; i < dim; ++i)
                if (std::abs(u[i]) > std::abs(u[pivot]) + 1e-12) pivot = i;
            const Complex phase = std::abs(u[pivot]) > 0 ? u[pivot] / std::abs(u[pivot])
                                                         : Complex(1.0, 0.0);
            for (auto& c : u) c /= phase;
            rows.push_back(Row{lam, std::move(u)});
            ++block.width;
        }
        dil.blocks.push_back(block);
    }

    dil.dim_k = rows.size();
    dil.v = Matrix(dil.dim_k, dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double s = std::sqrt(rows[r].weight);
        for (std::size_t j = 0; j < dim; ++j) dil.v(r, j) = s * std::conj(rows[r].vec[j]);
    }
    for (std::size_t i = 0; i < dil.blocks.size(); ++i)
        dil.atom_projections.push_back(dil.spectral_projection(SubsetMask{1} << i));
    return dil;
}

/// Defect magnitudes of everything a Naimark dilation promises.
struct DilationReport {
    double isometry_defect = 0.0;       // ||V*V - I_H||_F
    double atom_orthogonality = 0.0;    // max ||P_i P_j||_F over i != j
    double completeness_defect = 0.0;   // ||sum P_i - I_K||_F
    double max_compression_defect = 0.0; // max_i ||V* P_i V - E_i||_F
    std::size_t minimality_rank = 0;    // rank of the spans {P_i V}
    bool minimal = false;

    bool ok(const Tolerance& tol = {}) const {
        return isometry_defect <= tol.eq && atom_orthogonality <= tol.eq &&
               completeness_defect <= tol.eq && max_compression_defect <= tol.eq && minimal;
    }
};

inline DilationReport verify_dilation(const Dilation& dil, const DiscreteObservable& obs,
                                      const Tolerance& tol = {}) {
    if (dil.n_outcomes() != obs.n_outcomes() || dil.dim_h != obs.space_dim)
        throw DimensionMismatch("verify_dilation: dilation does not match the observable");
    DilationReport rep;
    rep.isometry_defect =
        frob_dist(dil.v.adjoint() * dil.v, Matrix::identity(dil.dim_h));

    Matrix sum = Matrix::zero(dil.dim_k);
    for (std::size_t i = 0; i < dil.atom_projections.size(); ++i) {
        sum += dil.atom_projections[i];
        for (std::size_t j = i + 1; j < dil.atom_projections.size(); ++j)
            rep.atom_orthogonality =
                std::max(rep.atom_orthogonality,
                         (dil.atom_projections[i] * dil.atom_projections[j]).frob_norm());
    }
    rep.completeness_defect = frob_dist(sum, Matrix::identity(dil.dim_k));

    for (std::size_t i = 0; i < obs.effects.size(); ++i)
        rep.max_compression_defect =
            std::max(rep.max_compression_defect,
                     frob_dist(dil.compress(SubsetMask{1} << i), obs.effects[i]));

    // Minimality: K is spanned by {Etilde(X) V phi} iff each block of V has
    // full row rank, i.e. the ranks of the P_i V pieces sum to dim K.
    rep.minimality_rank = 0;
    for (const Matrix& p : dil.atom_projections) {
        const Matrix pv = p * dil.v;
        rep.minimality_rank += rank_eps(pv, tol);
    }
    rep.minimal = rep.minimality_rank == dil.dim_k;
    return rep;
}

// ---------------------------------------------------------------------------
// R1: the dilation-side shadow of a coarse graining
// ---------------------------------------------------------------------------

/// The subsets X whose spectral projection compresses into range(E1).
/// Etilde(A) for the block construction is exactly the subset lattice, so R1
/// is represented by outcome subsets.
struct R1Set {
    std::size_t n_outcomes = 0;           // outcomes of E
    std::size_t n1_outcomes = 0;          // outcomes of E1
    std::vector<SubsetMask> members;      // ascending mask order
    std::vector<SubsetMask> targets;      // per member: lex-smallest Y with V*P V = E1(Y)
    std::vector<bool> member_flags;       // indexed by mask

    bool contains(SubsetMask mask) const { return member_flags[mask]; }
};

inline R1Set compute_R1(const Dilation& dil, const DiscreteObservable& e1,
                        const Tolerance& tol = {},
                        std::size_t outcome_cap = kDefaultOutcomeCap) {
    const std::size_t n = dil.n_outcomes();
    if (n > outcome_cap)
        throw TooManyOutcomes("compute_R1: " + std::to_string(n) + " outcomes exceed cap " +
                              std::to_string(outcome_cap));
    const RangeIndex range1 = enumerate_range(e1, tol, outcome_cap);

    R1Set r1;
    r1.n_outcomes = n;
    r1.n1_outcomes = e1.n_outcomes();
    r1.member_flags.assign(std::size_t{1} << n, false);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        const Matrix compressed = dil.compress(static_cast<SubsetMask>(mask));
        const auto hit = range1.find(compressed);
        if (!hit) continue;
        r1.members.push_back(static_cast<SubsetMask>(mask));
        r1.targets.push_back(range1.representative_subset(*hit));
        r1.member_flags[mask] = true;
    }
    return r1;
}

struct R1BooleanResult {
    bool boolean = false;
    std::string failed_op;                              // "union", "intersection", "complement"
    std::optional<std::pair<SubsetMask, SubsetMask>> witness; // offending pair
};

/// Boolean closure of R1 reduces to set-system closure because the spectral
/// atoms are fixed coordinate projections.
inline R1BooleanResult is_R1_boolean(const R1Set& r1) {
    const SubsetMask full =
        static_cast<SubsetMask>((std::uint64_t{1} << r1.n_outcomes) - 1);
    for (SubsetMask a : r1.members) {
        if (!r1.contains(full ^ a)) return {false, "complement", std::make_pair(a, a)};
        for (SubsetMask b : r1.members) {
            if (!r1.contains(a | b)) return {false, "union", std::make_pair(a, b)};
            if (!r1.contains(a & b)) return {false, "intersection", std::make_pair(a, b)};
        }
    }
    return {true, "", std::nullopt};
}

// ---------------------------------------------------------------------------
// V-property
// ---------------------------------------------------------------------------

struct VPropertyWitness {
    SubsetMask x = 0;
    SubsetMask y = 0;
    std::size_t q_index = 0; // index into the tested effect list
};

struct VPropertyResult {
    bool holds = false;
    std::optional<VPropertyWitness> witness;
};

/// Order-interval filling: for each C in Q and each X subset of Y with
/// E(X) <= C <= E(Y), some Z with X subset of Z subset of Y has E(Z) = C.
inline VPropertyResult v_property_check(const RangeIndex& range, const std::vector<Matrix>& q,
                                        const Tolerance& tol = {}) {
    const std::size_t n = range.n_outcomes();
    const SubsetMask full = range.full_mask();
    for (std::size_t qi = 0; qi < q.size(); ++qi) {
        const Matrix& c = q[qi];
        // Element-level Loewner comparisons, broadcast to subset masks.
        std::vector<bool> le_c(range.size()), ge_c(range.size());
        for (std::size_t id = 0; id < range.size(); ++id) {
            le_c[id] = loewner_leq(range.element(id).effect, c, tol);
            ge_c[id] = loewner_leq(c, range.element(id).effect, tol);
        }
        const auto equal_elem = range.find(c);
        const std::vector<SubsetMask>* z_masks =
            equal_elem ? &range.element(*equal_elem).subsets : nullptr;

        for (std::uint64_t y = 0; y <= full; ++y) {
            if (!ge_c[range.element_of(static_cast<SubsetMask>(y))]) continue;
            const SubsetMask ym = static_cast<SubsetMask>(y);
            for (SubsetMask x = ym;; x = (x - 1) & ym) {
                if (le_c[range.element_of(x)]) {
                    bool filled = false;
                    if (z_masks)
                        for (SubsetMask z : *z_masks)
                            if ((z & x) == x && (z & ~ym) == 0) {
                                filled = true;
                                break;
                            }
                    if (!filled) return {false, VPropertyWitness{x, ym, qi}};
                }
                if (x == 0) break;
            }
        }
    }
    return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Functional form extracted from a Boolean R1
// ---------------------------------------------------------------------------

struct FunctionalForm {
    std::vector<double> labels;  // real label per outcome of E (1..n)
    std::vector<std::pair<double, double>> f_table; // label -> R1-atom label
    DiscreteObservable er;       // E relabeled onto the reals, via compression
    DiscreteObservable erf;      // pushforward of er under f
};

/// When R1 is Boolean, its atoms partition the outcome set; labeling the
/// spectral atoms with reals turns E into a real measure E_r and the atom
/// membership map into the function f with range(E_r^f) = range(E1).
inline FunctionalForm functional_form_from_R1(const Dilation& dil, const R1Set& r1,
                                              const DiscreteObservable& obs,
                                              const DiscreteObservable& e1,
                                              const Tolerance& tol = {},
                                              std::size_t outcome_cap = kDefaultOutcomeCap) {
    if (!is_R1_boolean(r1).boolean)
        throw NotBoolean("functional_form_from_R1: R1 is not a Boolean set system");
    const std::size_t n = r1.n_outcomes;
    const SubsetMask full = static_cast<SubsetMask>((std::uint64_t{1} << n) - 1);

    // Atom of x: intersection of all members containing x.
    std::vector<SubsetMask> atom_of(n);
    for (std::size_t x = 0; x < n; ++x) {
        SubsetMask atom = full;
        for (SubsetMask m : r1.members)
            if (m & (SubsetMask{1} << x)) atom &= m;
        atom_of[x] = atom;
    }
    // Distinct atoms in order of first occurrence; they must partition Omega.
    std::vector<SubsetMask> atoms;
    for (std::size_t x = 0; x < n; ++x)
        if (std::find(atoms.begin(), atoms.end(), atom_of[x]) == atoms.end())
            atoms.push_back(atom_of[x]);
    SubsetMask covered = 0;
    for (SubsetMask a : atoms) {
        if ((covered & a) != 0)
            throw AtomCoverFailure("functional_form_from_R1: overlapping atoms");
        covered |= a;
    }
    if (covered != full)
        throw AtomCoverFailure("functional_form_from_R1: atoms do not cover the outcome set");

    FunctionalForm form;
    for (std::size_t x = 0; x < n; ++x) form.labels.push_back(static_cast<double>(x + 1));

    form.er.space_dim = dil.dim_h;
    for (std::size_t x = 0; x < n; ++x) {
        form.er.outcomes.push_back(std::to_string(x + 1));
        form.er.effects.push_back(dil.compress(SubsetMask{1} << x).hermitized());
    }
    form.erf.space_dim = dil.dim_h;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        form.erf.outcomes.push_back(std::to_string(j + 1));
        form.erf.effects.push_back(dil.compress(atoms[j]).hermitized());
    }
    for (std::size_t x = 0; x < n; ++x) {
        std::size_t j = 0;
        while (!(atoms[j] & (SubsetMask{1} << x))) ++j;
        form.f_table.emplace_back(form.labels[x], static_cast<double>(j + 1));
    }

    // Range identities promised by the construction.
    const auto er_vs_obs = coarse_graining_check(form.er, obs, tol, outcome_cap);
    const auto obs_vs_er = coarse_graining_check(obs, form.er, tol, outcome_cap);
    if (!er_vs_obs.coarse_graining || !obs_vs_er.coarse_graining)
        throw AtomCoverFailure("functional_form_from_R1: range(Er) != range(E)");
    const auto erf_vs_e1 = coarse_graining_check(form.erf, e1, tol, outcome_cap);
    const auto e1_vs_erf = coarse_graining_check(e1, form.erf, tol, outcome_cap);
    if (!erf_vs_e1.coarse_graining || !e1_vs_erf.coarse_graining)
        throw AtomCoverFailure("functional_form_from_R1: range(Erf) != range(E1)");
    return form;
}

} // namespace povm
