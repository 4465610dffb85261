#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "povmkit/dilation.hpp"
#include "povmkit/linalg.hpp"
#include "povmkit/observable.hpp"
#include "povmkit/rational.hpp"

namespace povm {

/// Total map from outcome indices of Omega to outcome indices of Omega_1.
struct OutcomeFunction {
    std::vector<std::size_t> table;
};

struct VerifyFunctionResult {
    bool ok = false;
    double max_defect = 0.0; // max over atoms of Omega_1
};

/// Check E1(Y) = E(f^{-1}(Y)) on atoms (additivity extends it to all subsets).
inline VerifyFunctionResult verify_function(const DiscreteObservable& e, const OutcomeFunction& f,
                                            const DiscreteObservable& e1,
                                            const Tolerance& tol = {}) {
    if (f.table.size() != e.n_outcomes())
        throw InputError("verify_function: map is not total (" + std::to_string(f.table.size()) +
                         " entries for " + std::to_string(e.n_outcomes()) + " outcomes)");
    for (std::size_t y : f.table)
        if (y >= e1.n_outcomes())
            throw InputError("verify_function: map target " + std::to_string(y) +
                             " out of range");
    VerifyFunctionResult res;
    for (std::size_t y = 0; y < e1.n_outcomes(); ++y) {
        Matrix sum = Matrix::zero(e.space_dim);
        for (std::size_t x = 0; x < e.n_outcomes(); ++x)
            if (f.table[x] == y) sum += e.effects[x];
        res.max_defect = std::max(res.max_defect, frob_dist(sum, e1.effects[y]));
    }
    res.ok = res.max_defect <= tol.eq;
    return res;
}

// ---------------------------------------------------------------------------
// Exhaustive function search
// ---------------------------------------------------------------------------

enum class SearchOutcome {
    Found,        // a function was found (and verified)
    None,         // search exhausted: no function exists at tolerance
    Inconclusive, // node budget hit before exhaustion
};

struct FunctionSearchResult {
    SearchOutcome outcome = SearchOutcome::Inconclusive;
    std::optional<OutcomeFunction> function;
    std::uint64_t nodes = 0;
};

inline constexpr std::uint64_t kDefaultSearchBudget = 10'000'000;

namespace detail {

struct FunctionSearch {
    const DiscreteObservable& e;
    const DiscreteObservable& e1;
    Tolerance tol;
    std::uint64_t budget;

    std::vector<std::size_t> order;      // outcomes of e, descending trace
    std::vector<double> remaining_trace; // suffix sums in assignment order
    std::vector<Matrix> partial;         // per target: sum of assigned effects
    std::vector<double> partial_trace;
    std::vector<double> target_trace;
    std::vector<std::size_t> assignment; // in `order` positions
    std::uint64_t nodes = 0;
    bool exhausted = true;

    explicit FunctionSearch(const DiscreteObservable& e_, const DiscreteObservable& e1_,
                            Tolerance tol_, std::uint64_t budget_)
        : e(e_), e1(e1_), tol(tol_), budget(budget_) {
        const std::size_t n = e.n_outcomes();
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return e.effects[a].trace().real() > e.effects[b].trace().real();
        });
        remaining_trace.assign(n + 1, 0.0);
        for (std::size_t k = n; k-- > 0;)
            remaining_trace[k] = remaining_trace[k + 1] + e.effects[order[k]].trace().real();
        partial.assign(e1.n_outcomes(), Matrix::zero(e.space_dim));
        partial_trace.assign(e1.n_outcomes(), 0.0);
        for (const Matrix& t : e1.effects) target_trace.push_back(t.trace().real());
        assignment.assign(n, 0);
    }

    // Largest eigenvalue of (partial[y] - E1(y)) must stay below tol.psd:
    // partial sums only grow in the Loewner order. Diagonal and trace screens
    // decide most nodes without an eigensolve.
    bool overshoots(std::size_t y) const {
        const Matrix diff = partial[y] - e1.effects[y];
        double max_diag = 0.0;
        for (std::size_t i = 0; i < diff.rows(); ++i)
            max_diag = std::max(max_diag, diff(i, i).real());
        if (max_diag > tol.psd) return true;
        if (diff.frob_norm() <= tol.psd) return false;
        return herm_eig(diff, tol).eigenvalues.back() > tol.psd;
    }

    bool deficits_unfillable(std::size_t next_pos) const {
        double deficit = 0.0;
        for (std::size_t y = 0; y < e1.n_outcomes(); ++y)
            deficit += std::max(0.0, target_trace[y] - partial_trace[y]);
        const double slack =
            tol.eq * static_cast<double>(e.n_outcomes() + e1.n_outcomes() + 1);
        return deficit > remaining_trace[next_pos] + slack;
    }

    bool at_leaf_matches() const {
        for (std::size_t y = 0; y < e1.n_outcomes(); ++y)
            if (frob_dist(partial[y], e1.effects[y]) > tol.eq) return false;
        return true;
    }

    std::optional<OutcomeFunction> run(std::size_t pos) {
        if (pos == order.size()) {
            if (!at_leaf_matches()) return std::nullopt;
            OutcomeFunction f;
            f.table.assign(order.size(), 0);
            for (std::size_t k = 0; k < order.size(); ++k) f.table[order[k]] = assignment[k];
            return f;
        }
        const std::size_t x = order[pos];
        for (std::size_t y = 0; y < e1.n_outcomes(); ++y) {
            if (++nodes > budget) {
                exhausted = false;
                return std::nullopt;
            }
            partial[y] += e.effects[x];
            partial_trace[y] += e.effects[x].trace().real();
            assignment[pos] = y;
            if (!overshoots(y) && !deficits_unfillable(pos + 1)) {
                if (auto f = run(pos + 1)) return f;
                if (!exhausted) { /* unwind without trying siblings */
                    partial[y] -= e.effects[x];
                    partial_trace[y] -= e.effects[x].trace().real();
                    return std::nullopt;
                }
            }
            partial[y] -= e.effects[x];
            partial_trace[y] -= e.effects[x].trace().real();
        }
        return std::nullopt;
    }
};

} // namespace detail

/// Exhaustive backtracking search for f with E1 = E o f^{-1}. `None` is a
/// nonexistence proof at tolerance; a budget hit is reported as inconclusive.
inline FunctionSearchResult find_function(const DiscreteObservable& e,
                                          const DiscreteObservable& e1, const Tolerance& tol = {},
                                          std::uint64_t budget = kDefaultSearchBudget) {
    if (e.space_dim != e1.space_dim)
        throw DimensionMismatch("find_function: space dims " + std::to_string(e.space_dim) +
                                " vs " + std::to_string(e1.space_dim));
    detail::FunctionSearch search(e, e1, tol, budget);
    FunctionSearchResult res;
    auto found = search.run(0);
    res.nodes = search.nodes;
    if (found) {
        res.outcome = SearchOutcome::Found;
        res.function = std::move(found);
    } else {
        res.outcome = search.exhausted ? SearchOutcome::None : SearchOutcome::Inconclusive;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Functional coexistence for scalar measures
// ---------------------------------------------------------------------------

struct CoexistenceWitness {
    DiscreteObservable common; // F on the refined outcome set {z1..zD}
    OutcomeFunction to_e1;     // f with E1 = F o f^{-1}
    OutcomeFunction to_e;      // g with E  = F o g^{-1}
};

inline constexpr std::int64_t kDefaultDenominatorBound = 1'000'000;

/// Common refinement of two scalar measures with rational weights: F puts
/// weight 1/D on each of D points, grouped consecutively so that g rebuilds
/// the weights of e and f the weights of e1.
inline CoexistenceWitness coexistence_witness_classical(
    const DiscreteObservable& e, const DiscreteObservable& e1, const Tolerance& tol = {},
    std::int64_t max_den = kDefaultDenominatorBound) {
    if (e.space_dim != 1 || e1.space_dim != 1)
        throw NotScalar("coexistence_witness_classical: both observables must be scalar");

    auto numerators = [&](const DiscreteObservable& obs, std::int64_t den) {
        std::vector<std::int64_t> nums;
        std::int64_t total = 0;
        for (const Matrix& eff : obs.effects) {
            const auto r = rationalize(eff(0, 0).real(), max_den, tol.eq);
            // den is the lcm of all rationalized denominators, so r->den divides it
            nums.push_back(r->num * (den / r->den));
            total += nums.back();
        }
        if (total != den)
            throw NumericError("coexistence witness: weights do not sum to 1 over denominator " +
                               std::to_string(den));
        return nums;
    };

    std::int64_t den = 1;
    for (const DiscreteObservable* obs : {&e, &e1})
        for (const Matrix& eff : obs->effects) {
            const auto r = rationalize(eff(0, 0).real(), max_den, tol.eq);
            if (!r)
                throw DenominatorOverflow("weight " + std::to_string(eff(0, 0).real()) +
                                          " has no rational form with denominator <= " +
                                          std::to_string(max_den));
            const auto l = bounded_lcm(den, r->den, max_den);
            if (!l)
                throw DenominatorOverflow("common denominator exceeds " +
                                          std::to_string(max_den));
            den = *l;
        }

    const std::vector<std::int64_t> e_nums = numerators(e, den);
    const std::vector<std::int64_t> e1_nums = numerators(e1, den);

    CoexistenceWitness w;
    w.common.space_dim = 1;
    for (std::int64_t i = 0; i < den; ++i) {
        w.common.outcomes.push_back("z" + std::to_string(i + 1));
        w.common.effects.push_back(Matrix::scalar(1.0 / static_cast<double>(den)));
    }
    auto grouping = [](const std::vector<std::int64_t>& nums) {
        OutcomeFunction f;
        for (std::size_t i = 0; i < nums.size(); ++i)
            f.table.insert(f.table.end(), static_cast<std::size_t>(nums[i]), i);
        return f;
    };
    w.to_e = grouping(e_nums);
    w.to_e1 = grouping(e1_nums);

    if (!verify_function(w.common, w.to_e, e, tol).ok ||
        !verify_function(w.common, w.to_e1, e1, tol).ok)
        throw NumericError("coexistence witness failed its own verification");
    return w;
}

// ---------------------------------------------------------------------------
// Aggregate relation report
// ---------------------------------------------------------------------------

struct RelationReport {
    Classification e_class;
    Classification e1_class;
    CoarseGrainingResult coarse;        // is e1 a coarse graining of e?
    FunctionSearchResult function;      // f with E1 = E o f^{-1}
    Dilation dilation;                  // minimal dilation of e
    DilationReport dilation_report;
    R1Set r1;
    R1BooleanResult r1_boolean;
    VPropertyResult etilde_v_property;  // Etilde-range against R1 projections
    std::optional<FunctionalForm> functional_form; // when R1 is Boolean
    std::optional<CoexistenceWitness> coexistence; // when both scalar & rational
    std::string coexistence_note;                  // why absent, if absent
};

struct RelateOptions {
    std::size_t outcome_cap = kDefaultOutcomeCap;
    std::uint64_t budget = kDefaultSearchBudget;
    std::int64_t max_den = kDefaultDenominatorBound;
};

/// Everything this library can say about the pair (E, E1).
inline RelationReport relate(const DiscreteObservable& e, const DiscreteObservable& e1,
                             const Tolerance& tol = {}, const RelateOptions& opts = {}) {
    if (e.space_dim != e1.space_dim)
        throw DimensionMismatch("relate: space dims " + std::to_string(e.space_dim) + " vs " +
                                std::to_string(e1.space_dim));
    RelationReport rep;
    rep.e_class = classify(e, tol, opts.outcome_cap);
    rep.e1_class = classify(e1, tol, opts.outcome_cap);
    rep.coarse = coarse_graining_check(e1, e, tol, opts.outcome_cap);
    rep.function = find_function(e, e1, tol, opts.budget);

    rep.dilation = minimal_naimark(e, tol);
    rep.dilation_report = verify_dilation(rep.dilation, e, tol);
    rep.r1 = compute_R1(rep.dilation, e1, tol, opts.outcome_cap);
    rep.r1_boolean = is_R1_boolean(rep.r1);

    DiscreteObservable etilde;
    etilde.space_dim = rep.dilation.dim_k;
    etilde.outcomes = e.outcomes;
    etilde.effects = rep.dilation.atom_projections;
    const RangeIndex erange = enumerate_range(etilde, tol, opts.outcome_cap);
    std::vector<Matrix> r1_projections;
    for (SubsetMask m : rep.r1.members) r1_projections.push_back(rep.dilation.spectral_projection(m));
    rep.etilde_v_property = v_property_check(erange, r1_projections, tol);

    if (rep.r1_boolean.boolean)
        rep.functional_form =
            functional_form_from_R1(rep.dilation, rep.r1, e, e1, tol, opts.outcome_cap);

    if (e.space_dim == 1) {
        try {
            rep.coexistence = coexistence_witness_classical(e, e1, tol, opts.max_den);
        } catch (const DenominatorOverflow& ex) {
            rep.coexistence_note = ex.what();
        }
    } else {
        rep.coexistence_note = "coexistence construction applies to scalar measures only";
    }
    return rep;
}

} // namespace povm
