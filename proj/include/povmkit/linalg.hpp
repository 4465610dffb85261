#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "povmkit/matrix.hpp"

namespace povm {

/// Numerical thresholds. The theory is exact; the arithmetic is not.
struct Tolerance {
    double eq = 1e-8;   // Frobenius-distance equality threshold
    double psd = 1e-9;  // eigenvalue negativity allowed before "not PSD"
    double rank = 1e-9; // eigen/singular value cutoff for numerical rank

    /// Scale all thresholds proportionally from a new equality threshold.
    static Tolerance from_eq(double eq) {
        Tolerance t;
        t.eq = eq;
        t.psd = eq * (1e-9 / 1e-8);
        t.rank = eq * (1e-9 / 1e-8);
        return t;
    }
};

struct EigResult {
    std::vector<double> eigenvalues; // ascending
    Matrix vectors;                  // unitary, columns are eigenvectors
};

namespace detail {

inline double offdiag_norm(const Matrix& a) {
    double s = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// One cyclic Jacobi sweep for a Hermitian matrix. Rotations zero a_pq via a
// phase factor e^{i arg(a_pq)} composed with a real Givens rotation; see
// Golub & Van Loan sec. 8.5. Returns the number of rotations applied.
inline std::size_t jacobi_sweep(Matrix& a, Matrix& u, double skip_threshold) {
    const std::size_t n = a.rows();
    std::size_t rotations = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            const Complex apq = a(p, q);
            const double r = std::abs(apq);
            if (r <= skip_threshold) continue;
            ++rotations;

            const Complex phase = apq / r; // e^{i phi}
            const double alpha = a(p, p).real();
            const double gamma = a(q, q).real();
            const double tau = (gamma - alpha) / (2.0 * r);
            const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;

            // U block: u_pp = c, u_pq = s*phase, u_qp = -s*conj(phase), u_qq = c
            const Complex upq = s * phase;
            const Complex uqp = -s * std::conj(phase);

            // A <- U* A U: first A <- A U (columns p,q), then A <- U* A (rows p,q).
            for (std::size_t i = 0; i < n; ++i) {
                const Complex aip = a(i, p);
                const Complex aiq = a(i, q);
                a(i, p) = aip * c + aiq * uqp;
                a(i, q) = aip * upq + aiq * c;
            }
            for (std::size_t j = 0; j < n; ++j) {
                const Complex apj = a(p, j);
                const Complex aqj = a(q, j);
                a(p, j) = c * apj + std::conj(uqp) * aqj;
                a(q, j) = std::conj(upq) * apj + c * aqj;
            }
            a(p, q) = 0.0;
            a(q, p) = 0.0;
            a(p, p) = Complex(a(p, p).real(), 0.0);
            a(q, q) = Complex(a(q, q).real(), 0.0);

            for (std::size_t i = 0; i < n; ++i) {
                const Complex uip = u(i, p);
                const Complex uiq = u(i, q);
                u(i, p) = uip * c + uiq * uqp;
                u(i, q) = uip * upq + uiq * c;
            }
        }
    }
    return rotations;
}

// Cholesky probe: returns true iff A (Hermitian) is positive definite, as
// decided by an LL* factorization with strictly positive pivots.
inline bool cholesky_pd(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            Complex v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * std::conj(l(j, k));
            l(i, j) = v / ljj;
        }
    }
    return true;
}

} // namespace detail

inline constexpr int kJacobiSweepBudget = 100;
inline constexpr double kJacobiOffdiagTarget = 1e-12;

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending; A = U diag(lambda) U*.
inline EigResult herm_eig(const Matrix& a, const Tolerance& tol = {}) {
    if (!a.is_square() || a.hermiticity_defect() > tol.eq)
        throw NonHermitianInput("herm_eig: input is not Hermitian within tolerance " +
                                std::to_string(tol.eq));
    const std::size_t n = a.dim();
    Matrix work = a.hermitized();
    Matrix u = Matrix::identity(n);

    const double skip = n > 0 ? kJacobiOffdiagTarget / (2.0 * static_cast<double>(n)) : 0.0;
    bool converged = false;
    for (int sweep = 0; sweep < kJacobiSweepBudget; ++sweep) {
        const std::size_t rotations = detail::jacobi_sweep(work, u, skip);
        if (rotations == 0 || detail::offdiag_norm(work) <= kJacobiOffdiagTarget) {
            converged = true;
            break;
        }
    }
    if (!converged && detail::offdiag_norm(work) > kJacobiOffdiagTarget)
        throw ConvergenceFailure("herm_eig: off-diagonal norm " +
                                 std::to_string(detail::offdiag_norm(work)) + " after " +
                                 std::to_string(kJacobiSweepBudget) + " sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return work(i, i).real() < work(j, j).real();
    });

    EigResult res;
    res.eigenvalues.resize(n);
    res.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.eigenvalues[k] = work(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) res.vectors(i, k) = u(i, order[k]);
    }
    return res;
}

/// Smallest eigenvalue of a Hermitian matrix.
inline double min_eigenvalue(const Matrix& a, const Tolerance& tol = {}) {
    return herm_eig(a, tol).eigenvalues.front();
}

/// True iff min eigenvalue >= -tol.psd. Cheap screens (diagonal entries,
/// shifted Cholesky) decide most cases; borderline ones fall back to Jacobi.
inline bool is_psd(const Matrix& a, const Tolerance& tol = {}) {
    if (!a.is_square() || a.hermiticity_defect() > tol.eq)
        throw NonHermitianInput("is_psd: input is not Hermitian within tolerance " +
                                std::to_string(tol.eq));
    const std::size_t n = a.dim();
    if (n == 0) return true;
    for (std::size_t i = 0; i < n; ++i)
        if (a(i, i).real() < -tol.psd) return false; // min eig <= min diagonal
    Matrix shifted = a.hermitized();
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += tol.psd;
    if (detail::cholesky_pd(shifted)) return true;
    return min_eigenvalue(a, tol) >= -tol.psd;
}

/// Loewner order: A <= B iff B - A is positive semidefinite.
inline bool loewner_leq(const Matrix& a, const Matrix& b, const Tolerance& tol = {}) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("loewner_leq: " + a.shape_string() + " vs " + b.shape_string());
    return is_psd(b - a, tol);
}

/// PSD square root. Eigenvalues in (-tol.psd, 0) are clamped to zero before
/// rooting; anything more negative is an error.
inline Matrix psd_sqrt(const Matrix& a, const Tolerance& tol = {}) {
    EigResult eig = herm_eig(a, tol);
    if (eig.eigenvalues.front() < -tol.psd)
        throw NotPositive("psd_sqrt: min eigenvalue " + std::to_string(eig.eigenvalues.front()));
    const std::size_t n = a.dim();
    Matrix root(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = std::max(eig.eigenvalues[k], 0.0);
        const double s = std::sqrt(lam);
        if (s == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                root(i, j) += s * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    return root.hermitized();
}

/// Numerical rank. Hermitian matrices: eigenvalues with |lambda| > tol.rank.
/// Everything else: eigenvalues of A*A (squared singular values) > tol.rank.
inline std::size_t rank_eps(const Matrix& a, const Tolerance& tol = {}) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    if (a.is_square() && a.hermiticity_defect() <= tol.eq) {
        const EigResult eig = herm_eig(a, tol);
        return static_cast<std::size_t>(std::count_if(
            eig.eigenvalues.begin(), eig.eigenvalues.end(),
            [&](double lam) { return std::abs(lam) > tol.rank; }));
    }
    const Matrix gram = a.adjoint() * a;
    const EigResult eig = herm_eig(gram, tol);
    return static_cast<std::size_t>(std::count_if(
        eig.eigenvalues.begin(), eig.eigenvalues.end(),
        [&](double lam) { return lam > tol.rank; }));
}

} // namespace povm
