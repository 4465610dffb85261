#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>

namespace povm {

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Best rational approximation of x by continued-fraction convergents with
/// denominator <= max_den. Empty if no convergent within that bound comes
/// within tol of x.
inline std::optional<Rational> rationalize(double x, std::int64_t max_den, double tol) {
    if (!std::isfinite(x)) return std::nullopt;
    const bool negative = x < 0;
    double v = std::abs(x);

    std::int64_t p_prev = 0, q_prev = 1; // convergent k-2
    std::int64_t p = 1, q = 0;           // convergent k-1
    for (int iter = 0; iter < 64; ++iter) {
        const double floor_v = std::floor(v);
        if (floor_v > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 4)) break;
        const auto a = static_cast<std::int64_t>(floor_v);
        const std::int64_t p_next = a * p + p_prev;
        const std::int64_t q_next = a * q + q_prev;
        if (q_next > max_den || q_next <= 0) break;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        const double approx = static_cast<double>(p) / static_cast<double>(q);
        if (std::abs(std::abs(x) - approx) <= tol)
            return Rational{negative ? -p : p, q};
        const double frac = v - floor_v;
        if (frac <= 0) break;
        v = 1.0 / frac;
    }
    return std::nullopt;
}

/// lcm clamped against a bound; empty when the bound is exceeded.
inline std::optional<std::int64_t> bounded_lcm(std::int64_t a, std::int64_t b,
                                               std::int64_t bound) {
    const std::int64_t g = std::gcd(a, b);
    const std::int64_t scaled = a / g;
    if (b != 0 && scaled > bound / b) return std::nullopt;
    const std::int64_t l = scaled * b;
    if (l > bound) return std::nullopt;
    return l;
}

} // namespace povm
