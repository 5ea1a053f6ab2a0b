#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gts/error.hpp"
#include "gts/returns.hpp"
#include "gts/spectral.hpp"

namespace gts {

/// b0 + b1 y + b2 y^2 + b3 y^3 + b4 y^4
struct quartic_coeffs {
    std::array<double, 5> b{};

    double operator()(double y) const { return detail::eval_poly(b, y); }
    double derivative(double y) const { return ((4.0 * b[4] * y + 3.0 * b[3]) * y + 2.0 * b[2]) * y + b[1]; }
};

struct quartic_root {
    double y = 0.0;
    double residual = 0.0;
    bool multiple_roots = false;  // several sign changes in (0,1); nearest to the linear seed taken
};

namespace detail {

// Safeguarded Newton on a sign-changing bracket [lo, hi]; falls back to
// bisection whenever the Newton step leaves the bracket.
inline double newton_bisect(const quartic_coeffs& q, double lo, double hi, double seed) {
    double flo = q(lo);
    double y = std::clamp(seed, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double fy = q(y);
        if (fy == 0.0) return y;
        if ((fy < 0.0) == (flo < 0.0)) {
            lo = y;
            flo = fy;
        } else {
            hi = y;
        }
        const double d = q.derivative(y);
        double next = d != 0.0 ? y - fy / d : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - y) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) {
            return std::abs(q(next)) < std::abs(fy) ? next : y;
        }
        y = next;
    }
    return y;
}

} // namespace detail

/// Root of the quartic in (0, 1); requires q(0) and q(1) of opposite sign.
inline quartic_root solve_quartic_unit(const quartic_coeffs& q) {
    const double f0 = q(0.0);
    const double f1 = q(1.0);
    if (f0 == 0.0) return {0.0, 0.0, false};
    if (f1 == 0.0) return {1.0, 0.0, false};
    if ((f0 < 0.0) == (f1 < 0.0)) throw numerical_error("NoBracket", "quartic has equal signs at 0 and 1");

    const double seed = f0 / (f0 - f1);

    // Scan for extra sign changes caused by interpolation wiggle.
    constexpr int n_scan = 64;
    std::vector<std::pair<double, double>> brackets;
    double prev_y = 0.0, prev_f = f0;
    for (int k = 1; k <= n_scan; ++k) {
        const double y = static_cast<double>(k) / n_scan;
        const double fy = k == n_scan ? f1 : q(y);
        if ((fy < 0.0) != (prev_f < 0.0) || fy == 0.0) brackets.emplace_back(prev_y, y);
        prev_y = y;
        prev_f = fy;
    }

    quartic_root r;
    double lo = 0.0, hi = 1.0;
    if (brackets.size() > 1) {
        r.multiple_roots = true;
        const auto nearest = std::min_element(brackets.begin(), brackets.end(), [seed](const auto& a, const auto& b) {
            return std::abs(0.5 * (a.first + a.second) - seed) < std::abs(0.5 * (b.first + b.second) - seed);
        });
        lo = nearest->first;
        hi = nearest->second;
    } else if (brackets.size() == 1) {
        lo = brackets.front().first;
        hi = brackets.front().second;
    }
    r.y = detail::newton_bisect(q, lo, hi, seed);
    r.residual = q(r.y);
    return r;
}

struct quantile_query {
    double alpha = 0.0;
    std::size_t bracket = 0;  // F_i <= alpha < F_{i+1}
    double y = 0.0;           // normalised position inside the bracket
    double x_alpha = 0.0;
    quartic_coeffs coeffs;
    double residual = 0.0;
    bool multiple_roots = false;
};

/// Quantile from a tabulated distribution function: locate the bracket by
/// binary search, build the quartic F-interpolant in y = (x - x_i) / dx, and
/// solve P(y) = alpha on (0, 1). Quantiles outside the tabulated mass are refused.
inline quantile_query quantile_detail(const cdf_table& t, double alpha) {
    const auto& F = t.values;
    if (!(alpha > F.front() + 1e-9 && alpha < F.back() - 1e-9)) {
        throw domain_error("OutOfRange", "probability level " + std::to_string(alpha) +
                                             " lies outside the tabulated mass");
    }
    // Invariant F[lo] <= alpha < F[hi] holds even if the table has roundoff dips.
    std::size_t lo = 0, hi = F.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (F[mid] <= alpha ? lo : hi) = mid;
    }

    quantile_query q;
    q.alpha = alpha;
    q.bracket = lo;
    if (F[lo] == alpha) {
        q.x_alpha = t.grid.x(lo);
        return q;
    }
    if (!(F[lo + 1] > F[lo])) throw numerical_error("BracketFailure", "table is not increasing at the bracket");

    q.coeffs.b = t.bracket_polynomial(lo);
    q.coeffs.b[0] -= alpha;
    const auto root = solve_quartic_unit(q.coeffs);
    q.y = root.y;
    q.residual = root.residual;
    q.multiple_roots = root.multiple_roots;
    q.x_alpha = t.grid.x(lo) + q.y * t.grid.dx;
    return q;
}

inline double quantile(const cdf_table& t, double alpha) { return quantile_detail(t, alpha).x_alpha; }

/// Uniform on the open interval (0, 1) from the top 52 bits of a 64-bit draw
/// (53 would let the largest value round up to 1).
inline double open_unit_uniform(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Inverse-CDF sampling. u_k is built from the k-th output of mt19937_64(seed),
/// so any chunk [a, b) of the stream is reproducible by discarding a draws.
inline return_series sample(const cdf_table& t, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw domain_error("DomainError", "sample size must be at least 1");
    std::mt19937_64 rng(seed);
    return_series out;
    out.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.values.push_back(quantile(t, open_unit_uniform(rng())));
    out.label = "gts-sample";
    return out;
}

} // namespace gts
