#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gts/error.hpp"
#include "gts/exponent.hpp"
#include "gts/fft.hpp"
#include "gts/params.hpp"

namespace gts {

struct grid_config {
    std::size_t m = std::size_t{1} << 14;  // rounded up to a power of two, at least 256
    double width_sds = 20.0;               // half-width in units of sqrt(kappa_2)
    double min_half_width = 0.0;           // floor on the half-width, percent
    double freq_eps = 1e-12;               // target |cf| at the frequency cutoff
    double fail_eps = 1e-6;                // |cf| at the cutoff beyond which the grid is refused
    double alias_factor = 2.0;             // spatial period 2 pi / dxi >= alias_factor * (x_max - x_min)
};

/// Uniform spatial grid x_j = x_min + j dx (j < m) paired with the frequency
/// grid xi_k = k dxi (k < n_freq) used by the inversion.
struct spectral_grid {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t m = 0;
    double dx = 0.0;
    std::size_t n_freq = 0;
    double freq_cutoff = 0.0;
    double dxi = 0.0;
    double cf_at_cutoff = 0.0;  // |cf(freq_cutoff)|

    double x(std::size_t j) const { return x_min + static_cast<double>(j) * dx; }
    double xi(std::size_t k) const { return static_cast<double>(k) * dxi; }
    bool contains(double v) const { return v >= x_min && v <= x_max; }
};

namespace detail {

inline std::size_t round_up_pow2(std::size_t m) { return std::max<std::size_t>(256, std::bit_ceil(m)); }

/// Smallest xi (to bisection precision) with |cf(xi)| <= eps. Re psi decreases
/// monotonically on xi > 0, so a doubling bracket followed by bisection suffices.
inline double cf_decay_point(const gts_params& p, double eps) {
    const double target = std::log(eps);
    const auto log_abs_cf = [&](double xi) { return characteristic_exponent(p, xi).real(); };
    double lo = 0.0;
    double hi = 1.0;
    while (log_abs_cf(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e15) throw numerical_error("ConfigError", "characteristic function does not decay");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_abs_cf(mid) > target ? lo : hi) = mid;
    }
    return hi;
}

} // namespace detail

/// Sizes the evaluation grid for `p`: centred on the mean with half-width
/// max(width_sds * sd, min_half_width); frequency cutoff where |cf| drops below
/// freq_eps, capped so the spatial aliasing period stays clear of the grid.
inline spectral_grid build_grid(const gts_params& p, const grid_config& cfg = {}) {
    if (!(cfg.width_sds > 0.0) || !(cfg.freq_eps > 0.0) || !(cfg.alias_factor >= 1.0)) {
        throw domain_error("ConfigError", "grid configuration values must be positive");
    }
    spectral_grid g;
    const double k1 = cumulant(p, 1);
    const double sd = std::sqrt(cumulant(p, 2));
    const double half = std::max(cfg.width_sds * sd, cfg.min_half_width);
    g.m = detail::round_up_pow2(cfg.m);
    g.x_min = k1 - half;
    g.x_max = k1 + half;
    g.dx = (g.x_max - g.x_min) / static_cast<double>(g.m - 1);
    g.n_freq = g.m;

    const double wanted = detail::cf_decay_point(p, cfg.freq_eps);
    const double cap = 2.0 * std::numbers::pi * static_cast<double>(g.m - 2) / (cfg.alias_factor * (g.x_max - g.x_min));
    g.freq_cutoff = std::min(wanted, cap);
    g.cf_at_cutoff = std::abs(characteristic_function(p, g.freq_cutoff));
    if (g.cf_at_cutoff >= cfg.fail_eps) {
        throw numerical_error("ConfigError", "grid cannot capture the characteristic function tail (|cf| = " +
                                                 std::to_string(g.cf_at_cutoff) + " at the cutoff)");
    }
    // Simpson runs over nodes 0..m-2, the last node carries zero weight.
    g.dxi = g.freq_cutoff / static_cast<double>(g.m - 2);
    return g;
}

namespace detail {

/// Composite Simpson weights over nodes 0..n_freq-2; node n_freq-1 gets weight 0.
inline std::vector<double> simpson_weights(const spectral_grid& g) {
    std::vector<double> w(g.n_freq, 0.0);
    const std::size_t last = g.n_freq - 2;
    const double h3 = g.dxi / 3.0;
    for (std::size_t k = 0; k <= last; ++k) {
        if (k == 0 || k == last) w[k] = h3;
        else w[k] = (k % 2 == 1 ? 4.0 : 2.0) * h3;
    }
    return w;
}

inline std::vector<complex> cf_samples(const gts_params& p, const spectral_grid& g) {
    std::vector<complex> cf(g.n_freq);
    for (std::size_t k = 0; k < g.n_freq; ++k) cf[k] = characteristic_function(p, g.xi(k));
    return cf;
}

inline double frft_delta(const spectral_grid& g) { return g.dxi * g.dx / (2.0 * std::numbers::pi); }

inline complex shift_phase(const spectral_grid& g, std::size_t k) {
    const double ang = -g.xi(k) * g.x_min;
    return {std::cos(ang), std::sin(ang)};
}

inline double trapezoid(std::span<const double> v, double h) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t j = 1; j + 1 < v.size(); ++j) s += v[j];
    return s * h;
}

/// Monomial coefficients (in y) of the degree-4 Lagrange interpolant through
/// (nodes[k], values[k]), k = 0..4.
inline std::array<double, 5> lagrange_quartic(const std::array<double, 5>& nodes, const std::array<double, 5>& values) {
    std::array<double, 5> out{};
    for (int k = 0; k < 5; ++k) {
        std::array<double, 5> basis{1.0, 0.0, 0.0, 0.0, 0.0};
        int deg = 0;
        double denom = 1.0;
        for (int l = 0; l < 5; ++l) {
            if (l == k) continue;
            // basis *= (y - nodes[l])
            for (int d = deg + 1; d >= 1; --d) basis[d] = basis[d - 1] - nodes[l] * basis[d];
            basis[0] *= -nodes[l];
            ++deg;
            denom *= nodes[k] - nodes[l];
        }
        const double scale = values[k] / denom;
        for (int d = 0; d < 5; ++d) out[d] += scale * basis[d];
    }
    return out;
}

inline double eval_poly(const std::array<double, 5>& c, double y) {
    return (((c[4] * y + c[3]) * y + c[2]) * y + c[1]) * y + c[0];
}

} // namespace detail

/// Tabulated density f(x_j), clamped at zero.
struct density_table {
    spectral_grid grid;
    std::vector<double> values;
    std::vector<double> slopes;  // monotone-cubic node derivatives
    double min_raw = 0.0;        // most negative value before clamping

    /// Piecewise cubic Hermite interpolant with bounded fourth-order slopes;
    /// zero outside the grid.
    double operator()(double x) const {
        if (!grid.contains(x)) return 0.0;
        const double t = (x - grid.x_min) / grid.dx;
        auto i = static_cast<std::size_t>(t);
        if (i >= grid.m - 1) i = grid.m - 2;
        const double s = t - static_cast<double>(i);
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        const double v = h00 * values[i] + h10 * grid.dx * slopes[i] + h01 * values[i + 1] +
                         h11 * grid.dx * slopes[i + 1];
        return std::max(v, 0.0);
    }

    double integral() const { return detail::trapezoid(values, grid.dx); }
};

/// Tabulated distribution function F(x_j).
struct cdf_table {
    spectral_grid grid;
    std::vector<double> values;

    /// Start index of the 5-node window serving the bracket [x_i, x_i+1]:
    /// centred on i, shifted inwards at the table edges.
    std::size_t window_start(std::size_t i) const {
        const std::size_t s = i < 2 ? 0 : i - 2;
        return std::min(s, grid.m - 5);
    }

    /// Quartic interpolant of F on [x_i, x_i+1] in y = (x - x_i) / dx.
    std::array<double, 5> bracket_polynomial(std::size_t i) const {
        const std::size_t s = window_start(i);
        std::array<double, 5> nodes{}, vals{};
        for (std::size_t k = 0; k < 5; ++k) {
            nodes[k] = static_cast<double>(s + k) - static_cast<double>(i);
            vals[k] = values[s + k];
        }
        return detail::lagrange_quartic(nodes, vals);
    }

    std::size_t bracket_of(double x) const {
        const double t = (x - grid.x_min) / grid.dx;
        auto i = static_cast<std::size_t>(std::max(t, 0.0));
        return std::min(i, grid.m - 2);
    }

    /// F(x) by the same quartic used for quantile extraction, clamped to [0, 1].
    double operator()(double x) const {
        if (x <= grid.x_min) return std::clamp(values.front(), 0.0, 1.0);
        if (x >= grid.x_max) return std::clamp(values.back(), 0.0, 1.0);
        const std::size_t i = bracket_of(x);
        const double y = (x - grid.x(i)) / grid.dx;
        return std::clamp(detail::eval_poly(bracket_polynomial(i), y), 0.0, 1.0);
    }

    double lower_mass() const { return values.front(); }
    double upper_mass() const { return 1.0 - values.back(); }
};

namespace detail {

// Fourth-order centred slopes, each bounded to the hull of {0, 3a, 3b} where a
// and b are the adjacent secants. Where both secants share a sign this keeps
// the slope on the monotone side (Fritsch-Carlson region whenever neighbouring
// secants are within a factor of three); at a local extremum nothing is forced
// to zero. The bounds are continuous in the data, so the interpolant moves
// continuously with the parameters behind the table.
inline std::vector<double> monotone_slopes(std::span<const double> v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> delta(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) delta[j] = (v[j + 1] - v[j]) / h;
    d.front() = delta.front();
    d.back() = delta.back();
    for (std::size_t j = 1; j + 1 < n; ++j) {
        d[j] = (j >= 2 && j + 2 < n) ? (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) / (12.0 * h)
                                     : 0.5 * (delta[j - 1] + delta[j]);
        const double a = 3.0 * delta[j - 1];
        const double b = 3.0 * delta[j];
        d[j] = std::clamp(d[j], std::min({0.0, a, b}), std::max({0.0, a, b}));
    }
    return d;
}

} // namespace detail

/// Density table by Fourier inversion
///   f(x) = (1/pi) Re int_0^Xi cf(xi) e^{-i x xi} dxi
/// with Simpson-weighted frequency samples, all x_j at once through one FRFT.
inline density_table build_pdf_table(const gts_params& p, const spectral_grid& g, bool strict = true) {
    const auto w = detail::simpson_weights(g);
    const auto cf = detail::cf_samples(p, g);
    std::vector<complex> a(g.n_freq);
    for (std::size_t k = 0; k < g.n_freq; ++k) a[k] = w[k] * cf[k] * detail::shift_phase(g, k);
    const auto out = frft(a, detail::frft_delta(g));

    density_table t;
    t.grid = g;
    t.values.resize(g.m);
    for (std::size_t j = 0; j < g.m; ++j) {
        const double v = out[j].real() / std::numbers::pi;
        t.min_raw = std::min(t.min_raw, v);
        t.values[j] = std::max(v, 0.0);
    }
    if (strict && t.min_raw < -1e-9) {
        throw numerical_error("NumericalFailure", "density table dips to " + std::to_string(t.min_raw) +
                                                      "; grid is misconfigured");
    }
    const double mass = t.integral();
    if (strict && std::abs(mass - 1.0) > 1e-6) {
        throw numerical_error("NumericalFailure", "density table integrates to " + std::to_string(mass));
    }
    t.slopes = detail::monotone_slopes(t.values, g.dx);
    return t;
}

/// Distribution-function table from the symmetrised inversion integral
///   F(x) = 1/2 - (1/pi) int_0^Xi Im[e^{-i x xi} cf(xi)] / xi dxi.
/// The integrand is bounded at xi = 0 with limit (kappa_1 - x); that node is
/// handled analytically and the rest goes through one FRFT.
inline cdf_table build_cdf_table(const gts_params& p, const spectral_grid& g) {
    const auto w = detail::simpson_weights(g);
    const auto cf = detail::cf_samples(p, g);
    std::vector<complex> a(g.n_freq);
    for (std::size_t k = 1; k < g.n_freq; ++k) a[k] = w[k] * cf[k] / g.xi(k) * detail::shift_phase(g, k);
    const auto out = frft(a, detail::frft_delta(g));

    const double k1 = cumulant(p, 1);
    cdf_table t;
    t.grid = g;
    t.values.resize(g.m);
    for (std::size_t j = 0; j < g.m; ++j) {
        const double origin = w[0] * (k1 - g.x(j));
        t.values[j] = 0.5 - (origin + out[j].imag()) / std::numbers::pi;
    }
    for (std::size_t j = 0; j + 1 < g.m; ++j) {
        if (t.values[j + 1] < t.values[j] - 1e-10) {
            throw numerical_error("NumericalFailure", "distribution table decreases at x = " + std::to_string(g.x(j)));
        }
    }
    if (t.lower_mass() > 1e-6 || t.upper_mass() > 1e-6) {
        throw numerical_error("NumericalFailure", "grid does not cover the distribution mass");
    }
    return t;
}

/// Two-column CSV (x,value), 17 significant digits.
inline void write_table_csv(std::ostream& out, const spectral_grid& g, std::span<const double> values) {
    out << "x,value\n";
    char buf[80];
    for (std::size_t j = 0; j < values.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.x(j), values[j]);
        out << buf;
    }
}

} // namespace gts
