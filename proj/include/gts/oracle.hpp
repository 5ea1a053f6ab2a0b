#pragma once

// Slow pointwise inversion used to verify the FRFT tables. Each call runs an
// adaptive Gauss-Kronrod integration over a few thousand panels; do not use it
// on hot paths.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gts/error.hpp"
#include "gts/exponent.hpp"
#include "gts/params.hpp"

namespace gts {

struct oracle_result {
    double pdf = 0.0;
    double cdf = 0.0;
    double error_estimate = 0.0;
};

struct oracle_options {
    double tolerance = 1e-10;    // absolute, on pdf and cdf
    double cf_floor = 1e-17;     // frequency integrals stop where |cf| falls below this
    unsigned max_depth = 12;     // bisection depth per panel
};

inline oracle_result direct_quadrature_oracle(const gts_params& p, double x, const oracle_options& opt = {}) {
    using boost::math::quadrature::gauss_kronrod;

    // Upper limit: plain doubling search on |cf|.
    double upper = 1.0;
    while (characteristic_exponent(p, upper).real() > std::log(opt.cf_floor)) {
        upper *= 1.5;
        if (upper > 1e9) throw numerical_error("ConvergenceFailure", "characteristic function decays too slowly");
    }

    const double k1 = cumulant(p, 1);
    const auto integrand = [&](double xi) {
        return std::exp(complex(0.0, -x * xi) + characteristic_exponent(p, xi));
    };
    const auto pdf_part = [&](double xi) { return integrand(xi).real(); };
    const auto cdf_part = [&](double xi) { return xi == 0.0 ? k1 - x : integrand(xi).imag() / xi; };

    // Panels no wider than half an oscillation of e^{-i x xi}.
    const double omega = std::abs(x) + std::abs(p.mu) + std::abs(k1) + 1.0;
    const double panel = std::min(1.0, std::numbers::pi / omega);
    const auto n_panels = static_cast<std::size_t>(std::ceil(upper / panel));
    const double h = upper / static_cast<double>(n_panels);
    const double panel_tol = 1e-10; // relative to each panel's L1 norm

    oracle_result r;
    double pdf_sum = 0.0, cdf_sum = 0.0, err = 0.0;
    for (std::size_t i = 0; i < n_panels; ++i) {
        const double a = h * static_cast<double>(i);
        const double b = a + h;
        double e1 = 0.0, e2 = 0.0;
        pdf_sum += gauss_kronrod<double, 31>::integrate(pdf_part, a, b, opt.max_depth, panel_tol, &e1);
        cdf_sum += gauss_kronrod<double, 31>::integrate(cdf_part, a, b, opt.max_depth, panel_tol, &e2);
        err += std::max(e1, e2);
    }
    r.pdf = pdf_sum / std::numbers::pi;
    r.cdf = 0.5 - cdf_sum / std::numbers::pi;
    r.error_estimate = err / std::numbers::pi;
    if (!(r.error_estimate <= opt.tolerance)) {
        throw numerical_error("ConvergenceFailure", "oracle error estimate " + std::to_string(r.error_estimate) +
                                                        " exceeds tolerance");
    }
    return r;
}

} // namespace gts
