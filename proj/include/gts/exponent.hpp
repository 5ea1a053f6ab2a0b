#pragma once

#include <cmath>
#include <complex>

#include "gts/error.hpp"
#include "gts/params.hpp"

namespace gts {

using complex = std::complex<double>;

namespace detail {

/// e^w - 1 without cancellation for small |w|.
inline complex expm1(complex w) {
    const double a = w.real();
    const double b = w.imag();
    const double s = std::sin(0.5 * b);
    return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

/// Principal log(1 + i t); real part kept accurate for small t.
inline complex log1p_i(double t) {
    const double at = std::abs(t);
    const double re = at < 1e8 ? 0.5 * std::log1p(t * t) : std::log(at) + 0.5 * std::log1p(1.0 / (t * t));
    return {re, std::atan(t)};
}

/// Gamma at the negative non-integer point -beta, beta in (0, 1).
inline double gamma_neg(double beta) { return -std::tgamma(1.0 - beta) / beta; }

/// One tempered-stable side:
///   alpha * Gamma(-beta) * ((lambda + i s)^beta - lambda^beta)
/// evaluated as alpha * Gamma(-beta) * lambda^beta * expm1(beta * log(1 + i s / lambda)).
/// At beta = 0 the analytic limit -alpha * log(1 + i s / lambda) is used.
inline complex tempered_side(double alpha, double beta, double lambda, double s) {
    const complex log_ratio = log1p_i(s / lambda);
    if (beta == 0.0) return -alpha * log_ratio;
    return alpha * gamma_neg(beta) * std::pow(lambda, beta) * expm1(beta * log_ratio);
}

} // namespace detail

/// Characteristic exponent psi(xi) = log E[exp(i xi Y)].
/// psi(0) is exactly zero and conj(psi(xi)) == psi(-xi).
inline complex characteristic_exponent(const gts_params& p, double xi) {
    const complex drift{0.0, p.mu * xi};
    return drift + detail::tempered_side(p.alpha_plus, p.beta_plus, p.lambda_plus, -xi) +
           detail::tempered_side(p.alpha_minus, p.beta_minus, p.lambda_minus, xi);
}

inline complex characteristic_function(const gts_params& p, double xi) {
    return std::exp(characteristic_exponent(p, xi));
}

/// Density of the Levy measure V(dx). Diverges at the origin.
inline double levy_density(const gts_params& p, double x) {
    if (x == 0.0 || !std::isfinite(x)) {
        throw domain_error("DomainError", "levy density is undefined at x = 0");
    }
    if (x > 0.0) return p.alpha_plus * std::exp(-p.lambda_plus * x) / std::pow(x, 1.0 + p.beta_plus);
    const double ax = -x;
    return p.alpha_minus * std::exp(-p.lambda_minus * ax) / std::pow(ax, 1.0 + p.beta_minus);
}

enum class activity { finite, infinite };
enum class variation { finite, infinite };

struct path_class {
    gts::activity activity = activity::infinite;
    gts::variation variation = variation::finite;

    friend bool operator==(const path_class&, const path_class&) = default;
};

inline const char* to_string(activity a) { return a == activity::finite ? "finite" : "infinite"; }
inline const char* to_string(variation v) { return v == variation::finite ? "finite" : "infinite"; }

// Near the origin each side of V behaves like alpha / |x|^(1+beta):
//   total mass  diverges for beta >= 0          (infinite activity)
//   int |x| V   converges for beta < 1          (finite variation)
inline path_class path_classification(const gts_params& p) {
    const auto side_infinite_activity = [](double alpha, double beta) { return alpha > 0.0 && beta >= 0.0; };
    const auto side_finite_variation = [](double alpha, double beta) { return alpha == 0.0 || beta < 1.0; };

    path_class c;
    c.activity = side_infinite_activity(p.alpha_plus, p.beta_plus) ||
                         side_infinite_activity(p.alpha_minus, p.beta_minus)
                     ? activity::infinite
                     : activity::finite;
    c.variation = side_finite_variation(p.alpha_plus, p.beta_plus) &&
                          side_finite_variation(p.alpha_minus, p.beta_minus)
                      ? variation::finite
                      : variation::infinite;
    return c;
}

/// n-th cumulant (n = 1..4), from the closed-form derivatives of psi at 0.
inline double cumulant(const gts_params& p, int n) {
    if (n < 1 || n > 4) throw domain_error("DomainError", "cumulant order must be in 1..4");
    const double nn = n;
    const double plus = p.alpha_plus * std::tgamma(nn - p.beta_plus) * std::pow(p.lambda_plus, p.beta_plus - nn);
    const double minus =
        p.alpha_minus * std::tgamma(nn - p.beta_minus) * std::pow(p.lambda_minus, p.beta_minus - nn);
    if (n == 1) return p.mu + plus - minus;
    return n % 2 == 0 ? plus + minus : plus - minus;
}

inline double mean(const gts_params& p) { return cumulant(p, 1); }
inline double variance(const gts_params& p) { return cumulant(p, 2); }

} // namespace gts
