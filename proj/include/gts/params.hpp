#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gts/error.hpp"

namespace gts {

// All parameters are expressed in percent log-return units: mu in percent,
// lambda in inverse percent. Tables of fitted crypto returns only make sense
// in these units (lambda around 0.2 per percent).

/// Seven-parameter generalized tempered stable law
/// Y = mu + X+ - X-, with X+/X- one-sided tempered stable subordinators.
struct gts_params {
    double mu = 0.0;
    double beta_plus = 0.0;
    double beta_minus = 0.0;
    double alpha_plus = 1.0;
    double alpha_minus = 1.0;
    double lambda_plus = 1.0;
    double lambda_minus = 1.0;

    friend bool operator==(const gts_params&, const gts_params&) = default;

    std::array<double, 7> to_array() const {
        return {mu, beta_plus, beta_minus, alpha_plus, alpha_minus, lambda_plus, lambda_minus};
    }
};

inline constexpr std::array<std::string_view, 7> param_names = {
    "mu", "beta_plus", "beta_minus", "alpha_plus", "alpha_minus", "lambda_plus", "lambda_minus"};

namespace detail {

inline void require_finite(double v, std::string_view name) {
    if (!std::isfinite(v)) {
        throw domain_error("NonFinite", std::string(name) + " must be finite");
    }
}

inline void require_domain(bool ok, std::string_view name, std::string_view rule) {
    if (!ok) {
        throw domain_error("OutOfDomain", std::string(name) + " violates " + std::string(rule));
    }
}

} // namespace detail

/// Checks the seven raw values against the parameter domain.
/// beta must lie in [0, 1): beta = 1 makes Gamma(-beta) singular.
inline gts_params validate_params(double mu, double beta_plus, double beta_minus, double alpha_plus,
                                  double alpha_minus, double lambda_plus, double lambda_minus) {
    const std::array<double, 7> raw = {mu, beta_plus, beta_minus, alpha_plus, alpha_minus,
                                       lambda_plus, lambda_minus};
    for (std::size_t i = 0; i < raw.size(); ++i) detail::require_finite(raw[i], param_names[i]);

    detail::require_domain(beta_plus >= 0.0 && beta_plus < 1.0, "beta_plus", "0 <= beta < 1");
    detail::require_domain(beta_minus >= 0.0 && beta_minus < 1.0, "beta_minus", "0 <= beta < 1");
    detail::require_domain(alpha_plus > 0.0, "alpha_plus", "alpha > 0");
    detail::require_domain(alpha_minus > 0.0, "alpha_minus", "alpha > 0");
    detail::require_domain(lambda_plus > 0.0, "lambda_plus", "lambda > 0");
    detail::require_domain(lambda_minus > 0.0, "lambda_minus", "lambda > 0");
    return {mu, beta_plus, beta_minus, alpha_plus, alpha_minus, lambda_plus, lambda_minus};
}

inline gts_params validate_params(const gts_params& p) {
    return validate_params(p.mu, p.beta_plus, p.beta_minus, p.alpha_plus, p.alpha_minus,
                           p.lambda_plus, p.lambda_minus);
}

inline gts_params validate_params(std::span<const double, 7> raw) {
    return validate_params(raw[0], raw[1], raw[2], raw[3], raw[4], raw[5], raw[6]);
}

// ---------------------------------------------------------------------------
// Nested sub-families
// ---------------------------------------------------------------------------

enum class model_kind { full, kobol, cgmy, bilateral_gamma };

inline std::string_view to_string(model_kind k) {
    switch (k) {
        case model_kind::full: return "full";
        case model_kind::kobol: return "kobol";
        case model_kind::cgmy: return "cgmy";
        case model_kind::bilateral_gamma: return "bilateral-gamma";
    }
    return "?";
}

inline model_kind parse_model_kind(std::string_view s) {
    if (s == "full" || s == "gts") return model_kind::full;
    if (s == "kobol") return model_kind::kobol;
    if (s == "cgmy") return model_kind::cgmy;
    if (s == "bilateral-gamma" || s == "bilateral_gamma") return model_kind::bilateral_gamma;
    throw domain_error("UnknownModel", "unknown model kind '" + std::string(s) + "'");
}

/// Kobol: a common stability index on both sides.
inline gts_params make_kobol(double mu, double beta, double alpha_plus, double alpha_minus,
                             double lambda_plus, double lambda_minus) {
    return validate_params(mu, beta, beta, alpha_plus, alpha_minus, lambda_plus, lambda_minus);
}

/// CGMY: common stability index and common tempering rate.
inline gts_params make_cgmy(double mu, double beta, double alpha_plus, double alpha_minus,
                            double lambda) {
    return validate_params(mu, beta, beta, alpha_plus, alpha_minus, lambda, lambda);
}

/// Bilateral gamma: both stability indices are zero.
inline gts_params make_bilateral_gamma(double mu, double alpha_plus, double alpha_minus,
                                       double lambda_plus, double lambda_minus) {
    return validate_params(mu, 0.0, 0.0, alpha_plus, alpha_minus, lambda_plus, lambda_minus);
}

inline int free_parameter_count(model_kind k) {
    switch (k) {
        case model_kind::full: return 7;
        case model_kind::kobol: return 6;
        case model_kind::cgmy: return 5;
        case model_kind::bilateral_gamma: return 5;
    }
    return 7;
}

/// Free coordinates of `p` under `k`, in the order used by the make_* constructors.
/// Tied parameters are read from the "plus" side.
inline std::vector<double> free_parameters(model_kind k, const gts_params& p) {
    switch (k) {
        case model_kind::full:
            return {p.mu, p.beta_plus, p.beta_minus, p.alpha_plus, p.alpha_minus, p.lambda_plus,
                    p.lambda_minus};
        case model_kind::kobol:
            return {p.mu, p.beta_plus, p.alpha_plus, p.alpha_minus, p.lambda_plus, p.lambda_minus};
        case model_kind::cgmy:
            return {p.mu, p.beta_plus, p.alpha_plus, p.alpha_minus, p.lambda_plus};
        case model_kind::bilateral_gamma:
            return {p.mu, p.alpha_plus, p.alpha_minus, p.lambda_plus, p.lambda_minus};
    }
    return {};
}

inline gts_params restricted_model(model_kind k, std::span<const double> free) {
    if (static_cast<int>(free.size()) != free_parameter_count(k)) {
        throw domain_error("ArityMismatch", std::string(to_string(k)) + " expects " +
                                                std::to_string(free_parameter_count(k)) +
                                                " free parameters");
    }
    switch (k) {
        case model_kind::full:
            return validate_params(free[0], free[1], free[2], free[3], free[4], free[5], free[6]);
        case model_kind::kobol: return make_kobol(free[0], free[1], free[2], free[3], free[4], free[5]);
        case model_kind::cgmy: return make_cgmy(free[0], free[1], free[2], free[3], free[4]);
        case model_kind::bilateral_gamma:
            return make_bilateral_gamma(free[0], free[1], free[2], free[3], free[4]);
    }
    return {};
}

inline bool satisfies(model_kind k, const gts_params& p) {
    switch (k) {
        case model_kind::full: return true;
        case model_kind::kobol: return p.beta_plus == p.beta_minus;
        case model_kind::cgmy: return p.beta_plus == p.beta_minus && p.lambda_plus == p.lambda_minus;
        case model_kind::bilateral_gamma: return p.beta_plus == 0.0 && p.beta_minus == 0.0;
    }
    return false;
}

// ---------------------------------------------------------------------------
// key=value parameter files
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
    return v;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Reads a parameter file. Blank lines and `#` comments are ignored; all
/// seven canonical keys must appear exactly once.
inline gts_params read_params(std::istream& in) {
    std::array<std::optional<double>, 7> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = line;
        if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
        sv = detail::trim(sv);
        if (sv.empty()) continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw io_error("ParseError", "line " + std::to_string(lineno) + ": expected key=value");
        }
        const auto key = detail::trim(sv.substr(0, eq));
        std::size_t idx = param_names.size();
        for (std::size_t i = 0; i < param_names.size(); ++i) {
            if (param_names[i] == key) idx = i;
        }
        if (idx == param_names.size()) {
            throw io_error("ParseError", "line " + std::to_string(lineno) + ": unknown key '" +
                                             std::string(key) + "'");
        }
        if (values[idx]) {
            throw io_error("ParseError", "line " + std::to_string(lineno) + ": duplicate key '" +
                                             std::string(key) + "'");
        }
        const auto v = detail::parse_double(sv.substr(eq + 1));
        if (!v) {
            throw io_error("ParseError", "line " + std::to_string(lineno) + ": bad number");
        }
        values[idx] = *v;
    }
    std::array<double, 7> raw{};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) throw io_error("ParseError", "missing key '" + std::string(param_names[i]) + "'");
        raw[i] = *values[i];
    }
    return validate_params(std::span<const double, 7>(raw));
}

inline void write_params(std::ostream& out, const gts_params& p) {
    const auto a = p.to_array();
    for (std::size_t i = 0; i < a.size(); ++i) {
        out << param_names[i] << '=' << detail::format_double(a[i]) << '\n';
    }
}

} // namespace gts
