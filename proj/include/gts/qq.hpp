#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "gts/error.hpp"
#include "gts/params.hpp"
#include "gts/quantile.hpp"
#include "gts/returns.hpp"
#include "gts/special.hpp"
#include "gts/spectral.hpp"

namespace gts {

struct normal_law {
    double mean = 0.0;
    double sd = 1.0;
};

using reference_law = std::variant<normal_law, gts_params>;

struct qq_point {
    double level = 0.0;
    double theoretical = 0.0;
    double observed = 0.0;
};

struct qq_data {
    std::vector<qq_point> points;
    reference_law reference;
};

using quantile_fn = std::function<double(double)>;

/// Hazen plotting positions (k - 0.5) / n, k = 1..n.
inline std::vector<double> hazen_levels(std::size_t n) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    return p;
}

/// Observed order statistics against reference quantiles at the same levels.
inline qq_data qq_points(const return_series& observed, const quantile_fn& reference_quantile, reference_law law) {
    const std::size_t n = observed.size();
    if (n < 20) throw domain_error("TooShort", "Q-Q analysis needs at least 20 observations");
    std::vector<double> sorted = observed.values;
    std::sort(sorted.begin(), sorted.end());
    const auto levels = hazen_levels(n);
    qq_data q;
    q.reference = std::move(law);
    q.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) q.points.push_back({levels[k], reference_quantile(levels[k]), sorted[k]});
    return q;
}

/// Law-versus-law plot: both coordinates are quantiles at `count` Hazen levels.
inline qq_data qq_points(const quantile_fn& observed_quantile, const quantile_fn& reference_quantile,
                         reference_law law, std::size_t count) {
    if (count < 20) throw domain_error("TooShort", "Q-Q analysis needs at least 20 levels");
    qq_data q;
    q.reference = std::move(law);
    for (double p : hazen_levels(count)) q.points.push_back({p, reference_quantile(p), observed_quantile(p)});
    return q;
}

/// Normal reference for data-driven plots: sample mean and sample sd.
inline normal_law fitted_normal(const return_series& r) {
    const auto s = summary_stats(r);
    if (!(s.sd > 0.0)) throw domain_error("DegenerateData", "constant series has no normal reference");
    return {s.mean, s.sd};
}

inline normal_law cumulant_matched_normal(const gts_params& p) {
    return {cumulant(p, 1), std::sqrt(cumulant(p, 2))};
}

// ---------------------------------------------------------------------------
// Tail verdict
// ---------------------------------------------------------------------------

enum class tail_class { heavier, lighter, comparable };
enum class shape_note { s_shaped, long_tailed, short_tailed, linear };

inline const char* to_string(tail_class t) {
    switch (t) {
        case tail_class::heavier: return "heavier";
        case tail_class::lighter: return "lighter";
        case tail_class::comparable: return "comparable";
    }
    return "?";
}

inline const char* to_string(shape_note s) {
    switch (s) {
        case shape_note::s_shaped: return "S-shaped";
        case shape_note::long_tailed: return "long-tailed";
        case shape_note::short_tailed: return "short-tailed";
        case shape_note::linear: return "linear";
    }
    return "?";
}

struct tail_verdict_result {
    tail_class lower = tail_class::comparable;
    tail_class upper = tail_class::comparable;
    shape_note shape = shape_note::linear;
    double lower_deviation = 0.0;  // mean (observed - theoretical), lowest 1%
    double upper_deviation = 0.0;  // same, highest 1%
    double threshold = 0.0;
};

/// Classifies each tail by the mean signed deviation from X = Y over the
/// extreme 1% of points, against tau = tau_scale * sd(observed) * n^(-1/4).
/// Lower tail below the line / upper tail above it means a heavier tail.
inline tail_verdict_result tail_verdict(const qq_data& q, double tau_scale = 0.5) {
    const std::size_t n = q.points.size();
    if (n < 50) throw domain_error("TooShort", "tail verdict needs at least 5 points per decile");
    const std::size_t c = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(n))));

    double mean = 0.0;
    for (const auto& pt : q.points) mean += pt.observed;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& pt : q.points) ss += (pt.observed - mean) * (pt.observed - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    tail_verdict_result v;
    v.threshold = tau_scale * sd * std::pow(static_cast<double>(n), -0.25);
    for (std::size_t k = 0; k < c; ++k) {
        v.lower_deviation += q.points[k].observed - q.points[k].theoretical;
        v.upper_deviation += q.points[n - 1 - k].observed - q.points[n - 1 - k].theoretical;
    }
    v.lower_deviation /= static_cast<double>(c);
    v.upper_deviation /= static_cast<double>(c);

    const double tau = v.threshold;
    v.lower = v.lower_deviation < -tau ? tail_class::heavier
              : v.lower_deviation > tau ? tail_class::lighter
                                        : tail_class::comparable;
    v.upper = v.upper_deviation > tau ? tail_class::heavier
              : v.upper_deviation < -tau ? tail_class::lighter
                                         : tail_class::comparable;
    if (v.lower == v.upper) {
        v.shape = v.lower == tail_class::heavier   ? shape_note::long_tailed
                  : v.lower == tail_class::lighter ? shape_note::short_tailed
                                                   : shape_note::linear;
    } else {
        v.shape = shape_note::s_shaped;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

struct ks_result {
    double statistic = 0.0;
    double critical_5pct = 0.0;
};

inline ks_result gof_ks(const return_series& observed, const cdf_table& t) {
    const std::size_t n = observed.size();
    if (n < 20) throw domain_error("TooShort", "KS test needs at least 20 observations");
    std::vector<double> x = observed.values;
    std::sort(x.begin(), x.end());
    const double nn = static_cast<double>(n);
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double u = t(x[k]);
        d = std::max({d, static_cast<double>(k + 1) / nn - u, u - static_cast<double>(k) / nn});
    }
    return {d, 1.358 / std::sqrt(nn)};
}

struct chi2_result {
    double statistic = 0.0;
    int df = 0;
    double pvalue = 1.0;
    int bins = 0;
};

/// Pearson chi-squared on equiprobable bins of the reference law. `n_fitted`
/// is subtracted from the degrees of freedom when the law was fitted to the data.
inline chi2_result gof_chi2(const return_series& observed, const cdf_table& t, int bins, int n_fitted = 0) {
    if (bins < 2) throw domain_error("DomainError", "chi-squared needs at least 2 bins");
    const double n = static_cast<double>(observed.size());
    const double expected = n / bins;
    if (expected < 5.0) throw domain_error("BinUnderflow", "expected count per bin is below 5");
    std::vector<double> counts(bins, 0.0);
    for (double x : observed.values) {
        const auto b = static_cast<int>(std::floor(t(x) * bins));
        counts[std::clamp(b, 0, bins - 1)] += 1.0;
    }
    chi2_result r;
    r.bins = bins;
    for (double o : counts) r.statistic += (o - expected) * (o - expected) / expected;
    r.df = bins - 1 - n_fitted;
    if (r.df < 1) throw domain_error("DomainError", "chi-squared degrees of freedom must be at least 1");
    r.pvalue = chi2_survival(r.statistic, r.df);
    return r;
}

/// Anderson-Darling A^2 (statistic only).
inline double gof_ad(const return_series& observed, const cdf_table& t) {
    const std::size_t n = observed.size();
    if (n < 20) throw domain_error("TooShort", "Anderson-Darling needs at least 20 observations");
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = t(observed.values[k]);
    std::sort(u.begin(), u.end());
    constexpr double eps = 1e-12;
    if (u.front() <= eps || u.back() >= 1.0 - eps) {
        throw domain_error("BoundaryObservation", "an observation sits at the edge of the reference support");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        s += (2.0 * static_cast<double>(k) + 1.0) * (std::log(u[k]) + std::log1p(-u[n - 1 - k]));
    }
    return -static_cast<double>(n) - s / static_cast<double>(n);
}

struct gof_report {
    double ks_stat = 0.0;
    double ks_critical_5pct = 0.0;
    double ad_stat = 0.0;
    double chi2_stat = 0.0;
    int chi2_df = 0;
    double chi2_pvalue = 1.0;
    std::size_t n = 0;
};

inline gof_report goodness_of_fit(const return_series& observed, const cdf_table& t, int bins, int n_fitted = 0) {
    gof_report g;
    const auto ks = gof_ks(observed, t);
    const auto chi = gof_chi2(observed, t, bins, n_fitted);
    g.ks_stat = ks.statistic;
    g.ks_critical_5pct = ks.critical_5pct;
    g.ad_stat = gof_ad(observed, t);
    g.chi2_stat = chi.statistic;
    g.chi2_df = chi.df;
    g.chi2_pvalue = chi.pvalue;
    g.n = observed.size();
    return g;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) { return format_double(v); }

inline std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string json_params(const gts_params& p) {
    std::string s = "{";
    const auto a = p.to_array();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ", ";
        s += "\"" + std::string(param_names[i]) + "\": " + fmt17(a[i]);
    }
    return s + "}";
}

inline std::string json_reference(const reference_law& law) {
    if (const auto* nl = std::get_if<normal_law>(&law)) {
        return "{\"law\": \"normal\", \"mean\": " + fmt17(nl->mean) + ", \"sd\": " + fmt17(nl->sd) + "}";
    }
    return "{\"law\": \"gts\", \"params\": " + json_params(std::get<gts_params>(law)) + "}";
}

} // namespace detail

inline void write_qq_csv(std::ostream& out, const qq_data& q) {
    out << "level,theoretical,observed\n";
    for (const auto& pt : q.points) {
        out << detail::fmt17(pt.level) << ',' << detail::fmt17(pt.theoretical) << ',' << detail::fmt17(pt.observed)
            << '\n';
    }
}

/// Self-contained SVG: frame, axis labels, one X = Y <line>, one <circle> per point.
inline void write_qq_svg(std::ostream& out, const qq_data& q, const std::string& title = "Q-Q plot") {
    constexpr double size = 640.0, margin = 60.0;
    double lo = 0.0, hi = 0.0;
    if (!q.points.empty()) {
        lo = std::min(q.points.front().theoretical, q.points.front().observed);
        hi = std::max(q.points.back().theoretical, q.points.back().observed);
        for (const auto& pt : q.points) {
            lo = std::min({lo, pt.theoretical, pt.observed});
            hi = std::max({hi, pt.theoretical, pt.observed});
        }
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double span = size - 2.0 * margin;
    const auto px = [&](double v) { return margin + (v - lo) / (hi - lo) * span; };
    const auto py = [&](double v) { return size - margin - (v - lo) / (hi - lo) * span; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"640\" fill=\"white\"/>\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << span << "\" height=\"" << span
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"320\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    out << "<text x=\"320\" y=\"620\" text-anchor=\"middle\" font-size=\"14\">theoretical quantile (%)</text>\n";
    out << "<text x=\"20\" y=\"320\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 320)\">"
           "observed quantile (%)</text>\n";
    out << "<text x=\"" << margin << "\" y=\"" << size - margin + 18 << "\" font-size=\"11\">" << detail::fmt_px(lo)
        << "</text>\n";
    out << "<text x=\"" << size - margin << "\" y=\"" << size - margin + 18
        << "\" text-anchor=\"end\" font-size=\"11\">" << detail::fmt_px(hi) << "</text>\n";
    out << "<line class=\"reference\" x1=\"" << detail::fmt_px(px(lo)) << "\" y1=\"" << detail::fmt_px(py(lo))
        << "\" x2=\"" << detail::fmt_px(px(hi)) << "\" y2=\"" << detail::fmt_px(py(hi))
        << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
    for (const auto& pt : q.points) {
        out << "<circle class=\"point\" cx=\"" << detail::fmt_px(px(pt.theoretical)) << "\" cy=\""
            << detail::fmt_px(py(pt.observed)) << "\" r=\"2\" fill=\"steelblue\"/>\n";
    }
    out << "</svg>\n";
}

inline void write_qq_json(std::ostream& out, const qq_data& q, const tail_verdict_result* verdict = nullptr) {
    out << "{\n  \"reference\": " << detail::json_reference(q.reference) << ",\n";
    if (verdict) {
        out << "  \"verdict\": {\"lower\": \"" << to_string(verdict->lower) << "\", \"upper\": \""
            << to_string(verdict->upper) << "\", \"shape\": \"" << to_string(verdict->shape)
            << "\", \"lower_deviation\": " << detail::fmt17(verdict->lower_deviation)
            << ", \"upper_deviation\": " << detail::fmt17(verdict->upper_deviation)
            << ", \"threshold\": " << detail::fmt17(verdict->threshold) << "},\n";
    }
    out << "  \"points\": [";
    for (std::size_t k = 0; k < q.points.size(); ++k) {
        const auto& pt = q.points[k];
        out << (k ? ",\n    " : "\n    ") << "[" << detail::fmt17(pt.level) << ", " << detail::fmt17(pt.theoretical)
            << ", " << detail::fmt17(pt.observed) << "]";
    }
    out << "\n  ]\n}\n";
}

inline void write_gof_json(std::ostream& out, const gof_report& g) {
    out << "{\n"
        << "  \"n\": " << g.n << ",\n"
        << "  \"ks_stat\": " << detail::fmt17(g.ks_stat) << ",\n"
        << "  \"ks_critical_5pct\": " << detail::fmt17(g.ks_critical_5pct) << ",\n"
        << "  \"ad_stat\": " << detail::fmt17(g.ad_stat) << ",\n"
        << "  \"chi2_stat\": " << detail::fmt17(g.chi2_stat) << ",\n"
        << "  \"chi2_df\": " << g.chi2_df << ",\n"
        << "  \"chi2_pvalue\": " << detail::fmt17(g.chi2_pvalue) << "\n"
        << "}\n";
}

inline void write_gof_csv(std::ostream& out, const gof_report& g) {
    out << "statistic,value\n"
        << "n," << g.n << "\n"
        << "ks_stat," << detail::fmt17(g.ks_stat) << "\n"
        << "ks_critical_5pct," << detail::fmt17(g.ks_critical_5pct) << "\n"
        << "ad_stat," << detail::fmt17(g.ad_stat) << "\n"
        << "chi2_stat," << detail::fmt17(g.chi2_stat) << "\n"
        << "chi2_df," << g.chi2_df << "\n"
        << "chi2_pvalue," << detail::fmt17(g.chi2_pvalue) << "\n";
}

} // namespace gts
