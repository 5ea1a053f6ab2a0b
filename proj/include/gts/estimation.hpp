#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "gts/error.hpp"
#include "gts/exponent.hpp"
#include "gts/params.hpp"
#include "gts/quantile.hpp"
#include "gts/returns.hpp"
#include "gts/special.hpp"
#include "gts/spectral.hpp"

namespace gts {

inline constexpr double density_floor = 1e-300;

// ---------------------------------------------------------------------------
// Likelihood
// ---------------------------------------------------------------------------

/// Sum of log densities on a fixed grid. Observations outside the grid raise
/// OutOfGrid; the density is floored at 1e-300 before the log.
inline double log_likelihood(const gts_params& p, const return_series& data, const spectral_grid& g,
                             bool strict = true) {
    if (data.empty()) throw domain_error("TooShort", "likelihood needs at least one observation");
    std::vector<double> outside;
    for (double x : data.values) {
        if (!g.contains(x)) outside.push_back(x);
    }
    if (!outside.empty()) {
        std::string list;
        for (std::size_t k = 0; k < std::min<std::size_t>(outside.size(), 5); ++k) {
            list += (k ? ", " : "") + detail::format_double(outside[k]);
        }
        throw domain_error("OutOfGrid", std::to_string(outside.size()) + " observation(s) outside the grid: " + list);
    }
    // Non-strict tables skip the mass and sign checks: a narrow likelihood grid
    // loses tail mass and picks up ~1e-9 quadrature ripple at its edges, neither
    // of which matters once densities are clamped and floored.
    const density_table f = build_pdf_table(p, g, strict);
    double sum = 0.0;
    for (double x : data.values) sum += std::log(std::max(f(x), density_floor));
    return sum;
}

inline double log_likelihood(const gts_params& p, const return_series& data, const grid_config& cfg = {}) {
    return log_likelihood(p, data, build_grid(p, cfg));
}

/// Grid settings used inside the optimiser: narrower and coarser than the
/// table defaults, always widened to cover every observation.
inline grid_config likelihood_grid_config(const gts_params& p, const return_series& data, grid_config base) {
    const double k1 = cumulant(p, 1);
    const auto [lo, hi] = std::minmax_element(data.values.begin(), data.values.end());
    const double reach = std::max(std::abs(*lo - k1), std::abs(*hi - k1));
    base.min_half_width = std::max(base.min_half_width, 1.05 * reach + 1.0);
    return base;
}

// ---------------------------------------------------------------------------
// Parameter transforms for unconstrained search
// ---------------------------------------------------------------------------

namespace detail {

enum class coord_type { location, index, positive };

inline std::vector<coord_type> coord_types(model_kind k) {
    using C = coord_type;
    switch (k) {
        case model_kind::full: return {C::location, C::index, C::index, C::positive, C::positive, C::positive, C::positive};
        case model_kind::kobol: return {C::location, C::index, C::positive, C::positive, C::positive, C::positive};
        case model_kind::cgmy: return {C::location, C::index, C::positive, C::positive, C::positive};
        case model_kind::bilateral_gamma: return {C::location, C::positive, C::positive, C::positive, C::positive};
    }
    return {};
}

inline double to_unconstrained(coord_type t, double v) {
    switch (t) {
        case coord_type::location: return v;
        case coord_type::index: return std::log(v / (1.0 - v));
        case coord_type::positive: return std::log(v);
    }
    return v;
}

inline double from_unconstrained(coord_type t, double u) {
    switch (t) {
        case coord_type::location: return u;
        case coord_type::index: return 1.0 / (1.0 + std::exp(-u));
        case coord_type::positive: return std::exp(u);
    }
    return u;
}

/// d(natural)/d(unconstrained)
inline double jacobian(coord_type t, double natural) {
    switch (t) {
        case coord_type::location: return 1.0;
        case coord_type::index: return natural * (1.0 - natural);
        case coord_type::positive: return natural;
    }
    return 1.0;
}

/// Which of the seven natural parameters each free coordinate drives.
inline std::vector<std::vector<int>> coord_targets(model_kind k) {
    switch (k) {
        case model_kind::full: return {{0}, {1}, {2}, {3}, {4}, {5}, {6}};
        case model_kind::kobol: return {{0}, {1, 2}, {3}, {4}, {5}, {6}};
        case model_kind::cgmy: return {{0}, {1, 2}, {3}, {4}, {5, 6}};
        case model_kind::bilateral_gamma: return {{0}, {3}, {4}, {5}, {6}};
    }
    return {};
}

} // namespace detail

struct parameter_map {
    model_kind kind = model_kind::full;

    std::vector<double> encode(const gts_params& p) const {
        const auto types = detail::coord_types(kind);
        auto free = free_parameters(kind, p);
        for (std::size_t i = 0; i < free.size(); ++i) {
            double v = free[i];
            if (types[i] == detail::coord_type::index) v = std::clamp(v, 1e-6, 1.0 - 1e-6);
            free[i] = detail::to_unconstrained(types[i], v);
        }
        return free;
    }

    /// Throws domain_error if the decoded point leaves the parameter domain
    /// (e.g. a logistic saturating to exactly 1).
    gts_params decode(std::span<const double> u) const {
        const auto types = detail::coord_types(kind);
        std::vector<double> free(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) free[i] = detail::from_unconstrained(types[i], u[i]);
        return restricted_model(kind, free);
    }
};

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

struct simplex_options {
    double initial_step = 0.25;
    double ftol = 1e-8;          // relative spread of function values over the simplex
    std::size_t max_evals = 4000;
    int restarts = 2;            // re-seed the simplex at the best vertex after convergence
};

struct simplex_result {
    std::vector<double> x;
    double fx = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    bool converged = false;
};

/// Minimises f with the adaptive-coefficient Nelder-Mead simplex.
/// Non-finite values are treated as +inf (infeasible).
inline simplex_result nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                  const simplex_options& opt = {}) {
    const std::size_t n = x0.size();
    const double dn = static_cast<double>(n);
    const double c_reflect = 1.0, c_expand = 1.0 + 2.0 / dn, c_contract = 0.75 - 0.5 / dn, c_shrink = 1.0 - 1.0 / dn;

    simplex_result best;
    auto eval = [&](const std::vector<double>& x) {
        ++best.evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<double> start = std::move(x0);
    double step = opt.initial_step;
    for (int round = 0; round <= opt.restarts; ++round) {
        std::vector<std::vector<double>> pts(n + 1, start);
        for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
        std::vector<double> fv(n + 1);
        for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

        bool converged = false;
        std::vector<std::size_t> order(n + 1);
        while (best.evals < opt.max_evals) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t lo = order.front(), hi = order.back(), nh = order[n - 1];
            const double spread = fv[hi] - fv[lo];
            if (std::isfinite(fv[hi]) && spread <= opt.ftol * std::max(1.0, std::abs(fv[lo]))) {
                converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == hi) continue;
                for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / dn;
            }
            const auto along = [&](double t) {
                std::vector<double> y(n);
                for (std::size_t d = 0; d < n; ++d) y[d] = centroid[d] + t * (pts[hi][d] - centroid[d]);
                return y;
            };

            auto xr = along(-c_reflect);
            const double fr = eval(xr);
            if (fr < fv[lo]) {
                auto xe = along(-c_reflect * c_expand);
                const double fe = eval(xe);
                if (fe < fr) {
                    pts[hi] = std::move(xe);
                    fv[hi] = fe;
                } else {
                    pts[hi] = std::move(xr);
                    fv[hi] = fr;
                }
                continue;
            }
            if (fr < fv[nh]) {
                pts[hi] = std::move(xr);
                fv[hi] = fr;
                continue;
            }
            const bool outside = fr < fv[hi];
            auto xc = along(outside ? -c_reflect * c_contract : c_contract);
            const double fc = eval(xc);
            if (fc < std::min(fr, fv[hi])) {
                pts[hi] = std::move(xc);
                fv[hi] = fc;
                continue;
            }
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == lo) continue;
                for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[lo][d] + c_shrink * (pts[i][d] - pts[lo][d]);
                fv[i] = eval(pts[i]);
            }
        }

        const auto lo = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
        const bool improved = fv[lo] < best.fx - opt.ftol * std::max(1.0, std::abs(fv[lo]));
        if (fv[lo] < best.fx) {
            best.fx = fv[lo];
            best.x = pts[lo];
        }
        best.converged = converged;
        if (!converged || (round > 0 && !improved)) break;
        start = best.x;
        step *= 0.5;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct fit_options {
    model_kind kind = model_kind::full;
    std::optional<gts_params> init;          // auto-initialised when empty
    std::vector<gts_params> extra_starts;    // appended after the jittered starts
    int starts = 5;
    std::uint64_t seed = 20240704;
    double jitter = 0.3;                     // sd of start perturbations, unconstrained coordinates
    int threads = 1;
    simplex_options simplex{};
    // Likelihood grids tolerate a slower cf decay than published tables: small
    // alpha with beta = 0 decays like a power law, and refusing those points
    // would wall off part of the bilateral gamma family.
    grid_config grid{.m = std::size_t{1} << 13, .width_sds = 16.0, .fail_eps = 1e-2};
    bool compute_standard_errors = true;
    double hessian_rel_step = 1e-4;
};

struct standard_error_result {
    std::array<double, 7> std_errors{};
    std::array<double, 7> z_pvalues{};
    double hessian_asymmetry = 0.0;  // max |H_ij - H_ji| / max |H|
    bool singular = false;           // pseudo-inverse used
};

struct fit_result {
    gts_params params;
    model_kind kind = model_kind::full;
    double loglik = -std::numeric_limits<double>::infinity();
    std::array<double, 7> std_errors{};
    std::array<double, 7> z_pvalues{};
    double aic = 0.0;
    double bic = 0.0;
    std::size_t n_obs = 0;
    int n_free = 7;
    bool converged = false;
    bool hessian_singular = false;
    double hessian_asymmetry = 0.0;
    std::size_t evaluations = 0;
};

struct information {
    double aic = 0.0;
    double bic = 0.0;
};

inline information information_criteria(double loglik, int n_free, std::size_t n_obs) {
    return {2.0 * n_free - 2.0 * loglik, n_free * std::log(static_cast<double>(n_obs)) - 2.0 * loglik};
}

inline information information_criteria(const fit_result& f) { return information_criteria(f.loglik, f.n_free, f.n_obs); }

/// Two-sided normal p-value of estimate / stderr. A parameter pinned at zero
/// with zero error reports p = 1.
inline double z_pvalue(double estimate, double stderr_) {
    if (stderr_ == 0.0) return estimate == 0.0 ? 1.0 : 0.0;
    return two_sided_pvalue(estimate / stderr_);
}

struct normal_fit {
    double mean = 0.0;
    double sd = 0.0;  // maximum-likelihood (divisor n)
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    std::size_t n_obs = 0;
    static constexpr int n_free = 2;
};

inline normal_fit fit_normal(const return_series& data) {
    if (data.size() < 2) throw domain_error("TooShort", "normal fit needs at least two observations");
    std::vector<double> v = data.values;
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    normal_fit r;
    r.n_obs = v.size();
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / n);
    if (!(r.sd > 0.0)) throw domain_error("DegenerateData", "sample variance is zero");
    r.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * r.sd * r.sd) + 1.0);
    const auto ic = information_criteria(r.loglik, normal_fit::n_free, r.n_obs);
    r.aic = ic.aic;
    r.bic = ic.bic;
    return r;
}

namespace detail {

inline double sorted_quantile(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] + t * (v[i + 1] - v[i]) : v.back();
}

inline double standard_normal_draw(std::mt19937_64& rng) {
    const double u1 = open_unit_uniform(rng());
    const double u2 = open_unit_uniform(rng());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace detail

/// Moment-flavoured starting point: mu = median, beta = 0.5 (0 for bilateral
/// gamma), lambdas from the 1%/99% quantile distances to the median, alpha
/// matched to the sample variance.
inline gts_params auto_init(const return_series& data, model_kind kind) {
    std::vector<double> v = data.values;
    std::sort(v.begin(), v.end());
    const double med = detail::sorted_quantile(v, 0.5);
    const double lo = std::max(med - detail::sorted_quantile(v, 0.01), 1e-6);
    const double hi = std::max(detail::sorted_quantile(v, 0.99) - med, 1e-6);
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / (n - 1.0);

    const double beta = kind == model_kind::bilateral_gamma ? 0.0 : 0.5;
    constexpr double tail_scale = 3.0;  // ~ ln(20): 1% quantile sits a few decay lengths out
    double lam_plus = tail_scale / hi;
    double lam_minus = tail_scale / lo;
    if (kind == model_kind::cgmy) lam_plus = lam_minus = 0.5 * (lam_plus + lam_minus);
    const double g = std::tgamma(2.0 - beta);
    const double alpha = var / (g * (std::pow(lam_plus, beta - 2.0) + std::pow(lam_minus, beta - 2.0)));
    return validate_params(med, beta, beta, alpha, alpha, lam_plus, lam_minus);
}

/// Objective wrapper: negative log-likelihood over unconstrained coordinates,
/// with the grid re-derived from each candidate so the value is a pure
/// function of the point.
class likelihood_objective {
public:
    likelihood_objective(const return_series& data, model_kind kind, grid_config grid)
        : map_{kind}, grid_(grid) {
        sorted_.values = data.values;
        std::sort(sorted_.values.begin(), sorted_.values.end());
    }

    double operator()(std::span<const double> u) const {
        try {
            const auto p = map_.decode(u);
            const auto g = build_grid(p, likelihood_grid_config(p, sorted_, grid_));
            return -log_likelihood(p, sorted_, g, false);
        } catch (const error&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    /// Same, on a grid frozen by the caller (used for finite differences).
    double on_grid(std::span<const double> u, const spectral_grid& g) const {
        return -log_likelihood(map_.decode(u), sorted_, g, false);
    }

    spectral_grid grid_for(const gts_params& p) const {
        return build_grid(p, likelihood_grid_config(p, sorted_, grid_));
    }

    const parameter_map& map() const { return map_; }
    const return_series& sorted_data() const { return sorted_; }

private:
    parameter_map map_;
    grid_config grid_;
    return_series sorted_;
};

/// Asymptotic standard errors from the inverse Hessian of -loglik in the
/// unconstrained coordinates, mapped to natural parameters by the delta method.
/// Column j is the central difference (outer step 2h_j) of central-difference
/// gradients (inner step h_i), so H_ij and H_ji come from different stencils and
/// their mismatch is a genuine accuracy diagnostic.
inline standard_error_result standard_errors(const gts_params& estimate, model_kind kind, const return_series& data,
                                             const fit_options& opt = {}) {
    const likelihood_objective obj(data, kind, opt.grid);
    const auto& map = obj.map();
    const auto u0 = map.encode(estimate);
    const std::size_t n = u0.size();
    const auto g = obj.grid_for(estimate);

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = opt.hessian_rel_step * std::max(1.0, std::abs(u0[i]));

    const auto gradient_at = [&](const std::vector<double>& u) {
        std::vector<double> grad(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto up = u, dn = u;
            up[i] += h[i];
            dn[i] -= h[i];
            grad[i] = (obj.on_grid(up, g) - obj.on_grid(dn, g)) / (2.0 * h[i]);
        }
        return grad;
    };

    Eigen::MatrixXd H(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        auto up = u0, dn = u0;
        up[j] += 2.0 * h[j];
        dn[j] -= 2.0 * h[j];
        const auto gp = gradient_at(up);
        const auto gm = gradient_at(dn);
        for (std::size_t i = 0; i < n; ++i) H(i, j) = (gp[i] - gm[i]) / (4.0 * h[j]);
    }

    standard_error_result r;
    const double scale = H.cwiseAbs().maxCoeff();
    r.hessian_asymmetry = scale > 0.0 ? (H - H.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    const Eigen::MatrixXd Hs = 0.5 * (H + H.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Hs);
    const auto& ev = eig.eigenvalues();
    const double cutoff = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd inv_ev(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (ev(i) > cutoff) {
            inv_ev(i) = 1.0 / ev(i);
        } else {
            inv_ev(i) = 0.0;
            r.singular = true;
        }
    }
    const Eigen::MatrixXd cov_u = eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().transpose();

    const auto types = detail::coord_types(kind);
    const auto targets = detail::coord_targets(kind);
    const auto free = free_parameters(kind, estimate);
    const auto natural = estimate.to_array();
    r.std_errors.fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double jac = detail::jacobian(types[i], free[i]);
        const double se = std::sqrt(std::max(cov_u(i, i), 0.0)) * jac;
        for (int t : targets[i]) r.std_errors[t] = se;
    }
    for (std::size_t k = 0; k < 7; ++k) r.z_pvalues[k] = z_pvalue(natural[k], r.std_errors[k]);
    return r;
}

/// Maximum-likelihood fit by multi-start Nelder-Mead in unconstrained
/// coordinates (logit for beta, log for alpha and lambda). Start 0 is the
/// supplied or auto-initialised point; starts 1.. are seeded jitters of it.
inline fit_result fit_mle(const return_series& data, const fit_options& opt = {}) {
    constexpr std::size_t min_obs = 100;
    if (data.size() < min_obs) {
        throw domain_error("TooShort", "fitting needs at least " + std::to_string(min_obs) + " observations");
    }
    const auto s = summary_stats(data);
    if (!(s.sd > 0.0)) throw domain_error("DegenerateData", "sample variance is zero");

    const likelihood_objective obj(data, opt.kind, opt.grid);
    const auto& map = obj.map();
    const gts_params init = opt.init ? *opt.init : auto_init(obj.sorted_data(), opt.kind);
    const auto u_init = map.encode(init);

    std::vector<std::vector<double>> starts{u_init};
    for (int sidx = 1; sidx < opt.starts; ++sidx) {
        std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(sidx));
        auto u = u_init;
        for (double& c : u) c += opt.jitter * detail::standard_normal_draw(rng);
        starts.push_back(std::move(u));
    }
    for (const auto& extra : opt.extra_starts) starts.push_back(map.encode(extra));

    const auto objective = [&obj](std::span<const double> u) { return obj(u); };
    std::vector<simplex_result> runs(starts.size());
    const auto run = [&](std::size_t i) { runs[i] = nelder_mead(objective, starts[i], opt.simplex); };
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opt.threads, 1)), 1, starts.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < starts.size(); ++i) run(i);
    } else {
        // Static round-robin assignment; results are stored by start index.
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < starts.size(); i += workers) run(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Best of all starts; ties resolved by start index.
    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].fx < runs[best].fx) best = i;
    }

    fit_result r;
    r.kind = opt.kind;
    r.n_obs = data.size();
    r.n_free = free_parameter_count(opt.kind);
    for (const auto& rr : runs) r.evaluations += rr.evals;
    if (!std::isfinite(runs[best].fx)) throw numerical_error("NonConvergence", "no start produced a finite likelihood");
    r.params = map.decode(runs[best].x);
    r.loglik = -runs[best].fx;
    r.converged = runs[best].converged;
    const auto ic = information_criteria(r);
    r.aic = ic.aic;
    r.bic = ic.bic;
    r.std_errors.fill(std::numeric_limits<double>::quiet_NaN());
    r.z_pvalues.fill(std::numeric_limits<double>::quiet_NaN());
    if (opt.compute_standard_errors && r.converged) {
        const auto se = standard_errors(r.params, opt.kind, data, opt);
        r.std_errors = se.std_errors;
        r.z_pvalues = se.z_pvalues;
        r.hessian_asymmetry = se.hessian_asymmetry;
        r.hessian_singular = se.singular;
    }
    return r;
}

inline void write_fit_json(std::ostream& out, const fit_result& f) {
    const auto num = [](double v) { return std::isfinite(v) ? detail::format_double(v) : std::string("null"); };
    const auto arr = [&](const std::array<double, 7>& a) {
        std::string s = "{";
        for (std::size_t i = 0; i < 7; ++i) s += (i ? ", \"" : "\"") + std::string(param_names[i]) + "\": " + num(a[i]);
        return s + "}";
    };
    out << "{\n"
        << "  \"model\": \"" << to_string(f.kind) << "\",\n"
        << "  \"params\": " << arr(f.params.to_array()) << ",\n"
        << "  \"std_errors\": " << arr(f.std_errors) << ",\n"
        << "  \"z_pvalues\": " << arr(f.z_pvalues) << ",\n"
        << "  \"loglik\": " << num(f.loglik) << ",\n"
        << "  \"aic\": " << num(f.aic) << ",\n"
        << "  \"bic\": " << num(f.bic) << ",\n"
        << "  \"n_obs\": " << f.n_obs << ",\n"
        << "  \"n_free\": " << f.n_free << ",\n"
        << "  \"converged\": " << (f.converged ? "true" : "false") << ",\n"
        << "  \"hessian_singular\": " << (f.hessian_singular ? "true" : "false") << ",\n"
        << "  \"hessian_asymmetry\": " << num(f.hessian_asymmetry) << ",\n"
        << "  \"evaluations\": " << f.evaluations << "\n"
        << "}\n";
}

} // namespace gts
