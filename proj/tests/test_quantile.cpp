#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gts/oracle.hpp"
#include "gts/quantile.hpp"
#include "gts/returns.hpp"

using Catch::Matchers::WithinAbs;

namespace {

const gts::cdf_table& table(int which) {
    static const auto make = [](const gts::gts_params& p) { return gts::build_cdf_table(p, gts::build_grid(p)); };
    static const auto btc = make(fixtures::btc());
    static const auto eth = make(fixtures::eth());
    static const auto sym = make(fixtures::symmetric());
    return which == 0 ? btc : which == 1 ? eth : sym;
}

const double levels[] = {1e-4, 1e-3, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999, 0.9999};

double bisect(const gts::quartic_coeffs& q, double lo, double hi, int steps) {
    const bool neg_lo = q(lo) < 0.0;
    for (int i = 0; i < steps; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((q(mid) < 0.0) == neg_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("quartic solver", "[quartic]") {
    CHECK_THAT(gts::solve_quartic_unit({{-0.25, 0.5, 0, 0, 0}}).y, WithinAbs(0.5, 1e-15));
    CHECK_THAT(gts::solve_quartic_unit({{-0.0625, 0, 0, 0, 1}}).y, WithinAbs(0.5, 1e-15));
    CHECK_THROWS_AS(gts::solve_quartic_unit({{1, 1, 0, 0, 0}}), gts::numerical_error);

    // brackets taken from a real table: equals 2000-step bisection
    const auto& t = table(0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t i = 4000 + static_cast<std::size_t>(u(rng) * 8000);
        gts::quartic_coeffs q{t.bracket_polynomial(i)};
        const double target = t.values[i] + u(rng) * (t.values[i + 1] - t.values[i]);
        q.b[0] -= target;
        const auto r = gts::solve_quartic_unit(q);
        CHECK_THAT(r.y, WithinAbs(bisect(q, 0.0, 1.0, 2000), 1e-12));
        CHECK(std::abs(r.residual) <= 1e-12);
        CHECK_FALSE(r.multiple_roots);
    }
}

TEST_CASE("quartic solver picks the root nearest the linear seed", "[quartic]") {
    // (y - 0.1)(y - 0.5)(y - 0.9) has three roots; the seed f0 / (f0 - f1) = 0.5
    const gts::quartic_coeffs q{{-0.045, 0.59, -1.5, 1.0, 0.0}};
    const auto r = gts::solve_quartic_unit(q);
    CHECK(r.multiple_roots);
    CHECK_THAT(r.y, WithinAbs(0.5, 1e-12));
}

TEST_CASE("quantile round trip", "[quantile]") {
    for (int which : {0, 1}) {
        const auto& t = table(which);
        double prev = -INFINITY;
        for (double a : levels) {
            const auto q = gts::quantile_detail(t, a);
            CHECK(std::abs(t(q.x_alpha) - a) <= 1e-8);
            CHECK(std::abs(q.residual) <= 1e-12);
            CHECK(q.x_alpha > prev);
            CHECK(t.grid.x(q.bracket) <= q.x_alpha);
            CHECK(q.x_alpha <= t.grid.x(q.bracket + 1));
            prev = q.x_alpha;
        }
    }
}

TEST_CASE("quantile special cases", "[quantile]") {
    CHECK_THAT(gts::quantile(table(2), 0.5), WithinAbs(0.0, 1e-8));

    const auto& t = table(0);
    const std::size_t j = 8100;
    CHECK(gts::quantile(t, t.values[j]) == t.grid.x(j));

    CHECK_THROWS_AS(gts::quantile(t, 0.0), gts::domain_error);
    CHECK_THROWS_AS(gts::quantile(t, 1.0), gts::domain_error);
    CHECK_THROWS_AS(gts::quantile(t, t.values.front()), gts::domain_error);
}

TEST_CASE("extreme quantile matches bisection on the direct oracle", "[quantile][oracle]") {
    const auto p = fixtures::btc();
    const double q = gts::quantile(table(0), 0.001);
    double lo = q - 1.0, hi = q + 1.0;
    REQUIRE(gts::direct_quadrature_oracle(p, lo).cdf < 0.001);
    REQUIRE(gts::direct_quadrature_oracle(p, hi).cdf > 0.001);
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (gts::direct_quadrature_oracle(p, mid).cdf < 0.001 ? lo : hi) = mid;
    }
    CHECK_THAT(q, WithinAbs(0.5 * (lo + hi), 1e-6));
}

TEST_CASE("quartic quantile beats linear interpolation", "[quantile][oracle]") {
    const auto p = fixtures::btc();
    const auto& t = table(0);
    int better = 0, total = 0;
    for (int k = 1; k < 40; ++k) {
        const double a = k / 40.0 + 0.0037;
        const auto q = gts::quantile_detail(t, a);
        const std::size_t i = q.bracket;
        const double lin = t.grid.x(i) + (a - t.values[i]) / (t.values[i + 1] - t.values[i]) * t.grid.dx;
        CHECK(std::abs(q.x_alpha - lin) <= t.grid.dx);
        const double err_q = std::abs(gts::direct_quadrature_oracle(p, q.x_alpha).cdf - a);
        const double err_l = std::abs(gts::direct_quadrature_oracle(p, lin).cdf - a);
        better += err_q < err_l;
        ++total;
    }
    CHECK(better >= 0.95 * total);
}

TEST_CASE("sampling", "[sample]") {
    const auto& t = table(0);
    const auto a = gts::sample(t, 1000, 42);
    const auto b = gts::sample(t, 1000, 42);
    CHECK(a.values == b.values);
    CHECK(gts::sample(t, 1000, 43).values != a.values);
    CHECK_THROWS_AS(gts::sample(t, 0, 1), gts::domain_error);

    // chunking: the first 400 draws of a longer stream are the same draws
    const auto head = gts::sample(t, 400, 42);
    CHECK(std::equal(head.values.begin(), head.values.end(), a.values.begin()));

    const auto p = fixtures::btc();
    const double n = 1e5;
    const auto big = gts::sample(t, static_cast<std::size_t>(n), 2024);
    const auto s = gts::summary_stats(big);
    CHECK(std::abs(s.mean - gts::cumulant(p, 1)) <= 4.0 * std::sqrt(gts::cumulant(p, 2) / n));
    CHECK(std::abs(s.sd * s.sd / gts::cumulant(p, 2) - 1.0) <= 0.05);
}

TEST_CASE("samples pass KS against their own table at the 1% level", "[sample]") {
    const auto& t = table(1);
    const std::size_t n = 100000;
    const double crit = 1.628 / std::sqrt(static_cast<double>(n));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto v = gts::sample(t, n, seed).values;
        std::sort(v.begin(), v.end());
        double d = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double u = t(v[k]);
            d = std::max({d, (k + 1.0) / n - u, u - static_cast<double>(k) / n});
        }
        CHECK(d < crit);
    }
}

TEST_CASE("open unit uniform stays inside (0, 1)", "[sample]") {
    CHECK(gts::open_unit_uniform(0) > 0.0);
    CHECK(gts::open_unit_uniform(~std::uint64_t{0}) < 1.0);
    CHECK(gts::open_unit_uniform(std::uint64_t{1} << 63) == 0.5 + 0x1.0p-53);
}
