#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "fixtures.hpp"
#include "gts/qq.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const gts::cdf_table& btc_table() {
    static const auto t = [] {
        const auto p = fixtures::btc();
        return gts::build_cdf_table(p, gts::build_grid(p));
    }();
    return t;
}

gts::return_series plug_in(const gts::cdf_table& t, std::size_t n) {
    gts::return_series r;
    for (double a : gts::hazen_levels(n)) r.values.push_back(gts::quantile(t, a));
    return r;
}

gts::qq_data normal_qq(const std::vector<double>& obs) {
    gts::return_series r{obs, ""};
    return gts::qq_points(r, [](double p) { return gts::standard_normal_quantile(p); }, gts::normal_law{});
}

} // namespace

TEST_CASE("normal quantile", "[special]") {
    // tests/oracles/freeze_values.py
    CHECK_THAT(gts::standard_normal_quantile(0.975), WithinRel(1.9599639845400542355, 1e-14));
    CHECK_THAT(gts::standard_normal_quantile(1e-6), WithinRel(-4.7534243088228989482, 1e-14));
    CHECK(gts::standard_normal_quantile(0.5) == 0.0);
    for (double p : {0x1.0p-33, 0.001, 0.02, 0.3, 0.45}) {
        CHECK_THAT(gts::standard_normal_quantile(p), WithinAbs(-gts::standard_normal_quantile(1.0 - p), 1e-9));
        CHECK_THAT(gts::normal_cdf(gts::standard_normal_quantile(p)), WithinRel(p, 1e-13));
    }
    CHECK_THAT(gts::normal_quantile(2.0, 3.0, 0.975), WithinRel(2.0 + 3.0 * 1.9599639845400542355, 1e-14));
    CHECK_THROWS_AS(gts::standard_normal_quantile(0.0), gts::domain_error);
}

TEST_CASE("regularised upper incomplete gamma", "[special]") {
    struct ref {
        double a, x, q;
    };
    const ref refs[] = {
        {0.5, 0.3, 0.43857802608099985505}, {2.5, 1.0, 0.84914503608460963623},
        {4.5, 12.0, 0.0043013108435008677549}, {10.0, 3.0, 0.99889751186988452026},
        {49.5, 60.0, 0.074243855805966789866},
    };
    for (const auto& r : refs) {
        CHECK_THAT(gts::gamma_q(r.a, r.x), WithinRel(r.q, 1e-12));
        CHECK_THAT(gts::gamma_q(r.a, r.x), WithinRel(boost::math::gamma_q(r.a, r.x), 1e-12));
    }
    CHECK(gts::gamma_q(3.0, 0.0) == 1.0);
    CHECK_THAT(gts::chi2_survival(2.0 * std::log(2.0), 2), WithinAbs(0.5, 1e-15));
    CHECK_THAT(gts::chi2_survival(0.0, 5), WithinAbs(1.0, 1e-15));
}

TEST_CASE("q-q points", "[qq]") {
    std::vector<double> v;
    for (int k = 0; k < 40; ++k) v.push_back(std::sin(k * 1.7));
    const auto q = normal_qq(v);
    REQUIRE(q.points.size() == 40);
    CHECK(q.points.front().level == 0.0125);
    CHECK(q.points.back().level == 0.9875);
    for (std::size_t k = 1; k < 40; ++k) {
        CHECK(q.points[k].observed >= q.points[k - 1].observed);
        CHECK(q.points[k].theoretical > q.points[k - 1].theoretical);
    }

    auto shuffled = v;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto r = normal_qq(shuffled);
    for (std::size_t k = 0; k < 40; ++k) CHECK(r.points[k].observed == q.points[k].observed);

    CHECK_THROWS_AS(normal_qq(std::vector<double>(10, 0.0)), gts::domain_error);
}

TEST_CASE("tail verdict", "[qq]") {
    // observations placed exactly on the reference quantiles
    std::vector<double> exact;
    for (double p : gts::hazen_levels(500)) exact.push_back(gts::standard_normal_quantile(p));
    auto v = gts::tail_verdict(normal_qq(exact));
    CHECK(v.lower == gts::tail_class::comparable);
    CHECK(v.upper == gts::tail_class::comparable);
    CHECK(v.shape == gts::shape_note::linear);

    // stretch the tails outward
    auto heavy = exact;
    for (auto& x : heavy) x *= 1.0 + 0.1 * x * x;
    v = gts::tail_verdict(normal_qq(heavy));
    CHECK(v.lower == gts::tail_class::heavier);
    CHECK(v.upper == gts::tail_class::heavier);
    CHECK(v.shape == gts::shape_note::long_tailed);

    auto light = exact;
    for (auto& x : light) x = std::tanh(x);
    v = gts::tail_verdict(normal_qq(light));
    CHECK(v.lower == gts::tail_class::lighter);
    CHECK(v.upper == gts::tail_class::lighter);
    CHECK(v.shape == gts::shape_note::short_tailed);

    auto skew = exact;
    for (auto& x : skew) x = x < 0.0 ? std::tanh(x) : x * (1.0 + 0.1 * x * x);
    v = gts::tail_verdict(normal_qq(skew));
    CHECK(v.lower == gts::tail_class::lighter);
    CHECK(v.upper == gts::tail_class::heavier);
    CHECK(v.shape == gts::shape_note::s_shaped);

    std::vector<double> short_series(exact.begin(), exact.begin() + 40);
    CHECK_THROWS_AS(gts::tail_verdict(normal_qq(short_series)), gts::domain_error);
}

TEST_CASE("tail verdict is affine equivariant", "[qq]") {
    const auto& t = btc_table();
    const auto data = gts::sample(t, 2000, 5);
    const auto ref = [&](double p) { return gts::quantile(t, p); };
    const auto base = gts::tail_verdict(gts::qq_points(data, ref, fixtures::btc()));

    auto moved = data;
    for (auto& x : moved.values) x = 3.0 * x + 7.0;
    const auto moved_ref = [&](double p) { return 3.0 * gts::quantile(t, p) + 7.0; };
    const auto v = gts::tail_verdict(gts::qq_points(moved, moved_ref, fixtures::btc()));
    CHECK(v.lower == base.lower);
    CHECK(v.upper == base.upper);
    CHECK_THAT(v.lower_deviation, WithinRel(3.0 * base.lower_deviation, 1e-9));
    CHECK_THAT(v.threshold, WithinRel(3.0 * base.threshold, 1e-12));
}

TEST_CASE("kolmogorov-smirnov", "[gof]") {
    const auto& t = btc_table();
    const auto ks = gts::gof_ks(plug_in(t, 200), t);
    CHECK_THAT(ks.statistic, WithinAbs(0.5 / 200.0, 1e-8));
    CHECK_THAT(ks.critical_5pct, WithinRel(1.358 / std::sqrt(200.0), 1e-15));

    gts::return_series point{std::vector<double>(100, gts::quantile(t, 0.5)), ""};
    CHECK(gts::gof_ks(point, t).statistic >= 0.5 - 1.0 / 100.0);
}

TEST_CASE("chi-squared", "[gof]") {
    const auto& t = btc_table();
    const auto c = gts::gof_chi2(plug_in(t, 500), t, 50);
    CHECK(c.statistic == 0.0);
    CHECK(c.df == 49);
    CHECK(c.pvalue == 1.0);
    CHECK(gts::gof_chi2(plug_in(t, 500), t, 50, 7).df == 42);

    try {
        gts::gof_chi2(plug_in(t, 200), t, 50);
        FAIL("expected BinUnderflow");
    } catch (const gts::error& e) {
        CHECK(e.code() == "BinUnderflow");
    }
}

TEST_CASE("anderson-darling", "[gof]") {
    const auto& t = btc_table();
    const auto r = plug_in(t, 100);
    const double a = gts::gof_ad(r, t);
    CHECK(a < 0.4);
    // tests/oracles/freeze_values.py
    CHECK_THAT(a, WithinAbs(0.011495132744090158809, 1e-6));

    auto shifted = r;
    for (auto& x : shifted.values) x += 3.0;
    CHECK(gts::gof_ad(shifted, t) >= 100.0 * a);

    gts::return_series tiny{{0.0, 1.0, 2.0}, ""};
    CHECK_THROWS_AS(gts::gof_ad(tiny, t), gts::domain_error);

    // a table whose lower edge carries no mass puts the stray point at F = 0
    auto zeroed = t;
    zeroed.values.front() = 0.0;
    auto edge = r;
    edge.values[0] = t.grid.x_min - 50.0;
    try {
        gts::gof_ad(edge, zeroed);
        FAIL("expected BoundaryObservation");
    } catch (const gts::error& e) {
        CHECK(e.code() == "BoundaryObservation");
    }
}

TEST_CASE("emitters", "[qq]") {
    std::vector<double> v;
    for (int k = 0; k < 30; ++k) v.push_back(0.1 * k - 1.3);
    const auto q = normal_qq(v);

    std::ostringstream csv;
    gts::write_qq_csv(csv, q);
    std::size_t lines = 0;
    for (char ch : csv.str()) lines += ch == '\n';
    CHECK(lines == 31);

    std::ostringstream again;
    gts::write_qq_csv(again, normal_qq(v));
    CHECK(again.str() == csv.str());

    std::ostringstream svg;
    gts::write_qq_svg(svg, q);
    const auto s = svg.str();
    std::size_t circles = 0, lines_svg = 0;
    for (std::size_t at = s.find("<circle"); at != std::string::npos; at = s.find("<circle", at + 1)) ++circles;
    for (std::size_t at = s.find("class=\"reference\""); at != std::string::npos;
         at = s.find("class=\"reference\"", at + 1)) {
        ++lines_svg;
    }
    CHECK(circles == 30);
    CHECK(lines_svg == 1);

    std::ostringstream svg2;
    gts::write_qq_svg(svg2, q);
    CHECK(svg2.str() == s);
}
