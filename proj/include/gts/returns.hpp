#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gts/error.hpp"
#include "gts/params.hpp"

namespace gts {

/// Returns are percent log returns: r = 100 ln(P_{k+1} / P_k).
inline constexpr double percent_scale = 100.0;

struct price_row {
    std::chrono::year_month_day date;
    double price = 0.0;
    std::string currency;
    int line = 0;  // source line, for diagnostics
};

struct price_series {
    std::vector<price_row> rows;

    /// Number of consecutive rows more than one calendar day apart.
    std::size_t gap_count() const {
        std::size_t gaps = 0;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const auto d0 = std::chrono::sys_days(rows[k - 1].date);
            const auto d1 = std::chrono::sys_days(rows[k].date);
            if ((d1 - d0).count() > 1) ++gaps;
        }
        return gaps;
    }
};

struct return_series {
    std::vector<double> values;
    std::string label;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
};

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::from_chars(s.data(), s.data() + 4, y).ptr != s.data() + 4) return std::nullopt;
    if (std::from_chars(s.data() + 5, s.data() + 7, m).ptr != s.data() + 7) return std::nullopt;
    if (std::from_chars(s.data() + 8, s.data() + 10, d).ptr != s.data() + 10) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

inline void strip_bom(std::string& line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
}

} // namespace detail

/// Reads `date,price[,currency]` CSV. Rows come back sorted by date (stable);
/// duplicate dates and non-positive prices are rejected with their line number.
inline price_series load_price_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw io_error("ParseError", "line 1: empty input");
    detail::strip_bom(line);
    const auto header = detail::split_csv(line);
    if (header.size() < 2 || header[0] != "date" || header[1] != "price") {
        throw io_error("ParseError", "line 1: expected header 'date,price'");
    }

    price_series ps;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv(line);
        const auto where = "line " + std::to_string(lineno);
        if (cells.size() < 2 || cells.size() > 3) throw io_error("ParseError", where + ": expected date,price");
        const auto date = detail::parse_iso_date(cells[0]);
        if (!date) throw io_error("ParseError", where + ": bad ISO-8601 date");
        const auto price = detail::parse_double(cells[1]);
        if (!price || !std::isfinite(*price)) throw io_error("ParseError", where + ": bad price");
        if (*price <= 0.0) throw domain_error("NonPositivePrice", where + ": price must be positive");
        ps.rows.push_back({*date, *price, cells.size() == 3 ? std::string(cells[2]) : std::string{}, lineno});
    }

    std::stable_sort(ps.rows.begin(), ps.rows.end(),
                     [](const price_row& a, const price_row& b) { return a.date < b.date; });
    for (std::size_t k = 1; k < ps.rows.size(); ++k) {
        if (ps.rows[k].date == ps.rows[k - 1].date) {
            throw domain_error("DuplicateDate", "line " + std::to_string(ps.rows[k].line) + ": duplicate date");
        }
    }
    return ps;
}

inline return_series log_returns(const price_series& p) {
    if (p.rows.size() < 2) throw domain_error("TooShort", "log returns need at least two prices");
    return_series r;
    r.values.reserve(p.rows.size() - 1);
    for (std::size_t k = 1; k < p.rows.size(); ++k) {
        r.values.push_back(percent_scale * std::log(p.rows[k].price / p.rows[k - 1].price));
    }
    return r;
}

/// Single-column `return` CSV.
inline return_series load_return_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw io_error("ParseError", "line 1: empty input");
    detail::strip_bom(line);
    if (detail::trim(line) != "return") throw io_error("ParseError", "line 1: expected header 'return'");
    return_series r;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto v = detail::parse_double(line);
        if (!v || !std::isfinite(*v)) {
            throw io_error("ParseError", "line " + std::to_string(lineno) + ": bad return value");
        }
        r.values.push_back(*v);
    }
    return r;
}

/// Accepts either a `return` column or `date,price` rows (converted to returns).
inline return_series load_series_csv(std::istream& in) {
    std::string first;
    std::getline(in, first);
    detail::strip_bom(first);
    const auto trimmed = detail::trim(first);
    const bool prices = trimmed.starts_with("date,price");
    // Re-assemble the stream so the typed loaders see the header.
    std::string rest{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::istringstream again(std::string(trimmed) + "\n" + rest);
    return prices ? log_returns(load_price_csv(again)) : load_return_csv(again);
}

inline void write_return_csv(std::ostream& out, const return_series& r) {
    out << "return\n";
    char buf[40];
    for (double v : r.values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

struct summary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // n - 1 divisor
    std::optional<double> skewness;
    std::optional<double> excess_kurtosis;  // empty when sd == 0
    double min = 0.0;
    double max = 0.0;
};

inline summary summary_stats(const return_series& r) {
    const auto& v = r.values;
    if (v.size() < 2) throw domain_error("TooShort", "summary statistics need at least two observations");
    summary s;
    s.n = v.size();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    s.min = *lo;
    s.max = *hi;
    if (s.min == s.max) {
        s.mean = s.min;
        return s;  // degenerate: sd 0, higher moments undefined
    }
    const double n = static_cast<double>(s.n);
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    s.sd = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return s;
}

} // namespace gts
