// Compares the tails of two GTS laws with each other and with their
// moment-matched Normals.
//
//   tail_comparison data/btc.params data/eth.params

#include <cstdio>
#include <fstream>
#include <iostream>

#include "gts/gts.hpp"

namespace {

gts::gts_params load(const char* path) {
    std::ifstream in(path);
    if (!in) throw gts::io_error("IoError", std::string("cannot open ") + path);
    return gts::read_params(in);
}

} // namespace

int main(int argc, char** argv) {
    const char* a_path = argc > 1 ? argv[1] : "data/btc.params";
    const char* b_path = argc > 2 ? argv[2] : "data/eth.params";
    try {
        const auto a = load(a_path);
        const auto b = load(b_path);
        const auto ta = gts::build_cdf_table(a, gts::build_grid(a));
        const auto tb = gts::build_cdf_table(b, gts::build_grid(b));
        const auto na = gts::cumulant_matched_normal(a);
        const auto nb = gts::cumulant_matched_normal(b);

        std::printf("%-8s %12s %12s %12s %12s\n", "alpha", "A", "Normal(A)", "B", "Normal(B)");
        for (double p : {1e-4, 1e-3, 0.01, 0.05, 0.5, 0.95, 0.99, 0.999, 0.9999}) {
            std::printf("%-8g %12.4f %12.4f %12.4f %12.4f\n", p, gts::quantile(ta, p),
                        gts::normal_quantile(na.mean, na.sd, p), gts::quantile(tb, p),
                        gts::normal_quantile(nb.mean, nb.sd, p));
        }

        // law-versus-law Q-Q: B on the vertical axis against A
        const auto q = gts::qq_points([&](double p) { return gts::quantile(tb, p); },
                                      [&](double p) { return gts::quantile(ta, p); }, a, 999);
        const auto v = gts::tail_verdict(q);
        std::printf("\nB against A: lower tail %s, upper tail %s (%s)\n", gts::to_string(v.lower),
                    gts::to_string(v.upper), gts::to_string(v.shape));
    } catch (const gts::error& e) {
        std::cerr << e.what() << '\n';
        return gts::exit_code(e);
    }
    return 0;
}
