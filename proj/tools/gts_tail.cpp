// gts-tail: command-line front end for the gts library.
//
//   gts-tail eval-cf  --params p.txt --xi 0.5 --xi 1
//   gts-tail pdf      --params p.txt [--x 0 --x 1] [--out pdf.csv]
//   gts-tail cdf      --params p.txt [--x 0] [--out cdf.csv]
//   gts-tail quantile --params p.txt --alpha 0.001 --alpha 0.999
//   gts-tail sample   --params p.txt -n 5000 --seed 7 --out r.csv
//   gts-tail fit      --input r.csv --model kobol --out fit.json
//   gts-tail qq       --input r.csv --theoretical normal --format svg --out qq.svg
//   gts-tail qq       --params eth.txt --theoretical gts --theoretical-params btc.txt --levels 999
//   gts-tail gof      --input r.csv --params p.txt --bins 50
//   gts-tail classify --params p.txt [--input r.csv]
//
// Exit codes: 0 ok, 2 domain/validation, 3 numerical, 4 I/O.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gts/gts.hpp"

namespace {

struct options {
    std::string params_path;
    std::string input_path;
    std::string out_path = "-";
    std::string format;
    std::uint64_t seed = 1;
    std::size_t grid_m = std::size_t{1} << 14;
    double grid_width_sds = 20.0;
    double freq_eps = 1e-12;
    std::size_t levels = 999;
    std::vector<double> alpha;
    std::vector<double> xi;
    std::vector<double> x;
    std::size_t n = 1000;
    std::string model = "full";
    std::string theoretical = "normal";
    std::string theoretical_params_path;
    int threads = 1;
    int starts = 5;
    int bins = 50;
    int fitted = 0;
    double tau_scale = 0.5;
    std::string params_out;
};

// Owns either a file stream or borrows stdin/stdout for "-".
class input_source {
public:
    explicit input_source(const std::string& path) {
        if (path == "-") return;
        file_ = std::make_unique<std::ifstream>(path);
        if (!*file_) throw gts::io_error("IoError", "cannot open '" + path + "' for reading");
    }
    std::istream& get() { return file_ ? *file_ : std::cin; }

private:
    std::unique_ptr<std::ifstream> file_;
};

class output_sink {
public:
    explicit output_sink(const std::string& path) : path_(path) {
        if (path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw gts::io_error("IoError", "cannot open '" + path + "' for writing");
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }
    void finish() {
        get().flush();
        if (!get()) throw gts::io_error("IoError", "write failed on '" + path_ + "'");
    }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
};

gts::gts_params load_params(const std::string& path, const char* flag) {
    if (path.empty()) throw gts::domain_error("MissingArgument", std::string(flag) + " is required");
    input_source in(path);
    return gts::read_params(in.get());
}

gts::return_series load_input(const std::string& path) {
    if (path.empty()) throw gts::domain_error("MissingArgument", "--input is required");
    input_source in(path);
    auto r = gts::load_series_csv(in.get());
    r.label = path;
    return r;
}

gts::grid_config grid_from(const options& o) {
    gts::grid_config g;
    g.m = o.grid_m;
    g.width_sds = o.grid_width_sds;
    g.freq_eps = o.freq_eps;
    return g;
}

std::string format_or(const options& o, const std::string& fallback, std::initializer_list<const char*> allowed) {
    const std::string f = o.format.empty() ? fallback : o.format;
    for (const char* a : allowed) {
        if (f == a) return f;
    }
    throw gts::domain_error("BadFormat", "format '" + f + "' is not supported by this command");
}

std::string num(double v) { return gts::detail::format_double(v); }

void run_eval_cf(const options& o) {
    const auto p = load_params(o.params_path, "--params");
    const auto xs = o.xi.empty() ? std::vector<double>{0.0, 0.5, 1.0} : o.xi;
    format_or(o, "csv", {"csv"});
    output_sink out(o.out_path);
    out.get() << "xi,psi_re,psi_im,cf_re,cf_im\n";
    for (double xi : xs) {
        const auto psi = gts::characteristic_exponent(p, xi);
        const auto cf = gts::characteristic_function(p, xi);
        out.get() << num(xi) << ',' << num(psi.real()) << ',' << num(psi.imag()) << ',' << num(cf.real()) << ','
                  << num(cf.imag()) << '\n';
    }
    out.finish();
}

void run_table(const options& o, bool density) {
    const auto p = load_params(o.params_path, "--params");
    format_or(o, "csv", {"csv"});
    const auto g = gts::build_grid(p, grid_from(o));
    output_sink out(o.out_path);
    if (density) {
        const auto t = gts::build_pdf_table(p, g);
        if (o.x.empty()) {
            gts::write_table_csv(out.get(), g, t.values);
        } else {
            out.get() << "x,value\n";
            for (double x : o.x) out.get() << num(x) << ',' << num(t(x)) << '\n';
        }
    } else {
        const auto t = gts::build_cdf_table(p, g);
        if (o.x.empty()) {
            gts::write_table_csv(out.get(), g, t.values);
        } else {
            out.get() << "x,value\n";
            for (double x : o.x) out.get() << num(x) << ',' << num(t(x)) << '\n';
        }
    }
    out.finish();
}

void run_quantile(const options& o) {
    const auto p = load_params(o.params_path, "--params");
    if (o.alpha.empty()) throw gts::domain_error("MissingArgument", "--alpha is required");
    format_or(o, "csv", {"csv"});
    const auto t = gts::build_cdf_table(p, gts::build_grid(p, grid_from(o)));
    output_sink out(o.out_path);
    out.get() << "alpha,quantile\n";
    for (double a : o.alpha) out.get() << num(a) << ',' << num(gts::quantile(t, a)) << '\n';
    out.finish();
}

void run_sample(const options& o) {
    const auto p = load_params(o.params_path, "--params");
    format_or(o, "csv", {"csv"});
    const auto t = gts::build_cdf_table(p, gts::build_grid(p, grid_from(o)));
    const auto r = gts::sample(t, o.n, o.seed);
    output_sink out(o.out_path);
    gts::write_return_csv(out.get(), r);
    out.finish();
}

void run_fit(const options& o) {
    const auto data = load_input(o.input_path);
    const auto fmt = format_or(o, "json", {"json", "csv"});
    gts::fit_options fo;
    fo.kind = gts::parse_model_kind(o.model);
    fo.seed = o.seed;
    fo.threads = o.threads;
    fo.starts = o.starts;
    if (!o.params_path.empty()) fo.init = load_params(o.params_path, "--params");
    const auto r = gts::fit_mle(data, fo);

    output_sink out(o.out_path);
    if (fmt == "json") {
        gts::write_fit_json(out.get(), r);
    } else {
        out.get() << "parameter,estimate,std_error,p_value\n";
        const auto est = r.params.to_array();
        for (std::size_t i = 0; i < 7; ++i) {
            out.get() << gts::param_names[i] << ',' << num(est[i]) << ',' << num(r.std_errors[i]) << ','
                      << num(r.z_pvalues[i]) << '\n';
        }
        out.get() << "loglik," << num(r.loglik) << ",,\naic," << num(r.aic) << ",,\nbic," << num(r.bic) << ",,\n";
    }
    out.finish();
    if (!o.params_out.empty()) {
        output_sink po(o.params_out);
        gts::write_params(po.get(), r.params);
        po.finish();
    }
    if (!r.converged) std::cerr << "warning: simplex search did not converge; best point reported\n";
}

void run_qq(const options& o) {
    const auto fmt = format_or(o, "csv", {"csv", "svg", "json"});
    const auto cfg = grid_from(o);

    std::optional<gts::return_series> data;
    std::optional<gts::cdf_table> observed_law;
    if (!o.input_path.empty()) {
        data = load_input(o.input_path);
    } else {
        const auto p = load_params(o.params_path, "--params or --input");
        observed_law = gts::build_cdf_table(p, gts::build_grid(p, cfg));
    }

    gts::reference_law law;
    gts::quantile_fn ref_q;
    std::optional<gts::cdf_table> ref_table;
    if (o.theoretical == "normal") {
        gts::normal_law nl;
        if (data) {
            nl = gts::fitted_normal(*data);
        } else {
            nl = gts::cumulant_matched_normal(load_params(o.params_path, "--params"));
        }
        law = nl;
        ref_q = [nl](double a) { return gts::normal_quantile(nl.mean, nl.sd, a); };
    } else if (o.theoretical == "gts") {
        const auto tp = load_params(o.theoretical_params_path, "--theoretical-params");
        law = tp;
        ref_table = gts::build_cdf_table(tp, gts::build_grid(tp, cfg));
        ref_q = [&t = *ref_table](double a) { return gts::quantile(t, a); };
    } else {
        throw gts::domain_error("BadArgument", "--theoretical must be 'normal' or 'gts'");
    }

    gts::qq_data q;
    if (data) {
        q = gts::qq_points(*data, ref_q, law);
    } else {
        q = gts::qq_points([&t = *observed_law](double a) { return gts::quantile(t, a); }, ref_q, law, o.levels);
    }

    output_sink out(o.out_path);
    if (fmt == "csv") {
        gts::write_qq_csv(out.get(), q);
    } else if (fmt == "svg") {
        gts::write_qq_svg(out.get(), q, o.theoretical == "normal" ? "Q-Q plot against Normal" : "Q-Q plot against GTS");
    } else {
        std::optional<gts::tail_verdict_result> v;
        if (q.points.size() >= 50) v = gts::tail_verdict(q, o.tau_scale);
        gts::write_qq_json(out.get(), q, v ? &*v : nullptr);
    }
    out.finish();
}

void run_gof(const options& o) {
    const auto data = load_input(o.input_path);
    const auto p = load_params(o.params_path, "--params");
    const auto fmt = format_or(o, "json", {"json", "csv"});
    const auto t = gts::build_cdf_table(p, gts::build_grid(p, grid_from(o)));
    const auto g = gts::goodness_of_fit(data, t, o.bins, o.fitted);
    output_sink out(o.out_path);
    if (fmt == "json") {
        gts::write_gof_json(out.get(), g);
    } else {
        gts::write_gof_csv(out.get(), g);
    }
    out.finish();
}

void run_classify(const options& o) {
    const auto p = load_params(o.params_path, "--params");
    const auto fmt = format_or(o, "json", {"json", "csv"});
    const auto pc = gts::path_classification(p);
    std::vector<std::string> kinds;
    for (auto k : {gts::model_kind::kobol, gts::model_kind::cgmy, gts::model_kind::bilateral_gamma}) {
        if (gts::satisfies(k, p)) kinds.emplace_back(gts::to_string(k));
    }

    std::optional<gts::tail_verdict_result> v;
    if (!o.input_path.empty()) {
        const auto data = load_input(o.input_path);
        const auto t = gts::build_cdf_table(p, gts::build_grid(p, grid_from(o)));
        const auto q = gts::qq_points(data, [&t](double a) { return gts::quantile(t, a); }, p);
        v = gts::tail_verdict(q, o.tau_scale);
    }

    output_sink out(o.out_path);
    auto& os = out.get();
    if (fmt == "json") {
        os << "{\n  \"activity\": \"" << gts::to_string(pc.activity) << "\",\n  \"variation\": \""
           << gts::to_string(pc.variation) << "\",\n  \"restricted_kinds\": [";
        for (std::size_t i = 0; i < kinds.size(); ++i) os << (i ? ", " : "") << '"' << kinds[i] << '"';
        os << "],\n  \"cumulants\": [";
        for (int n = 1; n <= 4; ++n) os << (n > 1 ? ", " : "") << num(gts::cumulant(p, n));
        os << "]";
        if (v) {
            os << ",\n  \"tail_verdict\": {\"lower\": \"" << gts::to_string(v->lower) << "\", \"upper\": \""
               << gts::to_string(v->upper) << "\", \"shape\": \"" << gts::to_string(v->shape) << "\"}";
        }
        os << "\n}\n";
    } else {
        os << "field,value\nactivity," << gts::to_string(pc.activity) << "\nvariation,"
           << gts::to_string(pc.variation) << '\n';
        for (int n = 1; n <= 4; ++n) os << "kappa" << n << ',' << num(gts::cumulant(p, n)) << '\n';
        for (const auto& k : kinds) os << "restricted_kind," << k << '\n';
        if (v) {
            os << "lower_tail," << gts::to_string(v->lower) << "\nupper_tail," << gts::to_string(v->upper)
               << "\nshape," << gts::to_string(v->shape) << '\n';
        }
    }
    out.finish();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized tempered stable tail analysis"};
    app.require_subcommand(1);
    options o;

    const auto add_params = [&](CLI::App* c) { c->add_option("--params", o.params_path, "parameter file (key=value)"); };
    const auto add_io = [&](CLI::App* c) {
        c->add_option("--out", o.out_path, "output path, '-' for stdout")->capture_default_str();
        c->add_option("--format", o.format, "csv, svg or json (command dependent)");
    };
    const auto add_grid = [&](CLI::App* c) {
        c->add_option("--grid-m", o.grid_m, "grid points, rounded up to a power of two")->capture_default_str();
        c->add_option("--grid-width-sds", o.grid_width_sds, "grid half-width in standard deviations")
            ->capture_default_str();
        c->add_option("--freq-eps", o.freq_eps, "|cf| target at the frequency cutoff")->capture_default_str();
    };

    auto* eval_cf = app.add_subcommand("eval-cf", "characteristic exponent and function");
    add_params(eval_cf);
    add_io(eval_cf);
    eval_cf->add_option("--xi", o.xi, "frequencies (repeatable)");

    auto* pdf = app.add_subcommand("pdf", "density table or values");
    auto* cdf = app.add_subcommand("cdf", "distribution-function table or values");
    for (auto* c : {pdf, cdf}) {
        add_params(c);
        add_io(c);
        add_grid(c);
        c->add_option("--x", o.x, "evaluation points (repeatable); full table when absent");
    }

    auto* quant = app.add_subcommand("quantile", "quantiles from the tabulated distribution function");
    add_params(quant);
    add_io(quant);
    add_grid(quant);
    quant->add_option("--alpha", o.alpha, "probability levels (repeatable)");

    auto* samp = app.add_subcommand("sample", "inverse-CDF sample as a return CSV");
    add_params(samp);
    add_io(samp);
    add_grid(samp);
    samp->add_option("-n", o.n, "sample size")->capture_default_str();
    samp->add_option("--seed", o.seed, "generator seed")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "maximum-likelihood fit");
    fit->add_option("--input", o.input_path, "returns (return column) or prices (date,price)");
    fit->add_option("--params", o.params_path, "optional starting point");
    add_io(fit);
    fit->add_option("--model", o.model, "full, kobol, cgmy or bilateral-gamma")->capture_default_str();
    fit->add_option("--seed", o.seed, "seed for the jittered starts")->capture_default_str();
    fit->add_option("--threads", o.threads, "worker threads for the starts")->capture_default_str();
    fit->add_option("--starts", o.starts, "number of simplex starts")->capture_default_str();
    fit->add_option("--params-out", o.params_out, "also write fitted parameters in key=value form");

    auto* qq = app.add_subcommand("qq", "Q-Q data against a Normal or GTS reference");
    qq->add_option("--input", o.input_path, "observed returns; otherwise --params gives the observed law");
    add_params(qq);
    add_io(qq);
    add_grid(qq);
    qq->add_option("--theoretical", o.theoretical, "normal or gts")->capture_default_str();
    qq->add_option("--theoretical-params", o.theoretical_params_path, "reference GTS parameters");
    qq->add_option("--levels", o.levels, "plotting positions for law-versus-law plots")->capture_default_str();
    qq->add_option("--tau-scale", o.tau_scale, "tail verdict threshold scale")->capture_default_str();

    auto* gof = app.add_subcommand("gof", "KS, Anderson-Darling and chi-squared statistics");
    gof->add_option("--input", o.input_path, "observed returns");
    add_params(gof);
    add_io(gof);
    add_grid(gof);
    gof->add_option("--bins", o.bins, "equiprobable chi-squared bins")->capture_default_str();
    gof->add_option("--fitted", o.fitted, "parameters fitted to this data (reduces chi-squared df)")
        ->capture_default_str();

    auto* classify = app.add_subcommand("classify", "path properties, cumulants and optional tail verdict");
    add_params(classify);
    add_io(classify);
    add_grid(classify);
    classify->add_option("--input", o.input_path, "returns for a tail verdict against the law");
    classify->add_option("--tau-scale", o.tau_scale, "tail verdict threshold scale")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*eval_cf) run_eval_cf(o);
        else if (*pdf) run_table(o, true);
        else if (*cdf) run_table(o, false);
        else if (*quant) run_quantile(o);
        else if (*samp) run_sample(o);
        else if (*fit) run_fit(o);
        else if (*qq) run_qq(o);
        else if (*gof) run_gof(o);
        else if (*classify) run_classify(o);
    } catch (const gts::error& e) {
        std::cerr << "gts-tail: " << e.what() << '\n';
        return gts::exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "gts-tail: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
