#include "nlest/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "nlest/checksum.hpp"
#include "nlest/coefficients.hpp"
#include "nlest/cz.hpp"
#include "nlest/error.hpp"
#include "nlest/experiments.hpp"
#include "nlest/io.hpp"
#include "nlest/operators.hpp"
#include "nlest/random.hpp"
#include "nlest/solver.hpp"

namespace nlest {

namespace fs = std::filesystem;

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int number = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(path + ":" + std::to_string(number) + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw InvalidArgument(path + ":" + std::to_string(number) + ": empty key");
        out.emplace_back(key, value);
    }
    return out;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args,
                                      const std::vector<std::pair<std::string, std::string>>& config)
{
    auto present = [&](const std::string& flag) {
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> out = args;
    for (const auto& [key, value] : config) {
        if (key == "command") continue;
        const std::string flag = "--" + key;
        if (present(flag)) continue;
        out.push_back(flag);
        out.push_back(value);
    }
    return out;
}

namespace {

struct Options {
    // Shared.
    int dim = 1;
    int n_cells = 256;
    std::string sigma;
    double lambda = 1.0;
    double Lambda = 2.0;
    std::uint64_t seed = 1;
    std::string out = "nlest-out";
    std::string config;
    int threads = 0;
    double half_width = 1.0;
    double exterior_radius = 2.0;
    std::string scheme = "moment";
    double tile = 0.125;
    // Experiments.
    int instances = 10;
    std::string coefficients = "checkerboard,random-rotation";
    std::string set_family = "mixed";
    std::string betas = "0.9,0.95,0.99,0.999";
    // Single-shot operations.
    std::string input;
    std::string function = "gaussian";
    double param = 1.0;
    std::string coefficient = "constant";
    std::string f_file;
    std::string g_file;
    double f_constant = 1.0;
    double g_constant = 0.0;
    std::string domain = "ball";
    double domain_radius = 1.0;
    double alpha = 0.5;
    std::string set_file;
    double random_density = 0.1;
    double q_min = 0.25;
    double q_max = 12.0;
    double q_step = 0.25;
    double cap_radius = 0.5;
    std::string verify;
};

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

double parse_real(const std::string& s, const char* what)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw InvalidArgument(std::string("malformed ") + what + " '" + s + "'");
    return v;
}

std::vector<double> parse_reals(const std::string& s, const char* what)
{
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_real(item, what));
    if (out.empty()) throw InvalidArgument(std::string("empty ") + what + " list");
    return out;
}

/// Run manifest: config echo, diagnostics, verdicts; written even on failure.
class Manifest {
public:
    std::string command;
    std::vector<std::pair<std::string, std::string>> echo;
    std::vector<std::pair<std::string, std::string>> info;
    std::vector<Verdict> verdicts;

    std::string checksum() const
    {
        Fnv1a h;
        h.add("command=" + command + "\n");
        for (const auto& [k, v] : echo) h.add(k + "=" + v + "\n");
        return hex64(h.value());
    }

    void write(const std::string& dir, const std::string& status, double seconds) const
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream os(fs::path(dir) / "manifest.txt");
        if (!os) return;
        os << "# nlest run manifest; re-run with --config manifest.txt\n";
        os << "command = " << command << "\n";
        for (const auto& [k, v] : echo) os << k << " = " << v << "\n";
        os << "# code_version = " << kCodeVersion << "\n";
        os << "# manifest_checksum = " << checksum() << "\n";
        for (const auto& [k, v] : info) os << "# " << k << " = " << v << "\n";
        for (const auto& v : verdicts)
            os << "# verdict " << (v.passed ? "PASS " : "FAIL ") << v.rule << ": " << v.detail << "\n";
        os << "# wall_time_seconds = " << format_double(seconds) << "\n";
        os << "# status = " << status << "\n";
    }
};

// Echo of every option registered on the subcommand except bookkeeping ones.
std::vector<std::pair<std::string, std::string>> option_echo(const CLI::App& sub)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config" || name == "out" || name == "threads") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& r = opt->results();
            for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
        } else {
            value = opt->get_default_str();
        }
        out.emplace_back(name, value);
    }
    return out;
}

std::ofstream open_output(const std::string& dir, const std::string& name)
{
    fs::create_directories(dir);
    std::ofstream os(fs::path(dir) / name);
    if (!os) throw InvalidArgument("cannot write '" + name + "' in '" + dir + "'");
    return os;
}

EllipticityParams single_params(const Options& o, double default_sigma)
{
    const std::vector<double> s = o.sigma.empty() ? std::vector<double>{default_sigma} : parse_reals(o.sigma, "sigma");
    if (s.size() != 1) throw InvalidArgument("this command takes a single sigma");
    EllipticityParams p{s[0], o.lambda, o.Lambda};
    p.validate();
    return p;
}

GridSpec grid_from(const Options& o) { return make_grid(o.dim, o.n_cells, o.half_width, o.exterior_radius); }

struct Context {
    Options& o;
    Manifest& m;
    std::ostream& out;
};

int run_eval_dsigma(Context& c)
{
    const Options& o = c.o;
    const EllipticityParams p = single_params(o, 1.0);
    GridFunction u;
    if (!o.input.empty()) {
        u = load_grid_function(o.input);
    } else {
        const GridSpec spec = grid_from(o);
        if (o.function == "gaussian")
            u = sample_function(spec, descriptor::Gaussian{o.param});
        else if (o.function == "bump")
            u = sample_function(spec, descriptor::Bump{});
        else if (o.function == "radial-power")
            u = sample_function(spec, descriptor::RadialPower{o.param});
        else if (o.function == "constant")
            u = sample_function(spec, descriptor::Constant{o.param});
        else
            throw InvalidArgument("unknown function '" + o.function +
                                  "' (expected gaussian, bump, radial-power or constant)");
    }
    const KernelWeights w = build_weights(u.spec(), p.sigma, parse_weight_scheme(o.scheme));
    c.m.info.emplace_back("weights_checksum", hex64(w.checksum()));
    c.m.info.emplace_back("grid", u.spec().describe());
    const SigmaHessian d = eval_sigma_hessian(u, w);
    auto os = open_output(o.out, "dsigma.csv");
    os << "# manifest=" << c.m.checksum() << "\n";
    const bool two = u.spec().dim == 2;
    os << (two ? "x,y,d_xx,d_xy,d_yy" : "x,d_xx") << ",trace,nuclear,pucci_plus,pucci_minus\n";
    for (std::size_t k = 0; k < d.size(); ++k) {
        const Point x = d.point(k);
        const SymMatrix& m = d[k];
        os << format_double(x[0]) << ',';
        if (two) os << format_double(x[1]) << ',';
        os << format_double(m.xx) << ',';
        if (two) os << format_double(m.xy) << ',' << format_double(m.yy) << ',';
        os << format_double(m.trace()) << ',' << format_double(nuclear_norm(m)) << ','
           << format_double(pucci_plus(m, p)) << ',' << format_double(pucci_minus(m, p)) << '\n';
    }
    if (w.tail_warning) c.out << "warning: tail carries more than half of the kernel mass\n";
    c.out << "wrote " << (fs::path(o.out) / "dsigma.csv").string() << "\n";
    return kExitPass;
}

int run_solve(Context& c)
{
    const Options& o = c.o;
    const EllipticityParams p = single_params(o, 1.0);
    const GridSpec spec = grid_from(o);
    const auto fn = coefficient_function(parse_coefficient_family(o.coefficient), spec.dim, p, o.seed, o.tile);
    Region domain;
    if (o.domain == "ball")
        domain = Region::ball(o.domain_radius);
    else if (o.domain == "cube")
        domain = Region::cube(o.domain_radius);
    else
        throw InvalidArgument("unknown domain '" + o.domain + "' (expected ball or cube)");
    const GridFunction f = o.f_file.empty() ? GridFunction::constant(spec, o.f_constant) : load_grid_function(o.f_file);
    const GridFunction g = o.g_file.empty() ? GridFunction::constant(spec, o.g_constant) : load_grid_function(o.g_file);
    if (f.spec() != spec || g.spec() != spec) throw InvalidArgument("data files must match the grid flags");

    auto w = std::make_shared<const KernelWeights>(build_weights(spec, p.sigma, parse_weight_scheme(o.scheme)));
    c.m.info.emplace_back("weights_checksum", hex64(w->checksum()));
    c.m.info.emplace_back("grid", spec.describe());
    c.m.info.emplace_back("domain", domain.describe());
    auto sys = std::make_shared<const OperatorMatrix>(assemble(sample_coefficients(spec, fn), w, domain, p));
    c.m.info.emplace_back("unknowns", std::to_string(sys->size()));
    c.m.info.emplace_back("monotone_certified", sys->monotone_certified ? "yes" : "no");
    c.m.info.emplace_back("min_row_margin", format_double(sys->min_row_margin));
    const FactoredSystem lu(sys);
    const GridFunction u = lu.solve(f, g);
    c.m.info.emplace_back("residual", format_double(lu.last_residual()));
    save_grid_function((fs::path(o.out) / "solution.csv").string(), u, "manifest=" + c.m.checksum());
    c.out << "solved " << sys->size() << " unknowns, residual " << format_double(lu.last_residual()) << "\n";
    return kExitPass;
}

int run_cz(Context& c)
{
    const Options& o = c.o;
    SetIndicator e;
    if (!o.set_file.empty()) {
        e = load_set_indicator(o.set_file);
        if (e.spec().dim != o.dim || e.spec().n_cells != o.n_cells)
            throw InvalidArgument("set file grid (" + e.spec().describe() + ") does not match --dim/--n-cells");
    } else {
        e = SetIndicator(grid_from(o));
        Rng rng(stream_seed(o.seed, 0));
        const int ny = o.dim == 2 ? o.n_cells : 1;
        for (int cj = 0; cj < ny; ++cj)
            for (int ci = 0; ci < o.n_cells; ++ci) e.set(ci, cj, rng.uniform() < o.random_density);
    }
    const CZResult r = cz_decompose(e, o.alpha);
    const CZVerifyReport v = cz_verify(r, e, o.alpha);
    c.m.info.emplace_back("e_cells", std::to_string(r.e_cells));
    c.m.info.emplace_back("kept", std::to_string(r.kept.size()));
    c.m.info.emplace_back("predecessors", std::to_string(r.predecessors.size()));
    c.m.verdicts.push_back({"cz.verify", v.passed(), v.summary()});
    auto os = open_output(o.out, "cz.csv");
    write_cz_result(os, r, e.spec(), "manifest=" + c.m.checksum());
    c.out << "cz: " << r.kept.size() << " kept, " << r.predecessors.size() << " predecessors, "
          << (v.passed() ? "verified" : "verification FAILED") << "\n";
    return v.passed() ? kExitPass : kExitFail;
}

int run_barrier(Context& c)
{
    const Options& o = c.o;
    const EllipticityParams p = single_params(o, 1.0);
    const GridSpec spec = grid_from(o);
    BarrierOptions bo;
    bo.q_min = o.q_min;
    bo.q_max = o.q_max;
    bo.q_step = o.q_step;
    bo.cap_radius = o.cap_radius;
    const BarrierCertificate cert = barrier_construct(spec, p, bo);
    c.m.info.emplace_back("q", format_double(cert.q));
    c.m.info.emplace_back("scale", format_double(cert.scale));
    c.m.info.emplace_back("c_phi", format_double(cert.c_phi));
    c.m.info.emplace_back("min_slack", format_double(cert.min_slack));
    c.m.verdicts.push_back({"barrier.min_slack", cert.min_slack >= -1e-8, format_double(cert.min_slack)});
    c.m.verdicts.push_back({"barrier.c_phi", cert.c_phi > 0.0, format_double(cert.c_phi)});
    c.m.verdicts.push_back({"barrier.support", cert.support_ok, "phi = 0 outside B_{8 sqrt n}"});
    const std::string tag = c.m.checksum();
    {
        auto os = open_output(o.out, "barrier.csv");
        os << "# manifest=" << tag << "\n" << (spec.dim == 2 ? "x,y,phi,psi\n" : "x,phi,psi\n");
        for (std::size_t k = 0; k < spec.node_count(); ++k) {
            const auto [i, j] = spec.unflat(k);
            const Point x = spec.node_point(i, j);
            os << format_double(x[0]) << ',';
            if (spec.dim == 2) os << format_double(x[1]) << ',';
            os << format_double(cert.phi[k]) << ',' << format_double(cert.psi[k]) << '\n';
        }
    }
    auto os = open_output(o.out, "sweep.csv");
    os << "# manifest=" << tag << "\nq,min_slack_outside_b1\n";
    for (const auto& [q, s] : cert.sweep) os << format_double(q) << ',' << format_double(s) << '\n';
    c.out << "barrier q=" << format_double(cert.q) << " c_phi=" << format_double(cert.c_phi)
          << (cert.passed ? " passed" : " FAILED") << "\n";
    return cert.passed ? kExitPass : kExitFail;
}

int run_weights_cache(Context& c)
{
    const Options& o = c.o;
    if (!o.verify.empty()) {
        const KernelWeights w = load_weights(o.verify);
        c.m.info.emplace_back("weights_checksum", hex64(w.checksum()));
        c.out << "ok: " << w.offsets.size() << " offsets, checksum " << hex64(w.checksum()) << "\n";
        return kExitPass;
    }
    const EllipticityParams p = single_params(o, 1.0);
    const KernelWeights w = build_weights(grid_from(o), p.sigma, parse_weight_scheme(o.scheme));
    c.m.info.emplace_back("weights_checksum", hex64(w.checksum()));
    save_weights((fs::path(o.out) / "weights.txt").string(), w);
    c.out << "wrote " << w.offsets.size() << " offsets\n";
    return kExitPass;
}

ExperimentConfig experiment_config(const Options& o)
{
    ExperimentConfig cfg;
    cfg.seed = o.seed;
    cfg.dim = o.dim;
    cfg.n_cells = o.n_cells;
    cfg.sigmas = o.sigma.empty() ? std::vector<double>{1.5} : parse_reals(o.sigma, "sigma");
    cfg.lambda = o.lambda;
    cfg.Lambda = o.Lambda;
    cfg.instances = o.instances;
    cfg.coefficient_families.clear();
    for (const auto& name : split_list(o.coefficients)) cfg.coefficient_families.push_back(parse_coefficient_family(name));
    cfg.set_family = parse_set_family(o.set_family);
    cfg.betas = parse_reals(o.betas, "beta");
    cfg.half_width = o.half_width;
    cfg.exterior_radius = o.exterior_radius;
    cfg.tile = o.tile;
    cfg.scheme = parse_weight_scheme(o.scheme);
    cfg.validate();
    return cfg;
}

int run_experiment(Context& c, const std::function<EstimateReport(const ExperimentConfig&)>& fn)
{
    const ExperimentConfig cfg = experiment_config(c.o);
    for (double s : cfg.sigmas) {
        const KernelWeights w = build_weights(make_grid(cfg.dim, cfg.n_cells, cfg.half_width, cfg.exterior_radius), s, cfg.scheme);
        c.m.info.emplace_back("weights_checksum[sigma=" + format_double(s) + "]", hex64(w.checksum()));
    }
    const EstimateReport r = fn(cfg);
    c.m.verdicts = r.verdicts;
    c.m.info.emplace_back("experiment_seconds", format_double(r.runtime_seconds));
    write_report_tables(r, c.o.out, c.m.checksum());
    for (const auto& v : r.verdicts) c.out << (v.passed ? "PASS " : "FAIL ") << v.rule << ": " << v.detail << "\n";
    return r.passed() ? kExitPass : kExitFail;
}

constexpr const char* kFooter =
    "Config files hold 'key = value' lines named after the long flags (without --);\n"
    "'#' starts a comment and flags given on the command line override the file.\n"
    "A run's manifest.txt is itself a valid config file.\n"
    "Exit codes: 0 pass, 1 verdict failure, 2 usage or config error, 3 numerical failure.";

}  // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args = raw_args;
    Options o;
    CLI::App app{"Nonlocal elliptic estimates: quadrature, solver and experiments", "nlest"};
    app.footer(kFooter);
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        std::function<int(Context&)> run;
    };
    std::vector<Sub> subs;
    auto add = [&](const std::string& name, const std::string& desc, std::function<int(Context&)> run) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--dim", o.dim, "spatial dimension (1 or 2)")->capture_default_str();
        s->add_option("--n-cells", o.n_cells, "cells per axis of the computational box")->capture_default_str();
        s->add_option("--sigma", o.sigma, "order in (0,2); experiments accept a comma list");
        s->add_option("--lambda", o.lambda, "lower ellipticity constant")->capture_default_str();
        s->add_option("--Lambda", o.Lambda, "upper ellipticity constant")->capture_default_str();
        s->add_option("--seed", o.seed, "random seed")->capture_default_str();
        s->add_option("--half-width", o.half_width, "half side of the computational box")->capture_default_str();
        s->add_option("--exterior-radius", o.exterior_radius, "half side of the stored exterior box")->capture_default_str();
        s->add_option("--weights-scheme", o.scheme, "quadrature weights: moment or cell")->capture_default_str();
        s->add_option("--tile", o.tile, "tile width of the coefficient fields")->capture_default_str();
        s->add_option("--out", o.out, "output directory")->capture_default_str();
        s->add_option("--config", o.config, "key = value config file");
        s->add_option("--threads", o.threads, "worker threads (default: all cores)");
        subs.push_back({s, std::move(run)});
        return s;
    };
    auto add_experiment_opts = [&](CLI::App* s) {
        s->add_option("--instances", o.instances, "instance count")->capture_default_str();
        s->add_option("--coefficients", o.coefficients, "comma list of coefficient families")->capture_default_str();
        s->add_option("--set-family", o.set_family, "random-cells, balls, unions or mixed")->capture_default_str();
        s->add_option("--betas", o.betas, "density thresholds for the cube comparison")->capture_default_str();
    };

    auto* s_eval = add("eval-dsigma", "evaluate the sigma-order Hessian of a grid function", run_eval_dsigma);
    s_eval->add_option("--input", o.input, "grid function CSV (overrides --function)");
    s_eval->add_option("--function", o.function, "gaussian, bump, radial-power or constant")->capture_default_str();
    s_eval->add_option("--param", o.param, "function parameter")->capture_default_str();

    auto* s_solve = add("solve", "solve L_A u = -f in a domain with u = g outside", run_solve);
    s_solve->add_option("--coefficient", o.coefficient, "coefficient family")->capture_default_str();
    s_solve->add_option("--f-constant", o.f_constant, "constant source")->capture_default_str();
    s_solve->add_option("--f-file", o.f_file, "source grid function CSV");
    s_solve->add_option("--g-constant", o.g_constant, "constant exterior data")->capture_default_str();
    s_solve->add_option("--g-file", o.g_file, "exterior data grid function CSV");
    s_solve->add_option("--domain", o.domain, "ball or cube")->capture_default_str();
    s_solve->add_option("--domain-radius", o.domain_radius, "domain radius")->capture_default_str();

    auto* s_cz = add("cz", "dyadic decomposition of a cell set", run_cz);
    s_cz->add_option("--alpha", o.alpha, "density threshold in (0,1)")->capture_default_str();
    s_cz->add_option("--set-file", o.set_file, "set indicator CSV (default: random set)");
    s_cz->add_option("--random-density", o.random_density, "cell probability of the random set")->capture_default_str();

    auto* s_bar = add("barrier", "construct and certify the comparison barrier", run_barrier);
    s_bar->add_option("--q-min", o.q_min, "smallest exponent q tried")->capture_default_str();
    s_bar->add_option("--q-max", o.q_max, "largest exponent q tried")->capture_default_str();
    s_bar->add_option("--q-step", o.q_step, "step of the q sweep")->capture_default_str();
    s_bar->add_option("--cap-radius", o.cap_radius, "radius of the quadratic cap")->capture_default_str();

    auto* s_wc = add("weights-cache", "write or verify a quadrature weight cache", run_weights_cache);
    s_wc->add_option("--verify", o.verify, "cache file to load and check");

    add_experiment_opts(add("abp", "ABP-type estimate experiment",
                            [](Context& c) { return run_experiment(c, abp_experiment); }));
    add_experiment_opts(add("potential", "potential estimate experiment",
                            [](Context& c) { return run_experiment(c, potential_experiment); }));
    add_experiment_opts(add("levelset", "level-set tail experiment", [](Context& c) {
        return run_experiment(c, [](const ExperimentConfig& cfg) { return levelset_experiment(cfg, false); });
    }));
    add_experiment_opts(add("weps", "level-set experiment with L^eps ratio columns", [](Context& c) {
        return run_experiment(c, [](const ExperimentConfig& cfg) { return levelset_experiment(cfg, true); });
    }));
    add_experiment_opts(add("localize", "localization experiment",
                            [](Context& c) { return run_experiment(c, localization_experiment); }));

    Manifest manifest;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    CLI::App* chosen = nullptr;
    try {
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] == "--config") {
                args = merge_config(args, read_config_file(args[i + 1]));
                break;
            }
            if (args[i].rfind("--config=", 0) == 0) {
                args = merge_config(args, read_config_file(args[i].substr(9)));
                break;
            }
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    Sub* sub = nullptr;
    for (auto& s : subs)
        if (s.app->parsed()) sub = &s;
    chosen = sub->app;
    manifest.command = chosen->get_name();
    manifest.echo = option_echo(*chosen);
    if (o.threads > 0) omp_set_num_threads(o.threads);
    manifest.info.emplace_back("threads", std::to_string(omp_get_max_threads()));

    Context ctx{o, manifest, out};
    int code = kExitPass;
    std::string status;
    try {
        fs::create_directories(o.out);
        code = sub->run(ctx);
        status = code == kExitPass ? "pass" : "fail";
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        code = kExitUsage;
        status = std::string("error (usage): ") + e.what();
    } catch (const HypothesisError& e) {
        err << "error: " << e.what() << "\n";
        code = kExitUsage;
        status = std::string("error (hypothesis): ") + e.what();
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        code = kExitNumerical;
        status = std::string("error (numerical): ") + e.what();
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        code = kExitNumerical;
        status = std::string("error: ") + e.what();
    }
    manifest.write(o.out, status, elapsed());
    return code;
}

}  // namespace nlest
