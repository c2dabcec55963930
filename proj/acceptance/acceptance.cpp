// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>

#include "nlest/cli.hpp"
#include "nlest/coefficients.hpp"
#include "nlest/cz.hpp"
#include "nlest/experiments.hpp"
#include "nlest/operators.hpp"
#include "nlest/random.hpp"
#include "nlest/solver.hpp"
#include "oracles.hpp"

using namespace nlest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.passed) ++failures;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.passed ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome verdict_summary(const std::vector<EstimateReport>& reports, double runtime, double budget)
{
    Outcome o{runtime < budget, ""};
    for (const auto& r : reports)
        for (const auto& v : r.verdicts) {
            if (!v.passed) {
                o.passed = false;
                o.detail += "FAILED " + v.rule + " (" + v.detail + "); ";
            }
        }
    for (const auto& r : reports)
        for (const auto& f : r.fits)
            if (f.name.rfind("delta_emp", 0) == 0 || f.name.rfind("C_emp", 0) == 0 || f.name.rfind("gamma_emp", 0) == 0 ||
                f.name.rfind("stability_factor", 0) == 0 || f.name.rfind("measure_decades", 0) == 0 ||
                f.name.rfind("ratio_max", 0) == 0 || f.name.rfind("eps_emp", 0) == 0 || f.name.rfind("s_emp_min", 0) == 0)
                o.detail += r.name + "." + f.name + "=" + num(f.value) + (f.r2 ? " (R2 " + num(*f.r2) + ")" : "") + " ";
    o.detail += "runtime " + num(runtime) + " s (limit " + num(budget) + " s)";
    return o;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int main()
{
    criterion(1, "quadrature oracle", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const double exact = -4.0 * std::sqrt(std::numbers::pi);
        double err[2];
        int k = 0;
        for (int n : {512, 1024}) {
            const GridSpec s = make_grid(1, n, 8.0, 16.0);
            const KernelWeights w = build_weights(s, 1.0);
            const double v = sigma_hessian_at(sample_function(s, descriptor::Gaussian{1.0}), w, 0).xx;
            err[k++] = std::abs(v - exact) / std::abs(exact);
        }
        const double rt = seconds_since(t0);
        const double ratio = err[0] / err[1];
        return Outcome{err[1] <= 0.01 && ratio >= 2.0 && rt < 10.0,
                       "rel err " + num(err[0]) + " (n=512), " + num(err[1]) + " (n=1024), ratio " + num(ratio) +
                           " (need <= 0.01 and >= 2)"};
    });

    criterion(2, "ball-solution oracle", [] {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o{true, ""};
        for (double sigma : {1.0, 1.5}) {
            const GridSpec s = make_grid(1, 512, 2.0, 4.0);
            const EllipticityParams p{sigma, 1.0, 1.0};
            auto w = std::make_shared<const KernelWeights>(build_weights(s, sigma));
            auto sys = std::make_shared<const OperatorMatrix>(
                assemble(MatrixField(s, SymMatrix::identity(1)), w, Region::ball(1.0), p));
            const FactoredSystem lu(sys);
            const GridFunction u = lu.solve(GridFunction::constant(s, 1.0), GridFunction::zeros(s));
            const double amp =
                oracle::fractional_constant(1, sigma) / (2.0 * (2.0 - sigma)) * oracle::ball_amplitude(1, sigma);
            double err = 0.0;
            for (int i = -s.box_half; i <= s.box_half; ++i) {
                const double x = i * s.h;
                const double e = std::abs(x) < 1.0 ? amp * std::pow(1.0 - x * x, 0.5 * sigma) : 0.0;
                err = std::max(err, std::abs(u.at(i) - e));
            }
            const double rel = err / amp;
            if (rel > 0.02) o.passed = false;
            o.detail += "sigma=" + num(sigma) + " rel Linf " + num(rel) + "; ";
        }
        const double rt = seconds_since(t0);
        if (rt >= 30.0) o.passed = false;
        o.detail += "limit 0.02";
        return o;
    });

    criterion(3, "Pucci sandwich and duality", [] {
        Rng rng(2024);
        double worst = 0.0;
        double dual = 0.0;
        for (int t = 0; t < 10000; ++t) {
            const int dim = 1 + t % 2;
            const EllipticityParams p{1.0, rng.uniform(0.1, 1.0), rng.uniform(1.0, 5.0)};
            const SymMatrix m = dim == 1 ? SymMatrix{1, rng.uniform(-10, 10), 0, 0}
                                         : SymMatrix{2, rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
            const SymMatrix a = dim == 1 ? SymMatrix{1, rng.uniform(p.lambda, p.Lambda), 0, 0}
                                         : rotated_diagonal(rng.uniform(0, 2 * std::numbers::pi),
                                                            rng.uniform(p.lambda, p.Lambda), rng.uniform(p.lambda, p.Lambda));
            const double v = frobenius(a, m);
            worst = std::max({worst, pucci_minus(m, p) - v, v - pucci_plus(m, p)});
            dual = std::max(dual, std::abs(pucci_plus(m * -1.0, p) + pucci_minus(m, p)));
        }
        return Outcome{worst <= 1e-12 && dual <= 1e-12,
                       "max sandwich violation " + num(worst) + ", max duality gap " + num(dual) + " (limit 1e-12)"};
    });

    criterion(4, "A-tilde certificate", [] {
        Rng rng(2025);
        double bound = -INFINITY;
        double value = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const int dim = 1 + t % 2;
            const EllipticityParams p{1.0, rng.uniform(0.1, 1.0), rng.uniform(1.0, 5.0)};
            const SymMatrix m = dim == 1 ? SymMatrix{1, rng.uniform(-10, 10), 0, 0}
                                         : SymMatrix{2, rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
            const SymMatrix a = dim == 1 ? SymMatrix{1, rng.uniform(p.lambda, p.Lambda), 0, 0}
                                         : rotated_diagonal(rng.uniform(0, 2 * std::numbers::pi),
                                                            rng.uniform(p.lambda, p.Lambda), rng.uniform(p.lambda, p.Lambda));
            const TildeA ta = construct_tilde_A(m, p);
            const SymEigen e = eigen_decompose(m);
            double abs_sum = 0.0;
            double neg = 0.0;
            double pos = 0.0;
            for (int k = 0; k < dim; ++k) {
                abs_sum += std::abs(e.values[k]);
                (e.values[k] < 0.0 ? neg : pos) += e.values[k];
            }
            const double tam = frobenius(ta.matrix, m);
            bound = std::max(bound, tam - frobenius(a, m) + std::min(p.Lambda, 0.5 * p.lambda) * abs_sum);
            value = std::max(value, std::abs(tam - (2.0 * p.Lambda * neg + 0.5 * p.lambda * pos)));
        }
        return Outcome{bound <= 1e-10 && value <= 1e-12,
                       "max bound excess " + num(bound) + " (limit 1e-10), max closed-form gap " + num(value) +
                           " (limit 1e-12)"};
    });

    criterion(5, "CZ exactness", [] {
        Rng rng(2026);
        int sets = 0;
        int ok = 0;
        int controls = 0;
        int controls_caught = 0;
        while (sets < 200) {
            const int dim = 1 + sets % 2;
            const int n = dim == 1 ? 256 : 32;
            const GridSpec s = make_grid(dim, n, 1.0, 2.0);
            const double alpha = rng.uniform(0.1, 0.9);
            const double p = rng.uniform(0.0, 0.8) * alpha;
            SetIndicator e(s);
            const int ny = dim == 2 ? n : 1;
            for (int cj = 0; cj < ny; ++cj)
                for (int ci = 0; ci < n; ++ci) e.set(ci, cj, rng.uniform() < p);
            if (static_cast<double>(e.count()) >= alpha * static_cast<double>(s.cell_count())) continue;
            ++sets;
            const CZResult r = cz_decompose(e, alpha);
            ok += cz_verify(r, e, alpha).passed();
            if (!r.kept.empty()) {
                CZResult bad = r;
                bad.kept.pop_back();
                bad.kept_density.pop_back();
                bad.kept_e_cells.pop_back();
                ++controls;
                controls_caught += !cz_verify(bad, e, alpha).passed();
            }
        }
        return Outcome{ok == sets && controls_caught == controls && controls > 0,
                       std::to_string(ok) + "/" + std::to_string(sets) + " sets verified, " +
                           std::to_string(controls_caught) + "/" + std::to_string(controls) + " negative controls rejected"};
    });

    criterion(6, "monotone structure and comparison", [] {
        int certified = 0;
        int systems = 0;
        for (int dim : {1, 2})
            for (auto fam : {CoefficientFamily::Constant, CoefficientFamily::Checkerboard, CoefficientFamily::RandomRotation,
                             CoefficientFamily::Smooth})
                for (double sigma : {0.5, 1.0, 1.5, 1.9}) {
                    const GridSpec s = make_grid(dim, dim == 1 ? 128 : 32, 1.0, 2.0);
                    const EllipticityParams p{sigma, 1.0, 2.0};
                    auto w = std::make_shared<const KernelWeights>(build_weights(s, sigma));
                    const MatrixField a = sample_coefficients(s, coefficient_function(fam, dim, p, 5, 0.125));
                    ++systems;
                    certified += assemble(a, w, Region::ball(1.0), p).monotone_certified;
                }
        Rng rng(2027);
        double worst = 0.0;
        int pairs = 0;
        for (int t = 0; t < 100; ++t) {
            const int dim = t % 4 == 0 ? 2 : 1;
            const GridSpec s = make_grid(dim, dim == 1 ? 128 : 16, 1.0, 2.0);
            const EllipticityParams p{rng.uniform(0.2, 1.9), 1.0, 2.0};
            auto w = std::make_shared<const KernelWeights>(build_weights(s, p.sigma));
            const MatrixField a =
                sample_coefficients(s, coefficient_function(static_cast<CoefficientFamily>(t % 4), dim, p, 300 + t, 0.125));
            auto sys = std::make_shared<const OperatorMatrix>(assemble(a, w, Region::ball(1.0), p));
            const FactoredSystem lu(sys);
            auto rnd = [&](double lo, double hi) {
                std::vector<double> v(s.node_count());
                for (auto& x : v) x = rng.uniform(lo, hi);
                return GridFunction(s, std::move(v), rng.uniform(lo, hi));
            };
            const GridFunction f2 = rnd(-1, 1);
            const GridFunction g2 = rnd(-1, 1);
            const GridFunction f1 = f2.combine(1.0, rnd(0, 1), 1.0);
            const GridFunction g1 = g2.combine(1.0, rnd(0, 1), 1.0);
            const ComparisonReport rep = comparison_check(lu, f1, g1, f2, g2);
            worst = std::max(worst, rep.max_violation);
            ++pairs;
        }
        return Outcome{certified == systems && worst <= 1e-10 && pairs == 100,
                       std::to_string(certified) + "/" + std::to_string(systems) + " assemblies certified; " +
                           std::to_string(pairs) + " comparison pairs, max violation " + num(worst) + " (limit 1e-10)"};
    });

    criterion(7, "potential estimate", [] {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig c1;
        c1.seed = 7;
        c1.dim = 1;
        c1.n_cells = 256;
        c1.instances = 50;
        ExperimentConfig c2 = c1;
        c2.dim = 2;
        c2.n_cells = 64;
        c2.instances = 10;
        const EstimateReport r1 = potential_experiment(c1);
        const EstimateReport r2 = potential_experiment(c2);
        return verdict_summary({r1, r2}, seconds_since(t0), 600.0);
    });

    criterion(8, "ABP stability", [] {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig c;
        c.seed = 8;
        c.n_cells = 256;
        c.instances = 100;
        c.sigmas = {1.5};
        const EstimateReport r = abp_experiment(c);
        return verdict_summary({r}, seconds_since(t0), 600.0);
    });

    criterion(9, "level-set and L^eps bound", [] {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig c;
        c.seed = 9;
        c.n_cells = 256;
        c.instances = 30;
        c.sigmas = {1.5};
        const EstimateReport r = levelset_experiment(c, true);
        return verdict_summary({r}, seconds_since(t0), 600.0);
    });

    criterion(10, "barrier certificate", [] {
        const GridSpec s = make_grid(1, 512, 8.0, 16.0);
        const BarrierCertificate b = barrier_construct(s, {1.0, 1.0, 2.0});
        return Outcome{b.passed && b.min_slack >= -1e-8 && b.c_phi > 0.0 && b.support_ok,
                       "q=" + num(b.q) + " min_slack " + num(b.min_slack) + " (limit -1e-8), C_phi " + num(b.c_phi) +
                           ", support " + (b.support_ok ? "exact" : "violated")};
    });

    criterion(11, "determinism", [] {
        const fs::path root = fs::current_path() / "acceptance-out";
        fs::remove_all(root);
        std::string detail;
        bool ok = true;
        for (const char* cmd : {"potential", "abp"}) {
            std::string rows[2];
            for (int k = 0; k < 2; ++k) {
                const fs::path out = root / (std::string(cmd) + std::to_string(k));
                std::ostringstream so;
                std::ostringstream se;
                const int code = dispatch({cmd, "--dim", "1", "--n-cells", "256", "--sigma", "1.5", "--instances", "50",
                                           "--seed", "7", "--threads", "1", "--out", out.string()},
                                          so, se);
                if (code != kExitPass) {
                    ok = false;
                    detail += std::string(cmd) + " exit " + std::to_string(code) + "; ";
                }
                rows[k] = slurp(out / "rows.csv");
            }
            const bool same = !rows[0].empty() && rows[0] == rows[1];
            ok = ok && same;
            detail += std::string(cmd) + " rows.csv " + (same ? "byte-identical" : "DIFFERS") + " (" +
                      std::to_string(rows[0].size()) + " bytes); ";
        }
        fs::remove_all(root);
        return Outcome{ok, detail};
    });

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
