#include <cmath>

#include "experiment_support.hpp"

namespace nlest {

using namespace detail;

namespace {

struct LevelsetInstance {
    int index = 0;
    CoefficientFamily family{};
    TailFit tail;
    ScalarField v;         // |D^sigma u| on the closed B_{1/2}
    ScalarField v_scaled;  // same for 10 u
    ScalarField v_const;   // for the constant-source solution
    double u_sup = 0.0;
    double f_sup = 0.0;
    double f_ln = 0.0;
    double uk_sup = 0.0;
    double k = 0.0;
    double residual = 0.0;
};

// Mixed-sign source sum_m a_m cos(w_m . x + phi_m): its zero set is thin, so
// |D^sigma u| stays well above rounding level on most of B_{1/2}.
GridFunction random_wave_source(const GridSpec& spec, Rng& rng)
{
    struct Wave {
        double a;
        Point w;
        double phase;
    };
    std::vector<Wave> waves;
    const int count = 2 + static_cast<int>(rng.below(4));
    for (int m = 0; m < count; ++m) {
        const double freq = rng.uniform(1.0, 8.0);
        const double th = rng.uniform(0.0, 6.283185307179586);
        const Point w = spec.dim == 2 ? Point{freq * std::cos(th), freq * std::sin(th)} : Point{freq, 0.0};
        waves.push_back({rng.uniform(-1.0, 1.0), w, rng.uniform(0.0, 6.283185307179586)});
    }
    descriptor::Custom d;
    d.fn = [waves](Point x) {
        double s = 0.0;
        for (const auto& wv : waves) s += wv.a * std::cos(wv.w[0] * x[0] + wv.w[1] * x[1] + wv.phase);
        return s;
    };
    return sample_function(spec, d);
}

double data_term(double f_sup, double f_ln, double sigma)
{
    return std::pow(f_sup, 0.5 * (2.0 - sigma)) * std::pow(f_ln, 0.5 * sigma);
}

}  // namespace

EstimateReport levelset_experiment(const ExperimentConfig& cfg, bool with_ratio)
{
    cfg.validate();
    Stopwatch clock;
    EstimateReport rep;
    rep.name = with_ratio ? "weps" : "levelset";
    rep.rows.columns = {"sigma", "instance", "family", "max_dsigma", "s_emp", "tail_r2", "residual"};
    if (with_ratio)
        for (const char* c : {"eps", "lnorm", "layer_cake_rel", "u_sup", "f_sup", "f_ln", "rhs", "ratio",
                              "ratio_scaled", "scale_rel", "K", "ratio_const"})
            rep.rows.columns.push_back(c);

    const GridSpec spec = experiment_grid(cfg, cfg.n_cells);
    const Region half = Region::ball(0.5, true);
    const Region ball = Region::ball(1.0);
    constexpr int kTailPoints = 24;

    for (double sigma : cfg.sigmas) {
        const EllipticityParams p{sigma, cfg.lambda, cfg.Lambda};
        const auto w = shared_weights(spec, sigma, cfg.scheme);
        std::vector<LevelsetInstance> runs;
        for (int i = 0; i < cfg.instances; ++i) {
            Rng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(i)));
            LevelsetInstance r;
            r.index = i;
            r.family = cfg.coefficient_families[i % cfg.coefficient_families.size()];
            const auto fn = coefficient_function(r.family, cfg.dim, p, stream_seed(cfg.seed ^ 0x1e7eULL, i), cfg.tile);
            const UnitBallProblem prob = factor_unit_ball(spec, fn, w, p);
            const GridFunction f = random_wave_source(spec, rng);
            const GridFunction zero = GridFunction::zeros(spec);
            const GridFunction u = prob.lu->solve(f.scaled(-1.0), zero);
            r.residual = prob.lu->last_residual();
            r.v = nuclear_field(eval_sigma_hessian(u, *w, half));
            r.tail = fit_distribution_tail(r.v, half, kTailPoints);
            r.u_sup = u.sup_norm();
            r.f_sup = sup_over(box_values(f), ball);
            r.f_ln = lp_norm(f, cfg.dim, ball);
            if (with_ratio) {
                r.v_scaled = nuclear_field(eval_sigma_hessian(u.scaled(10.0), *w, half));
                r.k = rng.uniform(0.5, 2.0);
                const GridFunction uk = prob.lu->solve(GridFunction::constant(spec, -r.k), zero);
                r.residual = std::max(r.residual, prob.lu->last_residual());
                r.uk_sup = uk.sup_norm();
                r.v_const = nuclear_field(eval_sigma_hessian(uk, *w, half));
            }
            runs.push_back(std::move(r));
        }

        bool tails_positive = true;
        double s_min = INFINITY;
        std::vector<double> exps;
        for (const auto& r : runs) {
            const double s = r.tail.degenerate ? 0.0 : -r.tail.fit.exponent;
            if (!(s > 0.0)) tails_positive = false;
            if (!r.tail.degenerate) {
                s_min = std::min(s_min, s);
                exps.push_back(s);
            }
        }
        // One exponent for all instances: half the smallest fitted threshold.
        const double eps = std::isfinite(s_min) && s_min > 0.0 ? std::min(1.0, 0.5 * s_min) : 1.0;

        std::vector<double> ratios;
        std::vector<double> ratios_const;
        double worst_layer = 0.0;
        double worst_scale = 0.0;
        for (const auto& r : runs) {
            std::vector<std::string> row = {cell(sigma), cell(r.index), to_string(r.family),
                                            cell(r.tail.max_value),
                                            cell(r.tail.degenerate ? 0.0 : -r.tail.fit.exponent),
                                            cell(r.tail.degenerate ? 0.0 : r.tail.fit.r2), cell(r.residual)};
            if (with_ratio) {
                const double norm = lepsilon_norm(r.v, eps, half);
                const double cake = lepsilon_norm_layer_cake(r.v, eps, half);
                const double layer_rel = norm > 0.0 ? std::abs(norm - cake) / norm : std::abs(cake);
                const double rhs = r.u_sup + data_term(r.f_sup, r.f_ln, sigma);
                const double ratio = norm / rhs;
                const double rhs10 = 10.0 * r.u_sup + data_term(10.0 * r.f_sup, 10.0 * r.f_ln, sigma);
                const double ratio10 = lepsilon_norm(r.v_scaled, eps, half) / rhs10;
                const double scale_rel = ratio > 0.0 ? std::abs(ratio10 - ratio) / ratio : std::abs(ratio10);
                const double ratio_k = lepsilon_norm(r.v_const, eps, half) / (r.uk_sup + r.k);
                worst_layer = std::max(worst_layer, layer_rel);
                worst_scale = std::max(worst_scale, scale_rel);
                ratios.push_back(ratio);
                ratios_const.push_back(ratio_k);
                for (double x : {eps, norm, layer_rel, r.u_sup, r.f_sup, r.f_ln, rhs, ratio, ratio10, scale_rel,
                                 r.k, ratio_k})
                    row.push_back(cell(x));
            }
            rep.rows.rows.push_back(std::move(row));
        }

        const std::string tag = "[sigma=" + format_double(sigma) + "]";
        rep.fits.push_back({"s_emp_min" + tag, exps.empty() ? 0.0 : min_of(exps), std::nullopt, exps.size(),
                            "smallest fitted tail exponent"});
        rep.fits.push_back({"s_emp_median" + tag, median_of(exps), std::nullopt, exps.size(), "median tail exponent"});
        rep.fits.push_back({"eps_emp" + tag, eps, std::nullopt, exps.size(), "min(1, s_emp_min / 2)"});
        rep.verdicts.push_back({"levelset.tail_positive" + tag, tails_positive,
                                "smallest s_emp " + format_double(exps.empty() ? 0.0 : min_of(exps))});
        if (with_ratio) {
            // Bounded across instances: no instance exceeds ten times the median.
            auto bounded = [](const std::vector<double>& v) {
                for (double x : v)
                    if (!std::isfinite(x)) return false;
                return max_of(v) <= 10.0 * median_of(v);
            };
            rep.fits.push_back({"ratio_max" + tag, max_of(ratios), std::nullopt, ratios.size(), "L^eps / RHS"});
            rep.fits.push_back({"ratio_median" + tag, median_of(ratios), std::nullopt, ratios.size(), ""});
            rep.fits.push_back({"ratio_const_max" + tag, max_of(ratios_const), std::nullopt, ratios_const.size(),
                                "constant source, RHS = |u|_inf + K"});
            rep.verdicts.push_back({"weps.bounded" + tag, bounded(ratios),
                                    "max " + format_double(max_of(ratios)) + " median " + format_double(median_of(ratios))});
            rep.verdicts.push_back({"weps.bounded_const" + tag, bounded(ratios_const),
                                    "max " + format_double(max_of(ratios_const)) + " median " +
                                        format_double(median_of(ratios_const))});
            rep.verdicts.push_back({"weps.scaling" + tag, worst_scale <= 1e-10,
                                    "max relative change under (10u, 10f): " + format_double(worst_scale)});
            rep.verdicts.push_back({"weps.layer_cake" + tag, worst_layer <= 1e-6,
                                    "max relative gap: " + format_double(worst_layer)});
        }
    }
    rep.runtime_seconds = clock.seconds();
    return rep;
}

}  // namespace nlest
