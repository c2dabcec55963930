#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "experiment_support.hpp"

namespace nlest {

using namespace detail;

namespace {

// Cells lying entirely in the closed ball B_radius.
std::vector<std::array<int, 2>> cells_inside(const GridSpec& s, double radius)
{
    std::vector<std::array<int, 2>> out;
    const int ny = s.dim == 2 ? s.n_cells : 1;
    for (int cj = 0; cj < ny; ++cj)
        for (int ci = 0; ci < s.n_cells; ++ci) {
            const Point lo = s.cell_lower(ci, cj);
            double far = 0.0;
            for (int d = 0; d < s.dim; ++d) {
                const double a = std::max(std::abs(lo[d]), std::abs(lo[d] + s.h));
                far += a * a;
            }
            if (std::sqrt(far) <= radius * (1.0 + 1e-12)) out.push_back({ci, cj});
        }
    return out;
}

double ball_radius(int dim, double m) { return dim == 1 ? 0.5 * m : std::sqrt(m / std::numbers::pi); }

void add_ball(SetIndicator& e, const std::vector<std::array<int, 2>>& pool, Point c, double r)
{
    const GridSpec& s = e.spec();
    bool any = false;
    for (const auto& q : pool) {
        const Point x = s.cell_center(q[0], q[1]);
        const Point d{x[0] - c[0], x[1] - c[1]};
        if (norm2(d, s.dim) < r) {
            e.set(q[0], q[1], true);
            any = true;
        }
    }
    if (!any) {
        // Radius below the cell size: take the pool cell nearest to the centre.
        auto best = std::min_element(pool.begin(), pool.end(), [&](const auto& a, const auto& b) {
            const Point xa = s.cell_center(a[0], a[1]);
            const Point xb = s.cell_center(b[0], b[1]);
            return norm2({xa[0] - c[0], xa[1] - c[1]}, s.dim) < norm2({xb[0] - c[0], xb[1] - c[1]}, s.dim);
        });
        e.set((*best)[0], (*best)[1], true);
    }
}

Point random_center(Rng& rng, int dim, double radius)
{
    if (radius <= 0.0) return {0.0, 0.0};
    Point c;
    do {
        c = {rng.uniform(-radius, radius), dim == 2 ? rng.uniform(-radius, radius) : 0.0};
    } while (norm2(c, dim) > radius);
    return c;
}

SetIndicator draw_set(const GridSpec& spec, SetFamily family, double target, Rng& rng,
                      const std::vector<std::array<int, 2>>& pool)
{
    SetIndicator e(spec);
    const double cell_vol = spec.cell_volume();
    switch (family) {
    case SetFamily::RandomCells: {
        const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(target / cell_vol)), 1,
                                               pool.size());
        std::vector<std::size_t> idx(pool.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.below(idx.size() - i);
            std::swap(idx[i], idx[j]);
            e.set(pool[idx[i]][0], pool[idx[i]][1], true);
        }
        break;
    }
    case SetFamily::Balls: {
        const double r = std::min(ball_radius(spec.dim, target), 0.5);
        add_ball(e, pool, random_center(rng, spec.dim, 0.5 - r), r);
        break;
    }
    case SetFamily::Unions:
    case SetFamily::Mixed: {
        const int k = 2 + static_cast<int>(rng.below(4));
        const double r = std::min(ball_radius(spec.dim, target / k), 0.5);
        for (int b = 0; b < k; ++b) add_ball(e, pool, random_center(rng, spec.dim, 0.5 - r), r);
        break;
    }
    }
    return e;
}

struct CubeDraw {
    DyadicCube q;
    SetIndicator e_cap_q;
    SetIndicator triple;
};

// Cell-aligned cube Q inside B_{1/8} with |Q cap E| >= beta |Q|, and 3Q.
CubeDraw draw_cube(const GridSpec& spec, double beta, Rng& rng)
{
    const int dim = spec.dim;
    const double diag = dim == 2 ? std::sqrt(2.0) : 1.0;
    std::vector<DyadicCube> options;
    for (int side = 1; side * spec.h * diag <= 0.25; side *= 2) {
        const int ny = dim == 2 ? spec.n_cells - side + 1 : 1;
        for (int cj = 0; cj < ny; ++cj)
            for (int ci = 0; ci + side <= spec.n_cells; ++ci) {
                DyadicCube q{{ci, dim == 2 ? cj : 0}, side, 0};
                const Point c = q.center(spec);
                if (norm2(c, dim) + q.half_side(spec) * diag <= 0.125 * (1.0 + 1e-12)) options.push_back(q);
            }
    }
    // Pick the side first so small and large cubes are equally likely.
    std::vector<int> sides;
    for (const auto& q : options)
        if (std::find(sides.begin(), sides.end(), q.side_cells) == sides.end()) sides.push_back(q.side_cells);
    const int side = sides[rng.below(sides.size())];
    std::vector<DyadicCube> same;
    for (const auto& q : options)
        if (q.side_cells == side) same.push_back(q);
    CubeDraw out{same[rng.below(same.size())], SetIndicator(spec), SetIndicator(spec)};

    std::vector<std::array<int, 2>> cells;
    const int sy = dim == 2 ? side : 1;
    for (int b = 0; b < sy; ++b)
        for (int a = 0; a < side; ++a) cells.push_back({out.q.lower[0] + a, out.q.lower[1] + b});
    const auto removed = static_cast<std::size_t>(std::floor((1.0 - beta) * static_cast<double>(cells.size())));
    for (std::size_t i = 0; i < removed; ++i) std::swap(cells[i], cells[i + rng.below(cells.size() - i)]);
    for (std::size_t i = removed; i < cells.size(); ++i) out.e_cap_q.set(cells[i][0], cells[i][1], true);

    const int ty = dim == 2 ? 3 * side : 1;
    for (int b = 0; b < ty; ++b)
        for (int a = 0; a < 3 * side; ++a) {
            const int ci = out.q.lower[0] - side + a;
            const int cj = dim == 2 ? out.q.lower[1] - side + b : 0;
            if (ci >= 0 && ci < spec.n_cells && cj >= 0 && (dim == 1 || cj < spec.n_cells))
                out.triple.set(ci, cj, true);
        }
    return out;
}

}  // namespace

EstimateReport potential_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    Stopwatch clock;
    EstimateReport rep;
    rep.name = "potential";
    rep.rows.columns = {"sigma", "instance", "family", "set_family", "e_cells", "e_measure", "inf_u",
                        "beta", "q_center_x", "q_center_y", "q_half_side", "qe_cells", "gamma", "residual"};
    const GridSpec spec = experiment_grid(cfg, cfg.n_cells);
    const auto pool = cells_inside(spec, 0.5);
    const Region half_closed = Region::ball(0.5, true);
    const double m_max = static_cast<double>(pool.size()) * spec.cell_volume();
    const double m_min = std::max(spec.cell_volume(), m_max * 1e-3);

    for (double sigma : cfg.sigmas) {
        const EllipticityParams p{sigma, cfg.lambda, cfg.Lambda};
        const auto w = shared_weights(spec, sigma, cfg.scheme);
        std::vector<std::pair<double, double>> pairs;
        bool positive = true;
        bool gamma_positive = true;
        double gamma_min = INFINITY;
        double e_lo = INFINITY;
        double e_hi = 0.0;
        for (int i = 0; i < cfg.instances; ++i) {
            Rng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(i)));
            const CoefficientFamily fam = cfg.coefficient_families[i % cfg.coefficient_families.size()];
            const auto fn = coefficient_function(fam, cfg.dim, p, stream_seed(cfg.seed ^ 0x9071ULL, i), cfg.tile);
            const UnitBallProblem prob = factor_unit_ball(spec, fn, w, p);

            SetFamily sf = cfg.set_family;
            if (sf == SetFamily::Mixed) sf = static_cast<SetFamily>(i % 3);
            // Stratified log-uniform target measure across instances.
            const double t = (i + rng.uniform()) / cfg.instances;
            const double target = std::exp(std::log(m_min) + t * (std::log(m_max) - std::log(m_min)));
            const SetIndicator e = draw_set(spec, sf, target, rng, pool);
            const GridFunction zero = GridFunction::zeros(spec);
            const GridFunction u = prob.lu->solve(e.node_fraction(), zero);
            double residual = prob.lu->last_residual();
            const double inf_u = inf_over(box_values(u), half_closed);
            const double measure = e.measure();
            if (!(inf_u > 0.0)) positive = false;
            if (inf_u > 0.0) pairs.emplace_back(measure, inf_u);
            e_lo = std::min(e_lo, measure);
            e_hi = std::max(e_hi, measure);

            const double beta = cfg.betas[i % cfg.betas.size()];
            const CubeDraw cd = draw_cube(spec, beta, rng);
            const GridFunction uq = prob.lu->solve(cd.e_cap_q.node_fraction(), zero);
            residual = std::max(residual, prob.lu->last_residual());
            const GridFunction v = prob.lu->solve(cd.triple.node_fraction(), zero);
            residual = std::max(residual, prob.lu->last_residual());
            double gamma = INFINITY;
            for (const auto& nd : prob.matrix->unknown_nodes) {
                const double vv = v.at(nd[0], nd[1]);
                if (vv > 0.0) gamma = std::min(gamma, uq.at(nd[0], nd[1]) / vv);
            }
            if (!(gamma > 0.0 && std::isfinite(gamma))) gamma_positive = false;
            gamma_min = std::min(gamma_min, gamma);
            const Point qc = cd.q.center(spec);
            rep.rows.rows.push_back({cell(sigma), cell(i), to_string(fam), to_string(sf), cell(e.count()),
                                     cell(measure), cell(inf_u), cell(beta), cell(qc[0]), cell(qc[1]),
                                     cell(cd.q.half_side(spec)), cell(cd.e_cap_q.count()), cell(gamma),
                                     cell(residual)});
        }

        const std::string tag = "[sigma=" + format_double(sigma) + "]";
        const double decades = e_hi > 0.0 ? std::log10(e_hi / e_lo) : 0.0;
        bool fit_ok = false;
        std::string fit_detail = "fewer than 3 positive instances";
        if (pairs.size() >= 3) {
            const PowerLawFit f = fit_powerlaw(pairs);
            double c_emp = INFINITY;
            for (const auto& [m, v] : pairs) c_emp = std::min(c_emp, v / std::pow(m, f.exponent));
            rep.fits.push_back({"delta_emp" + tag, f.exponent, f.r2, f.samples, "inf u ~ C |E|^delta"});
            rep.fits.push_back({"C_emp" + tag, c_emp, std::nullopt, f.samples, "min inf u / |E|^delta"});
            fit_ok = std::isfinite(f.exponent) && f.r2 >= 0.8;
            fit_detail = "delta=" + format_double(f.exponent) + " R2=" + format_double(f.r2);
        }
        rep.fits.push_back({"measure_decades" + tag, decades, std::nullopt, pairs.size(), "log10 max|E| / min|E|"});
        rep.fits.push_back({"gamma_emp" + tag, gamma_min, std::nullopt, static_cast<std::size_t>(cfg.instances),
                            "min over instances of min u / v"});
        rep.verdicts.push_back({"potential.positive" + tag, positive, "inf over closed B_1/2 of u > 0"});
        rep.verdicts.push_back({"potential.decades" + tag, decades >= 2.0, "|E| spans " + format_double(decades) + " decades"});
        rep.verdicts.push_back({"potential.fit" + tag, fit_ok, fit_detail});
        rep.verdicts.push_back({"potential.gamma_positive" + tag, gamma_positive, "gamma_emp=" + format_double(gamma_min)});
    }
    rep.runtime_seconds = clock.seconds();
    return rep;
}

}  // namespace nlest
