#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "experiment_support.hpp"
#include "nlest/error.hpp"

namespace nlest {

SetFamily parse_set_family(const std::string& name)
{
    if (name == "random-cells") return SetFamily::RandomCells;
    if (name == "balls") return SetFamily::Balls;
    if (name == "unions") return SetFamily::Unions;
    if (name == "mixed") return SetFamily::Mixed;
    throw InvalidArgument("unknown set family '" + name +
                          "' (expected random-cells, balls, unions or mixed)");
}

std::string to_string(SetFamily f)
{
    switch (f) {
    case SetFamily::RandomCells: return "random-cells";
    case SetFamily::Balls: return "balls";
    case SetFamily::Unions: return "unions";
    case SetFamily::Mixed: return "mixed";
    }
    return "mixed";
}

void ExperimentConfig::validate() const
{
    if (dim != 1 && dim != 2) throw InvalidArgument("dim must be 1 or 2");
    if (instances < 1) throw InvalidArgument("instances must be at least 1");
    if (sigmas.empty()) throw InvalidArgument("at least one sigma is required");
    for (double s : sigmas) EllipticityParams{s, lambda, Lambda}.validate();
    if (coefficient_families.empty()) throw InvalidArgument("at least one coefficient family is required");
    for (double b : betas)
        if (!(b > 0.0 && b < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
    if (!(tile > 0.0)) throw InvalidArgument("tile must be positive");
    if (half_width < 1.0) throw InvalidArgument("experiments need half_width >= 1");
    if (n_cells < 8 || n_cells % 4 != 0) throw InvalidArgument("n_cells must be a multiple of 4, >= 8");
    make_grid(dim, n_cells, half_width, exterior_radius);
    make_grid(dim, n_cells / 2, half_width, exterior_radius);
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const
{
    auto join = [](const auto& v, auto fn) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fn(v[i]);
        return s;
    };
    auto fmt = [](double x) { return format_double(x); };
    return {
        {"seed", std::to_string(seed)},
        {"dim", std::to_string(dim)},
        {"n-cells", std::to_string(n_cells)},
        {"sigma", join(sigmas, fmt)},
        {"lambda", fmt(lambda)},
        {"Lambda", fmt(Lambda)},
        {"instances", std::to_string(instances)},
        {"coefficients",
         join(coefficient_families, [](CoefficientFamily f) { return to_string(f); })},
        {"set-family", to_string(set_family)},
        {"betas", join(betas, fmt)},
        {"half-width", fmt(half_width)},
        {"exterior-radius", fmt(exterior_radius)},
        {"tile", fmt(tile)},
        {"weights-scheme", to_string(scheme)},
    };
}

PowerLawFit fit_powerlaw(const std::vector<std::pair<double, double>>& pairs)
{
    if (pairs.size() < 3) throw InvalidArgument("power-law fit needs at least 3 points");
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& [x, y] : pairs) {
        if (!(x > 0.0 && y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw InvalidArgument("power-law fit needs positive finite data");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("power-law fit needs two distinct x values");
    PowerLawFit f;
    f.samples = pairs.size();
    f.exponent = sxy / sxx;
    f.log_constant = my - f.exponent * mx;
    if (syy <= 0.0) {
        f.r2 = 1.0;
    } else {
        double sse = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const double e = ly[i] - (f.log_constant + f.exponent * lx[i]);
            sse += e * e;
        }
        f.r2 = std::clamp(1.0 - sse / syy, 0.0, 1.0);
    }
    return f;
}

namespace {

std::vector<double> region_abs_values(const ScalarField& v, const Region& region)
{
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (region.contains(v.point(k), v.spec().dim)) out.push_back(std::abs(v[k]));
    return out;
}

}  // namespace

double lepsilon_norm(const ScalarField& v, double eps, const Region& region)
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    double s = 0.0;
    for (double a : region_abs_values(v, region))
        if (a > 0.0) s += std::pow(a, eps);
    return std::pow(s * v.spec().cell_volume(), 1.0 / eps);
}

double lepsilon_norm_layer_cake(const ScalarField& v, double eps, const Region& region)
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    std::vector<double> a = region_abs_values(v, region);
    std::sort(a.begin(), a.end(), std::greater<>());
    // On (a[k], a[k-1]) the distribution function is k node volumes.
    double s = 0.0;
    for (std::size_t k = 1; k <= a.size(); ++k) {
        const double upper = std::pow(a[k - 1], eps);
        const double lower = k < a.size() && a[k] > 0.0 ? std::pow(a[k], eps) : 0.0;
        s += static_cast<double>(k) * (upper - lower);
    }
    return std::pow(s * v.spec().cell_volume(), 1.0 / eps);
}

double distribution_function(const ScalarField& v, double t, const Region& region)
{
    std::size_t c = 0;
    for (double a : region_abs_values(v, region))
        if (a > t) ++c;
    return static_cast<double>(c) * v.spec().cell_volume();
}

double lp_norm(const GridFunction& f, double p, const Region& region)
{
    return lepsilon_norm(box_values(f), p, region);
}

bool EstimateReport::passed() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

void write_report_tables(const EstimateReport& r, const std::string& dir, const std::string& tag)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream os(std::filesystem::path(dir) / name);
        if (!os) throw InvalidArgument("cannot write " + name + " in '" + dir + "'");
        os << "# manifest=" << tag << "\n";
        return os;
    };
    auto row = [](std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << "\n";
    };
    {
        auto os = open("rows.csv");
        row(os, r.rows.columns);
        for (const auto& cells : r.rows.rows) row(os, cells);
    }
    auto os = open("fits.csv");
    os << "name,value,r2,samples,note\n";
    for (const auto& f : r.fits)
        os << f.name << ',' << format_double(f.value) << ',' << (f.r2 ? format_double(*f.r2) : "")
           << ',' << f.samples << ',' << f.note << "\n";
}

namespace detail {

GridSpec experiment_grid(const ExperimentConfig& cfg, int n_cells)
{
    return make_grid(cfg.dim, n_cells, cfg.half_width, cfg.exterior_radius);
}

std::shared_ptr<const KernelWeights> shared_weights(const GridSpec& spec, double sigma,
                                                    WeightScheme scheme)
{
    // Weights depend only on (grid, sigma, scheme); experiments revisit the
    // same few combinations many times.
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const KernelWeights>> cache;
    const std::string key = spec.describe() + " sigma=" + format_double(sigma) + " " + to_string(scheme);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() > 16) cache.clear();
    auto w = std::make_shared<const KernelWeights>(build_weights(spec, sigma, scheme));
    cache.emplace(key, w);
    return w;
}

UnitBallProblem factor_unit_ball(const GridSpec& spec, const CoefficientFn& fn,
                                 std::shared_ptr<const KernelWeights> w, const EllipticityParams& p)
{
    UnitBallProblem out;
    out.a = sample_coefficients(spec, fn);
    out.matrix = std::make_shared<const OperatorMatrix>(assemble(out.a, std::move(w), Region::ball(1.0), p));
    out.lu = std::make_unique<FactoredSystem>(out.matrix);
    return out;
}

std::vector<Bump> random_bumps(Rng& rng, int dim, int count, double center_radius, double w_min,
                               double w_max, double a_min, double a_max)
{
    std::vector<Bump> out;
    for (int b = 0; b < count; ++b) {
        Bump bump;
        do {
            bump.center = {rng.uniform(-center_radius, center_radius),
                           dim == 2 ? rng.uniform(-center_radius, center_radius) : 0.0};
        } while (norm2(bump.center, dim) > center_radius);
        bump.width = std::exp(rng.uniform(std::log(w_min), std::log(w_max)));
        bump.amplitude = rng.uniform(a_min, a_max);
        out.push_back(bump);
    }
    return out;
}

GridFunction sample_bumps(const GridSpec& spec, const std::vector<Bump>& bumps)
{
    descriptor::Custom d;
    d.fn = [&bumps, dim = spec.dim](Point x) {
        double s = 0.0;
        for (const auto& b : bumps) {
            const Point dx{x[0] - b.center[0], x[1] - b.center[1]};
            const double r = norm2(dx, dim);
            s += b.amplitude * std::exp(-0.5 * r * r / (b.width * b.width));
        }
        return s;
    };
    d.at_infinity = 0.0;
    return sample_function(spec, d);
}

TailFit fit_distribution_tail(const ScalarField& v, const Region& region, int points)
{
    TailFit t;
    t.max_value = sup_over(v, region);
    if (!(t.max_value > 0.0)) {
        t.degenerate = true;
        return t;
    }
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < points; ++i) {
        // Levels from max / 10 up to max 10^{-1/points}.
        const double level = t.max_value * std::pow(10.0, -1.0 + static_cast<double>(i) / points);
        pairs.emplace_back(level, distribution_function(v, level, region));
    }
    t.fit = fit_powerlaw(pairs);
    return t;
}

ScalarField nuclear_field(const SigmaHessian& m)
{
    ScalarField out(m.spec(), 0.0);
    for (std::size_t k = 0; k < m.size(); ++k) out[k] = nuclear_norm(m[k]);
    return out;
}

double max_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

double min_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

}  // namespace nlest
