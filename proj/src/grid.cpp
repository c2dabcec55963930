#include "nlest/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlest/error.hpp"

namespace nlest {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string fmt_double(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

double norm2(const Point& p, int dim)
{
    return dim == 2 ? std::hypot(p[0], p[1]) : std::abs(p[0]);
}

double norm_inf(const Point& p, int dim)
{
    return dim == 2 ? std::max(std::abs(p[0]), std::abs(p[1])) : std::abs(p[0]);
}

std::size_t GridSpec::node_count() const
{
    const auto n = static_cast<std::size_t>(nodes_per_axis());
    return dim == 2 ? n * n : n;
}

std::size_t GridSpec::cell_count() const
{
    const auto n = static_cast<std::size_t>(n_cells);
    return dim == 2 ? n * n : n;
}

double GridSpec::cell_volume() const { return dim == 2 ? h * h : h; }

bool GridSpec::in_extended(int i, int j) const
{
    if (i < -ext_half || i > ext_half) return false;
    if (dim == 1) return true;
    return j >= -ext_half && j <= ext_half;
}

std::size_t GridSpec::flat(int i, int j) const
{
    const auto n = static_cast<std::size_t>(nodes_per_axis());
    const auto a = static_cast<std::size_t>(i + ext_half);
    if (dim == 1) return a;
    return a + n * static_cast<std::size_t>(j + ext_half);
}

std::array<int, 2> GridSpec::unflat(std::size_t k) const
{
    const auto n = static_cast<std::size_t>(nodes_per_axis());
    if (dim == 1) return {static_cast<int>(k) - ext_half, 0};
    return {static_cast<int>(k % n) - ext_half, static_cast<int>(k / n) - ext_half};
}

Point GridSpec::cell_lower(int ci, int cj) const
{
    return {-half_width + ci * h, dim == 2 ? -half_width + cj * h : 0.0};
}

Point GridSpec::cell_center(int ci, int cj) const
{
    return {-half_width + (ci + 0.5) * h, dim == 2 ? -half_width + (cj + 0.5) * h : 0.0};
}

std::string GridSpec::describe() const
{
    std::ostringstream os;
    os << "dim=" << dim << " n_cells=" << n_cells << " half_width=" << fmt_double(half_width)
       << " exterior_radius=" << fmt_double(exterior_radius) << " h=" << fmt_double(h);
    return os.str();
}

bool GridSpec::operator==(const GridSpec& o) const
{
    return dim == o.dim && n_cells == o.n_cells && half_width == o.half_width &&
           exterior_radius == o.exterior_radius;
}

GridSpec make_grid(int dim, int n_cells, double half_width, double exterior_radius)
{
    if (dim != 1 && dim != 2) throw InvalidArgument("unsupported dimension " + std::to_string(dim));
    if (n_cells < 8 || !is_power_of_two(n_cells))
        throw InvalidArgument("n_cells must be a power of 2 and at least 8");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw InvalidArgument("half_width must be positive");
    if (!(exterior_radius >= 2.0 * half_width) || !std::isfinite(exterior_radius))
        throw InvalidArgument("exterior_radius must be at least 2*half_width");

    GridSpec s;
    s.dim = dim;
    s.n_cells = n_cells;
    s.half_width = half_width;
    s.exterior_radius = exterior_radius;
    s.h = 2.0 * half_width / n_cells;
    s.box_half = n_cells / 2;
    // Relative slack so that exterior_radius = m*h is not lost to rounding.
    s.ext_half = static_cast<int>(std::floor(exterior_radius / s.h * (1.0 + 1e-12)));
    return s;
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(GridSpec spec, std::vector<double> values, double exterior)
    : spec_(spec), values_(std::move(values)), exterior_(exterior)
{
    if (values_.size() != spec_.node_count())
        throw InvalidArgument("grid function size does not match its spec");
    if (!std::isfinite(exterior_)) throw NumericalError("non-finite exterior value");
    for (double v : values_)
        if (!std::isfinite(v)) throw NumericalError("non-finite grid function value");
}

GridFunction GridFunction::constant(const GridSpec& spec, double c)
{
    return {spec, std::vector<double>(spec.node_count(), c), c};
}

double GridFunction::sup_norm() const
{
    double m = std::abs(exterior_);
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

GridFunction GridFunction::combine(double a, const GridFunction& other, double b) const
{
    if (other.spec_ != spec_) throw InvalidArgument("grid function spec mismatch");
    std::vector<double> out(values_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * values_[k] + b * other.values_[k];
    return {spec_, std::move(out), a * exterior_ + b * other.exterior_};
}

GridFunction GridFunction::scaled(double a) const
{
    std::vector<double> out(values_);
    for (double& v : out) v *= a;
    return {spec_, std::move(out), a * exterior_};
}

GridFunction GridFunction::mapped(const std::function<double(Point, double)>& fn) const
{
    std::vector<double> out(values_.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto [i, j] = spec_.unflat(k);
        out[k] = fn(spec_.node_point(i, j), values_[k]);
    }
    const double far = spec_.exterior_radius * 4.0;
    return {spec_, std::move(out), fn(Point{far, far}, exterior_)};
}

// ---------------------------------------------------------------------------

double eta_profile(double r)
{
    if (r <= 0.75) return 1.0;
    if (r >= 1.0) return 0.0;
    // C-infinity step: psi(1-s) / (psi(1-s) + psi(s)), psi(t) = exp(-1/t).
    const double s = (r - 0.75) / 0.25;
    const double a = std::exp(-1.0 / (1.0 - s));
    const double b = std::exp(-1.0 / s);
    return a / (a + b);
}

namespace {

struct Sampler {
    const GridSpec& spec;

    double limit(const descriptor::Constant& d) const { return d.c; }
    double limit(const descriptor::Gaussian&) const { return 0.0; }
    double limit(const descriptor::Bump&) const { return 0.0; }
    double limit(const descriptor::RadialPower&) const { return 0.0; }
    double limit(const descriptor::Custom& d) const { return d.at_infinity; }

    double eval(const descriptor::Constant& d, const Point&) const { return d.c; }
    double eval(const descriptor::Gaussian& d, const Point& x) const
    {
        const double r = norm2(x, spec.dim);
        return std::exp(-d.a * r * r);
    }
    double eval(const descriptor::Bump&, const Point& x) const
    {
        return eta_profile(norm2(x, spec.dim));
    }
    double eval(const descriptor::RadialPower& d, const Point& x) const
    {
        const double r = norm2(x, spec.dim);
        const double base = 1.0 - r * r;
        return base > 0.0 ? std::pow(base, d.p) : 0.0;
    }
    double eval(const descriptor::Custom& d, const Point& x) const { return d.fn(x); }
};

}  // namespace

GridFunction sample_function(const GridSpec& spec, const FunctionDescriptor& d)
{
    if (spec.n_cells == 0) throw InvalidArgument("uninitialized grid spec");
    const Sampler s{spec};
    std::vector<double> values(spec.node_count());
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto [i, j] = spec.unflat(k);
        const Point x = spec.node_point(i, j);
        values[k] = std::visit([&](const auto& dd) { return s.eval(dd, x); }, d);
        if (!std::isfinite(values[k]))
            throw InvalidArgument("descriptor produced a non-finite value on the grid");
    }
    const double c = std::visit([&](const auto& dd) { return s.limit(dd); }, d);
    return {spec, std::move(values), c};
}

GridFunction cutoff_eta(const GridSpec& spec)
{
    if (spec.half_width < 1.0) throw InvalidArgument("cutoff requires half_width >= 1");
    return sample_function(spec, descriptor::Bump{});
}

// ---------------------------------------------------------------------------

SetIndicator::SetIndicator(GridSpec spec) : spec_(spec), cells_(spec.cell_count(), 0) {}

SetIndicator::SetIndicator(GridSpec spec, std::vector<std::uint8_t> cells)
    : spec_(spec), cells_(std::move(cells))
{
    if (cells_.size() != spec_.cell_count())
        throw InvalidArgument("indicator size does not match its spec");
}

std::size_t SetIndicator::count() const
{
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(),
                                                  [](std::uint8_t c) { return c != 0; }));
}

double SetIndicator::measure() const { return static_cast<double>(count()) * spec_.cell_volume(); }

GridFunction SetIndicator::node_fraction() const
{
    std::vector<double> values(spec_.node_count(), 0.0);
    const int n = spec_.n_cells;
    const int off = spec_.box_half;
    auto cell_in = [&](int ci, int cj) {
        if (ci < 0 || ci >= n) return 0.0;
        if (spec_.dim == 2 && (cj < 0 || cj >= n)) return 0.0;
        return contains(ci, cj) ? 1.0 : 0.0;
    };
    // Node i is the upper corner of cell i+off-1 and the lower corner of cell i+off.
    if (spec_.dim == 1) {
        for (int i = -off; i <= off; ++i) {
            const int c = i + off;
            values[spec_.flat(i, 0)] = 0.5 * (cell_in(c - 1, 0) + cell_in(c, 0));
        }
    } else {
        for (int j = -off; j <= off; ++j)
            for (int i = -off; i <= off; ++i) {
                const int ci = i + off;
                const int cj = j + off;
                values[spec_.flat(i, j)] = 0.25 * (cell_in(ci - 1, cj - 1) + cell_in(ci, cj - 1) +
                                                   cell_in(ci - 1, cj) + cell_in(ci, cj));
            }
    }
    return {spec_, std::move(values), 0.0};
}

double indicator_measure(const SetIndicator& ind) { return ind.measure(); }

// ---------------------------------------------------------------------------

Point DyadicCube::center(const GridSpec& spec) const
{
    const double half = 0.5 * side_cells;
    return {-spec.half_width + (lower[0] + half) * spec.h,
            spec.dim == 2 ? -spec.half_width + (lower[1] + half) * spec.h : 0.0};
}

double DyadicCube::measure(const GridSpec& spec) const
{
    return static_cast<double>(cell_count(spec.dim)) * spec.cell_volume();
}

std::size_t DyadicCube::cell_count(int dim) const
{
    const auto s = static_cast<std::size_t>(side_cells);
    return dim == 2 ? s * s : s;
}

bool DyadicCube::contains_cell(int ci, int cj, int dim) const
{
    if (ci < lower[0] || ci >= lower[0] + side_cells) return false;
    if (dim == 1) return true;
    return cj >= lower[1] && cj < lower[1] + side_cells;
}

bool DyadicCube::contains(const DyadicCube& o, int dim) const
{
    for (int a = 0; a < dim; ++a)
        if (o.lower[a] < lower[a] || o.lower[a] + o.side_cells > lower[a] + side_cells) return false;
    return true;
}

bool DyadicCube::interiors_overlap(const DyadicCube& o, int dim) const
{
    for (int a = 0; a < dim; ++a) {
        const int lo = std::max(lower[a], o.lower[a]);
        const int hi = std::min(lower[a] + side_cells, o.lower[a] + o.side_cells);
        if (hi <= lo) return false;
    }
    return true;
}

DyadicCube DyadicCube::parent(int dim) const
{
    DyadicCube p;
    p.side_cells = side_cells * 2;
    p.level = level - 1;
    for (int a = 0; a < dim; ++a) p.lower[a] = lower[a] - (lower[a] % p.side_cells);
    return p;
}

std::vector<DyadicCube> DyadicCube::children(int dim) const
{
    const int s = side_cells / 2;
    std::vector<DyadicCube> out;
    if (s < 1) return out;
    // Lexicographic order: first axis fastest.
    const int ny = dim == 2 ? 2 : 1;
    for (int b = 0; b < ny; ++b)
        for (int a = 0; a < 2; ++a) {
            DyadicCube c;
            c.side_cells = s;
            c.level = level + 1;
            c.lower = {lower[0] + a * s, dim == 2 ? lower[1] + b * s : 0};
            out.push_back(c);
        }
    return out;
}

DyadicCube root_cube(const GridSpec& spec) { return {{0, 0}, spec.n_cells, 0}; }

// ---------------------------------------------------------------------------

bool Region::contains(const Point& x, int dim) const
{
    const Point d{x[0] - center[0], dim == 2 ? x[1] - center[1] : 0.0};
    const double r = kind == Kind::Ball ? norm2(d, dim) : norm_inf(d, dim);
    const double tol = 1e-12 * std::max(1.0, radius);
    return closed ? r <= radius + tol : r < radius - tol;
}

std::string Region::describe() const
{
    std::ostringstream os;
    os << (kind == Kind::Ball ? "ball" : "cube") << "(center=" << fmt_double(center[0]) << ","
       << fmt_double(center[1]) << " radius=" << fmt_double(radius)
       << (closed ? " closed" : " open") << ")";
    return os.str();
}

}  // namespace nlest
