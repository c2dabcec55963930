#include "nlest/coefficients.hpp"

#include <cmath>
#include <numbers>

#include "nlest/error.hpp"
#include "nlest/random.hpp"

namespace nlest {

CoefficientFamily parse_coefficient_family(const std::string& name)
{
    if (name == "constant") return CoefficientFamily::Constant;
    if (name == "checkerboard") return CoefficientFamily::Checkerboard;
    if (name == "random-rotation") return CoefficientFamily::RandomRotation;
    if (name == "smooth") return CoefficientFamily::Smooth;
    throw InvalidArgument("unknown coefficient family '" + name + "'");
}

std::string to_string(CoefficientFamily f)
{
    switch (f) {
    case CoefficientFamily::Constant: return "constant";
    case CoefficientFamily::Checkerboard: return "checkerboard";
    case CoefficientFamily::RandomRotation: return "random-rotation";
    case CoefficientFamily::Smooth: return "smooth";
    }
    return "unknown";
}

namespace {

std::int64_t tile_index(double x, double tile)
{
    // Offset by half a tile so that tile boundaries avoid grid nodes.
    return static_cast<std::int64_t>(std::floor(x / tile + 0.5));
}

double tile_uniform(std::uint64_t seed, std::int64_t a, std::int64_t b)
{
    const auto ua = static_cast<std::uint64_t>(a);
    const auto ub = static_cast<std::uint64_t>(b);
    return u01_from_bits(splitmix64(seed ^ splitmix64(ua * 0x9e3779b97f4a7c15ULL + ub)));
}

}  // namespace

CoefficientFn coefficient_function(CoefficientFamily family, int dim, const EllipticityParams& p,
                                   std::uint64_t seed, double tile)
{
    p.validate();
    if (!(tile > 0.0)) throw InvalidArgument("coefficient tile width must be positive");
    const double lo = p.lambda;
    const double hi = p.Lambda;
    switch (family) {
    case CoefficientFamily::Constant:
        return [dim, lo](const Point&) { return SymMatrix::identity(dim, lo); };
    case CoefficientFamily::Checkerboard:
        return [dim, lo, hi, tile](const Point& x) {
            const std::int64_t a = tile_index(x[0], tile);
            const std::int64_t b = dim == 2 ? tile_index(x[1], tile) : 0;
            const bool even = ((a + b) % 2 + 2) % 2 == 0;
            if (dim == 1) return SymMatrix{1, even ? lo : hi, 0.0, 0.0};
            return even ? SymMatrix{2, lo, 0.0, hi} : SymMatrix{2, hi, 0.0, lo};
        };
    case CoefficientFamily::RandomRotation:
        return [dim, lo, hi, tile, seed](const Point& x) {
            const std::int64_t a = tile_index(x[0], tile);
            const std::int64_t b = dim == 2 ? tile_index(x[1], tile) : 0;
            const double r = tile_uniform(seed, a, b);
            if (dim == 1) return SymMatrix{1, lo + (hi - lo) * r, 0.0, 0.0};
            return rotated_diagonal(std::numbers::pi * r, lo, hi);
        };
    case CoefficientFamily::Smooth:
        return [dim, lo, hi](const Point& x) {
            if (dim == 1) {
                const double s = 0.5 * (1.0 + std::sin(2.0 * x[0]));
                return SymMatrix{1, lo + (hi - lo) * s, 0.0, 0.0};
            }
            return rotated_diagonal(0.7 * x[0] + 0.4 * x[1], lo, hi);
        };
    }
    throw InvalidArgument("unknown coefficient family");
}

MatrixField sample_coefficients(const GridSpec& spec, const CoefficientFn& fn)
{
    MatrixField out(spec, SymMatrix::zero(spec.dim));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fn(out.point(k));
    return out;
}

CoefficientFn rescaled_coefficients(CoefficientFn fn, Point x0, double l)
{
    return [fn = std::move(fn), x0, l](const Point& x) {
        return fn(Point{x0[0] + l * x[0], x0[1] + l * x[1]});
    };
}

}  // namespace nlest
