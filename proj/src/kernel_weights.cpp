#include "nlest/kernel_weights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "nlest/checksum.hpp"
#include "nlest/error.hpp"

namespace nlest {

namespace {

GaussRule compute_gauss_legendre(int n)
{
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

// Gauss order per offset ring: finer near the origin where the kernel varies
// fastest relative to the cell size.
int gauss_order_for_ring(int ring)
{
    if (ring <= 1) return 16;
    if (ring <= 4) return 8;
    return 4;
}

// 1D cell weight (2 - sigma) * int_{a}^{b} y^{-1-sigma} dy for the unit cell
// around integer k >= 1, written to avoid cancellation for large k.
double cell_weight_1d(int k, double sigma)
{
    const double a = k - 0.5;
    const double log_ratio = std::log1p(1.0 / a);  // log((k + 1/2) / (k - 1/2))
    return (2.0 - sigma) / sigma * std::pow(a, -sigma) * -std::expm1(-sigma * log_ratio);
}

// (2 - sigma) * int_{a}^{b} y^{1-sigma} dy / k^2.
double moment_weight_1d(int k, double sigma)
{
    const double a = k - 0.5;
    const double log_ratio = std::log1p(1.0 / a);
    return std::pow(a, 2.0 - sigma) * std::expm1((2.0 - sigma) * log_ratio) /
           (static_cast<double>(k) * k);
}

// Origin cell share carried by each of e_1 and -e_1 (unit spacing):
// (2 - sigma) / 2 * int_{|z|_inf < 1/2} z z^T z_1^2 |z|^{-n-sigma-2} dz.
SymMatrix origin_share(int dim, double sigma)
{
    if (dim == 1) return {1, std::pow(0.5, 2.0 - sigma), 0.0, 0.0};
    // Polar form: (1/2) int_0^{2 pi} (cos^4, cos^2 sin^2) R(theta)^{2-sigma} d theta
    // with R = 1 / (2 max(|cos|, |sin|)); the integrand is smooth per octant.
    const GaussRule& g = gauss_legendre(48);
    const double oct = 0.25 * std::numbers::pi;
    double sxx = 0.0;
    double syy = 0.0;
    for (int o = 0; o < 8; ++o)
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double th = oct * (o + 0.5 * (1.0 + g.nodes[i]));
            const double c = std::cos(th);
            const double s = std::sin(th);
            const double r = 0.5 / std::max(std::abs(c), std::abs(s));
            const double w = 0.5 * oct * g.weights[i] * std::pow(r, 2.0 - sigma);
            sxx += w * c * c * c * c;
            syy += w * c * c * s * s;
        }
    return {2, 0.5 * sxx, 0.0, 0.5 * syy};
}

}  // namespace

WeightScheme parse_weight_scheme(const std::string& name)
{
    if (name == "cell") return WeightScheme::CellIntegral;
    if (name == "moment") return WeightScheme::SecondMoment;
    throw InvalidArgument("unknown weight scheme '" + name + "' (expected cell or moment)");
}

std::string to_string(WeightScheme s)
{
    return s == WeightScheme::CellIntegral ? "cell" : "moment";
}

const GaussRule& gauss_legendre(int n)
{
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

SymMatrix cell_tensor_2d(double a0, double a1, double sigma, int q, int subdivisions,
                         double radial_power)
{
    const GaussRule& g = gauss_legendre(q);
    const double sub = 1.0 / subdivisions;
    const double p = 0.5 * (radial_power != 0.0 ? radial_power : -(4.0 + sigma));
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (int sb = 0; sb < subdivisions; ++sb) {
        const double c1 = a1 - 0.5 + (sb + 0.5) * sub;
        for (int sa = 0; sa < subdivisions; ++sa) {
            const double c0 = a0 - 0.5 + (sa + 0.5) * sub;
            for (int jb = 0; jb < q; ++jb) {
                const double z1 = c1 + 0.5 * sub * g.nodes[jb];
                for (int ja = 0; ja < q; ++ja) {
                    const double z0 = c0 + 0.5 * sub * g.nodes[ja];
                    const double w = g.weights[ja] * g.weights[jb];
                    const double k = w * std::pow(z0 * z0 + z1 * z1, p);
                    sxx += k * z0 * z0;
                    sxy += k * z0 * z1;
                    syy += k * z1 * z1;
                }
            }
        }
    }
    const double jac = 0.25 * sub * sub * (2.0 - sigma);
    return {2, sxx * jac, sxy * jac, syy * jac};
}

double truncated_kernel_mass(int dim, double sigma, double L)
{
    if (dim == 1) return 2.0 * (2.0 - sigma) * std::pow(L, -sigma) / sigma;
    // Polar coordinates: int_theta (L / m(theta))^{-sigma} / sigma with
    // m = max(|cos|, |sin|), i.e. 8 * int_0^{pi/4} cos^sigma.
    const GaussRule& g = gauss_legendre(48);
    const double half = 0.125 * std::numbers::pi;
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double th = half * (1.0 + g.nodes[i]);
        s += g.weights[i] * std::pow(std::cos(th), sigma);
    }
    const double angular = 8.0 * half * s;
    return (2.0 - sigma) * std::pow(L, -sigma) / sigma * angular;
}

double KernelWeights::total_trace() const
{
    double t = 0.0;
    for (const auto& w : weights) t += w.trace();
    return t + tail.trace();
}

std::uint64_t KernelWeights::checksum() const
{
    Fnv1a h;
    h.add(spec.dim);
    h.add(spec.n_cells);
    h.add(spec.half_width);
    h.add(spec.exterior_radius);
    h.add(sigma);
    h.add(to_string(scheme));
    for (const auto& k : offsets) {
        h.add(k[0]);
        h.add(k[1]);
    }
    return h.value();
}

KernelWeights build_weights(const GridSpec& spec, double sigma, WeightScheme scheme)
{
    if (!(sigma > 0.0 && sigma < 2.0)) throw InvalidArgument("sigma must lie in (0,2)");
    if (spec.n_cells == 0) throw InvalidArgument("uninitialized grid spec");

    KernelWeights kw;
    kw.spec = spec;
    kw.sigma = sigma;
    kw.scheme = scheme;
    const bool moment = scheme == WeightScheme::SecondMoment;
    const int m = spec.ext_half;
    const double scale = std::pow(spec.h, -sigma);

    if (spec.dim == 1) {
        for (int k = -m; k <= m; ++k)
            if (k != 0) kw.offsets.push_back({k, 0});
    } else {
        for (int b = -m; b <= m; ++b)
            for (int a = -m; a <= m; ++a)
                if (a != 0 || b != 0) kw.offsets.push_back({a, b});
    }
    std::sort(kw.offsets.begin(), kw.offsets.end(), [](const auto& x, const auto& y) {
        const long nx = static_cast<long>(x[0]) * x[0] + static_cast<long>(x[1]) * x[1];
        const long ny = static_cast<long>(y[0]) * y[0] + static_cast<long>(y[1]) * y[1];
        if (nx != ny) return nx < ny;
        return x < y;
    });

    kw.weights.reserve(kw.offsets.size());
    if (spec.dim == 1) {
        for (const auto& k : kw.offsets) {
            const int a = std::abs(k[0]);
            const double v = moment ? moment_weight_1d(a, sigma) : cell_weight_1d(a, sigma);
            kw.weights.push_back({1, scale * v, 0.0, 0.0});
        }
    } else {
        // The kernel is even and invariant under axis swaps and reflections:
        // compute each canonical cell (a >= b >= 0) once and map it, which makes
        // W_k = W_{-k} and the 90-degree equivariance exact.
        std::map<std::pair<int, int>, SymMatrix> canonical;
        for (const auto& k : kw.offsets) {
            const int a = std::max(std::abs(k[0]), std::abs(k[1]));
            const int b = std::min(std::abs(k[0]), std::abs(k[1]));
            auto it = canonical.find({a, b});
            if (it == canonical.end()) {
                const double power = moment ? -(2.0 + sigma) : 0.0;
                SymMatrix c = cell_tensor_2d(a, b, sigma, gauss_order_for_ring(a), 1, power);
                if (moment) c = c * (1.0 / (static_cast<double>(a) * a + static_cast<double>(b) * b));
                c = c * scale;
                if (a == b) c.xx = c.yy = 0.5 * (c.xx + c.yy);
                it = canonical.emplace(std::make_pair(a, b), c).first;
            }
            const SymMatrix& c = it->second;
            SymMatrix w = std::abs(k[0]) >= std::abs(k[1]) ? c : SymMatrix{2, c.yy, c.xy, c.xx};
            if ((k[0] < 0) != (k[1] < 0) && k[0] != 0 && k[1] != 0) w.xy = -w.xy;
            if (k[0] == 0 || k[1] == 0) w.xy = 0.0;
            kw.weights.push_back(w);
        }
    }

    if (moment) {
        const SymMatrix share = origin_share(spec.dim, sigma) * scale;
        for (std::size_t q = 0; q < kw.offsets.size(); ++q) {
            const auto& k = kw.offsets[q];
            if (std::abs(k[0]) + std::abs(k[1]) != 1) continue;
            // The e_2 share is the e_1 share with the axes swapped.
            if (k[0] != 0)
                kw.weights[q] += share;
            else
                kw.weights[q] += SymMatrix{2, share.yy, 0.0, share.xx};
        }
    }

    // Tail: everything outside the cube of half-side (m + 1/2) h. Isotropic by
    // the symmetries of the cube.
    const double mass = truncated_kernel_mass(spec.dim, sigma, (m + 0.5) * spec.h);
    kw.tail = SymMatrix::identity(spec.dim, mass / spec.dim);

    double body = 0.0;
    for (const auto& w : kw.weights) body += w.trace();
    kw.tail_warning = kw.tail.trace() > 0.5 * body;
    return kw;
}

}  // namespace nlest
