#include "nlest/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlest/error.hpp"

namespace nlest {

void EllipticityParams::validate() const
{
    if (!(sigma > 0.0 && sigma < 2.0)) throw InvalidArgument("sigma must lie in (0,2)");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
    if (!(Lambda >= lambda) || !std::isfinite(Lambda))
        throw InvalidArgument("Lambda must be finite and at least lambda");
}

// ---------------------------------------------------------------------------

double sup_over(const ScalarField& v, const Region& region)
{
    double m = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (region.contains(v.point(k), v.spec().dim)) m = std::max(m, std::abs(v[k]));
    return m;
}

double inf_over(const ScalarField& v, const Region& region)
{
    double m = INFINITY;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (region.contains(v.point(k), v.spec().dim)) m = std::min(m, v[k]);
    return m;
}

ScalarField box_values(const GridFunction& u)
{
    ScalarField out(u.spec(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto n = out.node(k);
        out[k] = u.at(n[0], n[1]);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_same_grid(const GridFunction& u, const KernelWeights& w)
{
    if (u.spec() != w.spec) throw InvalidArgument("grid function and weights use different grids");
}

// Accumulates sum_k delta u(x, y_k) * pair(k) + delta_tail * tail_pair in the
// stored offset order.
template <class Acc, class Pair>
void accumulate(const GridFunction& u, const KernelWeights& w, int i, int j, Acc& acc,
                const Pair& pair)
{
    const GridSpec& s = u.spec();
    const double c = u.exterior();
    const double ux = u.at(i, j);
    const std::size_t nk = w.offsets.size();
    if (s.dim == 1) {
        const int m = s.ext_half;
        const double* v = u.values().data() + m;
        for (std::size_t q = 0; q < nk; ++q) {
            const int k = w.offsets[q][0];
            const int a = i + k;
            const int b = i - k;
            const double ua = (a >= -m && a <= m) ? v[a] : c;
            const double ub = (b >= -m && b <= m) ? v[b] : c;
            pair(acc, q, ua + ub - 2.0 * ux);
        }
    } else {
        for (std::size_t q = 0; q < nk; ++q) {
            const auto& k = w.offsets[q];
            const double ua = u.at(i + k[0], j + k[1]);
            const double ub = u.at(i - k[0], j - k[1]);
            pair(acc, q, ua + ub - 2.0 * ux);
        }
    }
    pair(acc, nk, 2.0 * c - 2.0 * ux);
}

template <class T, class Fn>
BoxField<T> for_box_nodes(const GridSpec& spec, T init, const std::optional<Region>& where,
                          const Fn& fn)
{
    BoxField<T> out(spec, init);
    const auto n = static_cast<long>(out.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        if (where && !where->contains(out.point(idx), spec.dim)) continue;
        const auto node = out.node(idx);
        out[idx] = fn(node[0], node[1]);
    }
    return out;
}

}  // namespace

SymMatrix sigma_hessian_at(const GridFunction& u, const KernelWeights& w, int i, int j)
{
    check_same_grid(u, w);
    SymMatrix acc = SymMatrix::zero(u.spec().dim);
    const std::size_t nk = w.offsets.size();
    accumulate(u, w, i, j, acc, [&](SymMatrix& a, std::size_t q, double d) {
        a.add_scaled(d, q < nk ? w.weights[q] : w.tail);
    });
    return acc;
}

SigmaHessian eval_sigma_hessian(const GridFunction& u, const KernelWeights& w,
                                const std::optional<Region>& where)
{
    check_same_grid(u, w);
    return for_box_nodes(u.spec(), SymMatrix::zero(u.spec().dim), where,
                         [&](int i, int j) { return sigma_hessian_at(u, w, i, j); });
}

ScalarField eval_LA(const GridFunction& u, const MatrixField& a, const KernelWeights& w,
                    const std::optional<Region>& where)
{
    check_same_grid(u, w);
    if (a.spec() != u.spec()) throw InvalidArgument("coefficient field uses a different grid");
    const std::size_t nk = w.offsets.size();
    return for_box_nodes(u.spec(), 0.0, where, [&](int i, int j) {
        const SymMatrix& A = a.at(i, j);
        double acc = 0.0;
        accumulate(u, w, i, j, acc, [&](double& s, std::size_t q, double d) {
            s += d * frobenius(A, q < nk ? w.weights[q] : w.tail);
        });
        return acc;
    });
}

// ---------------------------------------------------------------------------

namespace {

struct SignedSums {
    double pos = 0.0;
    double neg = 0.0;
};

SignedSums signed_sums(const SymEigen& e)
{
    SignedSums s;
    for (int k = 0; k < e.dim; ++k) {
        if (e.values[k] > 0.0) s.pos += e.values[k];
        if (e.values[k] < 0.0) s.neg += e.values[k];
    }
    return s;
}

}  // namespace

double pucci_plus(const SymMatrix& m, const EllipticityParams& p)
{
    const auto s = signed_sums(eigen_decompose(m));
    return p.Lambda * s.pos + p.lambda * s.neg;
}

double pucci_minus(const SymMatrix& m, const EllipticityParams& p)
{
    const auto s = signed_sums(eigen_decompose(m));
    return p.lambda * s.pos + p.Lambda * s.neg;
}

double pucci(const SymMatrix& m, const EllipticityParams& p, PucciSide side)
{
    return side == PucciSide::Plus ? pucci_plus(m, p) : pucci_minus(m, p);
}

ScalarField pucci_field(const SigmaHessian& m, const EllipticityParams& p, PucciSide side)
{
    ScalarField out(m.spec(), 0.0);
    for (std::size_t k = 0; k < m.size(); ++k) out[k] = pucci(m[k], p, side);
    return out;
}

ScalarField eval_pucci(const GridFunction& u, const KernelWeights& w, const EllipticityParams& p,
                       PucciSide side, const std::optional<Region>& where)
{
    return pucci_field(eval_sigma_hessian(u, w, where), p, side);
}

double nuclear_norm(const SymMatrix& m)
{
    const auto e = eigen_decompose(m);
    double s = 0.0;
    for (int k = 0; k < e.dim; ++k) s += std::abs(e.values[k]);
    return s;
}

bool admissible(const SymMatrix& a, double lower, double upper)
{
    const auto e = eigen_decompose(a);
    const double tol = 1e-12 * upper;
    for (int k = 0; k < e.dim; ++k)
        if (e.values[k] < lower - tol || e.values[k] > upper + tol) return false;
    return true;
}

void check_admissible(const MatrixField& a, const EllipticityParams& p,
                      const std::optional<Region>& where)
{
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (where && !where->contains(a.point(k), a.spec().dim)) continue;
        if (!admissible(a[k], p.lambda, p.Lambda)) {
            const auto n = a.node(k);
            std::ostringstream os;
            os << "coefficient matrix at node (" << n[0] << "," << n[1]
               << ") has eigenvalues outside [lambda, Lambda]";
            throw InvalidArgument(os.str());
        }
    }
}

SymMatrix extremal_realizer(const SymMatrix& m, const EllipticityParams& p, PucciSide side)
{
    const auto e = eigen_decompose(m);
    std::array<double, 2> d{p.lambda, p.lambda};
    for (int k = 0; k < e.dim; ++k) {
        const double v = e.values[k];
        if (side == PucciSide::Plus)
            d[k] = v > 0.0 ? p.Lambda : p.lambda;
        else
            d[k] = v < 0.0 ? p.Lambda : p.lambda;
    }
    return compose(e, d);
}

TildeA construct_tilde_A(const SymMatrix& m, const EllipticityParams& p)
{
    const auto e = eigen_decompose(m);
    std::array<double, 2> d{0.5 * p.lambda, 0.5 * p.lambda};
    double value = 0.0;
    for (int k = 0; k < e.dim; ++k) {
        d[k] = e.values[k] < 0.0 ? 2.0 * p.Lambda : 0.5 * p.lambda;
        value += d[k] * e.values[k];
    }
    return {compose(e, d), value};
}

SymMatrix realize_target_A(const SymMatrix& m, const EllipticityParams& p, double target)
{
    const double hi = pucci_plus(m, p);
    const double lo = pucci_minus(m, p);
    const double tol = 1e-12 * (1.0 + std::abs(hi) + std::abs(lo));
    if (!(target >= lo - tol && target <= hi + tol)) {
        std::ostringstream os;
        os.precision(17);
        os << "target " << target << " outside the Pucci interval [" << lo << ", " << hi << "]";
        throw HypothesisError(os.str());
    }
    const SymMatrix ap = extremal_realizer(m, p, PucciSide::Plus);
    const SymMatrix am = extremal_realizer(m, p, PucciSide::Minus);
    double t = hi > lo ? (target - lo) / (hi - lo) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return ap * t + am * (1.0 - t);
}

MatrixField construct_onesided_A(const GridFunction& u, const GridFunction& f,
                                 const EllipticityParams& p, const KernelWeights& w,
                                 const Region& domain)
{
    p.validate();
    if (f.spec() != u.spec()) throw InvalidArgument("source uses a different grid");
    const GridSpec& s = u.spec();
    const SigmaHessian dh = eval_sigma_hessian(u, w, domain);
    MatrixField out(s, SymMatrix::identity(s.dim, p.lambda));
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!domain.contains(out.point(k), s.dim)) continue;
        const auto n = out.node(k);
        const double fx = f.at(n[0], n[1]);
        const double fplus = std::max(fx, 0.0);
        const double fminus = std::max(-fx, 0.0);
        const double mp = pucci_plus(dh[k], p);
        const double mm = pucci_minus(dh[k], p);
        const double tol = 1e-9 * (1.0 + std::abs(mp) + std::abs(mm) + std::abs(fx));
        auto fail = [&](const char* what) {
            std::ostringstream os;
            os.precision(17);
            os << "hypothesis fails at node (" << n[0] << "," << n[1] << "): " << what
               << " [M+=" << mp << ", M-=" << mm << ", f=" << fx << "]";
            throw HypothesisError(os.str());
        };
        if (mp < -fminus - tol) fail("M+ u >= -f-");
        if (mm > fplus + tol) fail("M- u <= f+");
        const double lower = std::max(mm, -1.5 * fminus);
        const double upper = std::min(mp, 1.5 * fplus);
        double target = std::min(std::max(0.0, lower), upper);
        target = std::clamp(target, mm, mp);
        out[k] = realize_target_A(dh[k], p, target);
    }
    return out;
}

// ---------------------------------------------------------------------------

GridFunction rescale(const GridFunction& u, std::array<int, 2> x0, double l, double sigma)
{
    int e = 0;
    const double mant = std::frexp(l, &e);
    if (!(l > 0.0 && l <= 1.0) || mant != 0.5)
        throw InvalidArgument("rescale factor must be 2^{-k} with k >= 0");
    const GridSpec& s = u.spec();
    if (!s.in_extended(x0[0], x0[1])) throw InvalidArgument("rescale centre is off the grid");
    if (s.dim == 1 && x0[1] != 0) throw InvalidArgument("rescale centre has a second coordinate in 1D");

    const int shift = std::max(std::abs(x0[0]), std::abs(x0[1]));
    const int m2 = s.ext_half + shift;
    const double h2 = s.h / l;
    const GridSpec t = make_grid(s.dim, s.n_cells, s.half_width / l, m2 * h2);
    const double amp = std::pow(l, -sigma);

    std::vector<double> values(t.node_count());
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto [i, j] = t.unflat(k);
        values[k] = amp * u.at(x0[0] + i, s.dim == 2 ? x0[1] + j : 0);
    }
    return {t, std::move(values), amp * u.exterior()};
}

}  // namespace nlest
