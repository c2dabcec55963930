#include "nlest/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlest/error.hpp"

namespace nlest {

bool OperatorMatrix::is_unknown(int i, int j) const
{
    const int b = spec.box_half;
    if (i < -b || i > b) return false;
    if (spec.dim == 2 && (j < -b || j > b)) return false;
    const auto side = static_cast<std::size_t>(2 * b + 1);
    std::size_t idx = static_cast<std::size_t>(i + b);
    if (spec.dim == 2) idx += side * static_cast<std::size_t>(j + b);
    return unknown_of_node[idx] >= 0;
}

namespace {

long unknown_index(const OperatorMatrix& s, int i, int j)
{
    const int b = s.spec.box_half;
    if (i < -b || i > b) return -1;
    if (s.spec.dim == 2 && (j < -b || j > b)) return -1;
    const auto side = static_cast<std::size_t>(2 * b + 1);
    std::size_t idx = static_cast<std::size_t>(i + b);
    if (s.spec.dim == 2) idx += side * static_cast<std::size_t>(j + b);
    return s.unknown_of_node[idx];
}

}  // namespace

Eigen::VectorXd OperatorMatrix::boundary_contribution(const GridFunction& g) const
{
    if (g.spec() != spec) throw InvalidArgument("exterior data uses a different grid");
    const auto n = static_cast<long>(size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    if (g.sup_norm() == 0.0) return b;
    const KernelWeights& w = *weights;
    const double c = g.exterior();
#pragma omp parallel for schedule(dynamic, 8)
    for (long r = 0; r < n; ++r) {
        const auto [i, j] = unknown_nodes[static_cast<std::size_t>(r)];
        const SymMatrix& A = coefficients.at(i, j);
        auto value = [&](int a, int bb) {
            return unknown_index(*this, a, bb) >= 0 ? 0.0 : g.at(a, bb);
        };
        double acc = 0.0;
        for (std::size_t q = 0; q < w.offsets.size(); ++q) {
            const auto& k = w.offsets[q];
            const double d = value(i + k[0], j + k[1]) + value(i - k[0], j - k[1]);
            acc += d * frobenius(A, w.weights[q]);
        }
        acc += 2.0 * c * frobenius(A, w.tail);
        b[r] = acc;
    }
    return b;
}

Eigen::VectorXd OperatorMatrix::restrict(const GridFunction& u) const
{
    Eigen::VectorXd x(static_cast<long>(size()));
    for (std::size_t r = 0; r < size(); ++r)
        x[static_cast<long>(r)] = u.at(unknown_nodes[r][0], unknown_nodes[r][1]);
    return x;
}

GridFunction OperatorMatrix::extend(const Eigen::VectorXd& x, const GridFunction& g) const
{
    std::vector<double> values = g.values();
    for (std::size_t r = 0; r < size(); ++r)
        values[spec.flat(unknown_nodes[r][0], unknown_nodes[r][1])] = x[static_cast<long>(r)];
    return {spec, std::move(values), g.exterior()};
}

OperatorMatrix assemble(const MatrixField& a, std::shared_ptr<const KernelWeights> w,
                        const Region& domain, const EllipticityParams& p)
{
    p.validate();
    if (!w) throw InvalidArgument("missing kernel weights");
    if (a.spec() != w->spec) throw InvalidArgument("coefficient field uses a different grid");
    check_admissible(a, p, domain);

    OperatorMatrix s;
    s.spec = w->spec;
    s.domain = domain;
    s.coefficients = a;
    s.weights = w;

    const BoxField<int> probe(s.spec, 0);
    s.unknown_of_node.assign(probe.size(), -1);
    for (std::size_t k = 0; k < probe.size(); ++k) {
        if (!domain.contains(probe.point(k), s.spec.dim)) continue;
        s.unknown_of_node[k] = static_cast<long>(s.unknown_nodes.size());
        s.unknown_nodes.push_back(probe.node(k));
    }
    // Every unknown must be strictly inside the box so D stays a subset of it.
    for (const auto& nd : s.unknown_nodes) {
        const int b = s.spec.box_half;
        if (std::abs(nd[0]) >= b || (s.spec.dim == 2 && std::abs(nd[1]) >= b))
            throw InvalidArgument("solve domain " + domain.describe() +
                                  " reaches the edge of the computational box");
    }

    const auto n = static_cast<long>(s.size());
    s.matrix = Eigen::MatrixXd::Zero(n, n);
    const KernelWeights& kw = *w;
    std::vector<double> margins(static_cast<std::size_t>(n), 0.0);
    std::vector<double> negative(static_cast<std::size_t>(n), 0.0);

#pragma omp parallel for schedule(dynamic, 8)
    for (long r = 0; r < n; ++r) {
        const auto [i, j] = s.unknown_nodes[static_cast<std::size_t>(r)];
        const SymMatrix& A = a.at(i, j);
        double diag = 0.0;
        double min_weight = INFINITY;
        for (std::size_t q = 0; q < kw.offsets.size(); ++q) {
            const auto& k = kw.offsets[q];
            const double wk = frobenius(A, kw.weights[q]);
            min_weight = std::min(min_weight, wk);
            diag -= 2.0 * wk;
            const long cp = unknown_index(s, i + k[0], j + k[1]);
            const long cm = unknown_index(s, i - k[0], j - k[1]);
            if (cp >= 0) s.matrix(r, cp) += wk;
            if (cm >= 0) s.matrix(r, cm) += wk;
        }
        diag -= 2.0 * frobenius(A, kw.tail);
        s.matrix(r, r) += diag;
        negative[static_cast<std::size_t>(r)] = min_weight;
    }

    // Certificate, row by row.
    double min_margin = INFINITY;
    for (long r = 0; r < n; ++r) {
        double off = 0.0;
        for (long c = 0; c < n; ++c) {
            if (c == r) continue;
            const double v = s.matrix(r, c);
            if (v < 0.0) {
                std::ostringstream os;
                os << "monotonicity violated in row " << r << ": off-diagonal entry " << v;
                throw NumericalError(os.str());
            }
            off += v;
        }
        if (!(negative[static_cast<std::size_t>(r)] >= 0.0)) {
            std::ostringstream os;
            os << "monotonicity violated in row " << r << ": stencil weight "
               << negative[static_cast<std::size_t>(r)];
            throw NumericalError(os.str());
        }
        const double margin = -s.matrix(r, r) - off;
        if (!(margin > 0.0)) {
            std::ostringstream os;
            os << "monotonicity violated in row " << r << ": diagonal margin " << margin;
            throw NumericalError(os.str());
        }
        min_margin = std::min(min_margin, margin);
    }
    s.min_row_margin = n > 0 ? min_margin : 0.0;
    s.monotone_certified = true;
    return s;
}

// ---------------------------------------------------------------------------

FactoredSystem::FactoredSystem(std::shared_ptr<const OperatorMatrix> sys) : sys_(std::move(sys))
{
    if (!sys_) throw InvalidArgument("missing operator matrix");
    if (sys_->size() == 0) return;
    lu_.compute(sys_->matrix);
    const double rc = lu_.rcond();
    if (!(rc > 1e-14)) {
        std::ostringstream os;
        os << "singular system (reciprocal condition estimate " << rc << ")";
        throw NumericalError(os.str());
    }
}

GridFunction FactoredSystem::solve(const GridFunction& f, const GridFunction& g) const
{
    const OperatorMatrix& s = *sys_;
    if (f.spec() != s.spec || g.spec() != s.spec)
        throw InvalidArgument("solve data uses a different grid");
    if (s.size() == 0) return g;
    const Eigen::VectorXd rhs = -s.restrict(f) - s.boundary_contribution(g);
    const Eigen::VectorXd x = lu_.solve(rhs);
    const Eigen::VectorXd res = s.matrix * x - rhs;
    const double scale = s.matrix.cwiseAbs().rowwise().sum().maxCoeff() * x.cwiseAbs().maxCoeff() +
                         rhs.cwiseAbs().maxCoeff();
    last_residual_ = scale > 0.0 ? res.cwiseAbs().maxCoeff() / scale : 0.0;
    if (!std::isfinite(last_residual_) || last_residual_ > 1e-9) {
        std::ostringstream os;
        os << "solve residual " << last_residual_ << " exceeds 1e-9";
        throw NumericalError(os.str());
    }
    return s.extend(x, g);
}

GridFunction solve(const OperatorMatrix& sys, const GridFunction& f, const GridFunction& g)
{
    const FactoredSystem fs(std::make_shared<const OperatorMatrix>(sys));
    return fs.solve(f, g);
}

ComparisonReport comparison_check(const FactoredSystem& sys, const GridFunction& f1,
                                  const GridFunction& g1, const GridFunction& f2,
                                  const GridFunction& g2)
{
    const OperatorMatrix& s = sys.system();
    const GridSpec& spec = s.spec;
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        const auto [i, j] = spec.unflat(k);
        if (s.is_unknown(i, j)) {
            if (f1[k] < f2[k]) throw InvalidArgument("comparison requires f1 >= f2 on the domain");
        } else if (g1[k] < g2[k]) {
            throw InvalidArgument("comparison requires g1 >= g2 off the domain");
        }
    }
    if (g1.exterior() < g2.exterior())
        throw InvalidArgument("comparison requires g1 >= g2 off the domain");

    const GridFunction u1 = sys.solve(f1, g1);
    const GridFunction u2 = sys.solve(f2, g2);
    ComparisonReport rep;
    double worst = 0.0;
    for (std::size_t k = 0; k < spec.node_count(); ++k) worst = std::max(worst, u2[k] - u1[k]);
    rep.max_violation = worst;
    rep.tolerance = 1e-10 * std::max({1.0, u1.sup_norm(), u2.sup_norm()});
    rep.passed = worst <= rep.tolerance;
    return rep;
}

// ---------------------------------------------------------------------------

double barrier_profile(double r, double q, double cap_radius, double support_radius)
{
    if (r >= support_radius) return 0.0;
    const double floor_value = std::pow(support_radius, -q);
    if (r >= cap_radius) return std::pow(r, -q) - floor_value;
    // a - b r^2 matching value and slope of r^{-q} at cap_radius.
    const double b = 0.5 * q * std::pow(cap_radius, -q - 2.0);
    const double a = std::pow(cap_radius, -q) + b * cap_radius * cap_radius;
    return a - b * r * r - floor_value;
}

BarrierCertificate barrier_construct(const GridSpec& spec, const EllipticityParams& p,
                                     const BarrierOptions& opts)
{
    p.validate();
    const double support = 8.0 * std::sqrt(static_cast<double>(spec.dim));
    if (spec.half_width < support)
        throw InvalidArgument("barrier needs a computational box containing B_{8 sqrt(n)}");
    if (!(opts.cap_radius > 0.0 && opts.cap_radius < 1.0))
        throw InvalidArgument("barrier cap radius must lie in (0,1)");

    const KernelWeights w = build_weights(spec, p.sigma);
    const Region unit_ball = Region::ball(1.0);
    const Region q6 = Region::cube(6.0, true);

    BarrierCertificate best;
    for (double q = opts.q_min; q <= opts.q_max + 1e-12; q += opts.q_step) {
        const GridFunction phi = sample_function(
            spec, descriptor::Custom{[&](Point x) {
                                         return barrier_profile(norm2(x, spec.dim), q,
                                                                opts.cap_radius, support);
                                     },
                                     0.0});
        const ScalarField mminus = eval_pucci(phi, w, p, PucciSide::Minus);

        double psi_max = 0.0;
        double outside_min = INFINITY;
        for (std::size_t k = 0; k < mminus.size(); ++k) {
            if (unit_ball.contains(mminus.point(k), spec.dim))
                psi_max = std::max(psi_max, -mminus[k]);
            else
                outside_min = std::min(outside_min, mminus[k]);
        }
        const double scale = psi_max > 0.0 ? 1.0 / psi_max : 1.0;
        best.sweep.emplace_back(q, outside_min);
        if (!(outside_min * scale >= -1e-8)) continue;

        BarrierCertificate cert;
        cert.q = q;
        cert.scale = scale;
        cert.sweep = best.sweep;
        cert.phi = phi.scaled(scale);
        std::vector<double> psi(spec.node_count(), 0.0);
        double slack = INFINITY;
        for (std::size_t k = 0; k < mminus.size(); ++k) {
            const Point x = mminus.point(k);
            const auto nd = mminus.node(k);
            const double m = scale * mminus[k];
            double ps = 0.0;
            if (unit_ball.contains(x, spec.dim)) ps = std::max(0.0, -m);
            psi[spec.flat(nd[0], nd[1])] = ps;
            slack = std::min(slack, m + ps);
        }
        cert.psi = GridFunction(spec, std::move(psi), 0.0);
        cert.min_slack = slack;

        cert.c_phi = INFINITY;
        bool support_ok = cert.phi.exterior() == 0.0;
        for (std::size_t k = 0; k < spec.node_count(); ++k) {
            const auto [i, j] = spec.unflat(k);
            const Point x = spec.node_point(i, j);
            if (norm2(x, spec.dim) > support && cert.phi[k] != 0.0) support_ok = false;
            if (q6.contains(x, spec.dim)) cert.c_phi = std::min(cert.c_phi, cert.phi[k]);
        }
        cert.support_ok = support_ok;
        double psi_hi = 0.0;
        for (double v : cert.psi.values()) psi_hi = std::max(psi_hi, v);
        cert.passed = cert.min_slack >= -1e-8 && cert.c_phi > 0.0 && cert.support_ok &&
                      psi_hi <= 1.0 + 1e-12;
        if (cert.passed) return cert;
    }

    std::ostringstream os;
    os << "no barrier exponent certified; unscaled min slack outside B_1 per q:";
    for (const auto& [q, s] : best.sweep) os << " q=" << q << ":" << s;
    throw NumericalError(os.str());
}

}  // namespace nlest
