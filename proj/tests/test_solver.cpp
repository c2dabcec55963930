#include <doctest.h>

#include <cmath>
#include <memory>

#include "nlest/coefficients.hpp"
#include "nlest/error.hpp"
#include "nlest/operators.hpp"
#include "nlest/random.hpp"
#include "nlest/solver.hpp"
#include "oracles.hpp"

using namespace nlest;

namespace {

struct Problem {
    std::shared_ptr<const KernelWeights> w;
    std::shared_ptr<const OperatorMatrix> sys;
    std::unique_ptr<FactoredSystem> lu;
};

Problem make_problem(const GridSpec& s, const MatrixField& a, const EllipticityParams& p,
                     const Region& d = Region::ball(1.0), WeightScheme scheme = WeightScheme::SecondMoment)
{
    Problem pr;
    pr.w = std::make_shared<const KernelWeights>(build_weights(s, p.sigma, scheme));
    pr.sys = std::make_shared<const OperatorMatrix>(assemble(a, pr.w, d, p));
    pr.lu = std::make_unique<FactoredSystem>(pr.sys);
    return pr;
}

GridFunction random_function(const GridSpec& s, Rng& rng, double lo, double hi)
{
    std::vector<double> v(s.node_count());
    for (auto& x : v) x = rng.uniform(lo, hi);
    return {s, std::move(v), rng.uniform(lo, hi)};
}

double max_diff(const GridFunction& a, const GridFunction& b)
{
    double m = std::abs(a.exterior() - b.exterior());
    for (std::size_t k = 0; k < a.values().size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_CASE("ball solution of the constant-coefficient problem")
{
    for (double sigma : {1.0, 1.5}) {
        const GridSpec s = make_grid(1, 512, 2.0, 4.0);
        const EllipticityParams p{sigma, 1.0, 1.0};
        const Problem pr = make_problem(s, MatrixField(s, SymMatrix::identity(1)), p);
        const GridFunction u = pr.lu->solve(GridFunction::constant(s, 1.0), GridFunction::zeros(s));
        // L_I = (2 - sigma) int delta u |y|^{-1-sigma} = -(2 (2 - sigma) / c) (-Delta)^{sigma/2}.
        const double amp = oracle::fractional_constant(1, sigma) / (2.0 * (2.0 - sigma)) * oracle::ball_amplitude(1, sigma);
        double err = 0.0;
        for (int i = -s.box_half; i <= s.box_half; ++i) {
            const double x = i * s.h;
            const double exact = std::abs(x) < 1.0 ? amp * std::pow(1.0 - x * x, 0.5 * sigma) : 0.0;
            err = std::max(err, std::abs(u.at(i) - exact));
        }
        CHECK(err / amp <= 0.02);
        CHECK(pr.lu->last_residual() <= 1e-12);
    }
}

TEST_CASE("matrix rows reproduce eval_LA")
{
    Rng rng(21);
    for (int dim : {1, 2}) {
        const GridSpec s = make_grid(dim, dim == 1 ? 64 : 16, 1.0, 2.0);
        const EllipticityParams p{1.3, 1.0, 2.0};
        const MatrixField a = sample_coefficients(s, coefficient_function(CoefficientFamily::RandomRotation, dim, p, 4, 0.125));
        const Problem pr = make_problem(s, a, p);
        const GridFunction u = random_function(s, rng, -1.0, 1.0);
        const Eigen::VectorXd lhs = pr.sys->matrix * pr.sys->restrict(u) + pr.sys->boundary_contribution(u);
        const ScalarField ref = eval_LA(u, a, *pr.w);
        for (std::size_t r = 0; r < pr.sys->size(); ++r) {
            const auto n = pr.sys->unknown_nodes[r];
            CHECK(lhs[static_cast<Eigen::Index>(r)] == doctest::Approx(ref.at(n[0], n[1])).epsilon(1e-11));
        }
    }
}

TEST_CASE("monotone certificate for every coefficient family")
{
    for (int dim : {1, 2})
        for (auto fam : {CoefficientFamily::Constant, CoefficientFamily::Checkerboard, CoefficientFamily::RandomRotation,
                         CoefficientFamily::Smooth})
            for (double sigma : {0.5, 1.0, 1.5, 1.9}) {
                const GridSpec s = make_grid(dim, dim == 1 ? 64 : 16, 1.0, 2.0);
                const EllipticityParams p{sigma, 1.0, 2.0};
                const MatrixField a = sample_coefficients(s, coefficient_function(fam, dim, p, 9, 0.125));
                const Problem pr = make_problem(s, a, p);
                CHECK(pr.sys->monotone_certified);
                CHECK(pr.sys->min_row_margin > 0.0);
                const Eigen::MatrixXd& m = pr.sys->matrix;
                for (Eigen::Index r = 0; r < m.rows(); ++r) {
                    double off = 0.0;
                    for (Eigen::Index c = 0; c < m.cols(); ++c)
                        if (c != r) {
                            CHECK(m(r, c) >= 0.0);
                            off += m(r, c);
                        }
                    CHECK(-m(r, r) >= off);
                }
            }
}

TEST_CASE("inadmissible coefficients are rejected")
{
    const GridSpec s = make_grid(1, 32, 1.0, 2.0);
    const EllipticityParams p{1.0, 1.0, 2.0};
    MatrixField a(s, SymMatrix::identity(1));
    a.at(0) = SymMatrix::identity(1, 0.5);
    auto w = std::make_shared<const KernelWeights>(build_weights(s, 1.0));
    CHECK_THROWS_AS(assemble(a, w, Region::ball(1.0), p), InvalidArgument);
    CHECK_THROWS_AS(assemble(MatrixField(s, SymMatrix::identity(1)), w, Region::ball(1.5), p), InvalidArgument);
}

TEST_CASE("trivial solves, superposition and scaling")
{
    const GridSpec s = make_grid(2, 16, 1.0, 2.0);
    const EllipticityParams p{1.5, 1.0, 2.0};
    const MatrixField a = sample_coefficients(s, coefficient_function(CoefficientFamily::Checkerboard, 2, p, 1, 0.125));
    const Problem pr = make_problem(s, a, p);
    const GridFunction zero = GridFunction::zeros(s);
    CHECK(pr.lu->solve(zero, zero).sup_norm() == 0.0);
    CHECK(pr.lu->solve(SetIndicator(s).node_fraction(), zero).sup_norm() == 0.0);

    Rng rng(22);
    const GridFunction f1 = random_function(s, rng, -1.0, 1.0);
    const GridFunction f2 = random_function(s, rng, -1.0, 1.0);
    const GridFunction g = random_function(s, rng, -1.0, 1.0);
    const GridFunction u1 = pr.lu->solve(f1, zero);
    const GridFunction u2 = pr.lu->solve(f2, g);
    const GridFunction u12 = pr.lu->solve(f1.combine(1.0, f2, 2.0), g.scaled(2.0));
    CHECK(max_diff(u12, u1.combine(1.0, u2, 2.0)) <= 1e-11);
    const GridFunction u10 = pr.lu->solve(f2.scaled(10.0), g.scaled(10.0));
    CHECK(max_diff(u10, u2.scaled(10.0)) <= 1e-11);
    // Off the domain the solution is the exterior data.
    for (std::size_t k = 0; k < s.node_count(); ++k) {
        const auto [i, j] = s.unflat(k);
        if (!pr.sys->is_unknown(i, j)) CHECK(u2[k] == g[k]);
    }
}

TEST_CASE("maximum principle and comparison")
{
    Rng rng(23);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        const int dim = t % 5 == 0 ? 2 : 1;
        const GridSpec s = make_grid(dim, dim == 1 ? 64 : 16, 1.0, 2.0);
        const EllipticityParams p{rng.uniform(0.3, 1.9), 1.0, 2.0};
        const auto fam = static_cast<CoefficientFamily>(t % 4);
        const MatrixField a = sample_coefficients(s, coefficient_function(fam, dim, p, 100 + t, 0.125));
        const Problem pr = make_problem(s, a, p);
        const GridFunction f2 = random_function(s, rng, -1.0, 1.0);
        const GridFunction g2 = random_function(s, rng, -1.0, 1.0);
        const GridFunction f1 = f2.combine(1.0, random_function(s, rng, 0.0, 1.0), 1.0);
        const GridFunction g1 = g2.combine(1.0, random_function(s, rng, 0.0, 0.5), 1.0);
        const ComparisonReport rep = comparison_check(*pr.lu, f1, g1, f2, g2);
        CHECK(rep.passed);
        CHECK(rep.max_violation <= 1e-10);
        const ComparisonReport self = comparison_check(*pr.lu, f2, g2, f2, g2);
        CHECK(self.max_violation == 0.0);
        ++checked;
    }
    CHECK(checked == 100);

    const GridSpec s = make_grid(1, 64, 1.0, 2.0);
    const EllipticityParams p{1.0, 1.0, 2.0};
    const Problem pr = make_problem(s, MatrixField(s, SymMatrix::identity(1)), p);
    SetIndicator e(s);
    for (int c = 20; c < 30; ++c) e.set(c, 0, true);
    const GridFunction u = pr.lu->solve(e.node_fraction(), GridFunction::zeros(s));
    for (double v : u.values()) CHECK(v >= 0.0);
    CHECK_THROWS_AS(comparison_check(*pr.lu, GridFunction::zeros(s), GridFunction::zeros(s), e.node_fraction(),
                                     GridFunction::zeros(s)),
                    InvalidArgument);
}

TEST_CASE("consistency under refinement")
{
    // u* = exp(-x^2), A = I.
    const double sigma = 1.2;
    const auto lstar = [&](double x) { return oracle::gaussian_dsigma_1d(x, sigma); };
    std::vector<double> errs;
    for (int n : {64, 128, 256}) {
        const GridSpec s = make_grid(1, n, 4.0, 8.0);
        const EllipticityParams p{sigma, 1.0, 1.0};
        const Problem pr = make_problem(s, MatrixField(s, SymMatrix::identity(1)), p);
        const GridFunction ustar = sample_function(s, descriptor::Gaussian{1.0});
        std::vector<double> fv(s.node_count(), 0.0);
        for (std::size_t k = 0; k < s.node_count(); ++k) {
            const auto [i, j] = s.unflat(k);
            if (pr.sys->is_unknown(i, j)) fv[k] = -lstar(i * s.h);
        }
        const GridFunction u = pr.lu->solve(GridFunction(s, fv, 0.0), ustar);
        errs.push_back(max_diff(u, ustar));
    }
    CHECK(errs[0] > errs[1]);
    CHECK(errs[1] > errs[2]);
    const double order = std::log2(errs[1] / errs[2]);
    MESSAGE("refinement errors " << errs[0] << " " << errs[1] << " " << errs[2] << ", order " << order);
    CHECK(order >= 2.0 - sigma);
}

TEST_CASE("certified barrier")
{
    const GridSpec s = make_grid(1, 512, 8.0, 16.0);
    const EllipticityParams p{1.0, 1.0, 2.0};
    const BarrierCertificate c = barrier_construct(s, p);
    CHECK(c.passed);
    CHECK(c.min_slack >= -1e-8);
    CHECK(c.c_phi > 0.0);
    CHECK(c.support_ok);
    for (std::size_t k = 0; k < s.node_count(); ++k) {
        const auto [i, j] = s.unflat(k);
        if (std::abs(i * s.h) >= 8.0) CHECK(c.phi[k] == 0.0);
    }
    CHECK_FALSE(c.sweep.empty());
    CHECK_THROWS_AS(barrier_construct(make_grid(1, 64, 1.0, 2.0), p), InvalidArgument);
}

TEST_CASE("barrier profile shape")
{
    const double q = 1.5;
    const double rc = 0.5;
    const double R = 8.0;
    // Continuous with matching slope at the cap radius.
    const double eps = 1e-9;
    CHECK(barrier_profile(rc - eps, q, rc, R) == doctest::Approx(barrier_profile(rc + eps, q, rc, R)).epsilon(1e-7));
    const double left = (barrier_profile(rc, q, rc, R) - barrier_profile(rc - 1e-5, q, rc, R)) / 1e-5;
    const double right = (barrier_profile(rc + 1e-5, q, rc, R) - barrier_profile(rc, q, rc, R)) / 1e-5;
    CHECK(left == doctest::Approx(right).epsilon(1e-3));
    CHECK(barrier_profile(1.0, q, rc, R) == doctest::Approx(1.0 - std::pow(R, -q)).epsilon(1e-14));
    CHECK(barrier_profile(R, q, rc, R) == 0.0);
    CHECK(barrier_profile(2.0 * R, q, rc, R) == 0.0);
}
