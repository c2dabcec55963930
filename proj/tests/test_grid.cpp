#include <doctest.h>

#include <cmath>

#include "nlest/error.hpp"
#include "nlest/grid.hpp"
#include "nlest/random.hpp"

using namespace nlest;

TEST_CASE("make_grid spacing and validation")
{
    const GridSpec a = make_grid(1, 256, 1.0, 16.0);
    CHECK(a.h == 0.0078125);
    CHECK(a.box_half == 128);
    CHECK(a.ext_half == 2048);
    const GridSpec b = make_grid(2, 64, 1.0, 8.0);
    CHECK(b.h == 0.03125);
    CHECK(b.node_count() == static_cast<std::size_t>(b.nodes_per_axis()) * b.nodes_per_axis());
    CHECK_THROWS_AS(make_grid(3, 64, 1.0, 8.0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(1, 100, 1.0, 8.0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(1, 64, 1.0, 1.5), InvalidArgument);
}

TEST_CASE("flat and unflat are inverse")
{
    const GridSpec s = make_grid(2, 16, 1.0, 2.0);
    for (std::size_t k = 0; k < s.node_count(); k += 7) {
        const auto ij = s.unflat(k);
        CHECK(s.flat(ij[0], ij[1]) == k);
    }
}

TEST_CASE("sample_function formulas")
{
    const GridSpec s = make_grid(2, 32, 1.0, 2.0);
    const GridFunction z = sample_function(s, descriptor::Constant{0.0});
    CHECK(z.sup_norm() == 0.0);
    const GridFunction g = sample_function(s, descriptor::Gaussian{1.0});
    CHECK(g.exterior() == 0.0);
    for (int j = -s.ext_half; j <= s.ext_half; j += 5)
        for (int i = -s.ext_half; i <= s.ext_half; i += 3) {
            const double r2 = (i * s.h) * (i * s.h) + (j * s.h) * (j * s.h);
            CHECK(g.at(i, j) == doctest::Approx(std::exp(-r2)).epsilon(1e-15));
        }
    // Outside the extended box the exterior rule applies.
    CHECK(g.at(s.ext_half + 1, 0) == 0.0);
    const GridFunction c = GridFunction::constant(s, 3.0);
    CHECK(c.at(10 * s.ext_half, 0) == 3.0);
}

TEST_CASE("cutoff profile")
{
    CHECK(eta_profile(0.5) == 1.0);
    CHECK(eta_profile(0.75) == 1.0);
    CHECK(eta_profile(1.5) == 0.0);
    CHECK(eta_profile(1.0) == 0.0);
    // Independent evaluation of the smooth step at s = 1/2 after mapping [3/4, 1] to [0, 1].
    const double v = eta_profile(0.875);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
    const double s = 0.2;
    const double expect = std::exp(-1.0 / 0.8) / (std::exp(-1.0 / 0.8) + std::exp(-1.0 / 0.2));
    CHECK(eta_profile(0.75 + 0.25 * s) == doctest::Approx(expect).epsilon(1e-14));
    // Monotone decreasing across the transition.
    double prev = 1.0;
    for (double r = 0.75; r <= 1.0; r += 0.01) {
        CHECK(eta_profile(r) <= prev);
        prev = eta_profile(r);
    }
    const GridSpec g = make_grid(2, 32, 1.0, 2.0);
    const GridFunction eta = cutoff_eta(g);
    CHECK(eta.at(0, 0) == 1.0);
    CHECK(eta.at(g.box_half, g.box_half) == 0.0);
}

TEST_CASE("indicator measure")
{
    const GridSpec s1 = make_grid(1, 256, 1.0, 2.0);  // h = 1/128
    SetIndicator empty(s1);
    CHECK(empty.measure() == 0.0);
    SetIndicator half(s1);
    for (int c = 0; c < s1.n_cells; ++c) {
        const Point lo = s1.cell_lower(c, 0);
        if (lo[0] >= -0.5 && lo[0] + s1.h <= 0.5) half.set(c, 0, true);
    }
    CHECK(half.count() == 128);
    CHECK(half.measure() == 1.0);
    CHECK(indicator_measure(half) == 1.0);

    const GridSpec s2 = make_grid(2, 64, 1.0, 2.0);
    SetIndicator e(s2);
    std::size_t inside = 0;
    for (int cj = 0; cj < 64; ++cj)
        for (int ci = 0; ci < 64; ++ci) {
            const Point lo = s2.cell_lower(ci, cj);
            const bool in_q = lo[0] >= -0.5 && lo[0] + s2.h <= 0.5 && lo[1] >= -0.5 && lo[1] + s2.h <= 0.5;
            if (!in_q) continue;
            // Alternate cells: exactly half of Q(0;1/2).
            if ((ci + cj) % 2 == 0) e.set(ci, cj, true);
            ++inside;
        }
    CHECK(inside == 32 * 32);
    CHECK(e.measure() == 0.5 * 1.0);
}

TEST_CASE("node_fraction preserves measure")
{
    for (int dim : {1, 2}) {
        const GridSpec s = make_grid(dim, 32, 1.0, 2.0);
        SetIndicator e(s);
        Rng rng(5);
        const int ny = dim == 2 ? 32 : 1;
        for (int cj = 0; cj < ny; ++cj)
            for (int ci = 0; ci < 32; ++ci) e.set(ci, cj, rng.uniform() < 0.3);
        const GridFunction f = e.node_fraction();
        double sum = 0.0;
        for (double v : f.values()) sum += v;
        CHECK(sum * s.cell_volume() == doctest::Approx(e.measure()).epsilon(1e-14));
    }
}

TEST_CASE("dyadic cube relations")
{
    const GridSpec s = make_grid(2, 16, 1.0, 2.0);
    const DyadicCube root = root_cube(s);
    CHECK(root.side_cells == 16);
    CHECK(root.measure(s) == 4.0);
    const auto kids = root.children(2);
    REQUIRE(kids.size() == 4);
    for (const auto& k : kids) {
        CHECK(k.parent(2) == root);
        CHECK(root.contains(k, 2));
        CHECK(k.side_cells == 8);
    }
    CHECK_FALSE(kids[0].interiors_overlap(kids[1], 2));
    CHECK(root.center(s)[0] == 0.0);
}

TEST_CASE("region membership")
{
    const Region open = Region::ball(0.5);
    const Region closed = Region::ball(0.5, true);
    CHECK_FALSE(open.contains({0.5, 0.0}, 1));
    CHECK(closed.contains({0.5, 0.0}, 1));
    CHECK(Region::cube(1.0).contains({0.9, 0.9}, 2));
    CHECK_FALSE(Region::ball(1.0).contains({0.9, 0.9}, 2));
}
