#include <doctest.h>

#include <cmath>

#include "nlest/cz.hpp"
#include "nlest/error.hpp"
#include "nlest/random.hpp"

using namespace nlest;

namespace {

// Cell counts by brute force.
std::size_t cells_in(const SetIndicator& e, const DyadicCube& q)
{
    const int dim = e.spec().dim;
    std::size_t n = 0;
    const int sy = dim == 2 ? q.side_cells : 1;
    for (int b = 0; b < sy; ++b)
        for (int a = 0; a < q.side_cells; ++a) n += e.contains(q.lower[0] + a, dim == 2 ? q.lower[1] + b : 0);
    return n;
}

std::vector<int> coverage(const GridSpec& s, const std::vector<DyadicCube>& cubes)
{
    const int ny = s.dim == 2 ? s.n_cells : 1;
    std::vector<int> cover(static_cast<std::size_t>(s.n_cells) * ny, 0);
    for (const auto& q : cubes) {
        const int sy = s.dim == 2 ? q.side_cells : 1;
        for (int b = 0; b < sy; ++b)
            for (int a = 0; a < q.side_cells; ++a)
                ++cover[static_cast<std::size_t>(q.lower[0] + a) + static_cast<std::size_t>(s.dim == 2 ? q.lower[1] + b : 0) * s.n_cells];
    }
    return cover;
}

// Independent check of the three conclusions plus disjointness.
void check_conclusions(const CZResult& r, const SetIndicator& e, double alpha)
{
    const GridSpec& s = e.spec();
    const int dim = s.dim;
    const auto kept_cover = coverage(s, r.kept);
    const auto pred_cover = coverage(s, r.predecessors);
    std::size_t pred_cells = 0;
    for (std::size_t c = 0; c < kept_cover.size(); ++c) {
        CHECK(kept_cover[c] <= 1);
        CHECK(pred_cover[c] <= 1);
        if (e.cells()[c]) {
            CHECK(kept_cover[c] == 1);
            CHECK(pred_cover[c] == 1);
        }
        pred_cells += pred_cover[c];
    }
    for (const auto& q : r.kept) {
        const std::size_t in = cells_in(e, q);
        // |E cap Q| >= alpha |Q| in exact cell arithmetic.
        CHECK(static_cast<double>(in) >= alpha * static_cast<double>(q.cell_count(dim)));
        // Stopping rule: the parent was split, so its density was below alpha.
        const DyadicCube par = q.parent(dim);
        CHECK(static_cast<double>(cells_in(e, par)) < alpha * static_cast<double>(par.cell_count(dim)));
    }
    if (e.count() > 0) CHECK(static_cast<double>(pred_cells) > static_cast<double>(e.count()) / alpha);
    CHECK(pred_cells == r.union_predecessor_cells);
    CHECK(e.count() == r.e_cells);
}

}  // namespace

TEST_CASE("hand-executed 1D example")
{
    const GridSpec s = make_grid(1, 16, 1.0, 2.0);
    SetIndicator e(s);
    for (int c = 0; c < 4; ++c) e.set(c, 0, true);  // E = [-1, -1/2]
    const CZResult r = cz_decompose(e, 0.5);
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].lower[0] == 0);
    CHECK(r.kept[0].side_cells == 8);  // [-1, 0]
    CHECK(r.kept_density[0] == 0.5);
    REQUIRE(r.predecessors.size() == 1);
    CHECK(r.predecessors[0] == root_cube(s));
    CHECK(r.union_predecessor_cells * s.h == 2.0);
    CHECK(cz_verify(r, e, 0.5).passed());
}

TEST_CASE("hypothesis and argument errors")
{
    const GridSpec s = make_grid(1, 16, 1.0, 2.0);
    SetIndicator e(s);
    for (int c = 0; c < 8; ++c) e.set(c, 0, true);  // |E| = |Q| / 2
    CHECK_THROWS_AS(cz_decompose(e, 0.5), HypothesisError);
    CHECK_NOTHROW(cz_decompose(e, 0.6));
    CHECK_THROWS_AS(cz_decompose(e, 1.0), InvalidArgument);
    CHECK_THROWS_AS(cz_decompose(e, 0.0), InvalidArgument);
}

TEST_CASE("empty set")
{
    const GridSpec s = make_grid(2, 16, 1.0, 2.0);
    const SetIndicator e(s);
    const CZResult r = cz_decompose(e, 0.3);
    CHECK(r.kept.empty());
    CHECK(r.predecessors.empty());
    CHECK(cz_verify(r, e, 0.3).passed());
}

TEST_CASE("200 random cell sets")
{
    Rng rng(31);
    int evaluated = 0;
    int passed = 0;
    int tampered_detected = 0;
    int tampered = 0;
    for (int t = 0; evaluated < 200; ++t) {
        const int dim = 1 + t % 2;
        const int n = dim == 1 ? 64 << (t % 3) : 16 << (t % 3);
        const GridSpec s = make_grid(dim, n, 1.0, 2.0);
        const double alpha = rng.uniform(0.1, 0.9);
        SetIndicator e(s);
        const int ny = dim == 2 ? n : 1;
        const int mode = t % 4;
        // Sparse scatter, blobs, a single cluster, or a mixture.
        const double density = rng.uniform(0.0, 0.6) * alpha;
        for (int cj = 0; cj < ny; ++cj)
            for (int ci = 0; ci < n; ++ci) {
                const Point x = s.cell_center(ci, cj);
                bool in = false;
                if (mode == 0 || mode == 3) in = rng.uniform() < density;
                if (mode == 1) in = std::sin(7.0 * x[0]) * std::cos(5.0 * x[1]) > 0.9 - density;
                if (mode == 2) in = norm2({x[0] - 0.3, x[1] + 0.2}, dim) < 0.5 * density;
                if (mode == 3 && norm2({x[0] + 0.5, x[1] - 0.4}, dim) < 0.1) in = true;
                e.set(ci, cj, in);
            }
        if (static_cast<double>(e.count()) >= alpha * static_cast<double>(s.cell_count())) continue;
        ++evaluated;
        const CZResult r = cz_decompose(e, alpha);
        check_conclusions(r, e, alpha);
        const CZVerifyReport v = cz_verify(r, e, alpha);
        CHECK(v.passed());
        passed += v.passed();

        if (!r.kept.empty()) {
            CZResult bad = r;
            bad.kept.erase(bad.kept.begin() + static_cast<long>(rng.below(bad.kept.size())));
            bad.kept_density.pop_back();
            bad.kept_e_cells.pop_back();
            ++tampered;
            tampered_detected += !cz_verify(bad, e, alpha).kept_cover_e;
        }
    }
    CHECK(passed == evaluated);
    CHECK(tampered > 0);
    CHECK(tampered_detected == tampered);
}

TEST_CASE("a predecessor inside another is a negative control")
{
    const GridSpec s = make_grid(1, 32, 1.0, 2.0);
    SetIndicator e(s);
    for (int c : {0, 1, 5, 20}) e.set(c, 0, true);
    const CZResult r = cz_decompose(e, 0.5);
    REQUIRE(cz_verify(r, e, 0.5).passed());
    CZResult bad = r;
    bad.predecessors.push_back(root_cube(s));
    bad.predecessor_e_cells.push_back(e.count());
    CHECK_FALSE(cz_verify(bad, e, 0.5).predecessors_disjoint);
}
