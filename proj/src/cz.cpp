#include "nlest/cz.hpp"

#include <algorithm>
#include <sstream>

#include "nlest/error.hpp"

namespace nlest {

namespace {

// |Q cap E| >= alpha |Q| in exact arithmetic: cell counts are below 2^24 and
// the long double product of a double and such an integer is exact.
bool dense_enough(std::size_t e_cells, std::size_t q_cells, double alpha)
{
    return static_cast<long double>(e_cells) >=
           static_cast<long double>(alpha) * static_cast<long double>(q_cells);
}

class CellCounter {
public:
    explicit CellCounter(const SetIndicator& e) : dim_(e.spec().dim), n_(e.spec().n_cells)
    {
        const auto side = static_cast<std::size_t>(n_ + 1);
        sums_.assign(dim_ == 2 ? side * side : side, 0);
        if (dim_ == 1) {
            for (int i = 0; i < n_; ++i) sums_[i + 1] = sums_[i] + (e.contains(i, 0) ? 1 : 0);
        } else {
            for (int j = 0; j < n_; ++j)
                for (int i = 0; i < n_; ++i)
                    at(i + 1, j + 1) = at(i, j + 1) + at(i + 1, j) - at(i, j) +
                                       (e.contains(i, j) ? 1 : 0);
        }
    }

    std::size_t count(const DyadicCube& q) const
    {
        const int i0 = q.lower[0];
        const int i1 = q.lower[0] + q.side_cells;
        if (dim_ == 1) return sums_[i1] - sums_[i0];
        const int j0 = q.lower[1];
        const int j1 = q.lower[1] + q.side_cells;
        return at(i1, j1) - at(i0, j1) - at(i1, j0) + at(i0, j0);
    }

private:
    std::size_t& at(int i, int j) { return sums_[i + static_cast<std::size_t>(j) * (n_ + 1)]; }
    std::size_t at(int i, int j) const { return sums_[i + static_cast<std::size_t>(j) * (n_ + 1)]; }

    int dim_;
    int n_;
    std::vector<std::size_t> sums_;
};

void split(const DyadicCube& q, const CellCounter& counter, double alpha, int dim, CZResult& out)
{
    const std::size_t cnt = counter.count(q);
    if (cnt == 0) return;
    const std::size_t size = q.cell_count(dim);
    if (dense_enough(cnt, size, alpha)) {
        out.kept.push_back(q);
        out.kept_e_cells.push_back(cnt);
        out.kept_density.push_back(static_cast<double>(cnt) / static_cast<double>(size));
        return;
    }
    // A single cell meeting E is entirely in E, so it is always kept above.
    for (const auto& c : q.children(dim)) split(c, counter, alpha, dim, out);
}

std::size_t count_cells_in(const SetIndicator& e, const DyadicCube& q)
{
    const int dim = e.spec().dim;
    std::size_t c = 0;
    const int ny = dim == 2 ? q.side_cells : 1;
    for (int b = 0; b < ny; ++b)
        for (int a = 0; a < q.side_cells; ++a)
            if (e.contains(q.lower[0] + a, dim == 2 ? q.lower[1] + b : 0)) ++c;
    return c;
}

}  // namespace

CZResult cz_decompose(const SetIndicator& e, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
    const GridSpec& spec = e.spec();
    const int dim = spec.dim;
    const DyadicCube root = root_cube(spec);

    CZResult r;
    r.alpha = alpha;
    r.e_cells = e.count();
    if (dense_enough(r.e_cells, root.cell_count(dim), alpha)) {
        std::ostringstream os;
        os << "decomposition requires |E| < alpha |Q|: " << r.e_cells << " of "
           << root.cell_count(dim) << " cells with alpha = " << alpha;
        throw HypothesisError(os.str());
    }

    const CellCounter counter(e);
    for (const auto& c : root.children(dim)) split(c, counter, alpha, dim, r);

    // Parents of kept cubes; keep one per shared parent and only maximal ones.
    std::vector<DyadicCube> parents;
    for (const auto& q : r.kept) {
        const DyadicCube p = q.parent(dim);
        if (std::find(parents.begin(), parents.end(), p) == parents.end()) parents.push_back(p);
    }
    std::vector<DyadicCube> by_size = parents;
    std::stable_sort(by_size.begin(), by_size.end(),
                     [](const DyadicCube& a, const DyadicCube& b) { return a.side_cells > b.side_cells; });
    std::vector<DyadicCube> maximal;
    for (const auto& p : by_size) {
        const bool inside = std::any_of(maximal.begin(), maximal.end(),
                                        [&](const DyadicCube& m) { return m.contains(p, dim); });
        if (!inside) maximal.push_back(p);
    }
    // Canonical order: first appearance in the depth-first traversal.
    for (const auto& p : parents)
        if (std::find(maximal.begin(), maximal.end(), p) != maximal.end()) r.predecessors.push_back(p);

    r.union_predecessor_cells = 0;
    for (const auto& p : r.predecessors) {
        r.union_predecessor_cells += p.cell_count(dim);
        r.predecessor_e_cells.push_back(counter.count(p));
    }
    return r;
}

CZVerifyReport cz_verify(const CZResult& r, const SetIndicator& e, double alpha)
{
    const GridSpec& spec = e.spec();
    const int dim = spec.dim;
    CZVerifyReport rep;

    auto pairwise_disjoint = [dim](const std::vector<DyadicCube>& v) {
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b)
                if (v[a].interiors_overlap(v[b], dim)) return false;
        return true;
    };
    rep.predecessors_disjoint = pairwise_disjoint(r.predecessors);
    rep.kept_disjoint = pairwise_disjoint(r.kept);

    std::size_t e_cells = 0;
    bool pred_cover = true;
    bool kept_cover = true;
    const int ny = dim == 2 ? spec.n_cells : 1;
    for (int cj = 0; cj < ny; ++cj)
        for (int ci = 0; ci < spec.n_cells; ++ci) {
            if (!e.contains(ci, cj)) continue;
            ++e_cells;
            auto has = [&](const std::vector<DyadicCube>& v) {
                return std::any_of(v.begin(), v.end(),
                                   [&](const DyadicCube& q) { return q.contains_cell(ci, cj, dim); });
            };
            if (!has(r.predecessors)) pred_cover = false;
            if (!has(r.kept)) kept_cover = false;
        }
    rep.predecessors_cover_e = pred_cover;
    rep.kept_cover_e = kept_cover;

    // Union measure counted cell by cell so overlaps cannot inflate it.
    std::size_t union_cells = 0;
    for (int cj = 0; cj < ny; ++cj)
        for (int ci = 0; ci < spec.n_cells; ++ci)
            if (std::any_of(r.predecessors.begin(), r.predecessors.end(),
                            [&](const DyadicCube& q) { return q.contains_cell(ci, cj, dim); }))
                ++union_cells;
    if (e_cells == 0)
        rep.measure_bound = r.predecessors.empty();
    else
        rep.measure_bound = static_cast<long double>(alpha) * static_cast<long double>(union_cells) >
                            static_cast<long double>(e_cells);

    rep.kept_density = std::all_of(r.kept.begin(), r.kept.end(), [&](const DyadicCube& q) {
        return dense_enough(count_cells_in(e, q), q.cell_count(dim), alpha);
    });
    rep.each_predecessor_has_kept =
        std::all_of(r.predecessors.begin(), r.predecessors.end(), [&](const DyadicCube& p) {
            return std::any_of(r.kept.begin(), r.kept.end(),
                               [&](const DyadicCube& q) { return p.contains(q, dim); });
        });
    return rep;
}

std::string CZVerifyReport::summary() const
{
    std::ostringstream os;
    os << "predecessors_disjoint=" << predecessors_disjoint
       << " predecessors_cover_e=" << predecessors_cover_e << " measure_bound=" << measure_bound
       << " kept_density=" << kept_density << " kept_cover_e=" << kept_cover_e
       << " kept_disjoint=" << kept_disjoint
       << " each_predecessor_has_kept=" << each_predecessor_has_kept;
    return os.str();
}

}  // namespace nlest
