#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlest/grid.hpp"

namespace nlest {

// Result of the dyadic stopping-time decomposition of a cell set E.
struct CZResult {
    double alpha = 0.5;
    std::vector<DyadicCube> kept;          // Q_j, depth-first order
    std::vector<DyadicCube> predecessors;  // maximal dyadic parents, disjoint
    std::size_t e_cells = 0;
    std::size_t union_predecessor_cells = 0;
    // |E cap Q_j| / |Q_j| for each kept cube (exact cell ratio).
    std::vector<double> kept_density;
    std::vector<std::size_t> kept_e_cells;
    std::vector<std::size_t> predecessor_e_cells;
};

/**
 * Splits a dyadic cube while |Q cap E| < alpha |Q| and keeps it otherwise,
 * starting from the whole computational box and recursing only into children
 * that meet E. Each kept cube's dyadic parent is recorded; parents contained in
 * another recorded parent are dropped so the predecessors are disjoint.
 *
 * Throws HypothesisError unless |E| < alpha |Q(0;half_width)| and InvalidArgument
 * unless 0 < alpha < 1.
 */
CZResult cz_decompose(const SetIndicator& e, double alpha);

struct CZVerifyReport {
    bool predecessors_disjoint = false;
    bool predecessors_cover_e = false;
    bool measure_bound = false;   // |U Q~_j| > |E| / alpha
    bool kept_density = false;    // |E cap Q_j| >= alpha |Q_j|
    bool kept_cover_e = false;    // |E \ U Q_j| = 0
    bool kept_disjoint = false;
    bool each_predecessor_has_kept = false;
    bool passed() const
    {
        return predecessors_disjoint && predecessors_cover_e && measure_bound && kept_density &&
               kept_cover_e && kept_disjoint && each_predecessor_has_kept;
    }
    std::string summary() const;
};

// Recomputes every conclusion cell by cell, without the prefix sums used by
// cz_decompose.
CZVerifyReport cz_verify(const CZResult& r, const SetIndicator& e, double alpha);

}  // namespace nlest
