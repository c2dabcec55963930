#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nlest/grid.hpp"
#include "nlest/sym_matrix.hpp"

namespace nlest {

/**
 * CellIntegral  W_k is the kernel tensor integrated over cell(y_k); the origin
 *               cell is dropped.
 * SecondMoment  W_k integrates y y^T |y|^{-n-sigma} / |y_k|^2 over the cell, so
 *               the rule is exact for delta u proportional to |y|^2 cell by
 *               cell; the origin cell is folded into the axis neighbours via
 *               their second differences. Consistency error improves from
 *               O(h^{2-sigma}) to O(h^2) in 1D, and monotonicity is kept.
 */
enum class WeightScheme { CellIntegral, SecondMoment };

WeightScheme parse_weight_scheme(const std::string& name);
std::string to_string(WeightScheme s);

/**
 * Quadrature weights for the sigma-order Hessian on a uniform grid.
 *
 * Offset y_k = k h carries the tensor
 *   W_k = (2 - sigma) * integral over cell(y_k) of y y^T |y|^{-n-sigma-2} dy,
 * where cell(y_k) is the cube of side h centred at y_k. The origin cell is
 * excluded. Everything beyond the outermost ring of offset cells is the tail,
 * integrated in closed form against the exterior constant.
 *
 * offsets are sorted by |k|^2 and then lexicographically; every evaluation
 * sums in this order.
 */
struct KernelWeights {
    GridSpec spec{};
    double sigma = 1.0;
    WeightScheme scheme = WeightScheme::SecondMoment;
    std::vector<std::array<int, 2>> offsets;
    std::vector<SymMatrix> weights;
    SymMatrix tail{};
    // trace(tail) exceeds half of the summed offset traces: the exterior
    // radius is too small for the tail to be a minor correction.
    bool tail_warning = false;

    // Sum of trace(W_k) over offsets plus trace(tail).
    double total_trace() const;
    // FNV-1a checksum over the offset list and sigma/spec, used to tag caches
    // and manifests.
    std::uint64_t checksum() const;
};

KernelWeights build_weights(const GridSpec& spec, double sigma,
                            WeightScheme scheme = WeightScheme::SecondMoment);

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Unit-spacing cell tensor (2D): (2 - sigma) * integral over
// [a0 - 1/2, a0 + 1/2] x [a1 - 1/2, a1 + 1/2] of z z^T |z|^{-4-sigma} dz,
// evaluated with an order-q tensor Gauss rule on a subdivision of s x s subcells.
// `radial_power` replaces the exponent -4 - sigma when given.
SymMatrix cell_tensor_2d(double a0, double a1, double sigma, int q, int subdivisions = 1,
                         double radial_power = 0.0);

// (2 - sigma) * integral over |y|_inf > L of |y|^{-n-sigma} dy, closed form in
// the radius and a high-order rule in the angle (2D).
double truncated_kernel_mass(int dim, double sigma, double L);

}  // namespace nlest
