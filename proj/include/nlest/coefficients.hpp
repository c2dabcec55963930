#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "nlest/fields.hpp"
#include "nlest/operators.hpp"

namespace nlest {

// Coefficient matrix as a function of position.
using CoefficientFn = std::function<SymMatrix(const Point&)>;

enum class CoefficientFamily { Constant, Checkerboard, RandomRotation, Smooth };

CoefficientFamily parse_coefficient_family(const std::string& name);
std::string to_string(CoefficientFamily f);

/**
 * Coefficient families on a position-defined tiling of width `tile`, so the
 * same family and seed give the same field at every resolution.
 *
 *   Constant        lambda I
 *   Checkerboard    diag(lambda, Lambda) / diag(Lambda, lambda) alternating per
 *                   tile (1D: lambda / Lambda)
 *   RandomRotation  R_theta diag(lambda, Lambda) R_theta^T, theta uniform per
 *                   tile (1D: a uniform value in [lambda, Lambda] per tile)
 *   Smooth          slowly rotating diag(lambda, Lambda) (1D: a smooth profile
 *                   between lambda and Lambda)
 */
CoefficientFn coefficient_function(CoefficientFamily family, int dim, const EllipticityParams& p,
                                   std::uint64_t seed, double tile);

MatrixField sample_coefficients(const GridSpec& spec, const CoefficientFn& fn);

// x -> fn(x0 + l x): the coefficients of a rescaled problem.
CoefficientFn rescaled_coefficients(CoefficientFn fn, Point x0, double l);

}  // namespace nlest
