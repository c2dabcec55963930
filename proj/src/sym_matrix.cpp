#include "nlest/sym_matrix.hpp"

#include <cmath>

namespace nlest {

namespace {

void normalize_sign(std::array<double, 2>& v)
{
    if (v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0)) {
        v[0] = -v[0];
        v[1] = -v[1];
    }
}

}  // namespace

SymEigen eigen_decompose(const SymMatrix& m)
{
    SymEigen e;
    e.dim = m.dim;
    if (m.dim == 1) {
        e.values = {m.xx, 0.0};
        e.vectors = {{{1.0, 0.0}, {0.0, 1.0}}};
        return e;
    }
    // Jacobi rotation angle diagonalizing the 2x2 block.
    const double half_diff = 0.5 * (m.xx - m.yy);
    const double mean = 0.5 * (m.xx + m.yy);
    const double rad = std::hypot(half_diff, m.xy);
    if (rad == 0.0) {
        e.values = {mean, mean};
        e.vectors = {{{1.0, 0.0}, {0.0, 1.0}}};
        return e;
    }
    const double theta = 0.5 * std::atan2(m.xy, half_diff);  // angle of the larger eigenvector
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    std::array<double, 2> big{c, s};
    std::array<double, 2> small{-s, c};
    normalize_sign(big);
    normalize_sign(small);
    e.values = {mean - rad, mean + rad};
    e.vectors = {small, big};
    return e;
}

SymMatrix compose(const SymEigen& e, const std::array<double, 2>& diag)
{
    if (e.dim == 1) return {1, diag[0], 0.0, 0.0};
    SymMatrix r{2, 0.0, 0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
        const auto& v = e.vectors[k];
        r.xx += diag[k] * v[0] * v[0];
        r.xy += diag[k] * v[0] * v[1];
        r.yy += diag[k] * v[1] * v[1];
    }
    return r;
}

SymMatrix rotated_diagonal(double theta, double a, double b)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {2, a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c};
}

}  // namespace nlest
