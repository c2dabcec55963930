#pragma once

#include <array>

namespace nlest {

/// Symmetric dim x dim matrix, dim in {1, 2}. In 1D only xx is used.
struct SymMatrix {
    int dim = 1;
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    static SymMatrix zero(int dim) { return {dim, 0.0, 0.0, 0.0}; }
    static SymMatrix identity(int dim, double s = 1.0) { return {dim, s, 0.0, dim == 2 ? s : 0.0}; }

    double trace() const { return dim == 2 ? xx + yy : xx; }
    double operator()(int i, int j) const
    {
        if (i == 0 && j == 0) return xx;
        if (i == 1 && j == 1) return yy;
        return xy;
    }

    SymMatrix& operator+=(const SymMatrix& o)
    {
        xx += o.xx;
        xy += o.xy;
        yy += o.yy;
        return *this;
    }
    // this += s * o, the accumulation step of the quadrature sums.
    void add_scaled(double s, const SymMatrix& o)
    {
        xx += s * o.xx;
        xy += s * o.xy;
        yy += s * o.yy;
    }
    SymMatrix operator*(double s) const { return {dim, xx * s, xy * s, yy * s}; }
    SymMatrix operator+(const SymMatrix& o) const { return {dim, xx + o.xx, xy + o.xy, yy + o.yy}; }
    SymMatrix operator-(const SymMatrix& o) const { return {dim, xx - o.xx, xy - o.xy, yy - o.yy}; }
    bool operator==(const SymMatrix& o) const = default;
};

// Frobenius pairing A : M = sum_ij A_ij M_ij.
inline double frobenius(const SymMatrix& a, const SymMatrix& m)
{
    if (a.dim == 1) return a.xx * m.xx;
    return a.xx * m.xx + 2.0 * a.xy * m.xy + a.yy * m.yy;
}

/**
 * Eigen-decomposition of a symmetric matrix.
 *
 * Eigenvalues ascend; vectors[k] is the unit eigenvector for values[k] with
 * its first nonzero component positive.
 */
struct SymEigen {
    int dim = 1;
    std::array<double, 2> values{0.0, 0.0};
    std::array<std::array<double, 2>, 2> vectors{{{1.0, 0.0}, {0.0, 1.0}}};
};

SymEigen eigen_decompose(const SymMatrix& m);

// Q diag(d) Q^T with the eigenbasis of e.
SymMatrix compose(const SymEigen& e, const std::array<double, 2>& diag);

// 2x2 rotation conjugate R diag(a, b) R^T with R the rotation by theta.
SymMatrix rotated_diagonal(double theta, double a, double b);

}  // namespace nlest
