#pragma once

#include <cstddef>
#include <vector>

#include "nlest/error.hpp"
#include "nlest/grid.hpp"
#include "nlest/sym_matrix.hpp"

namespace nlest {

/// Values attached to the nodes of the computational box |i|, |j| <= box_half.
template <class T>
class BoxField {
public:
    BoxField() = default;
    BoxField(const GridSpec& spec, T init)
        : spec_(spec), side_(2 * spec.box_half + 1),
          data_(spec.dim == 2 ? side_ * side_ : side_, init)
    {
    }

    const GridSpec& spec() const { return spec_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int i, int j) const
    {
        const auto a = static_cast<std::size_t>(i + spec_.box_half);
        if (spec_.dim == 1) return a;
        return a + side_ * static_cast<std::size_t>(j + spec_.box_half);
    }
    std::array<int, 2> node(std::size_t k) const
    {
        if (spec_.dim == 1) return {static_cast<int>(k) - spec_.box_half, 0};
        return {static_cast<int>(k % side_) - spec_.box_half,
                static_cast<int>(k / side_) - spec_.box_half};
    }
    Point point(std::size_t k) const
    {
        const auto n = node(k);
        return spec_.node_point(n[0], n[1]);
    }
    bool in_box(int i, int j) const
    {
        const int b = spec_.box_half;
        if (i < -b || i > b) return false;
        return spec_.dim == 1 || (j >= -b && j <= b);
    }

    T& operator[](std::size_t k) { return data_[k]; }
    const T& operator[](std::size_t k) const { return data_[k]; }
    T& at(int i, int j = 0) { return data_[index(i, j)]; }
    const T& at(int i, int j = 0) const { return data_[index(i, j)]; }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

private:
    GridSpec spec_{};
    std::size_t side_ = 0;
    std::vector<T> data_;
};

using ScalarField = BoxField<double>;
// Coefficient matrix A(x) per box node.
using MatrixField = BoxField<SymMatrix>;
// D^sigma u(x) per box node.
using SigmaHessian = BoxField<SymMatrix>;

// Sup of |v| over box nodes contained in region.
double sup_over(const ScalarField& v, const Region& region);
double inf_over(const ScalarField& v, const Region& region);

// Box-node values of a grid function.
ScalarField box_values(const GridFunction& u);

}  // namespace nlest
