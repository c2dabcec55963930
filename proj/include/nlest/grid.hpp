#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace nlest {

using Point = std::array<double, 2>;

double norm2(const Point& p, int dim);
double norm_inf(const Point& p, int dim);

/**
 * Uniform grid over the computational box [-half_width, half_width]^dim.
 *
 * Nodes sit at integer multiples of h. Grid functions store node values on the
 * extended box |x|_inf <= exterior_radius; beyond that they follow a constant
 * rule. Cells (for set indicators and dyadic cubes) are the n_cells^dim
 * primal cells of the computational box.
 */
struct GridSpec {
    int dim = 1;
    int n_cells = 0;
    double half_width = 0.0;
    double exterior_radius = 0.0;
    double h = 0.0;

    // Node index range per axis is [-ext_half, ext_half] (extended box) and
    // [-box_half, box_half] (computational box).
    int ext_half = 0;
    int box_half = 0;

    int nodes_per_axis() const { return 2 * ext_half + 1; }
    std::size_t node_count() const;
    std::size_t cell_count() const;
    // Cell volume h^dim.
    double cell_volume() const;

    bool in_extended(int i, int j) const;
    std::size_t flat(int i, int j) const;
    std::array<int, 2> unflat(std::size_t k) const;
    Point node_point(int i, int j) const { return {i * h, dim == 2 ? j * h : 0.0}; }

    // Lower corner of cell (ci, cj), ci, cj in [0, n_cells).
    Point cell_lower(int ci, int cj) const;
    Point cell_center(int ci, int cj) const;

    // One-line "key=value" description used in file headers.
    std::string describe() const;

    bool operator==(const GridSpec& o) const;
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

GridSpec make_grid(int dim, int n_cells, double half_width, double exterior_radius);

/// Values of a function on all of space: node values on the extended box plus
/// a constant beyond it.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(GridSpec spec, std::vector<double> values, double exterior);

    static GridFunction constant(const GridSpec& spec, double c);
    static GridFunction zeros(const GridSpec& spec) { return constant(spec, 0.0); }

    const GridSpec& spec() const { return spec_; }
    double exterior() const { return exterior_; }
    const std::vector<double>& values() const { return values_; }

    // Value at node (i, j); the exterior constant outside the extended box.
    double at(int i, int j = 0) const
    {
        if (!spec_.in_extended(i, j)) return exterior_;
        return values_[spec_.flat(i, j)];
    }
    double operator[](std::size_t k) const { return values_[k]; }

    // max(|values|, |exterior|): the sup norm over all space.
    double sup_norm() const;

    // a*this + b*other; specs must agree.
    GridFunction combine(double a, const GridFunction& other, double b) const;
    GridFunction scaled(double a) const;
    // Pointwise map over node values; the exterior constant is mapped too.
    GridFunction mapped(const std::function<double(Point, double)>& fn) const;

private:
    GridSpec spec_{};
    std::vector<double> values_;
    double exterior_ = 0.0;
};

// Closed-form function families accepted by sample_function.
namespace descriptor {
struct Constant {
    double c = 0.0;
};
// exp(-a |x|^2)
struct Gaussian {
    double a = 1.0;
};
// The cutoff profile of cutoff_eta.
struct Bump {};
// (1 - |x|^2)_+^p: the profile of the fractional ball solution.
struct RadialPower {
    double p = 1.0;
};
// Arbitrary pointwise formula with an explicit value at infinity.
struct Custom {
    std::function<double(Point)> fn;
    double at_infinity = 0.0;
};
}  // namespace descriptor

using FunctionDescriptor = std::variant<descriptor::Constant, descriptor::Gaussian,
                                        descriptor::Bump, descriptor::RadialPower,
                                        descriptor::Custom>;

GridFunction sample_function(const GridSpec& spec, const FunctionDescriptor& d);

// Smooth radial cutoff: 1 on B_{3/4}, 0 outside B_1.
double eta_profile(double r);
GridFunction cutoff_eta(const GridSpec& spec);

/// Cell-aligned subset of the computational box.
class SetIndicator {
public:
    SetIndicator() = default;
    explicit SetIndicator(GridSpec spec);
    SetIndicator(GridSpec spec, std::vector<std::uint8_t> cells);

    const GridSpec& spec() const { return spec_; }
    const std::vector<std::uint8_t>& cells() const { return cells_; }

    bool contains(int ci, int cj = 0) const { return cells_[index(ci, cj)] != 0; }
    void set(int ci, int cj, bool v) { cells_[index(ci, cj)] = v ? 1 : 0; }

    std::size_t count() const;
    double measure() const;

    std::size_t index(int ci, int cj) const
    {
        return static_cast<std::size_t>(ci) +
               (spec_.dim == 2 ? static_cast<std::size_t>(cj) * spec_.n_cells : 0);
    }

    // Node source: each node carries the fraction of its 2^dim adjacent cells
    // that belong to the set. Sum over nodes times h^dim equals the measure.
    GridFunction node_fraction() const;

private:
    GridSpec spec_{};
    std::vector<std::uint8_t> cells_;
};

double indicator_measure(const SetIndicator& ind);

/// Dyadic cube in cell units: lower-corner cell index, side in cells, depth.
struct DyadicCube {
    std::array<int, 2> lower{0, 0};
    int side_cells = 1;
    int level = 0;

    Point center(const GridSpec& spec) const;
    double half_side(const GridSpec& spec) const { return 0.5 * side_cells * spec.h; }
    double measure(const GridSpec& spec) const;
    std::size_t cell_count(int dim) const;

    bool contains_cell(int ci, int cj, int dim) const;
    bool contains(const DyadicCube& other, int dim) const;
    bool interiors_overlap(const DyadicCube& other, int dim) const;

    DyadicCube parent(int dim) const;
    std::vector<DyadicCube> children(int dim) const;

    bool operator==(const DyadicCube& o) const = default;
};

DyadicCube root_cube(const GridSpec& spec);

/// Solve domain / measurement region: ball (Euclidean) or cube (sup-norm).
struct Region {
    enum class Kind { Ball, Cube };
    Kind kind = Kind::Ball;
    Point center{0.0, 0.0};
    double radius = 1.0;
    // Closed regions include nodes on the boundary (up to rounding).
    bool closed = false;

    bool contains(const Point& x, int dim) const;
    std::string describe() const;

    static Region ball(double r, bool closed = false) { return {Kind::Ball, {0.0, 0.0}, r, closed}; }
    static Region cube(double r, bool closed = false) { return {Kind::Cube, {0.0, 0.0}, r, closed}; }
};

}  // namespace nlest
