#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "nlest/fields.hpp"
#include "nlest/kernel_weights.hpp"
#include "nlest/operators.hpp"

namespace nlest {

/**
 * Dense discretization of L_A on the unknown nodes of a solve domain D.
 *
 * Row r (node x) applied to u reads
 *   sum_c matrix(r, c) u(x_c) + boundary_contribution(g)(r) = L_A u(x),
 * where u = g off D. Off-diagonal entries are the stencil weights <A(x), W_k>;
 * assembly fails unless every row is monotone (off-diagonals >= 0, diagonal
 * <= -(sum of off-diagonals)).
 */
struct OperatorMatrix {
    GridSpec spec{};
    Region domain{};
    // Box-node index -> unknown index, or -1.
    std::vector<long> unknown_of_node;
    std::vector<std::array<int, 2>> unknown_nodes;
    Eigen::MatrixXd matrix;
    MatrixField coefficients;
    std::shared_ptr<const KernelWeights> weights;

    bool monotone_certified = false;
    // min over rows of -(diagonal) - (sum of off-diagonals).
    double min_row_margin = 0.0;

    std::size_t size() const { return unknown_nodes.size(); }
    bool is_unknown(int i, int j) const;

    // L_A applied to g with its D-node values zeroed, on the unknown nodes.
    Eigen::VectorXd boundary_contribution(const GridFunction& g) const;
    // Unknown-node values of a grid function.
    Eigen::VectorXd restrict(const GridFunction& u) const;
    // g with its D-node values replaced by x.
    GridFunction extend(const Eigen::VectorXd& x, const GridFunction& g) const;
};

// The domain must lie inside the computational box. Throws InvalidArgument if
// A is not admissible on the domain and NumericalError if the monotone
// structure fails.
OperatorMatrix assemble(const MatrixField& a, std::shared_ptr<const KernelWeights> w,
                        const Region& domain, const EllipticityParams& p);

/// LU factorization of an assembled system, reusable across right-hand sides.
class FactoredSystem {
public:
    explicit FactoredSystem(std::shared_ptr<const OperatorMatrix> sys);

    // u with L_A u = -f on D and u = g off D.
    GridFunction solve(const GridFunction& f, const GridFunction& g) const;
    // Relative residual of the most recent solve.
    double last_residual() const { return last_residual_; }
    const OperatorMatrix& system() const { return *sys_; }

private:
    std::shared_ptr<const OperatorMatrix> sys_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    mutable double last_residual_ = 0.0;
};

GridFunction solve(const OperatorMatrix& sys, const GridFunction& f, const GridFunction& g);

struct ComparisonReport {
    double max_violation = 0.0;  // max over nodes of (u2 - u1)_+
    double tolerance = 0.0;
    bool passed = true;
};

// Requires f1 >= f2 on D and g1 >= g2 off D (InvalidArgument otherwise);
// verifies u1 >= u2 - 1e-10 * scale.
ComparisonReport comparison_check(const FactoredSystem& sys, const GridFunction& f1,
                                  const GridFunction& g1, const GridFunction& f2,
                                  const GridFunction& g2);

struct BarrierOptions {
    double q_min = 0.25;
    double q_max = 12.0;
    double q_step = 0.25;
    // Radius below which |x|^{-q} is replaced by a concave quadratic cap.
    double cap_radius = 0.5;
};

struct BarrierCertificate {
    GridFunction phi;
    GridFunction psi;
    double q = 0.0;
    double scale = 1.0;   // phi = scale * Phi_q
    double c_phi = 0.0;   // min of phi over Q(0;6)
    double min_slack = 0.0;  // min over nodes of M- phi + psi
    bool support_ok = false;
    bool passed = false;
    // (q, unscaled min slack outside B_1) for every q tried.
    std::vector<std::pair<double, double>> sweep;
};

/**
 * Radial candidate Phi_q(r) = r^{-q} - R^{-q} for cap_radius <= r < R = 8 sqrt(n),
 * a C^1 quadratic cap a - b r^2 inside cap_radius, and 0 outside B_R. Sweeps
 * q upward and returns the first q whose certificate passes; throws
 * NumericalError listing the best slack per q otherwise.
 */
BarrierCertificate barrier_construct(const GridSpec& spec, const EllipticityParams& p,
                                     const BarrierOptions& opts = {});

// Unscaled barrier profile, exposed for tests.
double barrier_profile(double r, double q, double cap_radius, double support_radius);

}  // namespace nlest
