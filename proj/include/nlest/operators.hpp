#pragma once

#include <optional>

#include "nlest/fields.hpp"
#include "nlest/grid.hpp"
#include "nlest/kernel_weights.hpp"
#include "nlest/sym_matrix.hpp"

namespace nlest {

struct EllipticityParams {
    double sigma = 1.0;
    double lambda = 1.0;
    double Lambda = 1.0;

    // Throws InvalidArgument unless 0 < sigma < 2 and 0 < lambda <= Lambda.
    void validate() const;
};

enum class PucciSide { Plus, Minus };

// D^sigma u at box node (i, j): sum_k delta u(x, y_k) W_k + delta_tail T, with
// delta_tail = 2 c - 2 u(x) for the exterior constant c.
SymMatrix sigma_hessian_at(const GridFunction& u, const KernelWeights& w, int i, int j = 0);

// D^sigma u at every box node (or only at nodes inside `where`; others zero).
SigmaHessian eval_sigma_hessian(const GridFunction& u, const KernelWeights& w,
                                const std::optional<Region>& where = std::nullopt);

// L_A u = sum_k delta u(x, y_k) <A(x), W_k> + delta_tail <A(x), T>.
ScalarField eval_LA(const GridFunction& u, const MatrixField& a, const KernelWeights& w,
                    const std::optional<Region>& where = std::nullopt);

// Closed-form extremal values from the eigenvalues of m.
double pucci_plus(const SymMatrix& m, const EllipticityParams& p);
double pucci_minus(const SymMatrix& m, const EllipticityParams& p);
double pucci(const SymMatrix& m, const EllipticityParams& p, PucciSide side);

ScalarField eval_pucci(const GridFunction& u, const KernelWeights& w, const EllipticityParams& p,
                       PucciSide side, const std::optional<Region>& where = std::nullopt);
ScalarField pucci_field(const SigmaHessian& m, const EllipticityParams& p, PucciSide side);

// Sum of absolute eigenvalues.
double nuclear_norm(const SymMatrix& m);

// Every eigenvalue of A lies in [lower, upper] up to a relative 1e-12.
bool admissible(const SymMatrix& a, double lower, double upper);
// Throws InvalidArgument naming the first offending node.
void check_admissible(const MatrixField& a, const EllipticityParams& p,
                      const std::optional<Region>& where = std::nullopt);

// Extremal realizers: eigenbasis of m with Lambda on positive (resp. negative)
// eigenvalues and lambda elsewhere for the plus (resp. minus) side; zero
// eigenvalues take lambda on the plus side and Lambda on the minus side.
SymMatrix extremal_realizer(const SymMatrix& m, const EllipticityParams& p, PucciSide side);

struct TildeA {
    SymMatrix matrix;
    double value = 0.0;  // matrix : m
};

// A~ = Q diag(a) Q^T with a_i = 2 Lambda on negative eigenvalues and lambda/2
// on the rest; value = 2 Lambda sum_{e<0} e + lambda/2 sum_{e>0} e.
TildeA construct_tilde_A(const SymMatrix& m, const EllipticityParams& p);

// A = t A+ + (1 - t) A- with A : m = target. Throws HypothesisError unless
// M-(m) <= target <= M+(m).
SymMatrix realize_target_A(const SymMatrix& m, const EllipticityParams& p, double target);

/**
 * Coefficient field A with lambda <= A <= Lambda and -2 f- <= L_A u <= 2 f+ on
 * the nodes of `domain`, given that M+ u >= -f- and M- u <= f+ there.
 *
 * Pointwise target: clamp(0, max(M-, -3/2 f-), min(M+, 3/2 f+)). Nodes outside
 * the domain receive lambda I. Throws HypothesisError naming the node and the
 * violated inequality when the hypothesis fails.
 */
MatrixField construct_onesided_A(const GridFunction& u, const GridFunction& f,
                                 const EllipticityParams& p, const KernelWeights& w,
                                 const Region& domain);

/**
 * u~(x) = l^{-sigma} u(x0 + l x) for l = 2^{-k}, k >= 0, and x0 = node index.
 *
 * The result lives on a grid of spacing h / l with the same n_cells, so node i'
 * of u~ is node x0 + i' of u. Its extended box is large enough to include the
 * image of u's whole extended box.
 */
GridFunction rescale(const GridFunction& u, std::array<int, 2> x0, double l, double sigma);

}  // namespace nlest
