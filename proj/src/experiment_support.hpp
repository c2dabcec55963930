#pragma once

// Helpers shared by the experiment runners.

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "nlest/experiments.hpp"
#include "nlest/io.hpp"
#include "nlest/operators.hpp"
#include "nlest/random.hpp"
#include "nlest/solver.hpp"

namespace nlest::detail {

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(const std::string& v) { return v; }
inline std::string cell(const char* v) { return v; }

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

GridSpec experiment_grid(const ExperimentConfig& cfg, int n_cells);

std::shared_ptr<const KernelWeights> shared_weights(const GridSpec& spec, double sigma,
                                                    WeightScheme scheme);

// Factored system for L_A on the open unit ball.
struct UnitBallProblem {
    MatrixField a;
    std::shared_ptr<const OperatorMatrix> matrix;
    std::unique_ptr<FactoredSystem> lu;
};
UnitBallProblem factor_unit_ball(const GridSpec& spec, const CoefficientFn& fn,
                                 std::shared_ptr<const KernelWeights> w, const EllipticityParams& p);

// Sum of Gaussian bumps a exp(-|x - c|^2 / (2 w^2)).
struct Bump {
    Point center{0.0, 0.0};
    double width = 0.1;
    double amplitude = 1.0;
};
std::vector<Bump> random_bumps(Rng& rng, int dim, int count, double center_radius, double w_min,
                               double w_max, double a_min, double a_max);
GridFunction sample_bumps(const GridSpec& spec, const std::vector<Bump>& bumps);

// Fits a power law to the distribution function of v on the region over
// `points` geometric levels in [max / 10, max 10^{-1/points}].
struct TailFit {
    PowerLawFit fit;
    double max_value = 0.0;
    bool degenerate = false;
};
TailFit fit_distribution_tail(const ScalarField& v, const Region& region, int points);

ScalarField nuclear_field(const SigmaHessian& m);

double max_of(const std::vector<double>& v);
double min_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

}  // namespace nlest::detail
