#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlest/coefficients.hpp"
#include "nlest/fields.hpp"
#include "nlest/grid.hpp"
#include "nlest/kernel_weights.hpp"

namespace nlest {

enum class SetFamily { RandomCells, Balls, Unions, Mixed };
SetFamily parse_set_family(const std::string& name);
std::string to_string(SetFamily f);

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int dim = 1;
    int n_cells = 256;
    std::vector<double> sigmas{1.5};
    double lambda = 1.0;
    double Lambda = 2.0;
    int instances = 10;
    // Instance i uses coefficient_families[i % size].
    std::vector<CoefficientFamily> coefficient_families{CoefficientFamily::Checkerboard,
                                                        CoefficientFamily::RandomRotation};
    SetFamily set_family = SetFamily::Mixed;
    // Density threshold sweep for the small-cube comparison sub-experiment.
    std::vector<double> betas{0.9, 0.95, 0.99, 0.999};
    double half_width = 1.0;
    double exterior_radius = 2.0;
    double tile = 0.125;
    WeightScheme scheme = WeightScheme::SecondMoment;

    // Throws InvalidArgument on an inconsistent configuration.
    void validate() const;
    // Ordered key/value echo; re-parsable by the command-line front end.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

struct PowerLawFit {
    double exponent = 0.0;
    double log_constant = 0.0;  // y ~ exp(log_constant) x^exponent
    double r2 = 0.0;
    std::size_t samples = 0;
};

// Least squares on (log x, log y). Requires >= 3 pairs with x, y > 0 and at
// least two distinct x; R^2 is 1 when all y coincide.
PowerLawFit fit_powerlaw(const std::vector<std::pair<double, double>>& pairs);

// (sum over box nodes in region of |v|^eps h^dim)^{1/eps}.
double lepsilon_norm(const ScalarField& v, double eps, const Region& region);

// Same quantity through the distribution function:
// int_0^inf eps t^{eps-1} m(t) dt with m(t) = |{|v| > t} cap region|,
// integrated exactly between consecutive sorted values.
double lepsilon_norm_layer_cake(const ScalarField& v, double eps, const Region& region);

// |{|v| > t} cap region| in node measure.
double distribution_function(const ScalarField& v, double t, const Region& region);

// (sum over box nodes in region of |f|^p h^dim)^{1/p}.
double lp_norm(const GridFunction& f, double p, const Region& region);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct FitEntry {
    std::string name;
    double value = 0.0;
    std::optional<double> r2;
    std::size_t samples = 0;
    std::string note;
};

struct Verdict {
    std::string rule;
    bool passed = false;
    std::string detail;
};

struct EstimateReport {
    std::string name;
    Table rows;
    std::vector<FitEntry> fits;
    std::vector<Verdict> verdicts;
    double runtime_seconds = 0.0;

    bool passed() const;
};

EstimateReport abp_experiment(const ExperimentConfig& cfg);
EstimateReport potential_experiment(const ExperimentConfig& cfg);
// with_ratio adds the L^eps quasi-norm, scaling and constant-source columns.
EstimateReport levelset_experiment(const ExperimentConfig& cfg, bool with_ratio);
EstimateReport localization_experiment(const ExperimentConfig& cfg);

// Writes rows.csv and fits.csv into dir (created if missing). Both start with
// the comment line "# manifest=<manifest_tag>".
void write_report_tables(const EstimateReport& r, const std::string& dir,
                         const std::string& manifest_tag);

}  // namespace nlest
