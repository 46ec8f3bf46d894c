#pragma once

#include <array>
#include <string>
#include <vector>

#include "symspace/common.hpp"
#include "symspace/manifolds.hpp"

namespace symspace::sim {

enum class Family { Wishart, InvWishart, LogGaussian };

std::string family_name(Family f);
Family parse_family(const std::string& name);

/// Sweep of the generating parameter: dof 2..10 for the Wishart families,
/// σ² in {e⁻³, …, e³} for the log-Gaussian family.
std::vector<double> default_sweep(Family f);

inline constexpr std::array<const char*, 4> kMethodNames = {"wishart_kde", "invwishart_kde",
                                                            "lg_kde", "lg_mixture"};

struct MethodScores {
    std::vector<double> per_replicate;  // test-set summed log-likelihood
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over replicates
};

struct SweepResult {
    double sweep_value = 0.0;
    std::array<MethodScores, 4> methods;
};

struct SimulationReport {
    Family family = Family::Wishart;
    int n = 0;
    int replicates = 0;
    Seed seed = 0;
    std::vector<SweepResult> results;
};

/// Per sweep value and replicate: draw n PD(2) samples, split evenly into
/// train/test, fit all four estimators with cross-validated tuning
/// parameters, and record the summed test log-likelihood. Scores are
/// comparable across methods: every density is evaluated against the same
/// reference measure (Lebesgue on the matrix entries). Replicate r uses
/// seed + r; cells run in parallel but aggregate by index, so the report is
/// independent of the thread count.
SimulationReport run_simulation(Family family, const std::vector<double>& sweep, int n,
                                int replicates, Seed seed);

/// Stable machine-readable table:
/// family,sweep_value,method,mean_test_loglik,std_test_loglik,replicates
std::string report_to_csv(const SimulationReport& report, const std::string& comment = "");

}  // namespace symspace::sim
