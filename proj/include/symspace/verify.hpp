#pragma once

#include <string>
#include <vector>

#include "symspace/common.hpp"
#include "symspace/manifolds.hpp"

namespace symspace::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;  // measured error / deviation
    double bound = 0.0;  // tolerance it was held against
    std::string detail;
};

/// Largest relative disagreement between the closed-form volume factor and
/// its finite-difference evaluation over `cases` random tangent vectors with
/// ‖v‖ ≤ 3 (Pd and PoincareBall).
double max_jacobian_rel_error(const manifolds::ManifoldHandle& h, int cases, Seed seed,
                              double step = 1e-4);

/// Largest |J_siegel(z) − J_poincare| over `count` radii |z| in (0, 0.999).
double max_siegel_poincare_error(int count);

/// Largest exp/log round-trip error over random tangent vectors.
double max_roundtrip_error(const manifolds::ManifoldHandle& h, int cases, Seed seed);

/// Worst |1 − ∫ f dμ| over `cases` random log-Gaussians on PoincareBall(2).
double worst_lg_normalization_error(int cases, Seed seed);

/// The oracle suite for one manifold; every returned check carries its
/// pass verdict, measured value and bound.
std::vector<CheckResult> run_checks(const manifolds::ManifoldHandle& h, int cases, Seed seed);

}  // namespace symspace::verify
