#pragma once

#include <functional>
#include <vector>

#include "symspace/common.hpp"
#include "symspace/distributions.hpp"
#include "symspace/estimators.hpp"
#include "symspace/manifolds.hpp"

namespace symspace::metrics {

/// A density on a manifold: log-density closure plus (optionally) an exact
/// sampler consistent with it.
struct DensityHandle {
    manifolds::ManifoldHandle handle;
    std::function<double(const manifolds::ManifoldPoint&)> log_density;
    std::function<std::vector<manifolds::ManifoldPoint>(int, Seed)> sampler;  // may be empty
};

DensityHandle density_of(const distributions::LogGaussianParams& p);
DensityHandle density_of(const estimators::KdeModel& model);
DensityHandle density_of(const estimators::MixtureModel& model);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int n = 0;
    Seed seed = 0;
    int clamped = 0;  // density-ratio clamps applied
};

/// Squared Hellinger distance ∫(√f₁ − √f₂)² dμ_g estimated as
/// 2 − 2 E_{x∼p}[√(f₂(x)/f₁(x))]. Requires a sampler on p.
McEstimate hellinger_sq(const DensityHandle& p, const DensityHandle& q, int n, Seed seed);

/// KL(p ‖ q) estimated as E_{x∼p}[log f₁(x) − log f₂(x)].
McEstimate kl_divergence(const DensityHandle& p, const DensityHandle& q, int n, Seed seed);

struct PolarGrid {
    int radial = 500;
    int angular = 360;
    double radius = 0.999;
};

/// L^p distance on PoincareBall(2) by polar quadrature with the hyperbolic
/// area element; p in {1, 2}. Throws when the estimated quadrature error
/// (against the half-resolution grid) exceeds 1e-3.
double lp_distance_quadrature(const DensityHandle& p, const DensityHandle& q, int lp,
                              const PolarGrid& grid = {});

/// Companion value on the same grid nodes: the L^p distance between the
/// pulled-back tangent densities f/J ∘ exp. The push-forward contraction is
/// then a node-wise inequality, so the comparison carries no quadrature slack.
double lp_distance_tangent_quadrature(const DensityHandle& p, const DensityHandle& q, int lp,
                                      const PolarGrid& grid = {});

/// Quadrature of ∫ f dμ_g over PoincareBall(2); equals 1 for any density.
double normalization_quadrature(const DensityHandle& p, const PolarGrid& grid = {});

enum class WassersteinCost { Geodesic, EuclideanTangent };

/// Exact empirical p-Wasserstein distance between equal-size samples by
/// optimal assignment (Hungarian algorithm); at most 512 points.
double wasserstein_empirical(const std::vector<manifolds::ManifoldPoint>& xs,
                             const std::vector<manifolds::ManifoldPoint>& ys, int p,
                             WassersteinCost cost);

/// Minimum-cost perfect matching value of a square cost matrix.
double assignment_cost(const Mat& cost);

/// Closed forms used as ground truth by the push-forward invariance checks.
double gaussian_hellinger_sq(const Vec& mu1, const Mat& s1, const Vec& mu2, const Mat& s2);
double gaussian_kl(const Vec& mu1, const Mat& s1, const Vec& mu2, const Mat& s2);

}  // namespace symspace::metrics
