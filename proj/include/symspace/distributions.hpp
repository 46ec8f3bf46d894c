#pragma once

#include <vector>

#include "symspace/common.hpp"
#include "symspace/linalg.hpp"
#include "symspace/manifolds.hpp"
#include "symspace/rng.hpp"

namespace symspace::distributions {

/// Multivariate normal N(mu, sigma) in tangent coordinates.
struct GaussianParams {
    Vec mu;
    linalg::PdMatrix sigma;
};

double gaussian_log_density(const GaussianParams& p, const Vec& z);
std::vector<Vec> gaussian_sample(const GaussianParams& p, int n, Rng& rng);

/// Push-forward of N(mu, sigma) through the exponential map of the manifold.
struct LogGaussianParams {
    manifolds::ManifoldHandle handle;
    Vec mu;
    linalg::PdMatrix sigma;

    LogGaussianParams(manifolds::ManifoldHandle h, Vec mean, linalg::PdMatrix cov);
};

/// Log density with respect to the Riemannian measure:
/// log N(log x; mu, sigma) + log J(x). Integrates to 1 over the manifold.
double lg_log_density(const LogGaussianParams& p, const manifolds::ManifoldPoint& x);

struct SampleStats {
    int overflow_retries = 0;
};

/// Draws z ~ N(mu, sigma) and returns exp_map(z). Deterministic given seed.
/// Draws whose exponential would overflow are redrawn (at most 100 retries
/// each; the count is reported through `stats` when given).
std::vector<manifolds::ManifoldPoint> lg_sample(const LogGaussianParams& p, int n, Seed seed,
                                                SampleStats* stats = nullptr);

/// Wishart W(V, nu) on PD(m); requires nu > m - 1.
struct WishartParams {
    linalg::PdMatrix scale;
    double dof;

    WishartParams(linalg::PdMatrix v, double nu);
};

/// Inverse Wishart W^{-1}(V, nu) on PD(m); requires nu > m + 1 (finite mean).
struct InvWishartParams {
    linalg::PdMatrix scale;
    double dof;

    InvWishartParams(linalg::PdMatrix v, double nu);
};

/// log Γ_m(a), the multivariate gamma function in log form.
double log_multivariate_gamma(int m, double a);

double wishart_log_density(const WishartParams& p, const linalg::PdMatrix& x);
double invwishart_log_density(const InvWishartParams& p, const linalg::PdMatrix& x);

/// Integer-dof Wishart draw as a sum of nu Gaussian outer products.
linalg::PdMatrix wishart_sample(const linalg::PdMatrix& scale, int nu, Rng& rng);

/// Inverse Wishart draw: inverse of a Wishart(V^{-1}, nu) draw.
linalg::PdMatrix invwishart_sample(const linalg::PdMatrix& scale, int nu, Rng& rng);

}  // namespace symspace::distributions
