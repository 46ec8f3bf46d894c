#include "symspace/verify.hpp"

#include <cmath>
#include <stdexcept>

#include "symspace/distributions.hpp"
#include "symspace/metrics.hpp"
#include "symspace/rng.hpp"

namespace symspace::verify {

using manifolds::ManifoldHandle;
using manifolds::ManifoldPoint;

namespace {

Vec random_tangent(const ManifoldHandle& h, double max_norm, Rng& rng) {
    Vec v = rng.normal_vec(h.dim());
    const double n = v.norm();
    if (n == 0.0) return v;
    const double radius = max_norm * std::cbrt(rng.uniform_pos());  // bounded, away-from-0 biased
    return v * (radius / n);
}

}  // namespace

double max_jacobian_rel_error(const ManifoldHandle& h, int cases, Seed seed, double step) {
    Rng rng(seed);
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
        const Vec v = random_tangent(h, 3.0, rng);
        const double closed = manifolds::volume_factor(manifolds::exp_map(h, v));
        const double numeric = manifolds::numeric_volume_factor(h, v, step);
        worst = std::max(worst, std::abs(closed - numeric) / closed);
    }
    return worst;
}

double max_siegel_poincare_error(int count) {
    const ManifoldHandle siegel = ManifoldHandle::siegel_disk(1);
    const ManifoldHandle ball = ManifoldHandle::poincare_ball(2);
    double worst = 0.0;
    for (int i = 1; i <= count; ++i) {
        const double radius = 0.999 * static_cast<double>(i) / count;
        CMat z(1, 1);
        z(0, 0) = radius;
        Vec x(2);
        x << radius, 0.0;
        const double js = manifolds::volume_factor({siegel, z});
        const double jp = manifolds::volume_factor({ball, x});
        worst = std::max(worst, std::abs(js - jp));
    }
    return worst;
}

double max_roundtrip_error(const ManifoldHandle& h, int cases, Seed seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
        const Vec v = random_tangent(h, 3.0, rng);
        const Vec back = manifolds::log_map(manifolds::exp_map(h, v)).values;
        worst = std::max(worst, (back - v).norm());
    }
    return worst;
}

double worst_lg_normalization_error(int cases, Seed seed) {
    const ManifoldHandle ball = ManifoldHandle::poincare_ball(2);
    Rng rng(seed);
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
        Vec mu = rng.normal_vec(2);
        if (mu.norm() > 1.0) mu *= 1.0 / mu.norm();
        // Random SPD covariance with eigenvalues in [0.25, 1].
        const double angle = rng.uniform() * M_PI;
        const double l1 = 0.25 + 0.75 * rng.uniform();
        const double l2 = 0.25 + 0.75 * rng.uniform();
        Mat rot(2, 2);
        rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
        const Mat sigma = rot * Vec((Vec(2) << l1, l2).finished()).asDiagonal() * rot.transpose();
        const distributions::LogGaussianParams params{ball, mu, linalg::PdMatrix(sigma)};
        const double integral = metrics::normalization_quadrature(metrics::density_of(params));
        worst = std::max(worst, std::abs(integral - 1.0));
    }
    return worst;
}

std::vector<CheckResult> run_checks(const ManifoldHandle& h, int cases, Seed seed) {
    std::vector<CheckResult> out;
    const auto add = [&out](std::string name, double value, double bound, std::string detail) {
        out.push_back({std::move(name), value <= bound, value, bound, std::move(detail)});
    };

    switch (h.kind) {
        case manifolds::Kind::Euclidean: {
            Rng rng(seed);
            double worst = 0.0;
            for (int c = 0; c < cases; ++c) {
                const Vec v = random_tangent(h, 3.0, rng);
                worst = std::max(worst,
                                 std::abs(manifolds::volume_factor(manifolds::exp_map(h, v)) - 1.0));
            }
            add("volume_factor_is_one", worst, 0.0, "flat space");
            add("exp_log_roundtrip", max_roundtrip_error(h, cases, seed), 1e-9, "");
            break;
        }
        case manifolds::Kind::Pd:
        case manifolds::Kind::PoincareBall: {
            add("jacobian_vs_finite_difference", max_jacobian_rel_error(h, cases, seed), 1e-4,
                std::to_string(cases) + " tangent vectors, |v| <= 3, step 1e-4");
            add("exp_log_roundtrip", max_roundtrip_error(h, cases, seed), 1e-9, "");
            if (h == ManifoldHandle::poincare_ball(2)) {
                add("lg_normalization_quadrature", worst_lg_normalization_error(5, seed), 1e-3,
                    "5 random (mu, sigma), 500x360 polar grid");
            }
            break;
        }
        case manifolds::Kind::SiegelDisk: {
            if (h.param == 1) {
                add("siegel_poincare_identity", max_siegel_poincare_error(1000), 1e-10,
                    "1000 radii in (0, 0.999)");
            }
            add("exp_log_roundtrip", max_roundtrip_error(h, cases, seed), 1e-9, "");
            break;
        }
    }
    return out;
}

}  // namespace symspace::verify
