#include "symspace/distributions.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace symspace::distributions {

using linalg::PdMatrix;
using manifolds::ManifoldPoint;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

struct CholeskyDensity {
    Mat lower;
    double log_det;  // log det(Sigma)

    explicit CholeskyDensity(const PdMatrix& sigma) {
        Eigen::LLT<Mat> llt(sigma.mat());
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("gaussian density: singular covariance");
        }
        lower = llt.matrixL();
        log_det = 2.0 * lower.diagonal().array().log().sum();
    }

    double log_density(const Vec& z, const Vec& mu) const {
        const Vec whitened = lower.triangularView<Eigen::Lower>().solve(z - mu);
        const double d = static_cast<double>(z.size());
        return -0.5 * (d * kLog2Pi + log_det + whitened.squaredNorm());
    }
};

}  // namespace

double gaussian_log_density(const GaussianParams& p, const Vec& z) {
    if (z.size() != p.mu.size()) throw std::invalid_argument("gaussian_log_density: dimension mismatch");
    return CholeskyDensity(p.sigma).log_density(z, p.mu);
}

std::vector<Vec> gaussian_sample(const GaussianParams& p, int n, Rng& rng) {
    const Mat l = linalg::cholesky_lower(p.sigma);
    std::vector<Vec> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(p.mu + l * rng.normal_vec(p.mu.size()));
    return out;
}

LogGaussianParams::LogGaussianParams(manifolds::ManifoldHandle h, Vec mean, PdMatrix cov)
    : handle(h), mu(std::move(mean)), sigma(std::move(cov)) {
    if (mu.size() != handle.dim() || sigma.order() != handle.dim()) {
        throw std::invalid_argument("LogGaussianParams: dimension does not match manifold");
    }
}

double lg_log_density(const LogGaussianParams& p, const ManifoldPoint& x) {
    if (x.handle != p.handle) throw std::invalid_argument("lg_log_density: manifold mismatch");
    const Vec u = manifolds::log_map(x).values;
    return CholeskyDensity(p.sigma).log_density(u, p.mu) + manifolds::log_volume_factor(x);
}

std::vector<ManifoldPoint> lg_sample(const LogGaussianParams& p, int n, Seed seed, SampleStats* stats) {
    if (n < 0) throw std::invalid_argument("lg_sample: n must be >= 0");
    constexpr int kMaxRetries = 100;
    Rng rng(seed);
    const Mat l = linalg::cholesky_lower(p.sigma);
    std::vector<ManifoldPoint> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        int retries = 0;
        for (;;) {
            const Vec z = p.mu + l * rng.normal_vec(p.mu.size());
            try {
                out.push_back(manifolds::exp_map(p.handle, z));
                break;
            } catch (const std::overflow_error&) {
                if (stats != nullptr) ++stats->overflow_retries;
                if (++retries >= kMaxRetries) {
                    throw std::runtime_error("lg_sample: repeated overflow in exp_map; covariance too large");
                }
            }
        }
    }
    return out;
}

WishartParams::WishartParams(PdMatrix v, double nu) : scale(std::move(v)), dof(nu) {
    if (!(dof > static_cast<double>(scale.order() - 1))) {
        throw std::invalid_argument("WishartParams: dof must exceed m - 1");
    }
}

InvWishartParams::InvWishartParams(PdMatrix v, double nu) : scale(std::move(v)), dof(nu) {
    if (!(dof > static_cast<double>(scale.order() + 1))) {
        throw std::invalid_argument("InvWishartParams: dof must exceed m + 1");
    }
}

double log_multivariate_gamma(int m, double a) {
    double acc = 0.25 * m * (m - 1) * std::log(M_PI);
    for (int j = 1; j <= m; ++j) acc += std::lgamma(a + 0.5 * (1.0 - j));
    return acc;
}

namespace {

double log_det_pd(const PdMatrix& x) {
    Eigen::LLT<Mat> llt(x.mat());
    if (llt.info() != Eigen::Success) throw std::runtime_error("log_det_pd: factorization failed");
    return 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

double wishart_log_density(const WishartParams& p, const PdMatrix& x) {
    const int m = static_cast<int>(p.scale.order());
    if (x.order() != m) throw std::invalid_argument("wishart_log_density: dimension mismatch");
    const double nu = p.dof;
    const double trace_term = p.scale.mat().llt().solve(x.mat()).trace();
    return 0.5 * (nu - m - 1) * log_det_pd(x) - 0.5 * trace_term - 0.5 * nu * m * std::log(2.0) -
           0.5 * nu * log_det_pd(p.scale) - log_multivariate_gamma(m, 0.5 * nu);
}

double invwishart_log_density(const InvWishartParams& p, const PdMatrix& x) {
    const int m = static_cast<int>(p.scale.order());
    if (x.order() != m) throw std::invalid_argument("invwishart_log_density: dimension mismatch");
    const double nu = p.dof;
    const double trace_term = x.mat().llt().solve(p.scale.mat()).trace();
    return 0.5 * nu * log_det_pd(p.scale) - 0.5 * (nu + m + 1) * log_det_pd(x) - 0.5 * trace_term -
           0.5 * nu * m * std::log(2.0) - log_multivariate_gamma(m, 0.5 * nu);
}

linalg::PdMatrix wishart_sample(const PdMatrix& scale, int nu, Rng& rng) {
    const Eigen::Index m = scale.order();
    if (nu < static_cast<int>(m)) throw std::invalid_argument("wishart_sample: integer dof must be >= m");
    const Mat l = linalg::cholesky_lower(scale);
    Mat acc = Mat::Zero(m, m);
    for (int k = 0; k < nu; ++k) {
        const Vec z = l * rng.normal_vec(m);
        acc += z * z.transpose();
    }
    acc = symmetrized(acc);
    return PdMatrix::trusted(std::move(acc));
}

linalg::PdMatrix invwishart_sample(const PdMatrix& scale, int nu, Rng& rng) {
    const PdMatrix w = wishart_sample(PdMatrix(scale.mat().inverse()), nu, rng);
    Mat inv = w.mat().inverse();
    inv = symmetrized(inv);
    return PdMatrix::trusted(std::move(inv));
}

}  // namespace symspace::distributions
