#include "symspace/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace symspace::metrics {

using manifolds::ManifoldPoint;

DensityHandle density_of(const distributions::LogGaussianParams& p) {
    DensityHandle h;
    h.handle = p.handle;
    h.log_density = [p](const ManifoldPoint& x) { return distributions::lg_log_density(p, x); };
    h.sampler = [p](int n, Seed seed) { return distributions::lg_sample(p, n, seed); };
    return h;
}

DensityHandle density_of(const estimators::KdeModel& model) {
    DensityHandle h;
    h.handle = model.handle;
    h.log_density = [model](const ManifoldPoint& x) { return estimators::kde_log_density(model, x); };
    return h;
}

DensityHandle density_of(const estimators::MixtureModel& model) {
    DensityHandle h;
    h.handle = model.handle;
    h.log_density = [model](const ManifoldPoint& x) { return estimators::mixture_log_density(model, x); };
    return h;
}

namespace {

constexpr double kLogClamp = 700.0;

struct MeanAccumulator {
    double mean = 0.0;
    double m2 = 0.0;
    int count = 0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }

    double std_error() const {
        if (count < 2) return 0.0;
        return std::sqrt(m2 / (count - 1.0) / count);
    }
};

void require_same_manifold(const DensityHandle& p, const DensityHandle& q) {
    if (!(p.handle == q.handle)) throw std::invalid_argument("metric: densities on different manifolds");
}

}  // namespace

McEstimate hellinger_sq(const DensityHandle& p, const DensityHandle& q, int n, Seed seed) {
    require_same_manifold(p, q);
    if (!p.sampler) throw std::invalid_argument("hellinger_sq: first density needs a sampler");
    if (n < 2) throw std::invalid_argument("hellinger_sq: n must be >= 2");
    const auto xs = p.sampler(n, seed);
    MeanAccumulator acc;
    int clamped = 0;
    for (const auto& x : xs) {
        double log_ratio = q.log_density(x) - p.log_density(x);
        if (std::abs(log_ratio) > kLogClamp) {
            log_ratio = std::copysign(kLogClamp, log_ratio);
            ++clamped;
        }
        acc.add(std::exp(0.5 * log_ratio));
    }
    McEstimate out;
    out.value = 2.0 - 2.0 * acc.mean;
    out.std_error = 2.0 * acc.std_error();
    out.n = n;
    out.seed = seed;
    out.clamped = clamped;
    return out;
}

McEstimate kl_divergence(const DensityHandle& p, const DensityHandle& q, int n, Seed seed) {
    require_same_manifold(p, q);
    if (!p.sampler) throw std::invalid_argument("kl_divergence: first density needs a sampler");
    if (n < 2) throw std::invalid_argument("kl_divergence: n must be >= 2");
    const auto xs = p.sampler(n, seed);
    MeanAccumulator acc;
    int clamped = 0;
    for (const auto& x : xs) {
        double diff = p.log_density(x) - q.log_density(x);
        if (std::abs(diff) > kLogClamp) {
            diff = std::copysign(kLogClamp, diff);
            ++clamped;
        }
        acc.add(diff);
    }
    McEstimate out;
    out.value = acc.mean;
    out.std_error = acc.std_error();
    out.n = n;
    out.seed = seed;
    out.clamped = clamped;
    return out;
}

namespace {

/// Sums w(node) · fn(node) over the midpoint polar grid; the weight factor
/// passed to fn distinguishes manifold (hyperbolic) and tangent integrands.
template <typename F>
double polar_sum(const PolarGrid& grid, F&& fn) {
    const double dr = grid.radius / grid.radial;
    const double dt = 2.0 * M_PI / grid.angular;
    double total = 0.0;
    for (int i = 0; i < grid.radial; ++i) {
        const double rho = (i + 0.5) * dr;
        double ring = 0.0;
        for (int j = 0; j < grid.angular; ++j) {
            const double theta = (j + 0.5) * dt;
            ring += fn(rho, theta);
        }
        total += ring * dr * dt;
    }
    return total;
}

ManifoldPoint ball_point(double rho, double theta) {
    Vec x(2);
    x << rho * std::cos(theta), rho * std::sin(theta);
    return {manifolds::ManifoldHandle::poincare_ball(2), x};
}

void require_ball2(const DensityHandle& p) {
    if (!(p.handle == manifolds::ManifoldHandle::poincare_ball(2))) {
        throw std::invalid_argument("quadrature metrics are implemented for poincare:2 only");
    }
}

double lp_manifold_on_grid(const DensityHandle& p, const DensityHandle& q, int lp,
                           const PolarGrid& grid) {
    const double sum = polar_sum(grid, [&](double rho, double theta) {
        const ManifoldPoint x = ball_point(rho, theta);
        const double diff = std::abs(std::exp(p.log_density(x)) - std::exp(q.log_density(x)));
        const double area = 4.0 * rho / std::pow(1.0 - rho * rho, 2);
        return (lp == 1 ? diff : diff * diff) * area;
    });
    return lp == 1 ? sum : std::sqrt(sum);
}

}  // namespace

double normalization_quadrature(const DensityHandle& p, const PolarGrid& grid) {
    require_ball2(p);
    return polar_sum(grid, [&](double rho, double theta) {
        const ManifoldPoint x = ball_point(rho, theta);
        return std::exp(p.log_density(x)) * 4.0 * rho / std::pow(1.0 - rho * rho, 2);
    });
}

double lp_distance_quadrature(const DensityHandle& p, const DensityHandle& q, int lp,
                              const PolarGrid& grid) {
    require_same_manifold(p, q);
    require_ball2(p);
    if (lp != 1 && lp != 2) throw std::invalid_argument("lp_distance_quadrature: p must be 1 or 2");
    const double fine = lp_manifold_on_grid(p, q, lp, grid);
    PolarGrid half = grid;
    half.radial = std::max(2, grid.radial / 2);
    half.angular = std::max(2, grid.angular / 2);
    const double coarse = lp_manifold_on_grid(p, q, lp, half);
    if (std::abs(fine - coarse) > 1e-3) {
        throw std::runtime_error("lp_distance_quadrature: grid too coarse");
    }
    return fine;
}

double lp_distance_tangent_quadrature(const DensityHandle& p, const DensityHandle& q, int lp,
                                      const PolarGrid& grid) {
    require_same_manifold(p, q);
    require_ball2(p);
    if (lp != 1 && lp != 2) throw std::invalid_argument("lp_distance_tangent_quadrature: p must be 1 or 2");
    // Tangent L^p over the same chart nodes: substitute r = 2 atanh(rho),
    // Lebesgue element r dr dθ = r(ρ) · 2/(1−ρ²) dρ dθ.
    const double sum = polar_sum(grid, [&](double rho, double theta) {
        const ManifoldPoint x = ball_point(rho, theta);
        const double log_j = manifolds::log_volume_factor(x);
        const double diff = std::abs(std::exp(p.log_density(x) - log_j) -
                                     std::exp(q.log_density(x) - log_j));
        const double r = 2.0 * std::atanh(rho);
        const double jac = r * 2.0 / (1.0 - rho * rho);
        return (lp == 1 ? diff : diff * diff) * jac;
    });
    return lp == 1 ? sum : std::sqrt(sum);
}

double assignment_cost(const Mat& cost) {
    // Shortest-augmenting-path assignment with potentials, O(n^3).
    const Eigen::Index n = cost.rows();
    if (cost.cols() != n) throw std::invalid_argument("assignment_cost: matrix must be square");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<Eigen::Index> match(static_cast<size_t>(n) + 1, 0);  // column -> row (1-based)
    std::vector<Eigen::Index> path(static_cast<size_t>(n) + 1, 0);

    for (Eigen::Index i = 1; i <= n; ++i) {
        match[0] = i;
        Eigen::Index j0 = 0;
        std::vector<double> min_slack(static_cast<size_t>(n) + 1, kInf);
        std::vector<bool> used(static_cast<size_t>(n) + 1, false);
        do {
            used[static_cast<size_t>(j0)] = true;
            const Eigen::Index i0 = match[static_cast<size_t>(j0)];
            double delta = kInf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double reduced =
                    cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (reduced < min_slack[static_cast<size_t>(j)]) {
                    min_slack[static_cast<size_t>(j)] = reduced;
                    path[static_cast<size_t>(j)] = j0;
                }
                if (min_slack[static_cast<size_t>(j)] < delta) {
                    delta = min_slack[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    min_slack[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            const Eigen::Index j1 = path[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    double total = 0.0;
    for (Eigen::Index j = 1; j <= n; ++j) {
        if (match[static_cast<size_t>(j)] != 0) total += cost(match[static_cast<size_t>(j)] - 1, j - 1);
    }
    return total;
}

double wasserstein_empirical(const std::vector<ManifoldPoint>& xs,
                             const std::vector<ManifoldPoint>& ys, int p, WassersteinCost cost) {
    if (xs.size() != ys.size()) throw std::invalid_argument("wasserstein_empirical: size mismatch");
    if (xs.empty() || xs.size() > 512) {
        throw std::invalid_argument("wasserstein_empirical: need 1..512 points");
    }
    if (p != 1 && p != 2) throw std::invalid_argument("wasserstein_empirical: p must be 1 or 2");
    const auto n = static_cast<Eigen::Index>(xs.size());

    Mat costs(n, n);
    if (cost == WassersteinCost::EuclideanTangent) {
        std::vector<Vec> ux, uy;
        ux.reserve(xs.size());
        uy.reserve(ys.size());
        for (const auto& x : xs) ux.push_back(manifolds::log_map(x).values);
        for (const auto& y : ys) uy.push_back(manifolds::log_map(y).values);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double d = (ux[static_cast<size_t>(i)] - uy[static_cast<size_t>(j)]).norm();
                costs(i, j) = p == 1 ? d : d * d;
            }
        }
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double d =
                    manifolds::geodesic_distance(xs[static_cast<size_t>(i)], ys[static_cast<size_t>(j)]);
                costs(i, j) = p == 1 ? d : d * d;
            }
        }
    }
    const double total = assignment_cost(costs);
    const double mean = total / static_cast<double>(n);
    return p == 1 ? mean : std::sqrt(mean);
}

double gaussian_hellinger_sq(const Vec& mu1, const Mat& s1, const Vec& mu2, const Mat& s2) {
    const Mat avg = 0.5 * (s1 + s2);
    const Eigen::LLT<Mat> llt(avg);
    const Vec diff = mu2 - mu1;
    const Vec w = Mat(llt.matrixL()).triangularView<Eigen::Lower>().solve(diff);
    const double log_det_avg = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
    const double log_det_1 = std::log(s1.determinant());
    const double log_det_2 = std::log(s2.determinant());
    const double log_bc =
        -0.125 * w.squaredNorm() - 0.5 * (log_det_avg - 0.5 * (log_det_1 + log_det_2));
    return 2.0 - 2.0 * std::exp(log_bc);
}

double gaussian_kl(const Vec& mu1, const Mat& s1, const Vec& mu2, const Mat& s2) {
    const double d = static_cast<double>(mu1.size());
    const Eigen::LLT<Mat> llt(s2);
    const Mat s2_inv_s1 = llt.solve(s1);
    const Vec diff = mu2 - mu1;
    const double maha = diff.dot(llt.solve(diff));
    const double log_det_ratio = std::log(s2.determinant()) - std::log(s1.determinant());
    return 0.5 * (s2_inv_s1.trace() + maha - d + log_det_ratio);
}

}  // namespace symspace::metrics
