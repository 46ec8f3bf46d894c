#include <doctest.h>

#include <cmath>

#include "symspace/distributions.hpp"
#include "symspace/estimators.hpp"
#include "symspace/metrics.hpp"

using namespace symspace;
using namespace symspace::estimators;
using distributions::LogGaussianParams;
using linalg::PdMatrix;
using manifolds::ManifoldHandle;
using manifolds::ManifoldPoint;

namespace {

std::vector<ManifoldPoint> lg_points(const ManifoldHandle& h, const Vec& mu, double sigma2, int n,
                                     Seed seed) {
    const LogGaussianParams p{h, mu, PdMatrix(Mat(sigma2 * Mat::Identity(h.dim(), h.dim())))};
    return distributions::lg_sample(p, n, seed);
}

}  // namespace

TEST_CASE("kde_fit stores coordinates") {
    const ManifoldHandle h = ManifoldHandle::pd(2);
    const auto pts = lg_points(h, Vec::Zero(3), 1.0, 1, 5);
    const auto model = kde_fit(pts, 0.7);
    CHECK(model.coords.rows() == 1);
    CHECK(model.coords.cols() == 3);
    CHECK(std::isfinite(kde_log_density(model, pts[0])));

    const ManifoldHandle e = ManifoldHandle::euclidean(2);
    Vec v(2);
    v << 1.5, -0.5;
    const auto em = kde_fit({{e, v}}, 1.0);
    CHECK(em.coords(0, 0) == 1.5);
    CHECK(em.coords(0, 1) == -0.5);

    CHECK_THROWS_AS(kde_fit(pts, 0.0), std::invalid_argument);
}

TEST_CASE("kde log density closed forms") {
    // Single training point evaluated at itself.
    const ManifoldHandle h = ManifoldHandle::pd(2);
    const auto pts = lg_points(h, Vec::Zero(3), 0.5, 1, 6);
    const double bw = 0.8;
    const auto model = kde_fit(pts, bw);
    const double expected = -1.5 * std::log(2.0 * M_PI * bw * bw) +
                            manifolds::log_volume_factor(pts[0]);
    CHECK(kde_log_density(model, pts[0]) == doctest::Approx(expected).epsilon(1e-12));

    // Euclidean(1), training set {0}, h = 1, evaluated at 1.
    const ManifoldHandle e1 = ManifoldHandle::euclidean(1);
    const auto m1 = kde_fit({{e1, Vec(Vec::Zero(1))}}, 1.0);
    Vec one(1);
    one << 1.0;
    CHECK(kde_log_density(m1, {e1, one}) == doctest::Approx(-1.4189385332046727).epsilon(1e-14));

    // PoincareBall(2), training set {origin}, h = 1 is the lG(0, I) density.
    const ManifoldHandle ball = ManifoldHandle::poincare_ball(2);
    const auto mb = kde_fit({manifolds::base_point(ball)}, 1.0);
    Vec x(2);
    x << 0.5, 0.0;
    CHECK(std::exp(kde_log_density(mb, {ball, x})) ==
          doctest::Approx(0.07171998842399753).epsilon(1e-12));
}

TEST_CASE("wishart kernel kde matches the direct kernel average") {
    const ManifoldHandle h = ManifoldHandle::pd(2);
    const auto pts = lg_points(h, Vec::Zero(3), 0.4, 6, 7);
    const auto query = lg_points(h, Vec::Zero(3), 0.4, 3, 8);
    for (const double nu : {4.0, 12.0}) {
        const auto wm = kde_fit(pts, nu, KernelKind::Wishart);
        const auto im = kde_fit(pts, nu, KernelKind::InvWishart);
        for (const auto& x : query) {
            double wacc = 0.0;
            double iacc = 0.0;
            for (const auto& p : pts) {
                const distributions::WishartParams wp{PdMatrix(Mat(p.pd().mat() / nu)), nu};
                wacc += std::exp(distributions::wishart_log_density(wp, x.pd()));
                const distributions::InvWishartParams ip{PdMatrix(Mat(nu * p.pd().mat())), nu + 3.0};
                iacc += std::exp(distributions::invwishart_log_density(ip, x.pd()));
            }
            CHECK(kde_log_density(wm, x) ==
                  doctest::Approx(std::log(wacc / pts.size())).epsilon(1e-10));
            CHECK(kde_log_density(im, x) ==
                  doctest::Approx(std::log(iacc / pts.size())).epsilon(1e-10));
        }
    }
}

TEST_CASE("kde density is rotation equivariant in coordinates") {
    const ManifoldHandle e3 = ManifoldHandle::euclidean(3);
    Rng rng(11);
    std::vector<ManifoldPoint> pts;
    for (int i = 0; i < 15; ++i) pts.push_back({e3, rng.normal_vec(3)});
    const auto model = kde_fit(pts, 0.6);

    // Orthogonal rotation from a QR factorization.
    Mat a(3, 3);
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
    const Mat q = Eigen::HouseholderQR<Mat>(a).householderQ();

    std::vector<ManifoldPoint> rotated;
    for (const auto& p : pts) rotated.push_back({e3, Vec(q * p.vec())});
    const auto rotated_model = kde_fit(rotated, 0.6);
    for (int rep = 0; rep < 10; ++rep) {
        const Vec x = rng.normal_vec(3);
        CHECK(kde_log_density(model, {e3, x}) ==
              doctest::Approx(kde_log_density(rotated_model, {e3, Vec(q * x)})).epsilon(1e-12));
    }
}

TEST_CASE("bandwidth selection") {
    const ManifoldHandle h = ManifoldHandle::pd(2);
    const auto pts = lg_points(h, Vec::Zero(3), 1.0, 60, 21);

    const auto single = bandwidth_cv(pts, {0.5}, 5, 3);
    CHECK(single.selected == 0.5);

    const auto dup = bandwidth_cv(pts, {0.5, 0.5, 0.7, 0.7}, 5, 3);
    CHECK(dup.fold_scores.rows() == 5);
    CHECK((dup.selected == 0.5 || dup.selected == 0.7));

    const auto a = bandwidth_cv(pts, {0.2, 0.5, 1.0}, 5, 3);
    const auto b = bandwidth_cv(pts, {0.2, 0.5, 1.0}, 5, 3);
    CHECK(a.selected == b.selected);
    CHECK((a.fold_scores - b.fold_scores).norm() == 0.0);

    CHECK_THROWS_AS(bandwidth_cv(pts, {}, 5, 3), std::invalid_argument);
    CHECK_THROWS_AS(bandwidth_cv(pts, {0.1}, 40, 3), std::invalid_argument);
}

TEST_CASE("cross-validated bandwidth is interior on log-Gaussian data") {
    const ManifoldHandle h = ManifoldHandle::pd(2);
    const auto pts = lg_points(h, Vec::Zero(3), 1.0, 1000, 31);
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) {
        grid.push_back(std::exp(std::log(0.01) + (std::log(10.0) - std::log(0.01)) * i / 19.0));
    }
    const auto report = bandwidth_cv(pts, grid, 5, 17);
    CHECK(report.selected > grid.front());
    CHECK(report.selected < grid.back());
}

TEST_CASE("em with one component is the exact Gaussian MLE") {
    Rng rng(41);
    Mat coords(40, 3);
    for (Eigen::Index i = 0; i < coords.size(); ++i) coords(i / 3, i % 3) = rng.normal();
    const auto model = em_fit(coords, 1, 9);
    const Vec mean = coords.colwise().mean();
    Mat centered = coords.rowwise() - mean.transpose();
    const Mat cov = (centered.transpose() * centered) / 40.0;
    CHECK(model.weights[0] == 1.0);
    CHECK((model.means.row(0).transpose() - mean).norm() <= 1e-10);
    CHECK((model.covariances[0] - cov).norm() <= 1e-10);
}

TEST_CASE("em floors the covariance when all points coincide") {
    Mat coords = Mat::Zero(10, 2);
    coords.col(0).setConstant(1.5);
    const double floor = 1e-6;
    const auto model = em_fit(coords, 1, 3, 500, 1e-8, floor);
    CHECK((model.covariances[0] - floor * Mat::Identity(2, 2)).norm() <= 1e-18);
}

TEST_CASE("em recovers two well-separated clusters") {
    Rng rng(55);
    const int n = 2000;
    Mat coords(n, 3);
    for (int i = 0; i < n; ++i) {
        const double center = (i % 2 == 0) ? 5.0 : -5.0;
        coords(i, 0) = center + rng.normal();
        coords(i, 1) = rng.normal();
        coords(i, 2) = rng.normal();
    }
    const auto model = em_fit(coords, 2, 77);
    const int hi = model.means(0, 0) > model.means(1, 0) ? 0 : 1;
    CHECK(std::abs(model.means(hi, 0) - 5.0) <= 0.2);
    CHECK(std::abs(model.means(1 - hi, 0) + 5.0) <= 0.2);
    CHECK(std::abs(model.weights[0] - 0.5) <= 0.05);

    // The log-likelihood never decreases along the iteration.
    for (size_t t = 1; t < model.log_likelihood_history.size(); ++t) {
        CHECK(model.log_likelihood_history[t] >=
              model.log_likelihood_history[t - 1] -
                  1e-10 * (1.0 + std::abs(model.log_likelihood_history[t - 1])));
    }
}

TEST_CASE("em validates its inputs") {
    Mat coords = Mat::Zero(3, 2);
    CHECK_THROWS_AS(em_fit(coords, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(em_fit(coords, 0, 1), std::invalid_argument);
}

TEST_CASE("em is deterministic given the seed") {
    Rng rng(61);
    Mat coords(200, 2);
    for (Eigen::Index i = 0; i < coords.size(); ++i) coords(i / 2, i % 2) = rng.normal();
    const auto a = em_fit(coords, 3, 1717);
    const auto b = em_fit(coords, 3, 1717);
    CHECK((a.means - b.means).norm() == 0.0);
    CHECK((a.weights - b.weights).norm() == 0.0);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("mixture density reductions") {
    const ManifoldHandle h = ManifoldHandle::pd(2);
    const auto pts = lg_points(h, Vec::Zero(3), 1.0, 300, 71);
    Mat coords(300, 3);
    for (int i = 0; i < 300; ++i) coords.row(i) = manifolds::log_map(pts[static_cast<size_t>(i)]).values.transpose();

    const auto model = em_fit(coords, 1, 5, 500, 1e-8, 1e-6, CovarianceKind::Full, h);
    const LogGaussianParams equivalent{h, Vec(model.means.row(0).transpose()),
                                       PdMatrix(model.covariances[0])};
    for (int i = 0; i < 5; ++i) {
        CHECK(mixture_log_density(model, pts[static_cast<size_t>(i)]) ==
              doctest::Approx(distributions::lg_log_density(equivalent, pts[static_cast<size_t>(i)]))
                  .epsilon(1e-12));
    }
}

TEST_CASE("kde and mixture densities integrate to one on the disk") {
    const ManifoldHandle ball = ManifoldHandle::poincare_ball(2);
    const auto pts = lg_points(ball, Vec::Zero(2), 0.25, 12, 81);
    for (const double h : {0.3, 1.0}) {
        const auto model = kde_fit(pts, h);
        const double integral = metrics::normalization_quadrature(metrics::density_of(model));
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
    }

    // A larger sample keeps all three mixture components wide enough for the
    // quadrature grid to resolve.
    const auto mix_pts = lg_points(ball, Vec::Zero(2), 0.25, 60, 82);
    Mat coords(static_cast<Eigen::Index>(mix_pts.size()), 2);
    for (size_t i = 0; i < mix_pts.size(); ++i) {
        coords.row(static_cast<Eigen::Index>(i)) = manifolds::log_map(mix_pts[i]).values.transpose();
    }
    const auto mix = em_fit(coords, 3, 4, 500, 1e-8, 1e-6, CovarianceKind::Full, ball);
    const double integral = metrics::normalization_quadrature(metrics::density_of(mix));
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("component count selection") {
    Rng rng(91);
    Mat single(200, 2);
    for (Eigen::Index i = 0; i < single.size(); ++i) single(i / 2, i % 2) = rng.normal();
    CHECK(model_select_k(single, 1, 5, 3) == 1);

    int votes_single = 0;
    int votes_two = 0;
    for (Seed seed = 0; seed < 10; ++seed) {
        Mat s(150, 2);
        Rng gen(seed * 13 + 1);
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i / 2, i % 2) = gen.normal();
        if (model_select_k(s, 3, 5, seed) == 1) ++votes_single;

        Mat two(150, 2);
        for (int i = 0; i < 150; ++i) {
            two(i, 0) = (i % 2 == 0 ? 5.0 : -5.0) + gen.normal();
            two(i, 1) = gen.normal();
        }
        if (model_select_k(two, 4, 5, seed) == 2) ++votes_two;
    }
    CHECK(votes_single >= 6);
    CHECK(votes_two >= 6);
}
