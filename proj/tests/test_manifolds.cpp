#include <doctest.h>

#include <cmath>

#include "symspace/manifolds.hpp"
#include "symspace/rng.hpp"

using namespace symspace;
using namespace symspace::manifolds;

namespace {

constexpr double kLn3 = 1.0986122886681098;

Vec random_tangent(const ManifoldHandle& h, double radius, Rng& rng) {
    Vec v = rng.normal_vec(h.dim());
    return v * (radius / v.norm());
}

const std::vector<ManifoldHandle> kAllKinds = {
    ManifoldHandle::euclidean(3),    ManifoldHandle::pd(2),
    ManifoldHandle::pd(3),           ManifoldHandle::poincare_ball(2),
    ManifoldHandle::poincare_ball(3), ManifoldHandle::siegel_disk(1),
    ManifoldHandle::siegel_disk(2),
};

}  // namespace

TEST_CASE("handle parsing and dimensions") {
    CHECK(ManifoldHandle::parse("pd:3") == ManifoldHandle::pd(3));
    CHECK(ManifoldHandle::parse("poincare:2") == ManifoldHandle::poincare_ball(2));
    CHECK(ManifoldHandle::parse("siegel:1") == ManifoldHandle::siegel_disk(1));
    CHECK(ManifoldHandle::parse("euclidean:5") == ManifoldHandle::euclidean(5));
    CHECK(ManifoldHandle::pd(3).dim() == 6);
    CHECK(ManifoldHandle::siegel_disk(2).dim() == 6);
    CHECK(ManifoldHandle::pd(2).str() == "pd:2");
    CHECK_THROWS_AS(ManifoldHandle::parse("sphere:2"), std::invalid_argument);
    CHECK_THROWS_AS(ManifoldHandle::parse("pd"), std::invalid_argument);
    CHECK_THROWS_AS(ManifoldHandle::parse("pd:0"), std::invalid_argument);
}

TEST_CASE("exp_map closed forms") {
    const auto at_zero = exp_map(ManifoldHandle::pd(2), Vec::Zero(3));
    CHECK((at_zero.pd().mat() - Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));

    Vec diag_tangent = linalg::sym_vec(linalg::SymMatrix((Mat(2, 2) << 2, 0, 0, 0).finished()));
    const auto p = exp_map(ManifoldHandle::pd(2), diag_tangent);
    CHECK(p.pd().mat()(0, 0) == doctest::Approx(std::exp(2.0)).epsilon(1e-13));
    CHECK(p.pd().mat()(1, 1) == doctest::Approx(1.0).epsilon(1e-13));

    Vec v(2);
    v << kLn3, 0.0;
    const auto b = exp_map(ManifoldHandle::poincare_ball(2), v);
    CHECK(b.vec()[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b.vec()[1] == 0.0);
}

TEST_CASE("log_map closed forms") {
    Vec x(2);
    x << 0.5, 0.0;
    const auto u = log_map({ManifoldHandle::poincare_ball(2), x});
    CHECK(u.values[0] == doctest::Approx(kLn3).epsilon(1e-14));
    CHECK(u.values[0] == doctest::Approx(2.0 * std::atanh(0.5)).epsilon(1e-15));

    const auto zero = log_map(base_point(ManifoldHandle::pd(2)));
    CHECK(zero.values.norm() == 0.0);
}

TEST_CASE("exp and log are mutually inverse on every kind") {
    Rng rng(41);
    for (const auto& h : kAllKinds) {
        for (int rep = 0; rep < 25; ++rep) {
            const Vec v = random_tangent(h, 3.0 * rng.uniform_pos(), rng);
            const Vec back = log_map(exp_map(h, v)).values;
            CAPTURE(h.str());
            CHECK((back - v).norm() <= 1e-9);
        }
    }
}

TEST_CASE("volume factor closed-form values") {
    for (const auto& h : kAllKinds) {
        CAPTURE(h.str());
        CHECK(volume_factor(base_point(h)) == 1.0);
    }

    const auto pd2 = exp_map(ManifoldHandle::pd(2),
                             linalg::sym_vec(linalg::SymMatrix((Mat(2, 2) << 2, 0, 0, 0).finished())));
    CHECK(volume_factor(pd2) == doctest::Approx(0.8509181282393216).epsilon(1e-12));

    Vec x(2);
    x << 0.5, 0.0;
    CHECK(volume_factor({ManifoldHandle::poincare_ball(2), x}) ==
          doctest::Approx(0.8239592165010824).epsilon(1e-12));

    Mat d3 = Mat::Zero(3, 3);
    d3.diagonal() << std::exp(2.0), std::exp(1.0), 1.0;
    CHECK(volume_factor({ManifoldHandle::pd(3), linalg::PdMatrix(d3)}) ==
          doctest::Approx(0.7834178515026633).epsilon(1e-12));

    CMat z(1, 1);
    z(0, 0) = 0.5;
    CHECK(volume_factor({ManifoldHandle::siegel_disk(1), z}) ==
          doctest::Approx(0.8239592165010824).epsilon(1e-12));
}

TEST_CASE("volume factor lies in (0,1] and decreases along rays") {
    Rng rng(43);
    for (const auto& h : kAllKinds) {
        const Vec dir = random_tangent(h, 1.0, rng);
        double prev = 1.0;
        for (int s = 0; s <= 12; ++s) {
            const double t = 0.25 * s;
            const double j = volume_factor(exp_map(h, Vec(t * dir)));
            CAPTURE(h.str());
            CHECK(j > 0.0);
            CHECK(j <= 1.0 + 1e-15);
            CHECK(j <= prev + 1e-12);
            prev = j;
        }
    }
}

TEST_CASE("numeric volume factor: base point and closed-form agreement") {
    const ManifoldHandle pd2 = ManifoldHandle::pd(2);
    CHECK(numeric_volume_factor(pd2, Vec::Zero(3), 1e-4) == doctest::Approx(1.0).epsilon(1e-7));

    const Vec v = linalg::sym_vec(linalg::SymMatrix((Mat(2, 2) << 2, 0, 0, 0).finished()));
    CHECK(numeric_volume_factor(pd2, v, 1e-4) == doctest::Approx(0.8509181282393216).epsilon(1e-5));

    Rng rng(47);
    const ManifoldHandle ball3 = ManifoldHandle::poincare_ball(3);
    const Vec w = random_tangent(ball3, 1.5, rng);
    const double closed = std::pow(1.5 / std::sinh(1.5), 2);
    CHECK(numeric_volume_factor(ball3, w, 1e-4) == doctest::Approx(closed).epsilon(1e-5));

    CHECK_THROWS_AS(numeric_volume_factor(pd2, Vec::Zero(3), 1e-2), std::invalid_argument);
    CHECK_THROWS_AS(numeric_volume_factor(ManifoldHandle::euclidean(2), Vec::Zero(2), 1e-4),
                    std::invalid_argument);
}

TEST_CASE("closed-form Jacobian agrees with finite differences everywhere") {
    Rng rng(53);
    for (const auto& h : {ManifoldHandle::pd(2), ManifoldHandle::pd(3),
                          ManifoldHandle::poincare_ball(2), ManifoldHandle::poincare_ball(3)}) {
        for (int rep = 0; rep < 25; ++rep) {
            const Vec v = random_tangent(h, 3.0 * std::cbrt(rng.uniform_pos()), rng);
            const double closed = volume_factor(exp_map(h, v));
            const double numeric = numeric_volume_factor(h, v, 1e-4);
            CAPTURE(h.str());
            CHECK(std::abs(closed - numeric) <= 1e-4 * closed);
        }
    }
}

TEST_CASE("Siegel disk of order one matches the Poincare ball") {
    Rng rng(59);
    for (int rep = 0; rep < 200; ++rep) {
        const double radius = 0.999 * rng.uniform_pos();
        const double angle = 2.0 * M_PI * rng.uniform();
        CMat z(1, 1);
        z(0, 0) = std::polar(radius, angle);
        Vec x(2);
        x << radius, 0.0;
        const double js = volume_factor({ManifoldHandle::siegel_disk(1), z});
        const double jp = volume_factor({ManifoldHandle::poincare_ball(2), x});
        CHECK(std::abs(js - jp) <= 1e-10);
    }
}

TEST_CASE("siegel jacobian product formula accepts any order") {
    Vec lambdas(3);
    lambdas << 0.3, 0.2, 0.1;
    const double lj = siegel_log_volume_factor_from_lambdas(lambdas);
    CHECK(std::exp(lj) > 0.0);
    CHECK(std::exp(lj) <= 1.0);
    CHECK(siegel_log_volume_factor_from_lambdas(Vec::Zero(4)) == doctest::Approx(0.0));
}

TEST_CASE("takagi factorization of complex symmetric matrices") {
    Rng rng(61);
    for (int rep = 0; rep < 30; ++rep) {
        CMat w(2, 2);
        for (int i = 0; i < 2; ++i) {
            for (int j = i; j < 2; ++j) {
                w(i, j) = {rng.normal(), rng.normal()};
                w(j, i) = w(i, j);
            }
        }
        const auto tf = takagi_2x2(w);
        CHECK((tf.v.adjoint() * tf.v - CMat::Identity(2, 2)).norm() <= 1e-12);
        const CMat recon = tf.v * tf.sigma.cast<std::complex<double>>().asDiagonal() * tf.v.transpose();
        CHECK((recon - w).norm() <= 1e-12 * (1.0 + w.norm()));
        CHECK(tf.sigma[0] >= tf.sigma[1]);
        CHECK(tf.sigma[1] >= 0.0);
    }
    // Rank-one input exercises the kernel completion.
    CMat rank1(2, 2);
    rank1 << std::complex<double>{0.4, 0.1}, 0.0, 0.0, 0.0;
    const auto tf = takagi_2x2(rank1);
    const CMat recon = tf.v * tf.sigma.cast<std::complex<double>>().asDiagonal() * tf.v.transpose();
    CHECK((recon - rank1).norm() <= 1e-12);
}

TEST_CASE("geodesic distances") {
    for (const auto& h : {ManifoldHandle::euclidean(3), ManifoldHandle::pd(2),
                          ManifoldHandle::poincare_ball(2), ManifoldHandle::siegel_disk(1)}) {
        CHECK(geodesic_distance(base_point(h), base_point(h)) == 0.0);
    }

    Vec x(2);
    x << 0.5, 0.0;
    CHECK(geodesic_distance(base_point(ManifoldHandle::poincare_ball(2)),
                            {ManifoldHandle::poincare_ball(2), x}) ==
          doctest::Approx(kLn3).epsilon(1e-13));

    Mat d(2, 2);
    d << std::exp(2.0), 0, 0, 1;
    CHECK(geodesic_distance(base_point(ManifoldHandle::pd(2)),
                            {ManifoldHandle::pd(2), linalg::PdMatrix(d)}) ==
          doctest::Approx(2.0).epsilon(1e-12));

    // d(e, exp v) == |v| and the triangle inequality on random triples.
    Rng rng(67);
    for (const auto& h : {ManifoldHandle::euclidean(3), ManifoldHandle::pd(2),
                          ManifoldHandle::poincare_ball(3)}) {
        for (int rep = 0; rep < 10; ++rep) {
            const Vec v = random_tangent(h, 2.5 * rng.uniform_pos(), rng);
            CHECK(geodesic_distance(base_point(h), exp_map(h, v)) ==
                  doctest::Approx(v.norm()).epsilon(1e-9));

            const auto a = exp_map(h, random_tangent(h, 2.0 * rng.uniform_pos(), rng));
            const auto b = exp_map(h, random_tangent(h, 2.0 * rng.uniform_pos(), rng));
            const auto c = exp_map(h, random_tangent(h, 2.0 * rng.uniform_pos(), rng));
            CHECK(geodesic_distance(a, c) <=
                  geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-9);
            CHECK(geodesic_distance(a, b) == doctest::Approx(geodesic_distance(b, a)).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(geodesic_distance(base_point(ManifoldHandle::siegel_disk(2)),
                                      base_point(ManifoldHandle::siegel_disk(2))),
                    std::invalid_argument);
}

TEST_CASE("log-Euclidean distance") {
    CHECK(log_euclidean_distance(linalg::PdMatrix::identity(2), linalg::PdMatrix::identity(2)) == 0.0);

    Mat d(2, 2);
    d << std::exp(2.0), 0, 0, 1;
    CHECK(log_euclidean_distance(linalg::PdMatrix::identity(2), linalg::PdMatrix(d)) ==
          doctest::Approx(2.0).epsilon(1e-12));

    Rng rng(71);
    for (int rep = 0; rep < 10; ++rep) {
        Mat a(3, 3), b(3, 3);
        for (int i = 0; i < 9; ++i) {
            a(i / 3, i % 3) = rng.normal();
            b(i / 3, i % 3) = rng.normal();
        }
        const linalg::PdMatrix pa{Mat(a * a.transpose() + Mat::Identity(3, 3))};
        const linalg::PdMatrix pb{Mat(b * b.transpose() + Mat::Identity(3, 3))};
        CHECK(log_euclidean_distance(pa, pb) >= 0.0);
        CHECK(log_euclidean_distance(pa, pb) ==
              doctest::Approx(log_euclidean_distance(pb, pa)).epsilon(1e-12));
    }
}

TEST_CASE("chart validity") {
    Vec outside(2);
    outside << 1.0, 0.0;
    CHECK_FALSE(is_valid({ManifoldHandle::poincare_ball(2), outside}));
    CHECK_THROWS_AS(log_map({ManifoldHandle::poincare_ball(2), outside}), std::invalid_argument);

    CMat z(1, 1);
    z(0, 0) = 1.0;
    CHECK_FALSE(is_valid({ManifoldHandle::siegel_disk(1), z}));
}
