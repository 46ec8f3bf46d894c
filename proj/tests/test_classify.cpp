#include <doctest.h>

#include <cmath>

#include "symspace/classify.hpp"
#include "symspace/distributions.hpp"
#include "symspace/manifolds.hpp"

using namespace symspace;
using namespace symspace::classify;
using linalg::PdMatrix;
using linalg::SymMatrix;
using manifolds::ManifoldHandle;

namespace {

/// Two-class PD(2) data: tangent Gaussians with means 0 and shift·e1.
LabeledDataset two_class_lg(double shift, int per_class, Seed seed) {
    const ManifoldHandle h = ManifoldHandle::pd(2);
    Vec mu = Vec::Zero(3);
    const distributions::LogGaussianParams a{h, mu, PdMatrix::identity(3)};
    mu[0] = shift;
    const distributions::LogGaussianParams b{h, mu, PdMatrix::identity(3)};
    std::vector<PdMatrix> pts;
    std::vector<int> labels;
    for (const auto& x : distributions::lg_sample(a, per_class, seed)) {
        pts.push_back(x.pd());
        labels.push_back(1);
    }
    for (const auto& x : distributions::lg_sample(b, per_class, seed + 1)) {
        pts.push_back(x.pd());
        labels.push_back(2);
    }
    return LabeledDataset(std::move(pts), std::move(labels));
}

}  // namespace

TEST_CASE("dataset validation") {
    std::vector<PdMatrix> pts{PdMatrix::identity(2), PdMatrix::identity(2)};
    CHECK_THROWS_AS(LabeledDataset(pts, {1, 3}), std::invalid_argument);  // class 2 missing
    CHECK_THROWS_AS(LabeledDataset(pts, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(LabeledDataset({}, {}), std::invalid_argument);
}

TEST_CASE("single class gives certain posteriors") {
    std::vector<PdMatrix> pts;
    std::vector<int> labels;
    Rng rng(3);
    for (int i = 0; i < 6; ++i) {
        Mat a(2, 2);
        for (int k = 0; k < 4; ++k) a(k / 2, k % 2) = rng.normal();
        pts.push_back(PdMatrix(Mat(a * a.transpose() + Mat::Identity(2, 2))));
        labels.push_back(1);
    }
    const LabeledDataset data(pts, labels);
    for (const auto kind : {ClassifierKind::Gnb, ClassifierKind::Lgnb}) {
        const auto model = fit(kind, data);
        const Vec post = predict_posteriors(model, pts[0]);
        CHECK(post.size() == 1);
        CHECK(post[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("separated singleton clusters are classified perfectly") {
    // Classes concentrated at I and at diag(e^10, e^10) with tiny spread.
    const ManifoldHandle h = ManifoldHandle::pd(2);
    Vec far = Vec::Zero(3);
    far[0] = far[1] = 10.0;
    const distributions::LogGaussianParams a{h, Vec::Zero(3),
                                             PdMatrix(Mat(1e-4 * Mat::Identity(3, 3)))};
    const distributions::LogGaussianParams b{h, far, PdMatrix(Mat(1e-4 * Mat::Identity(3, 3)))};
    std::vector<PdMatrix> pts;
    std::vector<int> labels;
    for (const auto& x : distributions::lg_sample(a, 20, 5)) {
        pts.push_back(x.pd());
        labels.push_back(1);
    }
    for (const auto& x : distributions::lg_sample(b, 20, 6)) {
        pts.push_back(x.pd());
        labels.push_back(2);
    }
    const LabeledDataset data(pts, labels);
    const auto [train, test] = split(data, 0.5, 11);
    const auto model = fit(ClassifierKind::Lgnb, train);
    CHECK(evaluate(model, test).accuracy == 1.0);
}

TEST_CASE("lgnb equals gnb when the points are already exponentials of the features") {
    // Dataset A holds M_i (shifted to be PD); dataset B holds exp(M_i); then
    // the log features of B coincide with the plain features of A.
    Rng rng(7);
    std::vector<PdMatrix> raw, mapped;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
        Mat a(2, 2);
        for (int k = 0; k < 4; ++k) a(k / 2, k % 2) = 0.2 * rng.normal();
        Mat sym = 0.5 * (a + a.transpose()) + Mat::Identity(2, 2) * 2.0;
        raw.push_back(PdMatrix(sym));
        mapped.push_back(linalg::mat_exp(SymMatrix(sym)));
        labels.push_back(1 + i % 2);
    }
    const LabeledDataset plain(raw, labels);
    const LabeledDataset exped(mapped, labels);
    const auto gnb = fit(ClassifierKind::Gnb, plain);
    const auto lgnb = fit(ClassifierKind::Lgnb, exped);
    for (int i = 0; i < 30; ++i) {
        const Vec pg = predict_posteriors(gnb, raw[static_cast<size_t>(i)]);
        const Vec pl = predict_posteriors(lgnb, mapped[static_cast<size_t>(i)]);
        CHECK((pg - pl).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("posteriors are normalized and volume-factor independent") {
    const auto data = two_class_lg(2.0, 40, 17);
    for (const auto kind :
         {ClassifierKind::Gnb, ClassifierKind::Gkc, ClassifierKind::Lgnb, ClassifierKind::Lgkc}) {
        const auto model = fit(kind, data, kind == ClassifierKind::Gkc || kind == ClassifierKind::Lgkc
                                               ? std::optional<double>(0.7)
                                               : std::nullopt);
        for (int i = 0; i < 10; ++i) {
            const auto& x = data.points[static_cast<size_t>(i)];
            const Vec post = predict_posteriors(model, x);
            CHECK(post.sum() == doctest::Approx(1.0).epsilon(1e-12));

            // Adding any point-dependent constant (the volume factor) to all
            // class log-likelihoods leaves the posterior unchanged.
            Vec logp = class_log_likelihoods(model, x);
            const double log_j = manifolds::log_volume_factor({ManifoldHandle::pd(2), x});
            for (int k = 0; k < 2; ++k) logp[k] += std::log(model.priors[k]) + log_j;
            const Vec with_j = (logp.array() - log_sum_exp(logp)).exp();
            CHECK((with_j - post).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("evaluation: accuracy, brier and confusion") {
    // Identical points in both classes make every posterior equal the priors.
    std::vector<PdMatrix> pts;
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) {
        pts.push_back(PdMatrix::identity(2));
        labels.push_back(1 + i % 2);
    }
    const LabeledDataset data(pts, labels);
    const auto model = fit(ClassifierKind::Gnb, data);
    const auto report = evaluate(model, data);
    CHECK(report.brier == doctest::Approx(0.5).epsilon(1e-12));  // 1 - 1/L for L = 2
    CHECK(report.accuracy == doctest::Approx(0.5));  // argmax ties resolve to class 1
    CHECK(report.confusion.sum() == doctest::Approx(8.0));

    // Perfectly separated data: one-hot posteriors, zero brier.
    const auto sep = two_class_lg(30.0, 20, 23);
    const auto lgnb = fit(ClassifierKind::Lgnb, sep);
    const auto sep_report = evaluate(lgnb, sep);
    CHECK(sep_report.accuracy == 1.0);
    CHECK(sep_report.brier == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sep_report.brier >= 0.0);
    CHECK(sep_report.brier <= 2.0);
}

TEST_CASE("constant predictors: class frequencies minimize the brier score") {
    const auto brier_of_constant = [](const Vec& p, const std::vector<int>& labels, int classes) {
        double acc = 0.0;
        for (int y : labels) {
            for (int k = 0; k < classes; ++k) {
                const double target = (k == y - 1) ? 1.0 : 0.0;
                acc += (p[k] - target) * (p[k] - target);
            }
        }
        return acc / static_cast<double>(labels.size());
    };
    const std::vector<int> labels{1, 1, 1, 2, 2, 1, 1, 2};  // frequencies (5/8, 3/8)
    Vec freq(2);
    freq << 5.0 / 8.0, 3.0 / 8.0;
    const double best = brier_of_constant(freq, labels, 2);
    for (double w : {0.1, 0.3, 0.5, 0.8, 0.95}) {
        Vec other(2);
        other << w, 1.0 - w;
        CHECK(best <= brier_of_constant(other, labels, 2) + 1e-12);
    }
}

TEST_CASE("log features beat raw features on log-normal data") {
    double lgnb_total = 0.0;
    double gnb_total = 0.0;
    for (Seed seed = 0; seed < 10; ++seed) {
        const auto data = two_class_lg(3.0, 120, 1000 + seed * 7);
        const auto [train, test] = split(data, 0.5, seed);
        lgnb_total += evaluate(fit(ClassifierKind::Lgnb, train), test).accuracy;
        gnb_total += evaluate(fit(ClassifierKind::Gnb, train), test).accuracy;
    }
    CHECK(lgnb_total >= gnb_total);
}

TEST_CASE("split is stratified, seeded and loss-free") {
    std::vector<PdMatrix> pts;
    std::vector<int> labels;
    Rng rng(29);
    for (int k = 1; k <= 2; ++k) {
        for (int i = 0; i < 160; ++i) {
            Mat a(2, 2);
            for (int j = 0; j < 4; ++j) a(j / 2, j % 2) = rng.normal();
            pts.push_back(PdMatrix(Mat(a * a.transpose() + Mat::Identity(2, 2))));
            labels.push_back(k);
        }
    }
    const LabeledDataset data(pts, labels);
    const auto [train, test] = split(data, 0.5, 99);
    CHECK(train.size() == 160);
    CHECK(test.size() == 160);
    for (int k = 1; k <= 2; ++k) {
        const auto count = [&](const LabeledDataset& d) {
            int c = 0;
            for (int l : d.labels) c += (l == k);
            return c;
        };
        CHECK(count(train) == 80);
        CHECK(count(test) == 80);
    }

    const auto [train2, test2] = split(data, 0.5, 99);
    for (size_t i = 0; i < train.size(); ++i) {
        CHECK((train.points[i].mat() - train2.points[i].mat()).norm() == 0.0);
    }

    // Union of the halves is the whole dataset (by total Frobenius mass).
    double total = 0.0;
    for (const auto& p : data.points) total += p.mat().squaredNorm();
    double parts = 0.0;
    for (const auto& p : train.points) parts += p.mat().squaredNorm();
    for (const auto& p : test.points) parts += p.mat().squaredNorm();
    CHECK(parts == doctest::Approx(total).epsilon(1e-12));

    std::vector<PdMatrix> tiny{PdMatrix::identity(2), PdMatrix::identity(2)};
    CHECK_THROWS_AS(split(LabeledDataset(tiny, {1, 1}), 0.2, 1), std::invalid_argument);
}

TEST_CASE("naive bayes needs two points per class") {
    std::vector<PdMatrix> pts{PdMatrix::identity(2), PdMatrix::identity(2),
                              PdMatrix::identity(2)};
    const LabeledDataset data(pts, {1, 1, 2});
    CHECK_THROWS_AS(fit(ClassifierKind::Gnb, data), std::invalid_argument);
}
