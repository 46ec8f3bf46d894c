#include "symspace/classify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "symspace/estimators.hpp"
#include "symspace/rng.hpp"

namespace symspace::classify {

using linalg::PdMatrix;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

bool is_kernel_kind(ClassifierKind k) { return k == ClassifierKind::Gkc || k == ClassifierKind::Lgkc; }
bool is_log_kind(ClassifierKind k) { return k == ClassifierKind::Lgnb || k == ClassifierKind::Lgkc; }

Vec feature_coords(ClassifierKind kind, const PdMatrix& x) {
    if (is_log_kind(kind)) return linalg::sym_vec(linalg::mat_log(x));
    return linalg::sym_vec(linalg::SymMatrix(x.mat()));
}

}  // namespace

LabeledDataset::LabeledDataset(std::vector<PdMatrix> pts, std::vector<int> labs)
    : points(std::move(pts)), labels(std::move(labs)) {
    if (points.empty() || points.size() != labels.size()) {
        throw std::invalid_argument("LabeledDataset: need equally many points and labels");
    }
    num_classes = *std::max_element(labels.begin(), labels.end());
    std::vector<bool> seen(static_cast<size_t>(num_classes) + 1, false);
    for (int l : labels) {
        if (l < 1 || l > num_classes) throw std::invalid_argument("LabeledDataset: labels must be 1..L");
        seen[static_cast<size_t>(l)] = true;
    }
    for (int k = 1; k <= num_classes; ++k) {
        if (!seen[static_cast<size_t>(k)]) {
            throw std::invalid_argument("LabeledDataset: class " + std::to_string(k) + " is empty");
        }
    }
    const Eigen::Index m = points.front().order();
    for (const auto& p : points) {
        if (p.order() != m) throw std::invalid_argument("LabeledDataset: mixed matrix orders");
    }
}

std::string classifier_kind_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::Gnb: return "gnb";
        case ClassifierKind::Gkc: return "gkc";
        case ClassifierKind::Lgnb: return "lgnb";
        case ClassifierKind::Lgkc: return "lgkc";
    }
    throw std::logic_error("unreachable");
}

ClassifierKind parse_classifier_kind(const std::string& name) {
    if (name == "gnb") return ClassifierKind::Gnb;
    if (name == "gkc") return ClassifierKind::Gkc;
    if (name == "lgnb") return ClassifierKind::Lgnb;
    if (name == "lgkc") return ClassifierKind::Lgkc;
    throw std::invalid_argument("unknown classifier kind: " + name);
}

ClassifierModel fit(ClassifierKind kind, const LabeledDataset& data, std::optional<double> bandwidth,
                    Seed seed) {
    const int num_classes = data.num_classes;
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index d = linalg::sym_dim(data.points.front().order());

    Mat coords(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        coords.row(i) = feature_coords(kind, data.points[static_cast<size_t>(i)]).transpose();
    }

    ClassifierModel model;
    model.kind = kind;
    model.order = static_cast<int>(data.points.front().order());
    model.priors.resize(num_classes);
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<size_t>(num_classes));
    for (Eigen::Index i = 0; i < n; ++i) {
        by_class[static_cast<size_t>(data.labels[static_cast<size_t>(i)] - 1)].push_back(i);
    }
    for (int k = 0; k < num_classes; ++k) {
        model.priors[k] = static_cast<double>(by_class[static_cast<size_t>(k)].size()) /
                          static_cast<double>(n);
    }

    if (is_kernel_kind(kind)) {
        model.class_coords.resize(static_cast<size_t>(num_classes));
        for (int k = 0; k < num_classes; ++k) {
            const auto& rows = by_class[static_cast<size_t>(k)];
            Mat block(static_cast<Eigen::Index>(rows.size()), d);
            for (size_t r = 0; r < rows.size(); ++r) {
                block.row(static_cast<Eigen::Index>(r)) = coords.row(rows[r]);
            }
            model.class_coords[static_cast<size_t>(k)] = std::move(block);
        }
        if (bandwidth.has_value()) {
            if (!(*bandwidth > 0.0)) throw std::invalid_argument("fit: bandwidth must be > 0");
            model.bandwidth = *bandwidth;
        } else {
            // Pooled over classes: one CV on all training coordinates.
            const auto grid = estimators::default_bandwidth_grid(coords);
            model.bandwidth = estimators::bandwidth_cv_coords(coords, grid, 5, seed).selected;
        }
        return model;
    }

    // Naive Bayes kinds: per-class mean and per-feature MLE variance.
    model.means.resize(num_classes, d);
    model.variances.resize(num_classes, d);
    const Vec all_mean = coords.colwise().mean();
    const Vec all_var = (coords.rowwise() - all_mean.transpose()).array().square().colwise().mean();
    for (int k = 0; k < num_classes; ++k) {
        const auto& rows = by_class[static_cast<size_t>(k)];
        if (rows.size() < 2) {
            throw std::invalid_argument("fit: naive Bayes needs at least 2 points per class");
        }
        Mat block(static_cast<Eigen::Index>(rows.size()), d);
        for (size_t r = 0; r < rows.size(); ++r) {
            block.row(static_cast<Eigen::Index>(r)) = coords.row(rows[r]);
        }
        const Vec mu = block.colwise().mean();
        Vec var = (block.rowwise() - mu.transpose()).array().square().colwise().mean();
        for (Eigen::Index j = 0; j < d; ++j) {
            const double floor = 1e-9 * (all_var[j] + 1.0);
            var[j] = std::max(var[j], floor);
        }
        model.means.row(k) = mu.transpose();
        model.variances.row(k) = var.transpose();
    }
    return model;
}

Vec class_log_likelihoods(const ClassifierModel& model, const PdMatrix& x) {
    if (static_cast<int>(x.order()) != model.order) {
        throw std::invalid_argument("classify: matrix order mismatch");
    }
    const Vec u = feature_coords(model.kind, x);
    const int num_classes = static_cast<int>(model.priors.size());
    Vec out(num_classes);
    if (is_kernel_kind(model.kind)) {
        const double h2 = model.bandwidth * model.bandwidth;
        const double d = static_cast<double>(u.size());
        for (int k = 0; k < num_classes; ++k) {
            const Mat& block = model.class_coords[static_cast<size_t>(k)];
            Vec expo = -(block.rowwise() - u.transpose()).rowwise().squaredNorm() / (2.0 * h2);
            out[k] = log_sum_exp(expo) - std::log(static_cast<double>(block.rows())) -
                     0.5 * d * std::log(2.0 * M_PI * h2);
        }
        return out;
    }
    for (int k = 0; k < num_classes; ++k) {
        const Vec diff = u - model.means.row(k).transpose();
        const Vec var = model.variances.row(k).transpose();
        out[k] = -0.5 * (diff.array().square() / var.array()).sum() -
                 0.5 * var.array().log().sum() - 0.5 * static_cast<double>(u.size()) * kLog2Pi;
    }
    return out;
}

Vec predict_posteriors(const ClassifierModel& model, const PdMatrix& x) {
    Vec logp = class_log_likelihoods(model, x);
    for (Eigen::Index k = 0; k < logp.size(); ++k) logp[k] += std::log(model.priors[k]);
    const double lse = log_sum_exp(logp);
    return (logp.array() - lse).exp();
}

EvalReport evaluate(const ClassifierModel& model, const LabeledDataset& test) {
    const int num_classes = static_cast<int>(model.priors.size());
    const auto n = static_cast<Eigen::Index>(test.size());
    EvalReport report;
    report.confusion = Mat::Zero(num_classes, num_classes);
    report.posteriors.resize(n, num_classes);
    double brier = 0.0;
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int truth = test.labels[static_cast<size_t>(i)];
        if (truth < 1 || truth > num_classes) {
            throw std::invalid_argument("evaluate: label outside the model's classes");
        }
        const Vec post = predict_posteriors(model, test.points[static_cast<size_t>(i)]);
        report.posteriors.row(i) = post.transpose();
        int arg = 0;
        for (int k = 1; k < num_classes; ++k) {
            if (post[k] > post[arg]) arg = k;  // ties keep the smaller index
        }
        report.confusion(truth - 1, arg) += 1.0;
        if (arg == truth - 1) ++correct;
        for (int k = 0; k < num_classes; ++k) {
            const double target = (k == truth - 1) ? 1.0 : 0.0;
            brier += (post[k] - target) * (post[k] - target);
        }
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    report.brier = brier / static_cast<double>(n);
    return report;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double fraction,
                                                Seed seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split: fraction must be in (0,1)");
    Rng rng(seed);
    std::vector<PdMatrix> train_pts, test_pts;
    std::vector<int> train_labs, test_labs;
    for (int k = 1; k <= data.num_classes; ++k) {
        std::vector<size_t> members;
        for (size_t i = 0; i < data.size(); ++i) {
            if (data.labels[i] == k) members.push_back(i);
        }
        const auto nk = static_cast<int>(members.size());
        const std::vector<int> order = shuffled_indices(nk, rng);
        const auto take = static_cast<int>(std::llround(fraction * nk));
        if (take < 1 || take >= nk) {
            throw std::invalid_argument("split: a class would be emptied by this fraction");
        }
        for (int r = 0; r < nk; ++r) {
            const size_t i = members[static_cast<size_t>(order[static_cast<size_t>(r)])];
            if (r < take) {
                train_pts.push_back(data.points[i]);
                train_labs.push_back(k);
            } else {
                test_pts.push_back(data.points[i]);
                test_labs.push_back(k);
            }
        }
    }
    return {LabeledDataset(std::move(train_pts), std::move(train_labs)),
            LabeledDataset(std::move(test_pts), std::move(test_labs))};
}

}  // namespace symspace::classify
