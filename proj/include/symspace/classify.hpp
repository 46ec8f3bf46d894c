#pragma once

#include <optional>
#include <vector>

#include "symspace/common.hpp"
#include "symspace/linalg.hpp"

namespace symspace::classify {

/// PD-matrix samples with labels in 1..num_classes; every class must appear.
struct LabeledDataset {
    std::vector<linalg::PdMatrix> points;
    std::vector<int> labels;
    int num_classes = 0;

    LabeledDataset() = default;
    LabeledDataset(std::vector<linalg::PdMatrix> pts, std::vector<int> labs);

    size_t size() const { return points.size(); }
};

enum class ClassifierKind { Gnb, Gkc, Lgnb, Lgkc };

std::string classifier_kind_name(ClassifierKind k);
ClassifierKind parse_classifier_kind(const std::string& name);

/// Density-based classifier over PD(m) data. Naive-Bayes kinds keep per-class
/// means and (floored) per-feature variances; kernel kinds keep the per-class
/// training coordinates and a shared bandwidth. Features are the orthonormal
/// coordinates of X (Gnb/Gkc) or of log X (Lgnb/Lgkc).
struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::Gnb;
    int order = 0;  // matrix order m
    Vec priors;
    Mat means;      // NB kinds: L × d
    Mat variances;  // NB kinds: L × d
    std::vector<Mat> class_coords;  // KC kinds: per class, n_k × d
    double bandwidth = 1.0;         // KC kinds
};

/// Fits the classifier. Kernel kinds take the bandwidth from `bandwidth`
/// when provided, otherwise choose it by 5-fold cross-validation pooled
/// across classes (seeded by `seed`).
ClassifierModel fit(ClassifierKind kind, const LabeledDataset& data,
                    std::optional<double> bandwidth = std::nullopt, Seed seed = 0);

/// Per-class log p(X | y = k); the class-independent volume factor is left
/// out, it cancels in the posterior.
Vec class_log_likelihoods(const ClassifierModel& model, const linalg::PdMatrix& x);

/// Posterior p(y | X), normalized with log-sum-exp.
Vec predict_posteriors(const ClassifierModel& model, const linalg::PdMatrix& x);

struct EvalReport {
    double accuracy = 0.0;
    double brier = 0.0;
    Mat confusion;  // rows: truth, cols: predicted
    Mat posteriors;  // n × L
};

EvalReport evaluate(const ClassifierModel& model, const LabeledDataset& test);

/// Stratified seeded split; `fraction` of each class goes to train.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double fraction,
                                                Seed seed);

}  // namespace symspace::classify
