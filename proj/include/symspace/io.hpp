#pragma once

#include <string>
#include <vector>

#include "symspace/classify.hpp"
#include "symspace/common.hpp"
#include "symspace/distributions.hpp"
#include "symspace/estimators.hpp"
#include "symspace/manifolds.hpp"

namespace symspace::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Matrix text format: first line `m=<order>`, then m lines of m
/// comma-separated decimals.
std::string write_matrix_text(const Mat& a);
Mat read_matrix_text(const std::string& text);
void write_matrix_file(const std::string& path, const Mat& a);
Mat read_matrix_file(const std::string& path);

/// Dataset CSV: optional leading `#` comment lines, a `label,m,entries`
/// header, then one row per sample: label, chart size, chart entries
/// (PD: m² row-major; vector charts: d entries; Siegel: 2m² re/im pairs).
struct DatasetRow {
    int label = 0;
    manifolds::ManifoldPoint point;
};

std::string write_dataset(const manifolds::ManifoldHandle& handle,
                          const std::vector<DatasetRow>& rows, const std::string& comment = "");
std::vector<DatasetRow> read_dataset(const manifolds::ManifoldHandle& handle,
                                     const std::string& text);
void write_dataset_file(const std::string& path, const manifolds::ManifoldHandle& handle,
                        const std::vector<DatasetRow>& rows, const std::string& comment = "");
std::vector<DatasetRow> read_dataset_file(const std::string& path,
                                          const manifolds::ManifoldHandle& handle);

classify::LabeledDataset to_labeled(const std::vector<DatasetRow>& rows);

/// Parameter JSON: {"manifold": "...", "mu": [...], "sigma": [[...]]}.
std::string write_lg_params(const distributions::LogGaussianParams& p);
distributions::LogGaussianParams read_lg_params(const std::string& text);
distributions::LogGaussianParams read_lg_params_file(const std::string& path);

/// Model JSON for fitted estimators (kind-discriminated).
std::string write_kde_model(const estimators::KdeModel& model);
std::string write_mixture_model(const estimators::MixtureModel& model);

/// Either a KDE or a mixture, depending on the serialized kind.
struct AnyModel {
    bool is_mixture = false;
    estimators::KdeModel kde;
    estimators::MixtureModel mixture;

    double log_density(const manifolds::ManifoldPoint& x) const {
        return is_mixture ? estimators::mixture_log_density(mixture, x)
                          : estimators::kde_log_density(kde, x);
    }
    manifolds::ManifoldHandle handle() const { return is_mixture ? mixture.handle : kde.handle; }
};

AnyModel read_model(const std::string& text);
AnyModel read_model_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace symspace::io
