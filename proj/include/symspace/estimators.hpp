#pragma once

#include <optional>
#include <vector>

#include "symspace/common.hpp"
#include "symspace/distributions.hpp"
#include "symspace/manifolds.hpp"

namespace symspace::estimators {

enum class KernelKind { LogGaussian, Wishart, InvWishart, EuclideanGaussian };

std::string kernel_kind_name(KernelKind k);
KernelKind parse_kernel_kind(const std::string& name);

/// Kernel density estimator in tangent coordinates. `bandwidth` is the
/// Gaussian scale h for the Gaussian kinds and the degrees-of-freedom
/// tuning parameter ν for the Wishart kinds.
struct KdeModel {
    manifolds::ManifoldHandle handle;
    KernelKind kind = KernelKind::LogGaussian;
    Mat coords;       // n × d; log-mapped (LogGaussian) or vectorized (EuclideanGaussian)
    double bandwidth = 1.0;
    std::vector<linalg::PdMatrix> train_mats;  // Wishart kinds only

    Eigen::Index size() const { return kind == KernelKind::Wishart || kind == KernelKind::InvWishart
                                           ? static_cast<Eigen::Index>(train_mats.size())
                                           : coords.rows(); }
};

KdeModel kde_fit(const std::vector<manifolds::ManifoldPoint>& points, double bandwidth,
                 KernelKind kind = KernelKind::LogGaussian);

double kde_log_density(const KdeModel& model, const manifolds::ManifoldPoint& x);

/// Evaluates many points at once; shares all per-model preprocessing.
Vec kde_log_density_batch(const KdeModel& model, const std::vector<manifolds::ManifoldPoint>& xs);

/// Cross-validation record: per-fold held-out mean log-likelihood for every
/// candidate bandwidth, and the selected maximizer (ties broken toward the
/// larger bandwidth).
struct CvReport {
    std::vector<double> grid;
    Mat fold_scores;  // folds × grid
    Vec mean_scores;  // per grid entry
    double selected = 0.0;
};

CvReport bandwidth_cv(const std::vector<manifolds::ManifoldPoint>& points,
                      const std::vector<double>& grid, int folds, Seed seed,
                      KernelKind kind = KernelKind::LogGaussian);

/// Same selection run directly on tangent/feature coordinates with the
/// isotropic Gaussian kernel.
CvReport bandwidth_cv_coords(const Mat& coords, const std::vector<double>& grid, int folds, Seed seed);

/// Default grid: 20 log-spaced values in [0.01 s, 10 s] with s the mean
/// per-coordinate standard deviation of the rows.
std::vector<double> default_bandwidth_grid(const Mat& coords, int count = 20);

enum class CovarianceKind { Full, Diagonal };

/// Gaussian mixture in tangent coordinates fitted by EM.
struct MixtureModel {
    manifolds::ManifoldHandle handle;
    Vec weights;                 // simplex
    Mat means;                   // K × d
    std::vector<Mat> covariances;  // K of d × d (diagonal kind stores diagonal matrices)
    CovarianceKind covariance_kind = CovarianceKind::Full;

    int iterations = 0;
    double final_log_likelihood = 0.0;
    std::vector<double> log_likelihood_history;
};

MixtureModel em_fit(const Mat& coords, int k, Seed seed, int max_iter = 500, double tol = 1e-8,
                    double reg_floor = 1e-6, CovarianceKind covariance = CovarianceKind::Full,
                    manifolds::ManifoldHandle handle = {});

/// Mixture log density in the coordinate space (no volume factor).
double mixture_log_density_coords(const MixtureModel& model, const Vec& u);
Vec mixture_log_density_coords_batch(const MixtureModel& model, const Mat& coords);

/// Mixture log density on the manifold: tangent mixture at log x, times J(x).
double mixture_log_density(const MixtureModel& model, const manifolds::ManifoldPoint& x);

/// Held-out-likelihood choice of the component count over 1..k_max
/// (k-fold CV in coordinate space; ties toward the smaller count).
int model_select_k(const Mat& coords, int k_max, int folds, Seed seed);

}  // namespace symspace::estimators
