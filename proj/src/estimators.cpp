#include "symspace/estimators.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symspace::estimators {

using linalg::PdMatrix;
using manifolds::ManifoldHandle;
using manifolds::ManifoldPoint;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

bool is_wishart_kind(KernelKind k) { return k == KernelKind::Wishart || k == KernelKind::InvWishart; }

Vec chart_coords_euclidean(const ManifoldPoint& x) {
    switch (x.handle.kind) {
        case manifolds::Kind::Pd:
            return linalg::sym_vec(linalg::SymMatrix(x.pd().mat()));
        case manifolds::Kind::Euclidean:
        case manifolds::Kind::PoincareBall:
            return x.vec();
        default:
            throw std::invalid_argument("euclideanGaussian kernel: unsupported manifold kind");
    }
}

/// Per-point statistics that do not depend on the tuning parameter.
struct PointStats {
    KernelKind kind;
    ManifoldHandle handle;
    Eigen::Index d = 0;
    Mat coords;                 // Gaussian kinds
    Vec log_jacobian;           // LogGaussian on a curved manifold, else zero
    std::vector<Mat> mats;      // Wishart kinds
    std::vector<Mat> inverses;  // Wishart kinds
    Vec log_dets;               // Wishart kinds
};

PointStats prep_points(const std::vector<ManifoldPoint>& points, KernelKind kind) {
    if (points.empty()) throw std::invalid_argument("kde: at least one point required");
    PointStats s;
    s.kind = kind;
    s.handle = points.front().handle;
    const auto n = static_cast<Eigen::Index>(points.size());
    if (is_wishart_kind(kind)) {
        if (s.handle.kind != manifolds::Kind::Pd) {
            throw std::invalid_argument("Wishart kernels require pd points");
        }
        s.mats.reserve(points.size());
        s.inverses.reserve(points.size());
        s.log_dets.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Mat& x = points[static_cast<size_t>(i)].pd().mat();
            Eigen::LLT<Mat> llt(x);
            if (llt.info() != Eigen::Success) throw std::invalid_argument("kde: point not positive definite");
            s.mats.push_back(x);
            s.inverses.push_back(llt.solve(Mat::Identity(x.rows(), x.cols())));
            s.log_dets[i] = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
        }
        s.d = linalg::sym_dim(s.handle.param);
        return s;
    }
    Vec first = (kind == KernelKind::LogGaussian) ? manifolds::log_map(points.front()).values
                                                  : chart_coords_euclidean(points.front());
    s.d = first.size();
    s.coords.resize(n, s.d);
    s.log_jacobian = Vec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ManifoldPoint& p = points[static_cast<size_t>(i)];
        if (p.handle != s.handle) throw std::invalid_argument("kde: mixed manifolds in dataset");
        if (kind == KernelKind::LogGaussian) {
            s.coords.row(i) = manifolds::log_map(p).values.transpose();
            if (s.handle.kind != manifolds::Kind::Euclidean) {
                s.log_jacobian[i] = manifolds::log_volume_factor(p);
            }
        } else {
            s.coords.row(i) = chart_coords_euclidean(p).transpose();
        }
    }
    return s;
}

/// Parameter-independent train × eval cross statistic: squared coordinate
/// distances for Gaussian kinds, tr(Xᵢ⁻¹ Xⱼ) for Wishart,
/// tr(Xᵢ Xⱼ⁻¹) for inverse Wishart.
Mat cross_stat(const PointStats& train, const PointStats& eval) {
    const auto nt = static_cast<Eigen::Index>(train.kind == KernelKind::Wishart ||
                                               train.kind == KernelKind::InvWishart
                                                   ? train.mats.size()
                                                   : static_cast<size_t>(train.coords.rows()));
    Mat out;
    switch (train.kind) {
        case KernelKind::LogGaussian:
        case KernelKind::EuclideanGaussian: {
            const Eigen::Index ne = eval.coords.rows();
            out.resize(nt, ne);
            const Vec train_sq = train.coords.rowwise().squaredNorm();
            const Vec eval_sq = eval.coords.rowwise().squaredNorm();
            out = -2.0 * train.coords * eval.coords.transpose();
            out.colwise() += train_sq;
            out.rowwise() += eval_sq.transpose();
            out = out.cwiseMax(0.0);
            break;
        }
        case KernelKind::Wishart: {
            // tr(A B) = sum of entrywise products for symmetric A, B.
            const auto ne = static_cast<Eigen::Index>(eval.mats.size());
            out.resize(nt, ne);
            for (Eigen::Index i = 0; i < nt; ++i) {
                const Mat& inv = train.inverses[static_cast<size_t>(i)];
                for (Eigen::Index j = 0; j < ne; ++j) {
                    out(i, j) = inv.cwiseProduct(eval.mats[static_cast<size_t>(j)]).sum();
                }
            }
            break;
        }
        case KernelKind::InvWishart: {
            const auto ne = static_cast<Eigen::Index>(eval.mats.size());
            out.resize(nt, ne);
            for (Eigen::Index i = 0; i < nt; ++i) {
                const Mat& mat = train.mats[static_cast<size_t>(i)];
                for (Eigen::Index j = 0; j < ne; ++j) {
                    out(i, j) = mat.cwiseProduct(eval.inverses[static_cast<size_t>(j)]).sum();
                }
            }
            break;
        }
    }
    return out;
}

/// Log densities of all eval points under the KDE built from the rows of the
/// (train × eval) cross-statistic slice. Every kernel reduces to a scaled
/// cross statistic plus a per-train-row offset, so the whole batch is one
/// column-wise log-sum-exp:
///   Gaussian kinds:  -cross/(2h²)
///   Wishart:         -ν/2 · (cross + ld_train)        with W(X | X_i/ν, ν)
///   inverse Wishart: -ν/2 · cross + (ν+3)/2 · ld_train with W⁻¹(X | νX_i, ν+3)
Vec batch_log_density(KernelKind kind, int m, Eigen::Index d, double param, const Mat& cross,
                      const Vec& train_log_dets, const Vec& eval_log_dets,
                      const Vec& eval_log_jacobians) {
    const double n = static_cast<double>(cross.rows());
    const double md = static_cast<double>(m);
    double scale = 0.0;
    double offset_scale = 0.0;  // multiplies train_log_dets
    switch (kind) {
        case KernelKind::LogGaussian:
        case KernelKind::EuclideanGaussian:
            scale = -0.5 / (param * param);
            break;
        case KernelKind::Wishart:
            scale = -0.5 * param;
            offset_scale = -0.5 * param;
            break;
        case KernelKind::InvWishart:
            scale = -0.5 * param;
            offset_scale = 0.5 * (param + 3.0);
            break;
    }

    Mat terms = scale * cross;
    if (offset_scale != 0.0) terms.colwise() += Vec(offset_scale * train_log_dets);
    const Vec col_max = terms.colwise().maxCoeff();
    terms.rowwise() -= col_max.transpose();
    const Vec sums = terms.array().exp().colwise().sum();
    Vec out = col_max.array() + sums.array().log() - std::log(n);

    switch (kind) {
        case KernelKind::LogGaussian:
        case KernelKind::EuclideanGaussian:
            out.array() += -0.5 * static_cast<double>(d) * std::log(2.0 * M_PI * param * param);
            out += eval_log_jacobians;
            break;
        case KernelKind::Wishart: {
            const double nu = param;
            out.array() += -0.5 * nu * md * std::log(2.0) + 0.5 * nu * md * std::log(nu) -
                           distributions::log_multivariate_gamma(m, 0.5 * nu);
            out += 0.5 * (nu - md - 1.0) * eval_log_dets;
            break;
        }
        case KernelKind::InvWishart: {
            const double dof = param + 3.0;
            out.array() += 0.5 * dof * md * std::log(param) - 0.5 * dof * md * std::log(2.0) -
                           distributions::log_multivariate_gamma(m, 0.5 * dof);
            out += -0.5 * (dof + md + 1.0) * eval_log_dets;
            break;
        }
    }
    return out;
}

Mat gather(const Mat& cross, const std::vector<int>& rows, const std::vector<int>& cols) {
    Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                cross(rows[i], cols[j]);
        }
    }
    return out;
}

Vec gather(const Vec& v, const std::vector<int>& idx) {
    Vec out(static_cast<Eigen::Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
    return out;
}

}  // namespace

std::string kernel_kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::LogGaussian: return "logGaussian";
        case KernelKind::Wishart: return "wishart";
        case KernelKind::InvWishart: return "invWishart";
        case KernelKind::EuclideanGaussian: return "euclideanGaussian";
    }
    throw std::logic_error("unreachable");
}

KernelKind parse_kernel_kind(const std::string& name) {
    if (name == "logGaussian") return KernelKind::LogGaussian;
    if (name == "wishart") return KernelKind::Wishart;
    if (name == "invWishart") return KernelKind::InvWishart;
    if (name == "euclideanGaussian") return KernelKind::EuclideanGaussian;
    throw std::invalid_argument("unknown kernel kind: " + name);
}

KdeModel kde_fit(const std::vector<ManifoldPoint>& points, double bandwidth, KernelKind kind) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("kde_fit: bandwidth must be > 0");
    PointStats s = prep_points(points, kind);
    KdeModel model;
    model.handle = s.handle;
    model.kind = kind;
    model.bandwidth = bandwidth;
    if (is_wishart_kind(kind)) {
        model.train_mats.reserve(points.size());
        for (const auto& p : points) model.train_mats.push_back(p.pd());
    } else {
        model.coords = std::move(s.coords);
    }
    return model;
}

Vec kde_log_density_batch(const KdeModel& model, const std::vector<ManifoldPoint>& xs) {
    if (xs.empty()) return Vec();
    for (const auto& x : xs) {
        if (x.handle != model.handle) throw std::invalid_argument("kde_log_density: manifold mismatch");
    }
    const PointStats eval = prep_points(xs, model.kind);
    PointStats train;
    train.kind = model.kind;
    train.handle = model.handle;
    if (is_wishart_kind(model.kind)) {
        std::vector<ManifoldPoint> pts;
        pts.reserve(model.train_mats.size());
        for (const auto& m : model.train_mats) pts.push_back({model.handle, m});
        train = prep_points(pts, model.kind);
    } else {
        train.d = model.coords.cols();
        train.coords = model.coords;
    }
    const Mat cross = cross_stat(train, eval);
    const bool wishart = is_wishart_kind(model.kind);
    const auto ne = static_cast<Eigen::Index>(xs.size());
    return batch_log_density(model.kind, model.handle.param, train.d, model.bandwidth, cross,
                             wishart ? train.log_dets : Vec(),
                             wishart ? eval.log_dets : Vec(Vec::Zero(ne)),
                             wishart ? Vec(Vec::Zero(ne)) : eval.log_jacobian);
}

double kde_log_density(const KdeModel& model, const ManifoldPoint& x) {
    return kde_log_density_batch(model, {x})[0];
}

namespace {

CvReport cv_from_stats(const PointStats& stats, const std::vector<double>& grid, int folds,
                       Seed seed) {
    const auto n = static_cast<int>(is_wishart_kind(stats.kind) ? stats.mats.size()
                                                                : static_cast<size_t>(stats.coords.rows()));
    if (grid.empty()) throw std::invalid_argument("bandwidth_cv: empty grid");
    for (double g : grid) {
        if (!(g > 0.0)) throw std::invalid_argument("bandwidth_cv: grid values must be positive");
    }
    if (folds < 2 || n < 2 * folds) throw std::invalid_argument("bandwidth_cv: need n >= 2 * folds");

    Rng rng(seed);
    const std::vector<int> order = shuffled_indices(n, rng);
    std::vector<std::vector<int>> fold_members(static_cast<size_t>(folds));
    for (int i = 0; i < n; ++i) {
        fold_members[static_cast<size_t>(i % folds)].push_back(order[static_cast<size_t>(i)]);
    }

    const Mat cross = cross_stat(stats, stats);
    const bool wishart = is_wishart_kind(stats.kind);

    CvReport report;
    report.grid = grid;
    report.fold_scores.resize(folds, static_cast<Eigen::Index>(grid.size()));
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train_rows;
        train_rows.reserve(static_cast<size_t>(n));
        for (int g = 0; g < folds; ++g) {
            if (g == f) continue;
            train_rows.insert(train_rows.end(), fold_members[static_cast<size_t>(g)].begin(),
                              fold_members[static_cast<size_t>(g)].end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        const auto& eval_rows = fold_members[static_cast<size_t>(f)];
        const Mat sub = gather(cross, train_rows, eval_rows);
        const auto ne = static_cast<Eigen::Index>(eval_rows.size());
        const Vec train_ld = wishart ? gather(stats.log_dets, train_rows) : Vec();
        const Vec eval_ld = wishart ? gather(stats.log_dets, eval_rows) : Vec(Vec::Zero(ne));
        const Vec eval_lj = wishart ? Vec(Vec::Zero(ne)) : gather(stats.log_jacobian, eval_rows);
        for (size_t gi = 0; gi < grid.size(); ++gi) {
            const Vec scores = batch_log_density(stats.kind, stats.handle.param, stats.d, grid[gi],
                                                 sub, train_ld, eval_ld, eval_lj);
            report.fold_scores(f, static_cast<Eigen::Index>(gi)) = scores.mean();
        }
    }
    report.mean_scores = report.fold_scores.colwise().mean();

    size_t best = 0;
    for (size_t gi = 1; gi < grid.size(); ++gi) {
        const double cur = report.mean_scores[static_cast<Eigen::Index>(gi)];
        const double ref = report.mean_scores[static_cast<Eigen::Index>(best)];
        if (cur > ref || (cur == ref && grid[gi] > grid[best])) best = gi;
    }
    report.selected = grid[best];
    return report;
}

}  // namespace

CvReport bandwidth_cv(const std::vector<ManifoldPoint>& points, const std::vector<double>& grid,
                      int folds, Seed seed, KernelKind kind) {
    return cv_from_stats(prep_points(points, kind), grid, folds, seed);
}

CvReport bandwidth_cv_coords(const Mat& coords, const std::vector<double>& grid, int folds,
                             Seed seed) {
    PointStats stats;
    stats.kind = KernelKind::EuclideanGaussian;
    stats.handle = ManifoldHandle::euclidean(static_cast<int>(coords.cols()));
    stats.d = coords.cols();
    stats.coords = coords;
    stats.log_jacobian = Vec::Zero(coords.rows());
    return cv_from_stats(stats, grid, folds, seed);
}

std::vector<double> default_bandwidth_grid(const Mat& coords, int count) {
    const Vec mean = coords.colwise().mean();
    const Vec var = (coords.rowwise() - mean.transpose()).array().square().colwise().mean();
    double s = var.array().sqrt().mean();
    s = std::max(s, 1e-9);
    std::vector<double> grid(static_cast<size_t>(count));
    const double lo = std::log(0.01 * s);
    const double hi = std::log(10.0 * s);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
        grid[static_cast<size_t>(i)] = std::exp(lo + t * (hi - lo));
    }
    return grid;
}

// --- EM ---------------------------------------------------------------------

namespace {

struct ComponentDensity {
    Mat lower;
    double log_det;

    explicit ComponentDensity(const Mat& cov) {
        Eigen::LLT<Mat> llt(cov);
        if (llt.info() != Eigen::Success) throw std::runtime_error("em: covariance not positive definite");
        lower = llt.matrixL();
        log_det = 2.0 * lower.diagonal().array().log().sum();
    }

    double log_density(const Vec& x, const Vec& mu) const {
        const Vec w = lower.triangularView<Eigen::Lower>().solve(x - mu);
        return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + w.squaredNorm());
    }

    /// Column of log densities for all rows of `coords` at once.
    Vec log_density_rows(const Mat& coords, const Vec& mu) const {
        const Mat centered = (coords.rowwise() - mu.transpose()).transpose();  // d × n
        const Mat whitened = lower.triangularView<Eigen::Lower>().solve(centered);
        return -0.5 * (whitened.colwise().squaredNorm().transpose().array() +
                       static_cast<double>(coords.cols()) * kLog2Pi + log_det);
    }
};

/// log p(x_i, component j) for all points and components.
Mat joint_log_density(const Mat& coords, const Vec& weights, const Mat& means,
                      const std::vector<Mat>& covariances) {
    const auto k = static_cast<int>(weights.size());
    Mat logp(coords.rows(), k);
    for (int j = 0; j < k; ++j) {
        const ComponentDensity comp(covariances[static_cast<size_t>(j)]);
        logp.col(j) = comp.log_density_rows(coords, means.row(j).transpose()).array() +
                      std::log(weights[j]);
    }
    return logp;
}

Mat floored_covariance(Mat cov, double reg_floor, CovarianceKind kind) {
    if (kind == CovarianceKind::Diagonal) {
        Vec diag = cov.diagonal().cwiseMax(reg_floor);
        return Mat(diag.asDiagonal());
    }
    const auto eig = linalg::sym_eig(linalg::SymMatrix(cov));
    if (eig.eigenvalues.minCoeff() >= reg_floor) return cov;
    const Vec clipped = eig.eigenvalues.cwiseMax(reg_floor);
    Mat out = eig.eigenvectors * clipped.asDiagonal() * eig.eigenvectors.transpose();
    return symmetrized(out);
}

Mat kmeans_pp_means(const Mat& coords, int k, Rng& rng) {
    const Eigen::Index n = coords.rows();
    Mat means(k, coords.cols());
    means.row(0) = coords.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vec min_sq = (coords.rowwise() - means.row(0)).rowwise().squaredNorm();
    for (int j = 1; j < k; ++j) {
        const double total = min_sq.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double running = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                running += min_sq[i];
                if (running >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        means.row(j) = coords.row(pick);
        min_sq = min_sq.cwiseMin((coords.rowwise() - means.row(j)).rowwise().squaredNorm());
    }
    return means;
}

}  // namespace

MixtureModel em_fit(const Mat& coords, int k, Seed seed, int max_iter, double tol, double reg_floor,
                    CovarianceKind covariance, ManifoldHandle handle) {
    const Eigen::Index n = coords.rows();
    const Eigen::Index d = coords.cols();
    if (k < 1) throw std::invalid_argument("em_fit: K must be >= 1");
    if (n < k) throw std::invalid_argument("em_fit: need at least K points");
    if (handle == ManifoldHandle{}) handle = ManifoldHandle::euclidean(static_cast<int>(d));
    if (handle.dim() != d) throw std::invalid_argument("em_fit: manifold dimension mismatch");

    Rng rng(seed);
    MixtureModel model;
    model.handle = handle;
    model.covariance_kind = covariance;
    model.weights = Vec::Constant(k, 1.0 / k);
    model.means = kmeans_pp_means(coords, k, rng);

    const Vec global_mean = coords.colwise().mean();
    Mat centered = coords.rowwise() - global_mean.transpose();
    Mat global_cov = (centered.transpose() * centered) / static_cast<double>(n);
    global_cov = floored_covariance(global_cov, reg_floor, covariance);
    model.covariances.assign(static_cast<size_t>(k), global_cov);

    std::vector<int> reseeds(static_cast<size_t>(k), 0);
    const double empty_threshold = 1.0 / (10.0 * static_cast<double>(n));

    Mat resp(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    bool just_reseeded = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        // E step.
        Mat logp = joint_log_density(coords, model.weights, model.means, model.covariances);
        const Vec row_max = logp.rowwise().maxCoeff();
        logp.colwise() -= row_max;
        resp = logp.array().exp();
        const Vec row_sum = resp.rowwise().sum();
        resp.array().colwise() /= row_sum.array();
        const double ll = (row_max.array() + row_sum.array().log()).sum();
        model.log_likelihood_history.push_back(ll);
        model.iterations = iter + 1;
        model.final_log_likelihood = ll;

        const bool converged = std::isfinite(prev_ll) && (ll - prev_ll) < tol * (1.0 + std::abs(ll));
        if (!just_reseeded && std::isfinite(prev_ll) && ll < prev_ll - 1e-10 * (1.0 + std::abs(prev_ll))) {
            throw std::runtime_error("em_fit: log-likelihood decreased");
        }
        just_reseeded = false;
        prev_ll = ll;
        if (converged) break;

        // M step.
        const Vec nk = resp.colwise().sum();
        bool reseeded_now = false;
        for (int j = 0; j < k; ++j) {
            if (nk[j] / static_cast<double>(n) < empty_threshold) {
                if (++reseeds[static_cast<size_t>(j)] > 1) {
                    throw std::runtime_error("em_fit: component collapsed twice");
                }
                // Re-seed at the point farthest from the other means.
                Eigen::Index far = 0;
                double best = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    double nearest = std::numeric_limits<double>::infinity();
                    for (int l = 0; l < k; ++l) {
                        if (l == j) continue;
                        nearest = std::min(
                            nearest, (coords.row(i) - model.means.row(l)).squaredNorm());
                    }
                    if (nearest > best) {
                        best = nearest;
                        far = i;
                    }
                }
                model.means.row(j) = coords.row(far);
                model.covariances[static_cast<size_t>(j)] = global_cov;
                model.weights[j] = 1.0 / static_cast<double>(k);
                reseeded_now = true;
                continue;
            }
            model.weights[j] = nk[j] / static_cast<double>(n);
            const Vec w = resp.col(j);
            const Vec mu = (coords.transpose() * w) / nk[j];
            model.means.row(j) = mu.transpose();
            Mat centered_j = coords.rowwise() - mu.transpose();
            Mat cov = (centered_j.transpose() * (centered_j.array().colwise() * w.array()).matrix()) /
                      nk[j];
            model.covariances[static_cast<size_t>(j)] =
                floored_covariance(std::move(cov), reg_floor, covariance);
        }
        if (reseeded_now) {
            model.weights /= model.weights.sum();
            just_reseeded = true;
        }
    }
    return model;
}

double mixture_log_density_coords(const MixtureModel& model, const Vec& u) {
    return mixture_log_density_coords_batch(model, Mat(u.transpose()))[0];
}

Vec mixture_log_density_coords_batch(const MixtureModel& model, const Mat& coords) {
    Mat logp = joint_log_density(coords, model.weights, model.means, model.covariances);
    const Vec row_max = logp.rowwise().maxCoeff();
    logp.colwise() -= row_max;
    return row_max.array() + logp.array().exp().rowwise().sum().log();
}

double mixture_log_density(const MixtureModel& model, const ManifoldPoint& x) {
    if (x.handle != model.handle) throw std::invalid_argument("mixture_log_density: manifold mismatch");
    const Vec u = manifolds::log_map(x).values;
    return mixture_log_density_coords(model, u) + manifolds::log_volume_factor(x);
}

int model_select_k(const Mat& coords, int k_max, int folds, Seed seed) {
    if (k_max < 1) throw std::invalid_argument("model_select_k: k_max must be >= 1");
    const auto n = static_cast<int>(coords.rows());
    if (folds < 2 || n < 2 * folds) throw std::invalid_argument("model_select_k: need n >= 2 * folds");

    Rng rng(seed);
    const std::vector<int> order = shuffled_indices(n, rng);

    int best_k = 1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
        double total = 0.0;
        int count = 0;
        bool feasible = true;
        for (int f = 0; f < folds && feasible; ++f) {
            std::vector<int> train_rows;
            std::vector<int> eval_rows;
            for (int i = 0; i < n; ++i) {
                (i % folds == f ? eval_rows : train_rows).push_back(order[static_cast<size_t>(i)]);
            }
            if (static_cast<int>(train_rows.size()) < k) {
                feasible = false;
                break;
            }
            Mat train(static_cast<Eigen::Index>(train_rows.size()), coords.cols());
            for (size_t i = 0; i < train_rows.size(); ++i) {
                train.row(static_cast<Eigen::Index>(i)) = coords.row(train_rows[i]);
            }
            try {
                // Selection needs the ranking, not full convergence; a looser
                // tolerance keeps the 25-fit sweep cheap.
                const MixtureModel m =
                    em_fit(train, k, derive_seed(seed, static_cast<std::uint64_t>(k * 1000 + f)),
                           /*max_iter=*/200, /*tol=*/1e-6);
                Mat eval(static_cast<Eigen::Index>(eval_rows.size()), coords.cols());
                for (size_t i = 0; i < eval_rows.size(); ++i) {
                    eval.row(static_cast<Eigen::Index>(i)) = coords.row(eval_rows[i]);
                }
                total += mixture_log_density_coords_batch(m, eval).sum();
                count += static_cast<int>(eval_rows.size());
            } catch (const std::runtime_error&) {
                feasible = false;  // degenerate fit at this K; skip it
            }
        }
        if (!feasible || count == 0) continue;
        const double score = total / count;
        if (score > best_score) {
            best_score = score;
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace symspace::estimators
