#include "symspace/manifolds.hpp"

#include <cmath>
#include <stdexcept>

namespace symspace::manifolds {

using linalg::PdMatrix;
using linalg::SymMatrix;

namespace {

constexpr double kChartMargin = 1e-12;

/// log(a / sinh a) for a >= 0, continuous at 0.
double log_a_over_sinh(double a) {
    if (a < 1e-8) return std::log1p(-a * a / 6.0);
    // log sinh a = a + log(1 - e^{-2a}) - log 2
    return std::log(a) - a - std::log1p(-std::exp(-2.0 * a)) + std::log(2.0);
}

[[noreturn]] void invalid_point() { throw std::invalid_argument("point outside chart validity region"); }

// --- Siegel tangent coordinates -------------------------------------------
// A complex symmetric W maps to a real vector: Re/Im of each diagonal entry
// in row order, then Re/Im of the upper off-diagonals scaled by √2, so that
// ‖coords‖₂ = ‖W‖_F.

Vec siegel_vec(const CMat& w) {
    const Eigen::Index m = w.rows();
    Vec v(m * (m + 1));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        v[k++] = w(i, i).real();
        v[k++] = w(i, i).imag();
    }
    const double root2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            v[k++] = root2 * w(i, j).real();
            v[k++] = root2 * w(i, j).imag();
        }
    }
    return v;
}

CMat siegel_unvec(const Vec& v, Eigen::Index m) {
    if (v.size() != m * (m + 1)) throw std::invalid_argument("siegel coordinates: dimension mismatch");
    CMat w(m, m);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        w(i, i) = {v[k], v[k + 1]};
        k += 2;
    }
    const double inv_root2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            w(i, j) = {inv_root2 * v[k], inv_root2 * v[k + 1]};
            w(j, i) = w(i, j);
            k += 2;
        }
    }
    return w;
}

/// Singular values of a complex matrix of order ≤ 2 via the Hermitian
/// eigenvalues of Z*Z (quadratic formula).
Vec singular_values_2x2(const CMat& z) {
    const CMat gram = z.adjoint() * z;
    const auto eigs = linalg::complex_eig_2x2(gram);
    Vec s(z.rows());
    // Hermitian PSD input: eigenvalues are real and >= 0 up to rounding.
    // complex_eig_2x2 sorts ascending by real part; emit descending.
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const auto& ev = (z.rows() == 1) ? eigs[0] : eigs[static_cast<size_t>(1 - i)];
        s[i] = std::sqrt(std::max(0.0, ev.real()));
    }
    return s;
}

}  // namespace

Eigen::Index ManifoldHandle::dim() const {
    switch (kind) {
        case Kind::Euclidean:
        case Kind::PoincareBall:
            return param;
        case Kind::Pd:
            return linalg::sym_dim(param);
        case Kind::SiegelDisk:
            return static_cast<Eigen::Index>(param) * (param + 1);
    }
    throw std::logic_error("unreachable");
}

std::string ManifoldHandle::str() const {
    switch (kind) {
        case Kind::Euclidean: return "euclidean:" + std::to_string(param);
        case Kind::Pd: return "pd:" + std::to_string(param);
        case Kind::PoincareBall: return "poincare:" + std::to_string(param);
        case Kind::SiegelDisk: return "siegel:" + std::to_string(param);
    }
    throw std::logic_error("unreachable");
}

ManifoldHandle ManifoldHandle::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("manifold string must look like pd:2, poincare:3, siegel:1 or euclidean:2");
    }
    const std::string name = text.substr(0, colon);
    const std::string size_text = text.substr(colon + 1);
    int param = 0;
    try {
        size_t used = 0;
        param = std::stoi(size_text, &used);
        if (used != size_text.size()) throw std::invalid_argument(size_text);
    } catch (const std::exception&) {
        throw std::invalid_argument("manifold size must be an integer: " + text);
    }
    if (param < 1) throw std::invalid_argument("manifold size must be >= 1: " + text);
    if (name == "euclidean") return euclidean(param);
    if (name == "pd") return pd(param);
    if (name == "poincare") return poincare_ball(param);
    if (name == "siegel") return siegel_disk(param);
    throw std::invalid_argument("unknown manifold kind: " + name);
}

bool is_valid(const ManifoldPoint& x) {
    switch (x.handle.kind) {
        case Kind::Euclidean:
            return std::holds_alternative<Vec>(x.chart) && x.vec().size() == x.handle.param &&
                   x.vec().allFinite();
        case Kind::PoincareBall:
            return std::holds_alternative<Vec>(x.chart) && x.vec().size() == x.handle.param &&
                   x.vec().allFinite() && x.vec().norm() < 1.0 - kChartMargin;
        case Kind::Pd: {
            if (!std::holds_alternative<PdMatrix>(x.chart)) return false;
            return x.pd().order() == x.handle.param && x.pd().mat().allFinite();
        }
        case Kind::SiegelDisk: {
            if (!std::holds_alternative<CMat>(x.chart)) return false;
            const CMat& z = x.cmat();
            if (z.rows() != x.handle.param || z.cols() != x.handle.param || !z.allFinite()) return false;
            if ((z - z.transpose()).norm() > 1e-10 * (z.norm() + 1.0)) return false;
            if (x.handle.param > 2) return false;  // singular values only computed for m <= 2
            return singular_values_2x2(z).maxCoeff() < 1.0 - kChartMargin;
        }
    }
    return false;
}

ManifoldPoint base_point(const ManifoldHandle& h) {
    switch (h.kind) {
        case Kind::Euclidean:
        case Kind::PoincareBall:
            return {h, Vec(Vec::Zero(h.param))};
        case Kind::Pd:
            return {h, PdMatrix::identity(h.param)};
        case Kind::SiegelDisk:
            return {h, CMat(CMat::Zero(h.param, h.param))};
    }
    throw std::logic_error("unreachable");
}

ManifoldPoint exp_map(const ManifoldHandle& h, const Vec& tangent) {
    if (tangent.size() != h.dim()) throw std::invalid_argument("exp_map: tangent dimension mismatch");
    if (!tangent.allFinite()) throw std::invalid_argument("exp_map: tangent vector must be finite");
    switch (h.kind) {
        case Kind::Euclidean:
            return {h, tangent};
        case Kind::Pd:
            return {h, linalg::mat_exp(linalg::sym_unvec(tangent, h.param))};
        case Kind::PoincareBall: {
            const double r = tangent.norm();
            if (r == 0.0) return {h, Vec(Vec::Zero(h.param))};
            return {h, Vec(tangent * (std::tanh(r / 2.0) / r))};
        }
        case Kind::SiegelDisk: {
            if (h.param > 2) throw std::invalid_argument("exp_map: Siegel disk supported for m <= 2 only");
            const CMat w = siegel_unvec(tangent, h.param);
            const TakagiFactorization tf = takagi_2x2(w);
            const Vec shrunk = (tf.sigma / 2.0).array().tanh();
            CMat z = tf.v * shrunk.asDiagonal() * tf.v.transpose();
            z = symmetrized(z);
            return {h, z};
        }
    }
    throw std::logic_error("unreachable");
}

TangentCoords log_map(const ManifoldPoint& x) {
    if (!is_valid(x)) invalid_point();
    switch (x.handle.kind) {
        case Kind::Euclidean:
            return {x.handle, x.vec()};
        case Kind::Pd:
            return {x.handle, linalg::sym_vec(linalg::mat_log(x.pd()))};
        case Kind::PoincareBall: {
            const double t = x.vec().norm();
            if (t == 0.0) return {x.handle, Vec(Vec::Zero(x.handle.param))};
            const double r = 2.0 * std::atanh(t);
            return {x.handle, Vec(x.vec() * (r / t))};
        }
        case Kind::SiegelDisk: {
            const TakagiFactorization tf = takagi_2x2(x.cmat());
            Vec lifted(tf.sigma.size());
            for (Eigen::Index i = 0; i < lifted.size(); ++i) lifted[i] = 2.0 * std::atanh(tf.sigma[i]);
            CMat w = tf.v * lifted.asDiagonal() * tf.v.transpose();
            w = symmetrized(w);
            return {x.handle, siegel_vec(w)};
        }
    }
    throw std::logic_error("unreachable");
}

double siegel_log_volume_factor_from_lambdas(const Vec& lambdas) {
    double acc = 0.0;
    const Eigen::Index m = lambdas.size();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            if (j > i) acc += log_a_over_sinh(std::abs(lambdas[i] - lambdas[j]));
            acc += log_a_over_sinh(std::abs(lambdas[i] + lambdas[j]));
        }
    }
    return acc;
}

double log_volume_factor(const ManifoldPoint& x) {
    if (!is_valid(x)) invalid_point();
    switch (x.handle.kind) {
        case Kind::Euclidean:
            return 0.0;
        case Kind::Pd: {
            // a_ij = |μ_i − μ_j| / 2 with μ the eigenvalues of log x.
            const auto eig = linalg::sym_eig(SymMatrix(x.pd().mat()));
            if (eig.eigenvalues.minCoeff() <= 0.0) invalid_point();
            const Vec mu = eig.eigenvalues.array().log();
            double acc = 0.0;
            for (Eigen::Index i = 0; i < mu.size(); ++i) {
                for (Eigen::Index j = i + 1; j < mu.size(); ++j) {
                    acc += log_a_over_sinh(std::abs(mu[i] - mu[j]) / 2.0);
                }
            }
            return acc;
        }
        case Kind::PoincareBall: {
            const double r = 2.0 * std::atanh(x.vec().norm());
            return (x.handle.param - 1) * log_a_over_sinh(r);
        }
        case Kind::SiegelDisk: {
            const Vec s = singular_values_2x2(x.cmat());
            Vec lambdas(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i) lambdas[i] = std::atanh(s[i]);
            return siegel_log_volume_factor_from_lambdas(lambdas);
        }
    }
    throw std::logic_error("unreachable");
}

namespace {

/// Chart coordinates of exp(v) as a flat vector (matrix entries row-major
/// for Pd, ball coordinates otherwise).
Vec chart_coords(const ManifoldHandle& h, const Vec& v) {
    const ManifoldPoint x = exp_map(h, v);
    if (h.kind == Kind::Pd) {
        const Mat& m = x.pd().mat();
        return Eigen::Map<const Vec>(m.data(), m.size());
    }
    return x.vec();
}

}  // namespace

double numeric_volume_factor(const ManifoldHandle& h, const Vec& tangent, double step) {
    if (h.kind != Kind::Pd && h.kind != Kind::PoincareBall) {
        throw std::invalid_argument("numeric_volume_factor: supported for pd and poincare only");
    }
    if (!(step >= 1e-6 && step <= 1e-3)) {
        throw std::invalid_argument("numeric_volume_factor: step must lie in [1e-6, 1e-3]");
    }
    const Eigen::Index d = h.dim();
    if (tangent.size() != d) throw std::invalid_argument("numeric_volume_factor: dimension mismatch");

    Mat diffs(chart_coords(h, tangent).size(), d);
    for (Eigen::Index j = 0; j < d; ++j) {
        Vec vp = tangent;
        Vec vm = tangent;
        vp[j] += step;
        vm[j] -= step;
        diffs.col(j) = (chart_coords(h, vp) - chart_coords(h, vm)) / (2.0 * step);
    }

    Mat gram(d, d);
    if (h.kind == Kind::Pd) {
        const int m = h.param;
        const Mat x = exp_map(h, tangent).pd().mat();
        const Mat xinv = x.inverse();
        std::vector<Mat> conj(static_cast<size_t>(d));
        for (Eigen::Index j = 0; j < d; ++j) {
            const Mat dj = Eigen::Map<const Mat>(diffs.col(j).data(), m, m);
            conj[static_cast<size_t>(j)] = xinv * dj;
        }
        for (Eigen::Index a = 0; a < d; ++a) {
            for (Eigen::Index b = a; b < d; ++b) {
                gram(a, b) = (conj[static_cast<size_t>(a)] * conj[static_cast<size_t>(b)]).trace();
                gram(b, a) = gram(a, b);
            }
        }
    } else {
        const Vec x = exp_map(h, tangent).vec();
        const double lambda = 4.0 / std::pow(1.0 - x.squaredNorm(), 2);
        gram = lambda * (diffs.transpose() * diffs);
    }

    const double det = gram.determinant();
    if (!(det > 0.0)) throw std::runtime_error("numeric_volume_factor: degenerate Gram matrix; adjust step");
    return 1.0 / std::sqrt(det);
}

double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y) {
    if (x.handle != y.handle) throw std::invalid_argument("geodesic_distance: points on different manifolds");
    if (!is_valid(x) || !is_valid(y)) invalid_point();
    switch (x.handle.kind) {
        case Kind::Euclidean:
            return (x.vec() - y.vec()).norm();
        case Kind::PoincareBall: {
            const double num = 2.0 * (x.vec() - y.vec()).squaredNorm();
            const double den = (1.0 - x.vec().squaredNorm()) * (1.0 - y.vec().squaredNorm());
            return std::acosh(1.0 + num / den);
        }
        case Kind::Pd: {
            // Affine-invariant distance: ‖log eig(x^{-1/2} y x^{-1/2})‖₂ via
            // Cholesky whitening.
            const Mat l = linalg::cholesky_lower(x.pd());
            const Mat a = l.triangularView<Eigen::Lower>().solve(y.pd().mat());
            const Mat white = l.triangularView<Eigen::Lower>().solve(Mat(a.transpose()));
            const auto eig = linalg::sym_eig(SymMatrix(white));
            if (eig.eigenvalues.minCoeff() <= 0.0) invalid_point();
            return eig.eigenvalues.array().log().matrix().norm();
        }
        case Kind::SiegelDisk: {
            if (x.handle.param != 1) {
                throw std::invalid_argument("geodesic_distance: Siegel disk supported for m = 1 only");
            }
            const auto to_ball = [](const CMat& z) {
                Vec b(2);
                b << z(0, 0).real(), z(0, 0).imag();
                return ManifoldPoint{ManifoldHandle::poincare_ball(2), b};
            };
            return geodesic_distance(to_ball(x.cmat()), to_ball(y.cmat()));
        }
    }
    throw std::logic_error("unreachable");
}

double log_euclidean_distance(const PdMatrix& x, const PdMatrix& y) {
    return (linalg::mat_log(x).mat() - linalg::mat_log(y).mat()).norm();
}

TakagiFactorization takagi_2x2(const CMat& z) {
    const Eigen::Index m = z.rows();
    if (z.cols() != m || m < 1 || m > 2) throw std::invalid_argument("takagi_2x2: order must be 1 or 2");

    TakagiFactorization out;
    out.v = CMat::Identity(m, m);
    out.sigma = Vec::Zero(m);

    if (m == 1) {
        const std::complex<double> w = z(0, 0);
        const double s = std::abs(w);
        out.sigma[0] = s;
        if (s > 0.0) out.v(0, 0) = std::polar(1.0, std::arg(w) / 2.0);
        return out;
    }

    const double scale = z.norm();
    if (scale == 0.0) return out;

    // Eigenvectors (p; q) of the real embedding [[X, Y], [Y, -X]] with
    // eigenvalue σ > 0 give con-eigenvectors v = p + iq: Z v̄ = σ v.
    Mat b(4, 4);
    b.topLeftCorner(2, 2) = z.real();
    b.topRightCorner(2, 2) = z.imag();
    b.bottomLeftCorner(2, 2) = z.imag();
    b.bottomRightCorner(2, 2) = -z.real();
    const auto eig = linalg::sym_eig(SymMatrix(b));  // descending

    const double rank_tol = 1e-14 * scale;
    int placed = 0;
    for (Eigen::Index k = 0; k < 4 && placed < 2; ++k) {
        if (eig.eigenvalues[k] <= rank_tol) break;
        out.sigma[placed] = eig.eigenvalues[k];
        for (Eigen::Index i = 0; i < 2; ++i) {
            out.v(i, placed) = {eig.eigenvectors(i, k), eig.eigenvectors(i + 2, k)};
        }
        ++placed;
    }
    if (placed == 1) {
        // Rank one: complete with any unit vector orthogonal to column 0.
        const CVec v0 = out.v.col(0);
        CVec v1 = (std::abs(v0[0]) <= std::abs(v0[1])) ? CVec(CVec::Unit(2, 0)) : CVec(CVec::Unit(2, 1));
        v1 -= v0 * v0.dot(v1);
        out.v.col(1) = v1 / v1.norm();
        out.sigma[1] = 0.0;
    }
    return out;
}

}  // namespace symspace::manifolds
