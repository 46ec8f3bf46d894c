#include "symspace/linalg.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace symspace::linalg {

SymMatrix::SymMatrix(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("SymMatrix: matrix must be square");
    if (!a.allFinite()) throw std::invalid_argument("SymMatrix: entries must be finite");
    mat_ = 0.5 * (a + a.transpose());
}

PdMatrix::PdMatrix(const Mat& a) {
    SymMatrix s(a);
    const EigenDecomposition eig = sym_eig(s);
    const double lo = eig.eigenvalues.minCoeff();
    if (lo <= 0.0 || lo <= pd_tolerance(eig.eigenvalues)) {
        throw std::invalid_argument("PdMatrix: not positive definite");
    }
    mat_ = s.mat();
}

PdMatrix PdMatrix::trusted(Mat a) {
    PdMatrix p;
    p.mat_ = std::move(a);
    return p;
}

namespace {

// One cyclic Jacobi sweep over all (p, q) pairs; returns rotations applied.
int jacobi_sweep(Mat& a, Mat& v, double skip_below) {
    const Eigen::Index m = a.rows();
    int rotations = 0;
    for (Eigen::Index p = 0; p < m - 1; ++p) {
        for (Eigen::Index q = p + 1; q < m; ++q) {
            const double apq = a(p, q);
            if (std::abs(apq) <= skip_below) continue;
            ++rotations;
            const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;
            const double tau = s / (1.0 + c);

            const double app = a(p, p);
            const double aqq = a(q, q);
            a(p, p) = app - t * apq;
            a(q, q) = aqq + t * apq;
            a(p, q) = 0.0;
            a(q, p) = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (i == p || i == q) continue;
                const double aip = a(i, p);
                const double aiq = a(i, q);
                a(i, p) = aip - s * (aiq + tau * aip);
                a(p, i) = a(i, p);
                a(i, q) = aiq + s * (aip - tau * aiq);
                a(q, i) = a(i, q);
            }
            for (Eigen::Index i = 0; i < m; ++i) {
                const double vip = v(i, p);
                const double viq = v(i, q);
                v(i, p) = vip - s * (viq + tau * vip);
                v(i, q) = viq + s * (vip - tau * viq);
            }
        }
    }
    return rotations;
}

double offdiag_norm(const Mat& a) {
    double s = 0.0;
    for (Eigen::Index p = 0; p < a.rows() - 1; ++p) {
        for (Eigen::Index q = p + 1; q < a.cols(); ++q) s += 2.0 * a(p, q) * a(p, q);
    }
    return std::sqrt(s);
}

}  // namespace

EigenDecomposition sym_eig(const SymMatrix& s) {
    constexpr int kMaxSweeps = 100;
    const Eigen::Index m = s.order();
    Mat a = s.mat();
    Mat v = Mat::Identity(m, m);
    const double scale = std::max(a.norm(), 1e-300);
    const double tol = 1e-15 * scale;
    const double skip_below = 1e-18 * scale;

    bool converged = (m == 1) || offdiag_norm(a) <= tol;
    for (int sweep = 0; !converged && sweep < kMaxSweeps; ++sweep) {
        const int rotations = jacobi_sweep(a, v, skip_below);
        converged = rotations == 0 || offdiag_norm(a) <= tol;
    }
    if (!converged) throw std::runtime_error("sym_eig: Jacobi iteration failed to converge");

    std::vector<Eigen::Index> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(m);
    out.eigenvectors.resize(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        out.eigenvalues[k] = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
        out.eigenvectors.col(k) = v.col(order[static_cast<size_t>(k)]);
        // Fix the sign so the output is unique: largest-magnitude entry >= 0.
        Eigen::Index imax = 0;
        double amax = -1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double ai = std::abs(out.eigenvectors(i, k));
            if (ai > amax) {
                amax = ai;
                imax = i;
            }
        }
        if (out.eigenvectors(imax, k) < 0.0) out.eigenvectors.col(k) = -out.eigenvectors.col(k);
    }
    return out;
}

PdMatrix mat_exp(const SymMatrix& x) {
    const EigenDecomposition eig = sym_eig(x);
    if (eig.eigenvalues.maxCoeff() > 700.0) {
        throw std::overflow_error("mat_exp: tangent vector too large");
    }
    const Vec expvals = eig.eigenvalues.array().exp();
    Mat r = eig.eigenvectors * expvals.asDiagonal() * eig.eigenvectors.transpose();
    r = symmetrized(r);
    return PdMatrix::trusted(std::move(r));
}

SymMatrix mat_log(const PdMatrix& p) {
    const EigenDecomposition eig = sym_eig(SymMatrix(p.mat()));
    if (eig.eigenvalues.minCoeff() <= 0.0) {
        throw std::invalid_argument("mat_log: not positive definite");
    }
    const Vec logvals = eig.eigenvalues.array().log();
    return SymMatrix(eig.eigenvectors * logvals.asDiagonal() * eig.eigenvectors.transpose());
}

Vec sym_vec(const SymMatrix& x) {
    const Eigen::Index m = x.order();
    Vec v(sym_dim(m));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) v[k++] = x.mat()(i, i);
    const double root2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) v[k++] = root2 * x.mat()(i, j);
    }
    return v;
}

SymMatrix sym_unvec(const Vec& v, Eigen::Index m) {
    if (v.size() != sym_dim(m)) throw std::invalid_argument("sym_unvec: dimension mismatch");
    Mat x(m, m);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) x(i, i) = v[k++];
    const double inv_root2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            x(i, j) = inv_root2 * v[k];
            x(j, i) = x(i, j);
            ++k;
        }
    }
    return SymMatrix(x);
}

Mat cholesky_lower(const PdMatrix& p) {
    Eigen::LLT<Mat> llt(p.mat());
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("cholesky_lower: factorization failed");
    }
    return llt.matrixL();
}

std::array<std::complex<double>, 2> complex_eig_2x2(const CMat& z) {
    using C = std::complex<double>;
    if (z.rows() != z.cols() || z.rows() < 1 || z.rows() > 2) {
        throw std::invalid_argument("complex_eig_2x2: order must be 1 or 2");
    }
    std::array<C, 2> out{C{0.0, 0.0}, C{0.0, 0.0}};
    if (z.rows() == 1) {
        out[0] = z(0, 0);
        out[1] = z(0, 0);
        return out;
    }
    const C tr = z(0, 0) + z(1, 1);
    const C det = z(0, 0) * z(1, 1) - z(0, 1) * z(1, 0);
    const C disc = std::sqrt(tr * tr - 4.0 * det);
    out[0] = 0.5 * (tr + disc);
    out[1] = 0.5 * (tr - disc);
    auto before = [](const C& a, const C& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    if (before(out[1], out[0])) std::swap(out[0], out[1]);
    return out;
}

}  // namespace symspace::linalg
