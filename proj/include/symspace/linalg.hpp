#pragma once

#include <array>
#include <complex>

#include "symspace/common.hpp"

namespace symspace::linalg {

/// Scale-relative positive-definiteness threshold for a spectrum. Purely
/// relative so that well-conditioned matrices of any magnitude (for example
/// 1e-12 I, the degenerate-covariance limit) pass; the zero matrix fails the
/// separate eigenvalue > 0 requirement.
inline double pd_tolerance(const Vec& eigenvalues) {
    return 1e-12 * eigenvalues.cwiseAbs().maxCoeff();
}

/// Real symmetric matrix. Construction symmetrizes ((A + Aᵀ)/2) and requires
/// finite entries, so entries(i,j) == entries(j,i) holds exactly afterwards.
class SymMatrix {
public:
    explicit SymMatrix(const Mat& a);
    static SymMatrix zero(Eigen::Index m) { return SymMatrix(Mat::Zero(m, m)); }

    const Mat& mat() const { return mat_; }
    Eigen::Index order() const { return mat_.rows(); }

private:
    Mat mat_;
};

/// Symmetric positive definite matrix. The public constructor verifies the
/// spectrum against pd_tolerance; routines that produce provably PD results
/// (matrix exponential) construct through the trusted path instead.
class PdMatrix {
public:
    explicit PdMatrix(const Mat& a);
    static PdMatrix identity(Eigen::Index m) { return PdMatrix(Mat::Identity(m, m)); }

    /// No spectral check; `a` must be symmetric with positive eigenvalues.
    static PdMatrix trusted(Mat a);

    const Mat& mat() const { return mat_; }
    Eigen::Index order() const { return mat_.rows(); }

private:
    PdMatrix() = default;
    Mat mat_;
};

/// Spectral factorization S = V diag(λ) Vᵀ with λ sorted descending and
/// column k of V the eigenvector for λ_k.
struct EigenDecomposition {
    Vec eigenvalues;
    Mat eigenvectors;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Deterministic:
/// identical input bits give identical output bits. Throws std::runtime_error
/// if 100 sweeps do not reach convergence (numerically pathological input).
EigenDecomposition sym_eig(const SymMatrix& s);

/// Matrix exponential via eigendecomposition. Throws if max eigenvalue > 700.
PdMatrix mat_exp(const SymMatrix& x);

/// Matrix logarithm via eigendecomposition; inverse of mat_exp.
SymMatrix mat_log(const PdMatrix& p);

/// Orthonormal coordinates of Sym(m) under the Frobenius inner product:
/// the m diagonal entries in row order, then the upper off-diagonals
/// (i < j, row-major) scaled by √2. An isometry: ‖sym_vec(X)‖₂ = ‖X‖_F.
Vec sym_vec(const SymMatrix& x);
SymMatrix sym_unvec(const Vec& v, Eigen::Index m);

/// Dimension of the coordinate image of Sym(m).
inline Eigen::Index sym_dim(Eigen::Index m) { return m * (m + 1) / 2; }

/// Lower-triangular L with L Lᵀ = P.
Mat cholesky_lower(const PdMatrix& p);

/// Eigenvalues of a complex matrix of order ≤ 2 by the quadratic formula,
/// sorted by real part, then imaginary part. Order 1 returns the scalar.
std::array<std::complex<double>, 2> complex_eig_2x2(const CMat& z);

}  // namespace symspace::linalg
