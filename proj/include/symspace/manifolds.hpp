#pragma once

#include <string>
#include <variant>

#include "symspace/common.hpp"
#include "symspace/linalg.hpp"

namespace symspace::manifolds {

enum class Kind { Euclidean, Pd, PoincareBall, SiegelDisk };

/// A symmetric space together with its size parameter:
/// euclidean:d, pd:m, poincare:d, siegel:m. The base point is always the
/// identity element e (zero vector / identity matrix / zero matrix).
struct ManifoldHandle {
    Kind kind = Kind::Euclidean;
    int param = 1;

    /// Tangent-space dimension d.
    Eigen::Index dim() const;

    bool operator==(const ManifoldHandle& other) const = default;

    std::string str() const;
    static ManifoldHandle parse(const std::string& text);

    static ManifoldHandle euclidean(int d) { return {Kind::Euclidean, d}; }
    static ManifoldHandle pd(int m) { return {Kind::Pd, m}; }
    static ManifoldHandle poincare_ball(int d) { return {Kind::PoincareBall, d}; }
    static ManifoldHandle siegel_disk(int m) { return {Kind::SiegelDisk, m}; }
};

/// A point stored in its natural chart: real vector (Euclidean, ball),
/// PD matrix, or complex symmetric matrix (Siegel disk).
struct ManifoldPoint {
    ManifoldHandle handle;
    std::variant<Vec, linalg::PdMatrix, CMat> chart;

    const Vec& vec() const { return std::get<Vec>(chart); }
    const linalg::PdMatrix& pd() const { return std::get<linalg::PdMatrix>(chart); }
    const CMat& cmat() const { return std::get<CMat>(chart); }
};

/// Coordinates of a tangent vector at the base point e in a fixed orthonormal
/// frame; ‖values‖₂ equals the geodesic distance from e to exp(values).
struct TangentCoords {
    ManifoldHandle handle;
    Vec values;
};

/// True when the chart data satisfies the validity predicate of the kind
/// (PD spectrum / ‖x‖ < 1 − 1e-12 / largest singular value < 1 − 1e-12).
bool is_valid(const ManifoldPoint& x);

/// The base point e of the space.
ManifoldPoint base_point(const ManifoldHandle& h);

ManifoldPoint exp_map(const ManifoldHandle& h, const Vec& tangent);
inline ManifoldPoint exp_map(const TangentCoords& v) { return exp_map(v.handle, v.values); }

TangentCoords log_map(const ManifoldPoint& x);

/// log of volume_factor; preferred inside density computations since the
/// product of a/sinh(a) factors underflows for far-out points.
double log_volume_factor(const ManifoldPoint& x);

/// Density multiplier J(x) ∈ (0, 1] relating a tangent-space density to its
/// push-forward through exp: manifold density = tangent density(log x) · J(x).
inline double volume_factor(const ManifoldPoint& x) { return std::exp(log_volume_factor(x)); }

/// Independent finite-difference evaluation of volume_factor for Pd and
/// PoincareBall: 1/√det G with G the Gram matrix of chart-coordinate central
/// differences of exp under the chart metric. step must lie in [1e-6, 1e-3].
double numeric_volume_factor(const ManifoldHandle& h, const Vec& tangent, double step);

/// Geodesic distance; supported for Euclidean, PoincareBall, Pd and
/// SiegelDisk with m = 1 (via the Poincaré correspondence).
double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y);

/// ‖log(x) − log(y)‖_F on PD(m).
double log_euclidean_distance(const linalg::PdMatrix& x, const linalg::PdMatrix& y);

/// The Siegel-disk Jacobian product for precomputed radial values
/// λ_i = atanh(σ_i(Z)), evaluable for any order:
/// ∏_{i<j} (λi−λj)/sinh(λi−λj) · ∏_{i≤j} (λi+λj)/sinh(λi+λj), in log form.
double siegel_log_volume_factor_from_lambdas(const Vec& lambdas);

/// Takagi factorization Z = V diag(σ) Vᵀ of a complex symmetric matrix of
/// order ≤ 2, with V unitary and σ the singular values sorted descending.
struct TakagiFactorization {
    CMat v;
    Vec sigma;
};
TakagiFactorization takagi_2x2(const CMat& z);

}  // namespace symspace::manifolds
