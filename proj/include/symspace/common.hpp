#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace symspace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Seed for all stochastic operations; identical seeds give identical results.
using Seed = std::uint64_t;

/// log(sum_i exp(v_i)) without overflow. Returns -inf for an empty span.
inline double log_sum_exp(std::span<const double> values) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

inline double log_sum_exp(const Vec& values) {
    return log_sum_exp(std::span<const double>(values.data(), static_cast<size_t>(values.size())));
}

inline bool all_finite(const Mat& a) { return a.allFinite(); }

/// (A + Aᵀ)/2, evaluated into a fresh matrix (safe to assign back to A).
template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& a) {
    return 0.5 * (a + a.transpose());
}

}  // namespace symspace
