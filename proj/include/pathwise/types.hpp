#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace pathwise {

/// Largest noise or spatial dimension handled by the small dense types below.
/// Stack storage keeps the inner loops free of heap traffic.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Frobenius inner product `a : b = tr(a b^T)`.
inline double contract(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); }

inline Vec scalar_vec(double v) {
    Vec out(1);
    out(0) = v;
    return out;
}

inline Mat scalar_mat(double v) {
    Mat out(1, 1);
    out(0, 0) = v;
    return out;
}

}  // namespace pathwise
