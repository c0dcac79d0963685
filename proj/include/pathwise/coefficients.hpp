#pragma once

#include "pathwise/fields.hpp"
#include "pathwise/paths.hpp"
#include "pathwise/types.hpp"

#include <functional>
#include <vector>

namespace pathwise {

/// g and its first-order blocks at (t, x, omega, y, z). d noise components, d' space dimensions.
/// dw(i, j) = d g_j / d omega^i, dx(i, j) = d g_j / d x_i, dz(i, j) = d g_j / d z_i, dy(j) = d g_j / dy.
struct GSuite {
    Vec value;
    Mat dw;
    Mat dx;
    Vec dy;
    Mat dz;
};

using GFunction = std::function<GSuite(double t, const Vec& x, const SamplePath& path, double y, const Vec& z)>;
using FEval =
    std::function<double(double t, const Vec& x, const SamplePath& path, double y, const Vec& z, const Mat& gamma)>;
using FDGamma =
    std::function<Mat(double t, const Vec& x, const SamplePath& path, double y, const Vec& z, const Mat& gamma)>;

struct FCoeff {
    FEval eval;
    FDGamma dgamma;
};

struct CoefficientSuite {
    FCoeff f;
    GFunction g;
    std::size_t noise_dim = 1;
    std::size_t space_dim = 1;
};

/// Arguments (t, x, y, z, gamma) of the coefficients; the path is passed alongside.
struct CoeffPoint {
    double t = 0.0;
    Vec x;
    double y = 0.0;
    Vec z;
    Mat gamma;
};

/// Black-box g as a function of (t, x, b = B_t, y, z); blocks come from central differences with step 1e-5.
using GBlackBox = std::function<Vec(double t, const Vec& x, const Vec& b, double y, const Vec& z)>;
GFunction finite_difference_g(GBlackBox g, std::size_t noise_dim, std::size_t space_dim);

/// F = f + 1/2 tr[dw + g dy^T + (dx + z dy^T + gamma dz)^T dz], the drift of the Ito form.
double ito_drift(const CoefficientSuite& suite, const SamplePath& path, const CoeffPoint& p);

struct ParabolicityReport {
    double min_eigenvalue = 0.0;
    /// max entrywise gap between d_gamma f and d_gamma F - 1/2 dz dz^T over the lattice
    double discrepancy = 0.0;
    bool parabolic = false;
};

/// Smallest eigenvalue of d_gamma f over the lattice. The subtraction form is computed by differencing F
/// in gamma and must agree with the direct form to `agreement` (InternalError otherwise).
ParabolicityReport parabolicity_check(const CoefficientSuite& suite, const SamplePath& path,
                                      const std::vector<CoeffPoint>& lattice, double agreement = 1e-8);

/// Time-dependent rate for the exponential change of variable.
using Rate = std::function<double(double)>;

/// eta_t = int_0^t lambda by the trapezoidal rule on a grid of spacing `step`, plus a partial last segment.
double integrated_rate(const Rate& lambda, double t, double step);

/// f~ = lambda y + e^eta f(e^-eta y, e^-eta z, e^-eta gamma), g~ = e^eta g(e^-eta y, e^-eta z).
CoefficientSuite change_of_variable(const CoefficientSuite& suite, Rate lambda);

/// u~ = e^eta u with the matching derivative suite.
RandomField transform_field(const RandomField& u, Rate lambda);

/// f^v(y, z, gamma) = f(v + y, v_x + z, v_xx + gamma) - f(v, v_x, v_xx), likewise g^v.
CoefficientSuite shifted_coefficients(const CoefficientSuite& suite, const RandomField& v);

/// Central-difference derivatives of F in (y, z, gamma), step 1e-5. dgamma is symmetric.
struct DriftDerivatives {
    double dy = 0.0;
    Vec dz;
    Mat dgamma;
};
DriftDerivatives drift_derivatives(const CoefficientSuite& suite, const SamplePath& path, const CoeffPoint& p);

}  // namespace pathwise
