#pragma once

#include "pathwise/coefficients.hpp"
#include "pathwise/families.hpp"
#include "pathwise/fields.hpp"
#include "pathwise/paths.hpp"
#include "pathwise/refsolver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pathwise {

/// Real-valued table on (path node k, x_j), row-major in k.
struct Table {
    std::size_t nt = 0;
    std::size_t nx = 0;
    std::vector<double> data;

    Table() = default;
    Table(std::size_t rows, std::size_t cols, double fill = 0.0) : nt(rows), nx(cols), data(rows * cols, fill) {}
    double& operator()(std::size_t k, std::size_t j) { return data[k * nx + j]; }
    double operator()(std::size_t k, std::size_t j) const { return data[k * nx + j]; }
};

/// Averaged derivatives of the Ito drift F and of g along the segment from v to u, tabulated on
/// the path's time grid and a uniform x grid. psi = (d_t u - f(u)) - (d_t v - f(v)).
struct FrozenLinearCoefficients {
    std::vector<double> times;
    std::vector<double> xs;
    Table Fy, Fz, Fgamma, gy, gz, psi;
};

/// Uniform spatial grid shared by the linearization, characteristics and reduced coefficients.
struct XGrid {
    double lo = -8.0;
    double hi = 8.0;
    std::size_t n = 321;
    std::vector<double> nodes() const;
};

/// 16-point Gauss-Legendre average in lambda; a single evaluation where u and v agree to second order.
FrozenLinearCoefficients linearize(const CoefficientSuite& suite, const RandomField& u, const RandomField& v,
                                   const SamplePath& path, const XGrid& grid, unsigned threads = 1);

/// Stochastic characteristics started from every grid node: theta, the weight M and d_x theta,
/// all on the path's time grid.
struct CharacteristicsBundle {
    std::vector<double> times;
    std::vector<double> xs;
    Table theta, M, dtheta;

    /// zeta_t(y): the start point whose characteristic sits at y at time index k (bisection on the
    /// linear interpolant). Throws DomainError outside [theta(k, 0), theta(k, n - 1)].
    double zeta(std::size_t k, double y) const;
    /// M at time index k and start point x, linearly interpolated.
    double weight(std::size_t k, double x) const;
};

/// theta_{k+1} = theta_k - g_z dB, M_{k+1} = M_k exp(g_y dB - g_y^2 dt / 2),
/// d_x theta_{k+1} = d_x theta_k exp(-d_x g_z dB - (d_x g_z)^2 dt / 2), coefficients at (t_k, theta_k).
CharacteristicsBundle solve_characteristics(const FrozenLinearCoefficients& coeffs, const SamplePath& path);

struct ReducedCoefficients {
    std::vector<double> times;
    std::vector<double> xs;
    Table a, b, c, psi;
};

/// abar, bbar, cbar, psibar on the start-point grid. x-derivatives of M and d_x theta come from central
/// differences (one-sided at the edges). abar < -1e-10 raises NumericalError.
ReducedCoefficients reduced_coefficients(const FrozenLinearCoefficients& coeffs, const CharacteristicsBundle& bundle);

struct MonteCarloOptions {
    std::size_t samples = 10000;
    std::size_t inner_steps = 50;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct FKEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t clamp_events = 0;  ///< inner steps that queried coefficients outside the x box
};

/// v(t, x) = E[Gamma_t v0(X_t) + sum_s Gamma_s psibar(t - s, X_s) ds] with
/// dX = sqrt(2 abar(t - r, X)) dW + bbar(t - r, X) dr and Gamma = exp(int cbar). Sample i draws from
/// the stream (seed, "fk", i); sums run in sample order.
FKEstimate feynman_kac(const ReducedCoefficients& reduced, const std::function<double(double)>& v0, double t,
                       double x, const MonteCarloOptions& options);

/// w(t, x) = M_t(zeta_t(x)) v(t, zeta_t(x)), with t a node of the bundle's time grid.
double reconstruct(double v_at_zeta, const CharacteristicsBundle& bundle, double t, double x);

struct PipelinePoint {
    double x = 0.0;
    double zeta = 0.0;
    FKEstimate v;
    double w = 0.0;
};

/// Full construction for w = u - v: linearize, characteristics, reduced coefficients, Feynman-Kac at
/// zeta_t(x), reconstruction. `w0` is u(0, .) - v(0, .).
std::vector<PipelinePoint> solve_linear_spde(const CoefficientSuite& suite, const RandomField& u,
                                             const RandomField& v, const std::function<double(double)>& w0,
                                             const SamplePath& path, const XGrid& grid, double t,
                                             const std::vector<double>& xs, const MonteCarloOptions& options);

struct ComparisonReport {
    bool precondition_met = true;
    std::string diagnostic;
    double min_difference = 0.0;  ///< min over nodes and times of v - u
    bool pass = false;
};

/// Solves both initial conditions with the reference solver and checks u <= v at every node.
ComparisonReport classical_comparison_experiment(const CoefficientSuite& suite, const InitialData& u0,
                                                 const InitialData& v0, const SamplePath& path, const FDGrid& grid);

}  // namespace pathwise
