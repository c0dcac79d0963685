#pragma once

#include "pathwise/coefficients.hpp"
#include "pathwise/families.hpp"
#include "pathwise/fields.hpp"
#include "pathwise/paths.hpp"

#include <vector>

namespace pathwise {

enum class Boundary {
    dirichlet,  ///< edge nodes frozen at the initial data
    clamp,      ///< ghost nodes copy the edge value; edges are updated like interior nodes
};

/// Uniform spatial grid on [x_lo, x_hi] with nx nodes. Time steps follow the driving path.
struct FDGrid {
    double x_lo = -8.0;
    double x_hi = 8.0;
    std::size_t nx = 401;
    Boundary boundary = Boundary::dirichlet;
    std::size_t store_every = 1;  ///< keep every k-th time level (the last one is always kept)

    double dx() const { return (x_hi - x_lo) / static_cast<double>(nx - 1); }
    double x(std::size_t j) const { return x_lo + static_cast<double>(j) * dx(); }
};

struct FDSolution {
    FieldSamples samples;
    double cfl = 0.0;                 ///< max d_gamma * dt / dx^2 seen during stepping
    double boundary_influence = 0.0;  ///< max |u| on the two edge nodes over all stored times
};

/// du = f dt + g o dB on a frozen path: explicit central-difference step in f, then a Heun
/// predictor-corrector step in g. Only d = d' = 1.
FDSolution solve_fd_stratonovich(const CoefficientSuite& suite, const InitialData& u0, const FDGrid& grid,
                                 const SamplePath& path);

/// du = F dt + g dB with F from ito_drift, left-point noise. `drift_override` replaces F by f
/// (used as a negative control).
FDSolution solve_fd_ito(const CoefficientSuite& suite, const InitialData& u0, const FDGrid& grid,
                        const SamplePath& path, bool drift_override = false);

struct EnvelopeLevel {
    double eps = 0.0;
    double max_gap = 0.0;        ///< max over nodes of (upper - lower) at the final time
    double predicted_gap = 0.0;  ///< 2 eps (1 + T)
    double min_order = 0.0;      ///< min over all nodes and times of (upper - lower)
};

struct EnvelopeReport {
    std::vector<EnvelopeLevel> levels;
    bool ordered = true;    ///< lower <= upper everywhere (to -1e-10)
    bool monotone = true;   ///< gaps decrease with eps
    double worst_relative_gap_error = 0.0;
};

/// Mollified upper and lower problems: f^eps (Gaussian smoothing in gamma, width eps) shifted by +-eps and
/// u0^eps (Gaussian smoothing, width eps^2) shifted by +-eps, solved in Stratonovich form with clamp edges.
EnvelopeReport envelope_experiment(const CoefficientSuite& suite, const InitialData& u0,
                                   const std::vector<double>& eps_list, FDGrid grid, const SamplePath& path,
                                   unsigned threads = 1);

}  // namespace pathwise
