#pragma once

#include "pathwise/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pathwise {

/// A Brownian driving path frozen on the uniform grid t_k = k T / N, starting at the origin.
///
/// Both the raw increments and their cumulative sums are kept: increments give accurate
/// B_{s,t} for nearby s, t while the values give O(1) access to B_t.
/// Immutable after construction.
class SamplePath {
public:
    /// Builds a path from its N*d increments (row k holds the d components of B_{t_k,t_{k+1}}).
    static SamplePath from_increments(std::size_t dimension, double horizon, std::vector<double> increments,
                                      std::uint64_t seed = 0);
    /// Builds a path from (N+1)*d node values. values[0..d) must be zero.
    static SamplePath from_values(std::size_t dimension, double horizon, std::vector<double> values,
                                  std::uint64_t seed = 0);

    std::size_t dimension() const { return dim_; }
    double horizon() const { return horizon_; }
    std::size_t steps() const { return steps_; }
    double step() const { return horizon_ / static_cast<double>(steps_); }
    std::uint64_t seed() const { return seed_; }

    double time(std::size_t k) const { return static_cast<double>(k) * step(); }
    double value(std::size_t k, std::size_t component) const { return values_[k * dim_ + component]; }
    double increment(std::size_t k, std::size_t component) const { return increments_[k * dim_ + component]; }
    Vec value_at_node(std::size_t k) const;

    /// B_t with linear interpolation between nodes (the path is piecewise linear between grid points).
    Vec value_at(double t) const;

    /// Grid index of `t`; throws ParameterError when t is not a grid time (relative tolerance 1e-9 of a step).
    std::size_t index_of(double t) const;
    bool on_grid(double t) const;

    /// B_{s,t} between node indices, summed from increments for short spans.
    Vec increment_between(std::size_t s, std::size_t t) const;

    std::span<const double> values() const { return values_; }
    std::span<const double> increments() const { return increments_; }

    bool operator==(const SamplePath&) const = default;

private:
    SamplePath() = default;

    std::size_t dim_ = 0;
    std::size_t steps_ = 0;
    double horizon_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<double> increments_;
    std::vector<double> values_;

    friend SamplePath refine(const SamplePath&, std::size_t, bool);
};

/// Second-level data over [s, t]: increment B, trapezoidal Stratonovich matrix I and Levy area A.
/// I(i, j) = sum over steps of ((B^i_{s,k} + B^i_{s,k+1}) / 2) * dB^j_k, and A = I - I^T.
struct SecondLevel {
    Vec increment;
    Mat strat;
    Mat levy;
};

/// i.i.d. N(0, T/N) increments per component from the stream (seed, "path").
SamplePath sample_path(std::size_t dimension, double horizon, std::size_t steps, std::uint64_t seed);

/// Dyadic Brownian-bridge refinement by `factor` (a power of two).
///
/// Each halving inserts midpoints (a + b) / 2 + sqrt(dt / 4) * xi with xi drawn from the stream
/// (seed, "bridge", N_current), so refine(refine(p, 2), 2) and refine(p, 4) coincide bit for bit.
/// Coarse nodes are copied exactly. `bridge_noise = false` inserts plain midpoints.
SamplePath refine(const SamplePath& path, std::size_t factor, bool bridge_noise = true);

/// Trapezoidal Stratonovich sum of a node-indexed integrand against component `component` over [s, t].
double strat_integral(std::span<const double> integrand, const SamplePath& path, std::size_t component, double s,
                      double t);

SecondLevel second_level(const SamplePath& path, double s, double t);
SecondLevel second_level_between(const SamplePath& path, std::size_t s, std::size_t t);

/// max-norm of A_{s,t} - A_{s,u} - A_{u,t} - (B_{s,u} B_{u,t}^T - B_{u,t} B_{s,u}^T).
double chen_check(const SamplePath& path, double s, double u, double t);

/// sup over node pairs of |B_{s,t}| / (t - s)^kappa, kappa in [0, 1).
double holder_coefficient(const SamplePath& path, double kappa);

}  // namespace pathwise
