#pragma once

#include "pathwise/coefficients.hpp"
#include "pathwise/fields.hpp"
#include "pathwise/paths.hpp"

#include <vector>

namespace pathwise {

/// Candidate values (a, z, gamma) of (d_t u, d_x u, d_xx u) at a point, plus the value slot y.
struct Jet {
    double a = 0.0;
    Vec z;
    Mat gamma;
    double y = 0.0;
};

enum class Pairing { product, matched };

/// Backward scan offsets (delta, h). `matched` pairs each delta with h = c sqrt(delta) * direction
/// for every multiplier c; `product` pairs each delta with every offset in `hs`.
struct ScanLattice {
    std::vector<double> deltas;
    Pairing pairing = Pairing::matched;
    std::vector<double> multipliers{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<Vec> hs;
    Vec direction;  ///< unit vector for matched offsets; defaults to e_1 when empty

    struct Point {
        double delta;
        Vec h;
    };
    std::vector<Point> points(std::size_t space_dim) const;

    /// deltas 2^-lo_exp, ..., 2^-hi_exp (lo_exp >= hi_exp), decreasing.
    static ScanLattice dyadic(int finest_exp, int coarsest_exp, Pairing pairing = Pairing::matched);
};

/// Second-order backward expansion of u from (t, x) to (t - delta, x + h) given g's blocks at
/// (t, x, y, z) and the path's second-level data over [t - delta, t].
///
/// Both the unreduced form and the form with the gamma dz terms gathered into one square are
/// evaluated; they must agree to 1e-10 (InternalError otherwise). gamma must be symmetric.
double taylor_operator(const GSuite& g, const Jet& jet, const SecondLevel& level, double delta, const Vec& h);

/// Where the time slot of the jet comes from in `expand`.
enum class JetSource {
    field_dt,       ///< a = d_t u, the generic expansion
    coefficient_f,  ///< a = f(t, x, u, d_x u, d_xx u), the candidate-solution form
};

double expand(const RandomField& field, const CoefficientSuite& suite, double t, const Vec& x, double delta,
              const Vec& h, const SamplePath& path, JetSource source = JetSource::field_dt);

/// u(t - delta, x + h) - expand(...)
double remainder(const RandomField& field, const CoefficientSuite& suite, double t, const Vec& x, double delta,
                 const Vec& h, const SamplePath& path, JetSource source = JetSource::field_dt);

struct RemainderSample {
    double delta = 0.0;
    double h_norm = 0.0;
    double remainder = 0.0;
    double scale = 0.0;  ///< delta + |h|^2
};

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t n_points = 0;
    std::vector<RemainderSample> samples;  ///< every lattice point, including excluded ones
};

/// Least-squares slope of log|R| against log(delta + |h|^2) over points with |R| > 1e-13.
/// Fewer than four usable points raise InsufficientDataError.
OrderFit order_estimate(const RandomField& field, const CoefficientSuite& suite, double t, const Vec& x,
                        const SamplePath& path, const ScanLattice& lattice, unsigned threads = 1,
                        JetSource source = JetSource::field_dt);

}  // namespace pathwise
