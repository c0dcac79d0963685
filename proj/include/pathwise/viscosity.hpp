#pragma once

#include "pathwise/coefficients.hpp"
#include "pathwise/fields.hpp"
#include "pathwise/taylor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pathwise {

enum class JetSide { super, sub };
enum class SolutionSide { subsolution, supersolution };

const char* to_string(JetSide side);
const char* to_string(SolutionSide side);

struct JetVerdict {
    Jet jet;
    JetSide side = JetSide::super;
    /// max over the lattice of +R / (delta + |h|^2)^(1 + alpha) for super-jets and of -R / ... for sub-jets,
    /// where R = u(t - delta, x + h) - u(t, x) - T(jet)
    double ratio_max = 0.0;
    bool member = false;
    double alpha = 0.0;
};

/// (d_t u, d_x u, d_xx u, u) at (t, x, omega).
Jet canonical_jet(const RandomField& field, double t, const Vec& x, const SamplePath& path);

JetVerdict jet_membership(const RandomField& u, const CoefficientSuite& suite, double t, const Vec& x,
                          const SamplePath& path, const Jet& jet, JetSide side, double alpha,
                          const ScanLattice& lattice, double threshold);

struct JetCheck {
    JetVerdict verdict;
    double a_minus_f = 0.0;  ///< a - f(t, x, u(t, x), z, gamma)
    bool pass = false;       ///< inequality holds (only meaningful for members)
};

struct PointVerdict {
    SolutionSide side = SolutionSide::subsolution;
    bool pass = true;
    std::size_t skipped = 0;  ///< jets that failed membership and were not used
    std::vector<JetCheck> checks;
};

struct ViscosityOptions {
    double alpha = 0.25;
    double threshold = 0.05;
    double f_tolerance = 1e-9;
    ScanLattice lattice;
};

/// Subsolution: every member super-jet satisfies a - f <= tol. Supersolution: every member sub-jet
/// satisfies a - f >= -tol. Non-member jets are skipped and counted.
PointVerdict check_point(const RandomField& u, const CoefficientSuite& suite, double t, const Vec& x,
                         const SamplePath& path, const std::vector<Jet>& jets, SolutionSide side,
                         const ViscosityOptions& options);

struct ConsistencyRecord {
    std::uint64_t seed = 0;
    double t = 0.0;
    double x = 0.0;
    SolutionSide side = SolutionSide::subsolution;
    double a_minus_f = 0.0;
    double ratio_max = 0.0;
    bool member = false;
    bool pass = false;
};

struct ConsistencyReport {
    std::vector<ConsistencyRecord> records;
    double max_abs_a_minus_f = 0.0;
    double max_ratio = 0.0;
    bool subsolution_pass = true;
    bool supersolution_pass = true;
    /// largest a - f among failing subsolution checks and largest f - a among failing supersolution checks
    double sub_violation = 0.0;
    double super_violation = 0.0;
    bool pass() const { return subsolution_pass && supersolution_pass; }
};

struct ConsistencyPoint {
    double t;
    double x;
};

/// Canonical-jet check of a classical field on both sides at every (point, path). Paths are
/// processed in parallel; records come back in (path, point, side) order.
ConsistencyReport consistency_experiment(const RandomField& u, const CoefficientSuite& suite,
                                         const std::vector<ConsistencyPoint>& points,
                                         const std::vector<SamplePath>& paths, const ViscosityOptions& options,
                                         unsigned threads = 1);

}  // namespace pathwise
