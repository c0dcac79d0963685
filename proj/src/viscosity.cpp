#include "pathwise/viscosity.hpp"

#include "pathwise/errors.hpp"
#include "pathwise/parallel.hpp"

#include <cmath>
#include <limits>

namespace pathwise {

const char* to_string(JetSide side) { return side == JetSide::super ? "super" : "sub"; }
const char* to_string(SolutionSide side) { return side == SolutionSide::subsolution ? "sub" : "super"; }

Jet canonical_jet(const RandomField& field, double t, const Vec& x, const SamplePath& path) {
    if (!field.has_suite()) throw ContractError("canonical jet needs a field with a derivative suite");
    const DerivativeSuite s = field.suite(t, x, path);
    return Jet{s.dt, s.dx, s.dxx, s.value};
}

JetVerdict jet_membership(const RandomField& u, const CoefficientSuite& suite, double t, const Vec& x,
                          const SamplePath& path, const Jet& jet, JetSide side, double alpha,
                          const ScanLattice& lattice, double threshold) {
    const auto pts = lattice.points(u.space_dim());
    if (pts.empty()) throw ParameterError("jet membership needs a nonempty lattice");
    const double value = u(t, x, path);
    Jet anchored = jet;
    anchored.y = value;
    const GSuite g = suite.g(t, x, path, value, jet.z);
    const double sign = side == JetSide::super ? 1.0 : -1.0;

    JetVerdict out;
    out.jet = anchored;
    out.side = side;
    out.alpha = alpha;
    out.ratio_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        if (p.delta > t * (1.0 + 1e-12)) throw DomainError("lattice delta exceeds the anchor time");
        const SecondLevel level = second_level(path, t - p.delta, t);
        const double r = u(t - p.delta, Vec(x + p.h), path) - value - taylor_operator(g, anchored, level, p.delta, p.h);
        const double ratio = sign * r / std::pow(p.delta + p.h.squaredNorm(), 1.0 + alpha);
        out.ratio_max = std::max(out.ratio_max, ratio);
    }
    out.member = out.ratio_max <= threshold;
    return out;
}

PointVerdict check_point(const RandomField& u, const CoefficientSuite& suite, double t, const Vec& x,
                         const SamplePath& path, const std::vector<Jet>& jets, SolutionSide side,
                         const ViscosityOptions& options) {
    const JetSide jet_side = side == SolutionSide::subsolution ? JetSide::super : JetSide::sub;
    PointVerdict out;
    out.side = side;
    const double value = u(t, x, path);
    for (const Jet& jet : jets) {
        JetCheck c;
        c.verdict = jet_membership(u, suite, t, x, path, jet, jet_side, options.alpha, options.lattice,
                                   options.threshold);
        c.a_minus_f = jet.a - suite.f.eval(t, x, path, value, jet.z, jet.gamma);
        c.pass = side == SolutionSide::subsolution ? c.a_minus_f <= options.f_tolerance
                                                   : c.a_minus_f >= -options.f_tolerance;
        if (!c.verdict.member) {
            ++out.skipped;
        } else if (!c.pass) {
            out.pass = false;
        }
        out.checks.push_back(std::move(c));
    }
    return out;
}

ConsistencyReport consistency_experiment(const RandomField& u, const CoefficientSuite& suite,
                                         const std::vector<ConsistencyPoint>& points,
                                         const std::vector<SamplePath>& paths, const ViscosityOptions& options,
                                         unsigned threads) {
    const std::size_t per_path = points.size() * 2;
    std::vector<ConsistencyRecord> records(paths.size() * per_path);
    parallel_for(paths.size(), threads, [&](std::size_t pi) {
        const SamplePath& path = paths[pi];
        for (std::size_t k = 0; k < points.size(); ++k) {
            const Vec x = scalar_vec(points[k].x);
            const Jet jet = canonical_jet(u, points[k].t, x, path);
            for (int s = 0; s < 2; ++s) {
                const SolutionSide side = s == 0 ? SolutionSide::subsolution : SolutionSide::supersolution;
                const PointVerdict v = check_point(u, suite, points[k].t, x, path, {jet}, side, options);
                const JetCheck& c = v.checks.front();
                ConsistencyRecord r;
                r.seed = path.seed();
                r.t = points[k].t;
                r.x = points[k].x;
                r.side = side;
                r.a_minus_f = c.a_minus_f;
                r.ratio_max = c.verdict.ratio_max;
                r.member = c.verdict.member;
                r.pass = c.verdict.member && c.pass;
                records[pi * per_path + 2 * k + static_cast<std::size_t>(s)] = r;
            }
        }
    });

    ConsistencyReport report;
    for (const auto& r : records) {
        report.max_abs_a_minus_f = std::max(report.max_abs_a_minus_f, std::abs(r.a_minus_f));
        report.max_ratio = std::max(report.max_ratio, r.ratio_max);
        if (r.pass) continue;
        if (r.side == SolutionSide::subsolution) {
            report.subsolution_pass = false;
            report.sub_violation = std::max(report.sub_violation, r.a_minus_f);
        } else {
            report.supersolution_pass = false;
            report.super_violation = std::max(report.super_violation, -r.a_minus_f);
        }
    }
    report.records = std::move(records);
    return report;
}

}  // namespace pathwise
