#include "pathwise/taylor.hpp"

#include "pathwise/errors.hpp"
#include "pathwise/parallel.hpp"

#include <cmath>

namespace pathwise {

namespace {

constexpr double kExactThreshold = 1e-13;

void check_jet(const GSuite& g, const Jet& jet, const SecondLevel& level, const Vec& h) {
    const auto d = level.increment.size();
    const auto dp = jet.z.size();
    if (jet.gamma.rows() != dp || jet.gamma.cols() != dp || h.size() != dp)
        throw ContractError("jet and offset dimensions disagree");
    if (g.value.size() != d || g.dz.rows() != dp || g.dz.cols() != d || g.dx.rows() != dp || g.dw.rows() != d)
        throw ContractError("g blocks do not match the jet and path dimensions");
    const double asym = (jet.gamma - jet.gamma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, jet.gamma.cwiseAbs().maxCoeff()))
        throw ContractError("jet Hessian slot is not symmetric");
}

}  // namespace

std::vector<ScanLattice::Point> ScanLattice::points(std::size_t space_dim) const {
    const auto dp = static_cast<Eigen::Index>(space_dim);
    std::vector<Point> out;
    if (pairing == Pairing::matched) {
        Vec dir = direction;
        if (dir.size() == 0) {
            dir = Vec::Zero(dp);
            dir(0) = 1.0;
        }
        if (dir.size() != dp) throw ContractError("lattice direction has the wrong dimension");
        for (double delta : deltas)
            for (double c : multipliers) out.push_back({delta, Vec(c * std::sqrt(delta) * dir)});
    } else {
        for (double delta : deltas)
            for (const Vec& h : hs) {
                if (h.size() != dp) throw ContractError("lattice offset has the wrong dimension");
                out.push_back({delta, h});
            }
    }
    return out;
}

ScanLattice ScanLattice::dyadic(int finest_exp, int coarsest_exp, Pairing pairing) {
    if (finest_exp < coarsest_exp) throw ParameterError("dyadic lattice needs finest_exp >= coarsest_exp");
    ScanLattice lat;
    lat.pairing = pairing;
    for (int e = coarsest_exp; e <= finest_exp; ++e) lat.deltas.push_back(std::ldexp(1.0, -e));
    return lat;
}

double taylor_operator(const GSuite& g, const Jet& jet, const SecondLevel& level, double delta, const Vec& h) {
    if (!(delta > 0.0)) throw ParameterError("taylor_operator needs delta > 0");
    check_jet(g, jet, level, h);
    const Vec& b = level.increment;
    // The Levy bracket is contracted with the transposed area. With dw(i, j) = d g_j / d omega^i, the
    // backward iterated integral multiplying dw(i, j) is int (B^i_t - B^i_r) o dB^j_r = I(j, i)
    // = (B B^T + A^T)(i, j) / 2.
    const Mat second = b * b.transpose() + level.levy.transpose();
    const Mat hb = h * b.transpose();

    const double first_order = -jet.a * delta + jet.z.dot(h) - g.value.dot(b);

    const Mat n_red = g.dx + jet.z * g.dy.transpose();
    const Mat m_red = g.dw + g.value * g.dy.transpose() + n_red.transpose() * g.dz;
    const Mat n_full = n_red + jet.gamma * g.dz;
    const Mat m_full = g.dw + g.value * g.dy.transpose() + n_full.transpose() * g.dz;

    const double unreduced = first_order + 0.5 * h.dot(jet.gamma * h) + 0.5 * contract(m_full, second) -
                             contract(n_full, hb);
    const Vec shifted = h - g.dz * b;
    // Completing the square absorbs (gamma dz)^T dz : B B^T; a symmetric part of the area (zero for genuine
    // path data) is not absorbed and is carried separately.
    const Mat levy_sym = 0.5 * (level.levy + level.levy.transpose());
    const double reduced = first_order + 0.5 * shifted.dot(jet.gamma * shifted) + 0.5 * contract(m_red, second) -
                           contract(n_red, hb) + 0.5 * contract(Mat(g.dz.transpose() * jet.gamma * g.dz), levy_sym);

    const double scale = std::max({1.0, std::abs(unreduced), std::abs(reduced)});
    if (std::abs(unreduced - reduced) > 1e-10 * scale)
        throw InternalError("reduced and unreduced expansion forms disagree");
    return unreduced;
}

namespace {

struct Anchor {
    DerivativeSuite suite;
    Jet jet;
    GSuite g;
};

Anchor anchor(const RandomField& field, const CoefficientSuite& suite, double t, const Vec& x,
              const SamplePath& path, JetSource source) {
    if (!field.has_suite()) throw ContractError("expansion needs a field with a derivative suite");
    Anchor out;
    out.suite = field.suite(t, x, path);
    out.jet.y = out.suite.value;
    out.jet.z = out.suite.dx;
    out.jet.gamma = out.suite.dxx;
    out.jet.a = source == JetSource::field_dt
                    ? out.suite.dt
                    : suite.f.eval(t, x, path, out.suite.value, out.suite.dx, out.suite.dxx);
    out.g = suite.g(t, x, path, out.suite.value, out.suite.dx);
    return out;
}

double expand_from(const Anchor& a, const SamplePath& path, double t, double delta, const Vec& h) {
    if (delta > t * (1.0 + 1e-12)) throw DomainError("expansion needs delta <= t");
    const SecondLevel level = second_level(path, t - delta, t);
    return a.jet.y + taylor_operator(a.g, a.jet, level, delta, h);
}

}  // namespace

double expand(const RandomField& field, const CoefficientSuite& suite, double t, const Vec& x, double delta,
              const Vec& h, const SamplePath& path, JetSource source) {
    return expand_from(anchor(field, suite, t, x, path, source), path, t, delta, h);
}

double remainder(const RandomField& field, const CoefficientSuite& suite, double t, const Vec& x, double delta,
                 const Vec& h, const SamplePath& path, JetSource source) {
    const double predicted = expand(field, suite, t, x, delta, h, path, source);
    return field(t - delta, Vec(x + h), path) - predicted;
}

OrderFit order_estimate(const RandomField& field, const CoefficientSuite& suite, double t, const Vec& x,
                        const SamplePath& path, const ScanLattice& lattice, unsigned threads, JetSource source) {
    const auto pts = lattice.points(field.space_dim());
    if (pts.empty()) throw ParameterError("order estimate needs a nonempty lattice");
    const Anchor a = anchor(field, suite, t, x, path, source);

    OrderFit fit;
    fit.samples.resize(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        const auto& p = pts[i];
        const double predicted = expand_from(a, path, t, p.delta, p.h);
        RemainderSample s;
        s.delta = p.delta;
        s.h_norm = p.h.norm();
        s.remainder = field(t - p.delta, Vec(x + p.h), path) - predicted;
        s.scale = p.delta + p.h.squaredNorm();
        fit.samples[i] = s;
    });

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const auto& s : fit.samples) {
        if (std::abs(s.remainder) <= kExactThreshold) continue;
        const double lx = std::log(s.scale);
        const double ly = std::log(std::abs(s.remainder));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    fit.n_points = n;
    if (n < 4)
        throw InsufficientDataError("only " + std::to_string(n) + " lattice points have a remainder above 1e-13");
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    if (denom <= 0.0) throw InsufficientDataError("lattice scales are degenerate; cannot fit a slope");
    fit.slope = (nn * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / nn;
    return fit;
}

}  // namespace pathwise
