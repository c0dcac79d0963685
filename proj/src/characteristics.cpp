#include "pathwise/characteristics.hpp"

#include "pathwise/errors.hpp"
#include "pathwise/parallel.hpp"
#include "pathwise/quadrature.hpp"
#include "pathwise/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pathwise {

namespace {

constexpr std::size_t kLambdaNodes = 16;

void require_scalar(const CoefficientSuite& suite, const SamplePath& path) {
    if (suite.noise_dim != 1 || suite.space_dim != 1 || path.dimension() != 1)
        throw ParameterError("characteristics are implemented for d = d' = 1 only");
}

std::vector<double> path_times(const SamplePath& path) {
    std::vector<double> t(path.steps() + 1);
    for (std::size_t k = 0; k <= path.steps(); ++k) t[k] = path.time(k);
    return t;
}

// Linear interpolation of row k of a table over a uniform x grid, constant beyond the ends.
double interp_row(const Table& table, const std::vector<double>& xs, std::size_t k, double x, bool* clamped = nullptr) {
    const std::size_t n = xs.size();
    if (x <= xs.front() || x >= xs.back()) {
        if (clamped != nullptr && (x < xs.front() || x > xs.back())) *clamped = true;
        return x <= xs.front() ? table(k, 0) : table(k, n - 1);
    }
    const double step = xs[1] - xs[0];
    const double pos = (x - xs.front()) / step;
    const auto j = std::min(static_cast<std::size_t>(pos), n - 2);
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * table(k, j) + w * table(k, j + 1);
}

// d/dx of each row by central differences, one-sided at the two ends.
Table x_derivative(const Table& table, const std::vector<double>& xs) {
    const double h = xs[1] - xs[0];
    const std::size_t n = xs.size();
    Table out(table.nt, n);
    for (std::size_t k = 0; k < table.nt; ++k) {
        out(k, 0) = (table(k, 1) - table(k, 0)) / h;
        out(k, n - 1) = (table(k, n - 1) - table(k, n - 2)) / h;
        for (std::size_t j = 1; j + 1 < n; ++j) out(k, j) = (table(k, j + 1) - table(k, j - 1)) / (2.0 * h);
    }
    return out;
}

std::size_t time_index(const std::vector<double>& times, double t) {
    const double step = times.size() > 1 ? times[1] - times[0] : 1.0;
    const double pos = t / step;
    const double k = std::round(pos);
    if (k < 0.0 || k >= static_cast<double>(times.size()) || std::abs(pos - k) > 1e-9 * std::max(1.0, k))
        throw DomainError("time " + std::to_string(t) + " is not a node of the characteristics grid");
    return static_cast<std::size_t>(k);
}

}  // namespace

std::vector<double> XGrid::nodes() const {
    if (n < 3 || !(hi > lo)) throw ParameterError("x grid needs n >= 3 and lo < hi");
    std::vector<double> xs(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) xs[j] = lo + static_cast<double>(j) * h;
    return xs;
}

FrozenLinearCoefficients linearize(const CoefficientSuite& suite, const RandomField& u, const RandomField& v,
                                   const SamplePath& path, const XGrid& grid, unsigned threads) {
    require_scalar(suite, path);
    if (!u.has_suite() || !v.has_suite()) throw ContractError("linearize needs both fields with derivative suites");
    FrozenLinearCoefficients out;
    out.times = path_times(path);
    out.xs = grid.nodes();
    const std::size_t nt = out.times.size();
    const std::size_t nx = out.xs.size();
    for (Table* t : {&out.Fy, &out.Fz, &out.Fgamma, &out.gy, &out.gz, &out.psi}) *t = Table(nt, nx);
    const QuadratureRule rule = gauss_legendre_unit(kLambdaNodes);

    parallel_for(nt, threads, [&](std::size_t k) {
        const double t = out.times[k];
        for (std::size_t j = 0; j < nx; ++j) {
            const Vec x = scalar_vec(out.xs[j]);
            const DerivativeSuite su = u.suite(t, x, path);
            const DerivativeSuite sv = v.suite(t, x, path);
            const double w = su.value - sv.value;
            const double wx = su.dx(0) - sv.dx(0);
            const double wxx = su.dxx(0, 0) - sv.dxx(0, 0);
            const bool flat = w == 0.0 && wx == 0.0 && wxx == 0.0;
            const std::size_t nodes = flat ? 1 : rule.nodes.size();
            double fy = 0, fz = 0, fg = 0, gy = 0, gz = 0;
            for (std::size_t q = 0; q < nodes; ++q) {
                const double lam = flat ? 0.0 : rule.nodes[q];
                const double wt = flat ? 1.0 : rule.weights[q];
                const CoeffPoint p{t, x, sv.value + lam * w, scalar_vec(sv.dx(0) + lam * wx),
                                   scalar_mat(sv.dxx(0, 0) + lam * wxx)};
                const DriftDerivatives dd = drift_derivatives(suite, path, p);
                const GSuite g = suite.g(t, x, path, p.y, p.z);
                fy += wt * dd.dy;
                fz += wt * dd.dz(0);
                fg += wt * dd.dgamma(0, 0);
                gy += wt * g.dy(0);
                gz += wt * g.dz(0, 0);
            }
            out.Fy(k, j) = fy;
            out.Fz(k, j) = fz;
            out.Fgamma(k, j) = fg;
            out.gy(k, j) = gy;
            out.gz(k, j) = gz;
            const double lu = su.dt - suite.f.eval(t, x, path, su.value, su.dx, su.dxx);
            const double lv = sv.dt - suite.f.eval(t, x, path, sv.value, sv.dx, sv.dxx);
            out.psi(k, j) = lu - lv;
        }
    });
    return out;
}

double CharacteristicsBundle::zeta(std::size_t k, double y) const {
    const std::size_t n = xs.size();
    if (y < theta(k, 0) || y > theta(k, n - 1))
        throw DomainError("point " + std::to_string(y) + " lies outside the range of the characteristics");
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (theta(k, mid) <= y ? lo : hi) = mid;
    }
    const double span = theta(k, hi) - theta(k, lo);
    const double w = span > 0.0 ? (y - theta(k, lo)) / span : 0.0;
    return xs[lo] + w * (xs[hi] - xs[lo]);
}

double CharacteristicsBundle::weight(std::size_t k, double x) const { return interp_row(M, xs, k, x); }

CharacteristicsBundle solve_characteristics(const FrozenLinearCoefficients& coeffs, const SamplePath& path) {
    if (coeffs.times.size() != path.steps() + 1) throw ContractError("coefficient tables do not match the path grid");
    CharacteristicsBundle b;
    b.times = coeffs.times;
    b.xs = coeffs.xs;
    const std::size_t nt = b.times.size();
    const std::size_t nx = b.xs.size();
    b.theta = Table(nt, nx);
    b.M = Table(nt, nx, 1.0);
    b.dtheta = Table(nt, nx, 1.0);
    const Table dgz = x_derivative(coeffs.gz, coeffs.xs);
    const double dt = path.step();
    for (std::size_t j = 0; j < nx; ++j) b.theta(0, j) = b.xs[j];

    for (std::size_t k = 0; k + 1 < nt; ++k) {
        const double db = path.increment(k, 0);
        for (std::size_t j = 0; j < nx; ++j) {
            const double th = b.theta(k, j);
            const double gz = interp_row(coeffs.gz, coeffs.xs, k, th);
            const double gy = interp_row(coeffs.gy, coeffs.xs, k, th);
            const double gzx = interp_row(dgz, coeffs.xs, k, th);
            b.theta(k + 1, j) = th - gz * db;
            b.M(k + 1, j) = b.M(k, j) * std::exp(gy * db - 0.5 * gy * gy * dt);
            b.dtheta(k + 1, j) = b.dtheta(k, j) * std::exp(-gzx * db - 0.5 * gzx * gzx * dt);
            if (!std::isfinite(b.theta(k + 1, j)) || !(b.dtheta(k + 1, j) > 0.0) || !(b.M(k + 1, j) > 0.0))
                throw NumericalError("characteristics lost positivity at step " + std::to_string(k + 1) +
                                     ", start point " + std::to_string(b.xs[j]));
        }
        for (std::size_t j = 1; j < nx; ++j)
            if (!(b.theta(k + 1, j) > b.theta(k + 1, j - 1)))
                throw NumericalError("characteristics crossed at step " + std::to_string(k + 1));
    }
    return b;
}

ReducedCoefficients reduced_coefficients(const FrozenLinearCoefficients& coeffs, const CharacteristicsBundle& bundle) {
    const std::size_t nt = bundle.times.size();
    const std::size_t nx = bundle.xs.size();
    ReducedCoefficients r;
    r.times = bundle.times;
    r.xs = bundle.xs;
    r.a = Table(nt, nx);
    r.b = Table(nt, nx);
    r.c = Table(nt, nx);
    r.psi = Table(nt, nx);
    const Table dgz = x_derivative(coeffs.gz, coeffs.xs);
    const Table dgy = x_derivative(coeffs.gy, coeffs.xs);
    const Table dM = x_derivative(bundle.M, bundle.xs);
    const Table ddM = x_derivative(dM, bundle.xs);
    const Table ddtheta = x_derivative(bundle.dtheta, bundle.xs);

    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t j = 0; j < nx; ++j) {
            const double th = bundle.theta(k, j);
            const auto at = [&](const Table& t) { return interp_row(t, coeffs.xs, k, th); };
            const double gz = at(coeffs.gz);
            const double gy = at(coeffs.gy);
            const double a_hat = at(coeffs.Fgamma) - 0.5 * gz * gz;
            const double b_hat = at(coeffs.Fz) - at(dgz) * gz - gy * gz;
            const double c_hat = at(coeffs.Fy) - at(dgy) * gz;

            const double m = bundle.M(k, j);
            const double m1 = dM(k, j) / m;
            const double m2 = ddM(k, j) / m;
            const double q = bundle.dtheta(k, j);
            const double q1 = ddtheta(k, j);

            const double a = a_hat / (q * q);
            if (a < -1e-10)
                throw NumericalError("reduced diffusion coefficient is negative (" + std::to_string(a) + ") at t = " +
                                     std::to_string(bundle.times[k]) + ", x = " + std::to_string(bundle.xs[j]));
            r.a(k, j) = a;
            r.b(k, j) = 2.0 * m1 * a - a_hat * q1 / (q * q * q) + b_hat / q;
            r.c(k, j) = m2 * a - m1 * a_hat * q1 / (q * q * q) + m1 * b_hat / q + c_hat;
            r.psi(k, j) = at(coeffs.psi) / m;
        }
    }
    return r;
}

namespace {

struct Bilinear {
    const ReducedCoefficients& r;
    double dt;

    // Values of (a, b, c, psi) at (s, x), clamped to the table box.
    void operator()(double s, double x, double out[4], bool& clamped) const {
        const std::size_t nt = r.times.size();
        double pos = std::clamp(s / dt, 0.0, static_cast<double>(nt - 1));
        const auto k = std::min(static_cast<std::size_t>(pos), nt > 1 ? nt - 2 : 0);
        const double w = nt > 1 ? pos - static_cast<double>(k) : 0.0;
        const std::size_t k1 = std::min(k + 1, nt - 1);
        const Table* tabs[4] = {&r.a, &r.b, &r.c, &r.psi};
        for (int i = 0; i < 4; ++i)
            out[i] = (1.0 - w) * interp_row(*tabs[i], r.xs, k, x, &clamped) +
                     w * interp_row(*tabs[i], r.xs, k1, x, &clamped);
    }
};

}  // namespace

FKEstimate feynman_kac(const ReducedCoefficients& reduced, const std::function<double(double)>& v0, double t,
                       double x, const MonteCarloOptions& options) {
    if (options.samples < 2 || options.inner_steps < 1) throw ParameterError("Monte Carlo needs n >= 2 and m >= 1");
    if (t < 0.0 || t > reduced.times.back() * (1.0 + 1e-12))
        throw DomainError("Feynman-Kac time outside the tabulated horizon");
    const double table_dt = reduced.times.size() > 1 ? reduced.times[1] - reduced.times[0] : 1.0;
    const Bilinear coeff{reduced, table_dt};
    const double dr = t / static_cast<double>(options.inner_steps);
    const double sqrt_dr = std::sqrt(dr);

    std::vector<double> values(options.samples);
    std::vector<std::size_t> clamps(options.samples, 0);
    parallel_for(options.samples, options.threads, [&](std::size_t i) {
        Stream stream(options.seed, "fk", i);
        double X = x;
        double log_gamma = 0.0;
        double source = 0.0;
        for (std::size_t m = 0; m < options.inner_steps; ++m) {
            const double s = t - static_cast<double>(m) * dr;
            double c[4];
            bool clamped = false;
            coeff(s, X, c, clamped);
            if (clamped) ++clamps[i];
            if (c[0] < -1e-10) throw NumericalError("negative reduced diffusion met by the inner diffusion");
            source += std::exp(log_gamma) * c[3] * dr;
            log_gamma += c[2] * dr;
            X += std::sqrt(2.0 * std::max(c[0], 0.0)) * sqrt_dr * stream.normal() + c[1] * dr;
        }
        values[i] = std::exp(log_gamma) * v0(X) + source;
    });

    FKEstimate est;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double n = static_cast<double>(options.samples);
    est.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.standard_error = std::sqrt(ss / (n - 1.0) / n);
    for (std::size_t c : clamps) est.clamp_events += c;
    return est;
}

double reconstruct(double v_at_zeta, const CharacteristicsBundle& bundle, double t, double x) {
    const std::size_t k = time_index(bundle.times, t);
    return bundle.weight(k, bundle.zeta(k, x)) * v_at_zeta;
}

std::vector<PipelinePoint> solve_linear_spde(const CoefficientSuite& suite, const RandomField& u,
                                             const RandomField& v, const std::function<double(double)>& w0,
                                             const SamplePath& path, const XGrid& grid, double t,
                                             const std::vector<double>& xs, const MonteCarloOptions& options) {
    const FrozenLinearCoefficients coeffs = linearize(suite, u, v, path, grid, options.threads);
    const CharacteristicsBundle bundle = solve_characteristics(coeffs, path);
    const ReducedCoefficients reduced = reduced_coefficients(coeffs, bundle);
    const std::size_t k = time_index(bundle.times, t);
    std::vector<PipelinePoint> out;
    out.reserve(xs.size());
    for (double x : xs) {
        PipelinePoint p;
        p.x = x;
        p.zeta = bundle.zeta(k, x);
        p.v = feynman_kac(reduced, w0, t, p.zeta, options);
        p.w = reconstruct(p.v.mean, bundle, t, x);
        out.push_back(p);
    }
    return out;
}

ComparisonReport classical_comparison_experiment(const CoefficientSuite& suite, const InitialData& u0,
                                                 const InitialData& v0, const SamplePath& path, const FDGrid& grid) {
    ComparisonReport report;
    for (std::size_t j = 0; j < grid.nx; ++j) {
        const double x = grid.x(j);
        if (u0(x) > v0(x)) {
            report.precondition_met = false;
            report.diagnostic = "initial data cross at x = " + std::to_string(x) + ": u0 - v0 = " +
                                std::to_string(u0(x) - v0(x));
            return report;
        }
    }
    const FDSolution su = solve_fd_stratonovich(suite, u0, grid, path);
    const FDSolution sv = solve_fd_stratonovich(suite, v0, grid, path);
    report.min_difference = sv.samples.values[0] - su.samples.values[0];
    for (std::size_t n = 0; n < su.samples.values.size(); ++n)
        report.min_difference = std::min(report.min_difference, sv.samples.values[n] - su.samples.values[n]);
    report.pass = report.min_difference >= -1e-6;
    return report;
}

}  // namespace pathwise
