#include "pathwise/coefficients.hpp"

#include "pathwise/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

namespace pathwise {

namespace {

constexpr double kGStep = 1e-5;

void check_gsuite(const GSuite& g, std::size_t d, std::size_t dp) {
    const auto di = static_cast<Eigen::Index>(d);
    const auto dpi = static_cast<Eigen::Index>(dp);
    if (g.value.size() != di || g.dw.rows() != di || g.dw.cols() != di || g.dx.rows() != dpi ||
        g.dx.cols() != di || g.dy.size() != di || g.dz.rows() != dpi || g.dz.cols() != di)
        throw ContractError("g suite blocks do not match dims (d, d')");
}

void check_point(const CoefficientSuite& suite, const CoeffPoint& p) {
    const auto dp = static_cast<Eigen::Index>(suite.space_dim);
    if (p.x.size() != dp || p.z.size() != dp || p.gamma.rows() != dp || p.gamma.cols() != dp)
        throw ContractError("coefficient point does not match the space dimension");
}

}  // namespace

GFunction finite_difference_g(GBlackBox g, std::size_t noise_dim, std::size_t space_dim) {
    if (!g) throw ContractError("black-box g is empty");
    auto fn = std::make_shared<const GBlackBox>(std::move(g));
    return [fn, noise_dim, space_dim](double t, const Vec& x, const SamplePath& path, double y, const Vec& z) {
        const auto d = static_cast<Eigen::Index>(noise_dim);
        const auto dp = static_cast<Eigen::Index>(space_dim);
        const Vec b = path.value_at(t);
        const auto& gf = *fn;
        GSuite s;
        s.value = gf(t, x, b, y, z);
        if (s.value.size() != d) throw ContractError("black-box g returned the wrong number of components");
        s.dw.resize(d, d);
        s.dx.resize(dp, d);
        s.dz.resize(dp, d);
        const double h = kGStep;
        for (Eigen::Index i = 0; i < d; ++i) {
            Vec bp = b, bm = b;
            bp(i) += h;
            bm(i) -= h;
            s.dw.row(i) = ((gf(t, x, bp, y, z) - gf(t, x, bm, y, z)) / (2 * h)).transpose();
        }
        for (Eigen::Index i = 0; i < dp; ++i) {
            Vec xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            s.dx.row(i) = ((gf(t, xp, b, y, z) - gf(t, xm, b, y, z)) / (2 * h)).transpose();
            Vec zp = z, zm = z;
            zp(i) += h;
            zm(i) -= h;
            s.dz.row(i) = ((gf(t, x, b, y, zp) - gf(t, x, b, y, zm)) / (2 * h)).transpose();
        }
        s.dy = (gf(t, x, b, y + h, z) - gf(t, x, b, y - h, z)) / (2 * h);
        return s;
    };
}

double ito_drift(const CoefficientSuite& suite, const SamplePath& path, const CoeffPoint& p) {
    check_point(suite, p);
    const double f = suite.f.eval(p.t, p.x, path, p.y, p.z, p.gamma);
    const GSuite g = suite.g(p.t, p.x, path, p.y, p.z);
    check_gsuite(g, suite.noise_dim, suite.space_dim);
    const Mat spatial = g.dx + p.z * g.dy.transpose() + p.gamma * g.dz;
    const Mat m = g.dw + g.value * g.dy.transpose() + spatial.transpose() * g.dz;
    return f + 0.5 * m.trace();
}

ParabolicityReport parabolicity_check(const CoefficientSuite& suite, const SamplePath& path,
                                      const std::vector<CoeffPoint>& lattice, double agreement) {
    if (lattice.empty()) throw ParameterError("parabolicity check needs a nonempty lattice");
    const auto dp = static_cast<Eigen::Index>(suite.space_dim);
    ParabolicityReport report;
    report.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const CoeffPoint& p : lattice) {
        check_point(suite, p);
        Mat direct = suite.f.dgamma(p.t, p.x, path, p.y, p.z, p.gamma);
        if (direct.rows() != dp || direct.cols() != dp) throw ContractError("d_gamma f has the wrong shape");
        const GSuite g = suite.g(p.t, p.x, path, p.y, p.z);
        check_gsuite(g, suite.noise_dim, suite.space_dim);

        const Mat subtraction = drift_derivatives(suite, path, p).dgamma - 0.5 * g.dz * g.dz.transpose();
        report.discrepancy = std::max(report.discrepancy, (subtraction - direct).cwiseAbs().maxCoeff());

        const Mat sym = 0.5 * (direct + direct.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success) throw InternalError("eigen-solver failed on a symmetric d_gamma f");
        report.min_eigenvalue = std::min(report.min_eigenvalue, eig.eigenvalues().minCoeff());
    }
    if (report.discrepancy > agreement)
        throw InternalError("direct and subtraction forms of d_gamma f disagree by " +
                            std::to_string(report.discrepancy));
    report.parabolic = report.min_eigenvalue >= -1e-12;
    return report;
}

DriftDerivatives drift_derivatives(const CoefficientSuite& suite, const SamplePath& path, const CoeffPoint& p) {
    const double h = kGStep;
    const auto dp = static_cast<Eigen::Index>(suite.space_dim);
    DriftDerivatives out;
    CoeffPoint q = p;
    q.y = p.y + h;
    const double fy_p = ito_drift(suite, path, q);
    q.y = p.y - h;
    out.dy = (fy_p - ito_drift(suite, path, q)) / (2 * h);
    q.y = p.y;

    out.dz.resize(dp);
    for (Eigen::Index i = 0; i < dp; ++i) {
        q.z = p.z;
        q.z(i) += h;
        const double plus = ito_drift(suite, path, q);
        q.z(i) -= 2 * h;
        out.dz(i) = (plus - ito_drift(suite, path, q)) / (2 * h);
    }
    q.z = p.z;

    // Symmetric perturbation: moving gamma_ij and gamma_ji together measures twice the symmetric entry.
    out.dgamma.resize(dp, dp);
    for (Eigen::Index i = 0; i < dp; ++i) {
        for (Eigen::Index j = i; j < dp; ++j) {
            q.gamma = p.gamma;
            q.gamma(i, j) += h;
            if (i != j) q.gamma(j, i) += h;
            const double plus = ito_drift(suite, path, q);
            q.gamma = p.gamma;
            q.gamma(i, j) -= h;
            if (i != j) q.gamma(j, i) -= h;
            const double minus = ito_drift(suite, path, q);
            const double entry = (plus - minus) / (i == j ? 2 * h : 4 * h);
            out.dgamma(i, j) = entry;
            out.dgamma(j, i) = entry;
        }
    }
    return out;
}

double integrated_rate(const Rate& lambda, double t, double step) {
    if (!(step > 0.0)) throw ParameterError("rate quadrature step must be positive");
    if (t <= 0.0) return 0.0;
    const auto full = static_cast<std::size_t>(std::floor(t / step + 1e-9));
    double eta = 0.0;
    double prev = lambda(0.0);
    for (std::size_t k = 0; k < full; ++k) {
        const double next = lambda(static_cast<double>(k + 1) * step);
        eta += 0.5 * (prev + next) * step;
        prev = next;
    }
    const double tail = t - static_cast<double>(full) * step;
    if (tail > 0.0) eta += 0.5 * (prev + lambda(t)) * tail;
    return eta;
}

namespace {

// Node values of integrated_rate on the current path grid, built once per grid and shared between
// threads. The running sum is accumulated in the same order as integrated_rate, so results agree bitwise.
class RateIntegral {
public:
    explicit RateIntegral(Rate rate) : rate_(std::move(rate)) {}

    double operator()(double t) const { return rate_(t); }

    double eta(double t, const SamplePath& path) const {
        const double step = path.step();
        if (!(step > 0.0)) throw ParameterError("rate quadrature step must be positive");
        if (t <= 0.0) return 0.0;
        const auto full = static_cast<std::size_t>(std::floor(t / step + 1e-9));
        const auto table = nodes(step, std::max(full, path.steps()));
        const double tail = t - static_cast<double>(full) * step;
        double eta = (*table)[full];
        if (tail > 0.0) eta += 0.5 * (rate_(static_cast<double>(full) * step) + rate_(t)) * tail;
        return eta;
    }

private:
    using Table = std::vector<double>;

    std::shared_ptr<const Table> nodes(double step, std::size_t count) const {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!table_ || step_ != step || table_->size() <= count) {
            auto t = std::make_shared<Table>(count + 1);
            double eta = 0.0;
            double prev = rate_(0.0);
            (*t)[0] = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                const double next = rate_(static_cast<double>(k + 1) * step);
                eta += 0.5 * (prev + next) * step;
                prev = next;
                (*t)[k + 1] = eta;
            }
            table_ = std::move(t);
            step_ = step;
        }
        return table_;
    }

    Rate rate_;
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const Table> table_;
    mutable double step_ = 0.0;
};

}  // namespace

CoefficientSuite change_of_variable(const CoefficientSuite& suite, Rate lambda) {
    if (!lambda) throw ContractError("change of variable needs a rate function");
    auto rate = std::make_shared<const RateIntegral>(std::move(lambda));
    auto base = std::make_shared<const CoefficientSuite>(suite);
    CoefficientSuite out;
    out.noise_dim = suite.noise_dim;
    out.space_dim = suite.space_dim;
    out.f.eval = [rate, base](double t, const Vec& x, const SamplePath& path, double y, const Vec& z,
                              const Mat& gamma) {
        const double eta = rate->eta(t, path);
        const double shrink = std::exp(-eta);
        return (*rate)(t) * y + std::exp(eta) * base->f.eval(t, x, path, shrink * y, shrink * z, shrink * gamma);
    };
    out.f.dgamma = [rate, base](double t, const Vec& x, const SamplePath& path, double y, const Vec& z,
                                const Mat& gamma) {
        const double shrink = std::exp(-rate->eta(t, path));
        return Mat(base->f.dgamma(t, x, path, shrink * y, shrink * z, shrink * gamma));
    };
    out.g = [rate, base](double t, const Vec& x, const SamplePath& path, double y, const Vec& z) {
        const double eta = rate->eta(t, path);
        const double grow = std::exp(eta);
        const double shrink = std::exp(-eta);
        GSuite g = base->g(t, x, path, shrink * y, shrink * z);
        g.value *= grow;
        g.dw *= grow;
        g.dx *= grow;
        return g;
    };
    return out;
}

RandomField transform_field(const RandomField& u, Rate lambda) {
    if (!u.has_suite()) throw ContractError("transform_field needs a field with a derivative suite");
    if (!lambda) throw ContractError("transform_field needs a rate function");
    auto rate = std::make_shared<const RateIntegral>(std::move(lambda));
    auto base = std::make_shared<const RandomField>(u);
    auto eval = [rate, base](double t, const Vec& x, const SamplePath& path) {
        return std::exp(rate->eta(t, path)) * (*base)(t, x, path);
    };
    auto suite = [rate, base](double t, const Vec& x, const SamplePath& path) {
        const double grow = std::exp(rate->eta(t, path));
        DerivativeSuite s = base->suite(t, x, path);
        s.value *= grow;
        s.dt = (*rate)(t) * s.value + grow * s.dt;
        s.dx *= grow;
        s.dxx *= grow;
        s.dw *= grow;
        s.dxw *= grow;
        s.dww *= grow;
        return s;
    };
    return RandomField(u.noise_dim(), u.space_dim(), FieldKind::composite, std::move(eval), std::move(suite));
}

CoefficientSuite shifted_coefficients(const CoefficientSuite& suite, const RandomField& v) {
    if (!v.has_suite()) throw ContractError("shifted coefficients need a field with a derivative suite");
    if (v.noise_dim() != suite.noise_dim || v.space_dim() != suite.space_dim)
        throw ContractError("shift field dimensions do not match the coefficients");
    auto base = std::make_shared<const CoefficientSuite>(suite);
    auto field = std::make_shared<const RandomField>(v);
    CoefficientSuite out;
    out.noise_dim = suite.noise_dim;
    out.space_dim = suite.space_dim;
    out.f.eval = [base, field](double t, const Vec& x, const SamplePath& path, double y, const Vec& z,
                               const Mat& gamma) {
        const DerivativeSuite s = field->suite(t, x, path);
        return base->f.eval(t, x, path, s.value + y, s.dx + z, s.dxx + gamma) -
               base->f.eval(t, x, path, s.value, s.dx, s.dxx);
    };
    out.f.dgamma = [base, field](double t, const Vec& x, const SamplePath& path, double y, const Vec& z,
                                 const Mat& gamma) {
        const DerivativeSuite s = field->suite(t, x, path);
        return Mat(base->f.dgamma(t, x, path, s.value + y, s.dx + z, s.dxx + gamma));
    };
    out.g = [base, field](double t, const Vec& x, const SamplePath& path, double y, const Vec& z) {
        const DerivativeSuite s = field->suite(t, x, path);
        const GSuite at = base->g(t, x, path, s.value + y, s.dx + z);
        const GSuite ref = base->g(t, x, path, s.value, s.dx);
        // Blocks of g^v in (omega, x) pick up the chain rule through v; those in (y, z) do not.
        auto total_w = [&](const GSuite& g) {
            return Mat(g.dw + s.dw * g.dy.transpose() + s.dxw.transpose() * g.dz);
        };
        auto total_x = [&](const GSuite& g) { return Mat(g.dx + s.dx * g.dy.transpose() + s.dxx * g.dz); };
        GSuite out_g;
        out_g.value = at.value - ref.value;
        out_g.dw = total_w(at) - total_w(ref);
        out_g.dx = total_x(at) - total_x(ref);
        out_g.dy = at.dy;
        out_g.dz = at.dz;
        return out_g;
    };
    return out;
}

}  // namespace pathwise
