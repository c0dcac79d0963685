#include "pathwise/refsolver.hpp"

#include "pathwise/errors.hpp"
#include "pathwise/parallel.hpp"
#include "pathwise/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace pathwise {

namespace {

constexpr double kBlowUp = 1e10;
constexpr std::size_t kMollifierNodes = 20;

void validate(const CoefficientSuite& suite, const FDGrid& grid, const SamplePath& path) {
    if (suite.noise_dim != 1 || suite.space_dim != 1 || path.dimension() != 1)
        throw ParameterError("the finite-difference solver handles d = d' = 1 only");
    if (grid.nx < 5) throw ParameterError("FD grid needs at least 5 nodes");
    if (!(grid.x_hi > grid.x_lo)) throw ParameterError("FD grid needs x_lo < x_hi");
    if (grid.store_every < 1) throw ParameterError("store_every must be >= 1");
}

// Central first and second differences with the boundary policy deciding the ghost values.
void differences(const std::vector<double>& u, double dx, std::vector<double>& z, std::vector<double>& gamma) {
    const std::size_t n = u.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double left = j == 0 ? u[0] : u[j - 1];
        const double right = j + 1 == n ? u[n - 1] : u[j + 1];
        z[j] = (right - left) / (2.0 * dx);
        gamma[j] = (right - 2.0 * u[j] + left) / (dx * dx);
    }
}

void check_finite(const std::vector<double>& u, std::size_t step) {
    for (double v : u)
        if (!std::isfinite(v) || std::abs(v) > kBlowUp)
            throw NumericalError("finite-difference solution blew up at step " + std::to_string(step));
}

class Stepper {
public:
    Stepper(const FDGrid& grid, const SamplePath& path, const InitialData& u0) : grid_(grid), path_(path) {
        u_.resize(grid.nx);
        xs_.resize(grid.nx);
        for (std::size_t j = 0; j < grid.nx; ++j) {
            xs_[j] = grid.x(j);
            u_[j] = u0(xs_[j]);
        }
        edge_lo_ = u_.front();
        edge_hi_ = u_.back();
        z_.resize(grid.nx);
        gamma_.resize(grid.nx);
        out_.samples.xs = xs_;
        store(0);
    }

    std::vector<double>& u() { return u_; }
    const std::vector<double>& xs() const { return xs_; }
    std::vector<double>& z() { return z_; }
    std::vector<double>& gamma() { return gamma_; }

    void fix_edges(std::vector<double>& v) const {
        if (grid_.boundary == Boundary::dirichlet) {
            v.front() = edge_lo_;
            v.back() = edge_hi_;
        }
    }

    void finish_step(std::size_t k) {
        check_finite(u_, k + 1);
        if ((k + 1) % grid_.store_every == 0 || k + 1 == path_.steps()) store(k + 1);
    }

    FDSolution take(double cfl) {
        out_.cfl = cfl;
        return std::move(out_);
    }

private:
    void store(std::size_t k) {
        out_.samples.times.push_back(path_.time(k));
        out_.samples.values.insert(out_.samples.values.end(), u_.begin(), u_.end());
        out_.boundary_influence = std::max({out_.boundary_influence, std::abs(u_.front()), std::abs(u_.back())});
    }

    const FDGrid& grid_;
    const SamplePath& path_;
    std::vector<double> u_, xs_, z_, gamma_;
    double edge_lo_ = 0.0, edge_hi_ = 0.0;
    FDSolution out_;
};

double setup_cfl(const std::vector<double>& dgamma, const FDGrid& grid, const SamplePath& path) {
    const double ratio = path.step() / (grid.dx() * grid.dx());
    double worst = 0.0;
    for (double a : dgamma) worst = std::max(worst, a * ratio);
    if (worst > 0.5)
        throw ParameterError("explicit step violates the stability bound: max d_gamma * dt / dx^2 = " +
                             std::to_string(worst) + " > 1/2");
    return worst;
}

double g_value(const CoefficientSuite& suite, double t, double x, const SamplePath& path, double y, double z) {
    return suite.g(t, scalar_vec(x), path, y, scalar_vec(z)).value(0);
}

}  // namespace

FDSolution solve_fd_stratonovich(const CoefficientSuite& suite, const InitialData& u0, const FDGrid& grid,
                                 const SamplePath& path) {
    validate(suite, grid, path);
    Stepper s(grid, path, u0);
    const double dt = path.step();
    const double dx = grid.dx();
    auto& u = s.u();
    auto& z = s.z();
    auto& gamma = s.gamma();
    const auto& xs = s.xs();

    differences(u, dx, z, gamma);
    std::vector<double> dg(grid.nx);
    for (std::size_t j = 0; j < grid.nx; ++j)
        dg[j] = suite.f.dgamma(0.0, scalar_vec(xs[j]), path, u[j], scalar_vec(z[j]), scalar_mat(gamma[j]))(0, 0);
    const double cfl = setup_cfl(dg, grid, path);

    std::vector<double> star(grid.nx), pred(grid.nx), g0(grid.nx);
    for (std::size_t k = 0; k < path.steps(); ++k) {
        const double t = path.time(k);
        const double t1 = path.time(k + 1);
        const double db = path.increment(k, 0);
        differences(u, dx, z, gamma);
        for (std::size_t j = 0; j < grid.nx; ++j)
            star[j] = u[j] + dt * suite.f.eval(t, scalar_vec(xs[j]), path, u[j], scalar_vec(z[j]), scalar_mat(gamma[j]));
        s.fix_edges(star);

        differences(star, dx, z, gamma);
        for (std::size_t j = 0; j < grid.nx; ++j) {
            g0[j] = g_value(suite, t, xs[j], path, star[j], z[j]);
            pred[j] = star[j] + g0[j] * db;
        }
        s.fix_edges(pred);
        differences(pred, dx, z, gamma);
        for (std::size_t j = 0; j < grid.nx; ++j)
            u[j] = star[j] + 0.5 * (g0[j] + g_value(suite, t1, xs[j], path, pred[j], z[j])) * db;
        s.fix_edges(u);
        s.finish_step(k);
    }
    return s.take(cfl);
}

FDSolution solve_fd_ito(const CoefficientSuite& suite, const InitialData& u0, const FDGrid& grid,
                        const SamplePath& path, bool drift_override) {
    validate(suite, grid, path);
    Stepper s(grid, path, u0);
    const double dt = path.step();
    const double dx = grid.dx();
    auto& u = s.u();
    auto& z = s.z();
    auto& gamma = s.gamma();
    const auto& xs = s.xs();

    differences(u, dx, z, gamma);
    std::vector<double> dg(grid.nx);
    for (std::size_t j = 0; j < grid.nx; ++j) {
        const CoeffPoint p{0.0, scalar_vec(xs[j]), u[j], scalar_vec(z[j]), scalar_mat(gamma[j])};
        dg[j] = drift_override ? suite.f.dgamma(p.t, p.x, path, p.y, p.z, p.gamma)(0, 0)
                               : drift_derivatives(suite, path, p).dgamma(0, 0);
    }
    const double cfl = setup_cfl(dg, grid, path);

    std::vector<double> next(grid.nx);
    for (std::size_t k = 0; k < path.steps(); ++k) {
        const double t = path.time(k);
        const double db = path.increment(k, 0);
        differences(u, dx, z, gamma);
        for (std::size_t j = 0; j < grid.nx; ++j) {
            const CoeffPoint p{t, scalar_vec(xs[j]), u[j], scalar_vec(z[j]), scalar_mat(gamma[j])};
            const double drift =
                drift_override ? suite.f.eval(t, p.x, path, p.y, p.z, p.gamma) : ito_drift(suite, path, p);
            next[j] = u[j] + dt * drift + g_value(suite, t, xs[j], path, u[j], z[j]) * db;
        }
        s.fix_edges(next);
        u.swap(next);
        s.finish_step(k);
    }
    return s.take(cfl);
}

namespace {

CoefficientSuite mollified(const CoefficientSuite& suite, double eps, double shift) {
    auto base = std::make_shared<const CoefficientSuite>(suite);
    auto rule = std::make_shared<const QuadratureRule>(gauss_hermite_normal(kMollifierNodes));
    CoefficientSuite out = suite;
    out.f.eval = [base, rule, eps, shift](double t, const Vec& x, const SamplePath& path, double y, const Vec& z,
                                          const Mat& gamma) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule->nodes.size(); ++i)
            acc += rule->weights[i] *
                   base->f.eval(t, x, path, y, z, Mat(gamma.array() + eps * rule->nodes[i]));
        return acc + shift;
    };
    out.f.dgamma = [base, rule, eps](double t, const Vec& x, const SamplePath& path, double y, const Vec& z,
                                     const Mat& gamma) {
        Mat acc = Mat::Zero(gamma.rows(), gamma.cols());
        for (std::size_t i = 0; i < rule->nodes.size(); ++i)
            acc += rule->weights[i] * base->f.dgamma(t, x, path, y, z, Mat(gamma.array() + eps * rule->nodes[i]));
        return acc;
    };
    return out;
}

InitialData mollified(const InitialData& u0, double width, double shift) {
    auto rule = std::make_shared<const QuadratureRule>(gauss_hermite_normal(kMollifierNodes));
    return [u0, rule, width, shift](double x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule->nodes.size(); ++i) acc += rule->weights[i] * u0(x + width * rule->nodes[i]);
        return acc + shift;
    };
}

}  // namespace

EnvelopeReport envelope_experiment(const CoefficientSuite& suite, const InitialData& u0,
                                   const std::vector<double>& eps_list, FDGrid grid, const SamplePath& path,
                                   unsigned threads) {
    if (eps_list.empty()) throw ParameterError("envelope experiment needs at least one eps");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (eps_list[i] < 0.0) throw ParameterError("eps must be nonnegative");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ParameterError("eps list must be strictly decreasing");
    }
    grid.boundary = Boundary::clamp;

    std::vector<FDSolution> runs(2 * eps_list.size());
    parallel_for(runs.size(), threads, [&](std::size_t r) {
        const double eps = eps_list[r / 2];
        const double shift = r % 2 == 0 ? eps : -eps;
        runs[r] = solve_fd_stratonovich(mollified(suite, eps, shift), mollified(u0, eps * eps, shift), grid, path);
    });

    EnvelopeReport report;
    const double horizon = path.horizon();
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const auto& upper = runs[2 * i].samples;
        const auto& lower = runs[2 * i + 1].samples;
        EnvelopeLevel level;
        level.eps = eps_list[i];
        level.predicted_gap = 2.0 * level.eps * (1.0 + horizon);
        level.min_order = upper.values[0] - lower.values[0];
        for (std::size_t n = 0; n < upper.values.size(); ++n)
            level.min_order = std::min(level.min_order, upper.values[n] - lower.values[n]);
        const std::size_t last = upper.times.size() - 1;
        for (std::size_t j = 0; j < upper.xs.size(); ++j)
            level.max_gap = std::max(level.max_gap, upper.at(last, j) - lower.at(last, j));
        if (level.min_order < -1e-10) report.ordered = false;
        const double rel = level.predicted_gap > 0.0
                               ? std::abs(level.max_gap - level.predicted_gap) / level.predicted_gap
                               : std::abs(level.max_gap);
        report.worst_relative_gap_error = std::max(report.worst_relative_gap_error, rel);
        if (!report.levels.empty() && !(level.max_gap < report.levels.back().max_gap)) report.monotone = false;
        report.levels.push_back(level);
    }
    return report;
}

}  // namespace pathwise
