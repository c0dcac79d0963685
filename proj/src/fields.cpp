#include "pathwise/fields.hpp"

#include "pathwise/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>

namespace pathwise {

RandomField::RandomField(std::size_t noise_dim, std::size_t space_dim, FieldKind kind, Evaluator eval,
                         SuiteEvaluator suite)
    : noise_dim_(noise_dim), space_dim_(space_dim), kind_(kind), eval_(std::move(eval)), suite_(std::move(suite)) {
    if (!eval_) throw ContractError("random field needs an evaluator");
    if (noise_dim_ < 1 || space_dim_ < 1 || noise_dim_ > static_cast<std::size_t>(kMaxDim) ||
        space_dim_ > static_cast<std::size_t>(kMaxDim))
        throw ParameterError("random field dimensions out of range");
}

void RandomField::check_query(double t, const Vec& x, const SamplePath& path) const {
    if (t < 0.0 || t > path.horizon() * (1.0 + 1e-12))
        throw ParameterError("field queried at t = " + std::to_string(t) + " outside [0, " +
                             std::to_string(path.horizon()) + "]");
    if (static_cast<std::size_t>(x.size()) != space_dim_) throw ContractError("spatial point has wrong dimension");
    if (path.dimension() != noise_dim_) throw ContractError("path dimension does not match the field");
}

double RandomField::operator()(double t, const Vec& x, const SamplePath& path) const {
    check_query(t, x, path);
    return eval_(t, x, path);
}

DerivativeSuite RandomField::suite(double t, const Vec& x, const SamplePath& path) const {
    if (!suite_) throw ContractError("field carries no derivative suite");
    check_query(t, x, path);
    return suite_(t, x, path);
}

double evaluate(const RandomField& field, double t, const Vec& x, const SamplePath& path) {
    return field(t, x, path);
}

RandomField markov_field(MarkovPotential phi, std::size_t noise_dim, std::size_t space_dim) {
    if (!phi.value || !phi.dt || !phi.dx || !phi.dxx || !phi.db || !phi.dxb || !phi.dbb)
        throw ContractError("Markov potential is missing a partial derivative");
    auto shared = std::make_shared<const MarkovPotential>(std::move(phi));
    auto eval = [shared](double t, const Vec& x, const SamplePath& path) {
        return shared->value(t, x, path.value_at(t));
    };
    auto suite = [shared](double t, const Vec& x, const SamplePath& path) {
        const Vec b = path.value_at(t);
        DerivativeSuite s;
        s.value = shared->value(t, x, b);
        s.dt = shared->dt(t, x, b);
        s.dx = shared->dx(t, x, b);
        s.dxx = shared->dxx(t, x, b);
        s.dw = shared->db(t, x, b);
        s.dxw = shared->dxb(t, x, b);
        s.dww = shared->dbb(t, x, b);
        return s;
    };
    return RandomField(noise_dim, space_dim, FieldKind::markovian, std::move(eval), std::move(suite));
}

double verify_functional_ito(const RandomField& field, const SamplePath& path, const Vec& x, double horizon) {
    if (!field.has_suite()) throw ContractError("functional Ito check needs a derivative suite");
    const std::size_t last = path.index_of(horizon);
    const std::size_t d = path.dimension();
    const double dt = path.step();

    DerivativeSuite prev = field.suite(0.0, x, path);
    const double u0 = prev.value;
    double drift = 0.0;
    double noise = 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < last; ++k) {
        const DerivativeSuite next = field.suite(path.time(k + 1), x, path);
        drift += 0.5 * (prev.dt + next.dt) * dt;
        for (std::size_t i = 0; i < d; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            noise += 0.5 * (prev.dw(ii) + next.dw(ii)) * path.increment(k, i);
        }
        worst = std::max(worst, std::abs(next.value - u0 - drift - noise));
        prev = next;
    }
    return worst;
}

namespace {

// Index of the cell [grid[k], grid[k+1]] holding v, with v already inside the closed range.
std::size_t cell_of(const std::vector<double>& grid, double v) {
    if (grid.size() == 1) return 0;
    auto it = std::upper_bound(grid.begin(), grid.end(), v);
    std::size_t k = static_cast<std::size_t>(it - grid.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, grid.size() - 2);
}

double weight(const std::vector<double>& grid, std::size_t k, double v) {
    if (grid.size() == 1) return 0.0;
    return std::clamp((v - grid[k]) / (grid[k + 1] - grid[k]), 0.0, 1.0);
}

void check_axis(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw ParameterError(std::string("sampled field has an empty ") + name + " axis");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw ParameterError(std::string("sampled field ") + name + " axis must be strictly increasing");
}

}  // namespace

RandomField sampled_field(FieldSamples samples, Interpolation interpolation) {
    check_axis(samples.times, "time");
    check_axis(samples.xs, "space");
    if (samples.values.size() != samples.times.size() * samples.xs.size())
        throw ParameterError("sampled field values do not fill the rectangular grid");
    auto data = std::make_shared<const FieldSamples>(std::move(samples));
    auto eval = [data, interpolation](double t, const Vec& xv, const SamplePath&) {
        const auto& s = *data;
        const double x = xv(0);
        const double t_tol = 1e-12 * std::max(1.0, std::abs(s.times.back()));
        const double x_tol = 1e-12 * std::max(1.0, std::abs(s.xs.back()) + std::abs(s.xs.front()));
        if (t < s.times.front() - t_tol || t > s.times.back() + t_tol || x < s.xs.front() - x_tol ||
            x > s.xs.back() + x_tol)
            throw ParameterError("sampled field queried outside its sample box");
        const std::size_t i = cell_of(s.times, t);
        const std::size_t j = cell_of(s.xs, x);
        const double wt = weight(s.times, i, t);
        const double wx = weight(s.xs, j, x);
        const std::size_t i1 = std::min(i + 1, s.times.size() - 1);
        const std::size_t j1 = std::min(j + 1, s.xs.size() - 1);
        if (interpolation == Interpolation::nearest)
            return s.at(wt > 0.5 ? i1 : i, wx > 0.5 ? j1 : j);
        const double lo = (1.0 - wx) * s.at(i, j) + wx * s.at(i, j1);
        const double hi = (1.0 - wx) * s.at(i1, j) + wx * s.at(i1, j1);
        return (1.0 - wt) * lo + wt * hi;
    };
    // The path argument is ignored: the samples were produced on one frozen path.
    return RandomField(1, 1, FieldKind::sampled, std::move(eval));
}

void write_samples_csv(const FieldSamples& samples, std::ostream& out) {
    out << "t,x,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < samples.times.size(); ++i)
        for (std::size_t j = 0; j < samples.xs.size(); ++j)
            out << samples.times[i] << ',' << samples.xs[j] << ',' << samples.at(i, j) << '\n';
}

void write_samples_csv(const FieldSamples& samples, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw ParameterError("cannot open " + filename + " for writing");
    write_samples_csv(samples, out);
}

}  // namespace pathwise
