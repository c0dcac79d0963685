#include "pathwise/paths.hpp"

#include "pathwise/errors.hpp"
#include "pathwise/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace pathwise {

namespace {

constexpr std::size_t kShortSpan = 64;

void check_dims(std::size_t dimension, double horizon, std::size_t steps) {
    if (dimension < 1 || dimension > static_cast<std::size_t>(kMaxDim))
        throw ParameterError("path dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                             std::to_string(dimension));
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("path horizon must be positive");
    if (steps < 1) throw ParameterError("path mesh must have at least one step");
}

}  // namespace

SamplePath SamplePath::from_increments(std::size_t dimension, double horizon, std::vector<double> increments,
                                       std::uint64_t seed) {
    if (dimension == 0 || increments.size() % dimension != 0)
        throw ParameterError("increment array length is not a multiple of the dimension");
    const std::size_t steps = increments.size() / dimension;
    check_dims(dimension, horizon, steps);
    SamplePath p;
    p.dim_ = dimension;
    p.steps_ = steps;
    p.horizon_ = horizon;
    p.seed_ = seed;
    p.increments_ = std::move(increments);
    p.values_.assign((steps + 1) * dimension, 0.0);
    for (std::size_t k = 0; k < steps; ++k)
        for (std::size_t i = 0; i < dimension; ++i)
            p.values_[(k + 1) * dimension + i] = p.values_[k * dimension + i] + p.increments_[k * dimension + i];
    return p;
}

SamplePath SamplePath::from_values(std::size_t dimension, double horizon, std::vector<double> values,
                                   std::uint64_t seed) {
    if (dimension == 0 || values.size() % dimension != 0 || values.size() < 2 * dimension)
        throw ParameterError("value array must hold N+1 >= 2 nodes of the given dimension");
    const std::size_t steps = values.size() / dimension - 1;
    check_dims(dimension, horizon, steps);
    for (std::size_t i = 0; i < dimension; ++i)
        if (values[i] != 0.0) throw ParameterError("paths start at the origin: values[0] must be 0");
    SamplePath p;
    p.dim_ = dimension;
    p.steps_ = steps;
    p.horizon_ = horizon;
    p.seed_ = seed;
    p.increments_.resize(steps * dimension);
    for (std::size_t k = 0; k < steps; ++k)
        for (std::size_t i = 0; i < dimension; ++i)
            p.increments_[k * dimension + i] = values[(k + 1) * dimension + i] - values[k * dimension + i];
    p.values_ = std::move(values);
    return p;
}

Vec SamplePath::value_at_node(std::size_t k) const {
    Vec out(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i) out(static_cast<Eigen::Index>(i)) = value(k, i);
    return out;
}

Vec SamplePath::value_at(double t) const {
    if (t < -1e-12 * horizon_ || t > horizon_ * (1.0 + 1e-12))
        throw ParameterError("time " + std::to_string(t) + " outside path horizon [0, " + std::to_string(horizon_) +
                             "]");
    const double pos = std::clamp(t / step(), 0.0, static_cast<double>(steps_));
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-9) return value_at_node(static_cast<std::size_t>(nearest));
    const auto k = std::min(static_cast<std::size_t>(pos), steps_ - 1);
    const double w = pos - static_cast<double>(k);
    Vec out(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i)
        out(static_cast<Eigen::Index>(i)) = value(k, i) + w * increment(k, i);
    return out;
}

bool SamplePath::on_grid(double t) const {
    const double pos = t / step();
    const double nearest = std::round(pos);
    return std::abs(pos - nearest) <= 1e-9 * std::max(1.0, nearest) && nearest >= 0.0 &&
           nearest <= static_cast<double>(steps_);
}

std::size_t SamplePath::index_of(double t) const {
    if (!on_grid(t)) throw ParameterError("time " + std::to_string(t) + " is not a grid time of the path");
    return static_cast<std::size_t>(std::round(t / step()));
}

Vec SamplePath::increment_between(std::size_t s, std::size_t t) const {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(dim_));
    if (t <= s) return out;
    if (t - s <= kShortSpan) {
        for (std::size_t k = s; k < t; ++k)
            for (std::size_t i = 0; i < dim_; ++i) out(static_cast<Eigen::Index>(i)) += increment(k, i);
    } else {
        for (std::size_t i = 0; i < dim_; ++i) out(static_cast<Eigen::Index>(i)) = value(t, i) - value(s, i);
    }
    return out;
}

SamplePath sample_path(std::size_t dimension, double horizon, std::size_t steps, std::uint64_t seed) {
    check_dims(dimension, horizon, steps);
    Stream stream(seed, "path");
    const double scale = std::sqrt(horizon / static_cast<double>(steps));
    std::vector<double> inc(steps * dimension);
    for (auto& v : inc) v = scale * stream.normal();
    return SamplePath::from_increments(dimension, horizon, std::move(inc), seed);
}

SamplePath refine(const SamplePath& path, std::size_t factor, bool bridge_noise) {
    if (factor < 2 || !std::has_single_bit(factor))
        throw ParameterError("refinement factor must be a power of two >= 2, got " + std::to_string(factor));
    SamplePath cur = path;
    const std::size_t d = path.dim_;
    for (std::size_t f = factor; f > 1; f /= 2) {
        const std::size_t n = cur.steps_;
        const double half_sd = std::sqrt(cur.step() / 4.0);
        Stream stream(cur.seed_, "bridge", n);
        SamplePath next;
        next.dim_ = d;
        next.steps_ = 2 * n;
        next.horizon_ = cur.horizon_;
        next.seed_ = cur.seed_;
        next.increments_.resize(2 * n * d);
        next.values_.resize((2 * n + 1) * d);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < d; ++i) {
                const double xi = bridge_noise ? half_sd * stream.normal() : 0.0;
                const double inc = cur.increments_[k * d + i];
                const double first = 0.5 * inc + xi;
                next.increments_[(2 * k) * d + i] = first;
                next.increments_[(2 * k + 1) * d + i] = 0.5 * inc - xi;
                next.values_[(2 * k) * d + i] = cur.values_[k * d + i];
                next.values_[(2 * k + 1) * d + i] =
                    bridge_noise ? cur.values_[k * d + i] + first
                                 : 0.5 * (cur.values_[k * d + i] + cur.values_[(k + 1) * d + i]);
            }
        }
        for (std::size_t i = 0; i < d; ++i) next.values_[2 * n * d + i] = cur.values_[n * d + i];
        cur = std::move(next);
    }
    return cur;
}

double strat_integral(std::span<const double> integrand, const SamplePath& path, std::size_t component, double s,
                      double t) {
    if (component >= path.dimension()) throw ParameterError("path component out of range");
    const std::size_t a = path.index_of(s);
    const std::size_t b = path.index_of(t);
    if (b <= a) throw ParameterError("strat_integral needs s < t");
    if (integrand.size() != path.steps() + 1)
        throw ParameterError("integrand must be given on all N+1 grid nodes");
    double sum = 0.0;
    for (std::size_t k = a; k < b; ++k)
        sum += 0.5 * (integrand[k] + integrand[k + 1]) * path.increment(k, component);
    return sum;
}

SecondLevel second_level_between(const SamplePath& path, std::size_t s, std::size_t t) {
    if (!(s < t) || t > path.steps()) throw ParameterError("second_level needs grid indices s < t <= N");
    const auto d = static_cast<Eigen::Index>(path.dimension());
    SecondLevel out;
    out.increment = Vec::Zero(d);
    out.strat = Mat::Zero(d, d);
    Vec running = Vec::Zero(d);
    Vec dB(d);
    for (std::size_t k = s; k < t; ++k) {
        for (Eigen::Index i = 0; i < d; ++i) dB(i) = path.increment(k, static_cast<std::size_t>(i));
        // running holds B_{s,k}; the trapezoid weight is (B_{s,k} + B_{s,k+1}) / 2
        const Vec mid = running + 0.5 * dB;
        out.strat.noalias() += mid * dB.transpose();
        running += dB;
    }
    out.increment = running;
    out.levy = out.strat - out.strat.transpose();
    return out;
}

SecondLevel second_level(const SamplePath& path, double s, double t) {
    return second_level_between(path, path.index_of(s), path.index_of(t));
}

double chen_check(const SamplePath& path, double s, double u, double t) {
    const std::size_t a = path.index_of(s);
    const std::size_t m = path.index_of(u);
    const std::size_t b = path.index_of(t);
    if (!(a < m && m < b)) throw ParameterError("chen_check needs s < u < t");
    const SecondLevel whole = second_level_between(path, a, b);
    const SecondLevel left = second_level_between(path, a, m);
    const SecondLevel right = second_level_between(path, m, b);
    const Mat cross =
        left.increment * right.increment.transpose() - right.increment * left.increment.transpose();
    return (whole.levy - left.levy - right.levy - cross).cwiseAbs().maxCoeff();
}

double holder_coefficient(const SamplePath& path, double kappa) {
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ParameterError("Hoelder exponent must lie in [0, 1)");
    const std::size_t n = path.steps();
    const std::size_t d = path.dimension();

    // Bounding-box diagonal bounds every |B_{s,t}|.
    double diameter_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double lo = path.value(0, i);
        double hi = lo;
        for (std::size_t k = 1; k <= n; ++k) {
            lo = std::min(lo, path.value(k, i));
            hi = std::max(hi, path.value(k, i));
        }
        diameter_sq += (hi - lo) * (hi - lo);
    }
    const double diameter = std::sqrt(diameter_sq);
    if (diameter == 0.0) return 0.0;
    if (kappa == 0.0 && d == 1) return diameter;

    const double dt = path.step();
    double best = 0.0;
    for (std::size_t lag = 1; lag <= n; ++lag) {
        const double denom = std::pow(static_cast<double>(lag) * dt, kappa);
        // larger lags cannot beat the current best once even the diameter falls short
        if (kappa > 0.0 && diameter / denom <= best) break;
        double lag_best = 0.0;
        for (std::size_t s = 0; s + lag <= n; ++s) {
            double sq = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = path.value(s + lag, i) - path.value(s, i);
                sq += diff * diff;
            }
            lag_best = std::max(lag_best, sq);
        }
        best = std::max(best, std::sqrt(lag_best) / denom);
    }
    return best;
}

}  // namespace pathwise
