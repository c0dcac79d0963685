#include "pathwise/families.hpp"

#include "pathwise/errors.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace pathwise {

namespace {

Params resolve(const std::string& family, const Params& given, const Params& defaults) {
    Params out = defaults;
    for (const auto& [key, value] : given) {
        if (!defaults.contains(key))
            throw ParameterError("family '" + family + "' has no parameter '" + key + "'");
        out[key] = value;
    }
    return out;
}

Mat identity(std::size_t n) { return Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)); }

GSuite zero_gsuite(std::size_t d, std::size_t dp) {
    const auto di = static_cast<Eigen::Index>(d);
    const auto dpi = static_cast<Eigen::Index>(dp);
    GSuite g;
    g.value = Vec::Zero(di);
    g.dw = Mat::Zero(di, di);
    g.dx = Mat::Zero(dpi, di);
    g.dy = Vec::Zero(di);
    g.dz = Mat::Zero(dpi, di);
    return g;
}

void require_matched(const std::string& family, std::size_t d, std::size_t dp) {
    if (d != dp)
        throw ParameterError("g family '" + family + "' pairs noise component j with z_j and needs d == d'");
}

// Scalar potential phi(t, x, b) with its partials, for d = d' = 1.
struct Scalar {
    std::function<double(double, double, double)> value, t, x, xx, b, xb, bb;
};

MarkovPotential lift(Scalar s) {
    auto p = std::make_shared<const Scalar>(std::move(s));
    MarkovPotential m;
    m.value = [p](double t, const Vec& x, const Vec& b) { return p->value(t, x(0), b(0)); };
    m.dt = [p](double t, const Vec& x, const Vec& b) { return p->t(t, x(0), b(0)); };
    m.dx = [p](double t, const Vec& x, const Vec& b) { return scalar_vec(p->x(t, x(0), b(0))); };
    m.dxx = [p](double t, const Vec& x, const Vec& b) { return scalar_mat(p->xx(t, x(0), b(0))); };
    m.db = [p](double t, const Vec& x, const Vec& b) { return scalar_vec(p->b(t, x(0), b(0))); };
    m.dxb = [p](double t, const Vec& x, const Vec& b) { return scalar_mat(p->xb(t, x(0), b(0))); };
    m.dbb = [p](double t, const Vec& x, const Vec& b) { return scalar_mat(p->bb(t, x(0), b(0))); };
    return m;
}

using F3 = std::function<double(double, double, double)>;

F3 constant(double c) {
    return [c](double, double, double) { return c; };
}

// phi(t, x, b) = psi(t, x + sigma b), given psi and its partials psi_t, psi', psi''.
Scalar transported(double sigma, std::function<double(double, double)> psi, std::function<double(double, double)> psi_t,
                   std::function<double(double, double)> d1, std::function<double(double, double)> d2) {
    Scalar s;
    s.value = [=](double t, double x, double b) { return psi(t, x + sigma * b); };
    s.t = [=](double t, double x, double b) { return psi_t(t, x + sigma * b); };
    s.x = [=](double t, double x, double b) { return d1(t, x + sigma * b); };
    s.xx = [=](double t, double x, double b) { return d2(t, x + sigma * b); };
    s.b = [=](double t, double x, double b) { return sigma * d1(t, x + sigma * b); };
    s.xb = [=](double t, double x, double b) { return sigma * d2(t, x + sigma * b); };
    s.bb = [=](double t, double x, double b) { return sigma * sigma * d2(t, x + sigma * b); };
    return s;
}

}  // namespace

double gaussian_density(double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

std::vector<std::string> f_families() { return {"heat", "linear", "hjb"}; }
std::vector<std::string> g_families() { return {"zero", "transport", "linear", "additive", "brownian"}; }
std::vector<std::string> field_families() {
    return {"constant",   "time",     "b",         "b_squared",  "x_times_b",
            "exp_x_plus_b", "x_squared", "x_cubed", "t_plus_x",  "sin_b",
            "transported_quadratic", "transported_cubic", "transported_bump", "transported_heat"};
}
std::vector<std::string> initial_families() { return {"gaussian", "tent"}; }

FCoeff make_f(const std::string& family, const Params& params, std::size_t space_dim) {
    const auto dp = static_cast<Eigen::Index>(space_dim);
    FCoeff f;
    if (family == "heat") {
        const double a = resolve(family, params, {{"a", 0.5}}).at("a");
        f.eval = [a](double, const Vec&, const SamplePath&, double, const Vec&, const Mat& g) { return a * g.trace(); };
        f.dgamma = [a, dp](double, const Vec&, const SamplePath&, double, const Vec&, const Mat&) {
            return Mat(a * Mat::Identity(dp, dp));
        };
    } else if (family == "linear") {
        const Params p = resolve(family, params, {{"a", 0.5}, {"b", 0.0}, {"c", 0.0}, {"s", 0.0}});
        const double a = p.at("a"), b = p.at("b"), c = p.at("c"), s = p.at("s");
        f.eval = [=](double, const Vec&, const SamplePath&, double y, const Vec& z, const Mat& g) {
            return a * g.trace() + b * z.sum() + c * y + s;
        };
        f.dgamma = [a, dp](double, const Vec&, const SamplePath&, double, const Vec&, const Mat&) {
            return Mat(a * Mat::Identity(dp, dp));
        };
    } else if (family == "hjb") {
        const Params p = resolve(family, params, {{"a_lo", 0.25}, {"a_hi", 0.75}});
        const double lo = p.at("a_lo"), hi = p.at("a_hi");
        f.eval = [lo, hi](double, const Vec&, const SamplePath&, double, const Vec&, const Mat& g) {
            return std::max(lo * g.trace(), hi * g.trace());
        };
        f.dgamma = [lo, hi, dp](double, const Vec&, const SamplePath&, double, const Vec&, const Mat& g) {
            const double tr = g.trace();
            const double slope = hi * tr >= lo * tr ? hi : lo;
            return Mat(slope * Mat::Identity(dp, dp));
        };
    } else {
        throw ParameterError("unknown f family '" + family + "'");
    }
    return f;
}

GFunction make_g(const std::string& family, const Params& params, std::size_t noise_dim, std::size_t space_dim) {
    const std::size_t d = noise_dim;
    const std::size_t dp = space_dim;
    if (family == "zero") {
        resolve(family, params, {});
        return [d, dp](double, const Vec&, const SamplePath&, double, const Vec&) { return zero_gsuite(d, dp); };
    }
    if (family == "transport") {
        require_matched(family, d, dp);
        const double sigma = resolve(family, params, {{"sigma", 1.0}}).at("sigma");
        return [d, dp, sigma](double, const Vec&, const SamplePath&, double, const Vec& z) {
            GSuite g = zero_gsuite(d, dp);
            g.value = sigma * z;
            g.dz = sigma * identity(d);
            return g;
        };
    }
    if (family == "linear") {
        const Params p = resolve(family, params, {{"gy", 0.0}, {"gz", 0.0}, {"g0", 0.0}});
        const double gy = p.at("gy"), gz = p.at("gz"), g0 = p.at("g0");
        if (gz != 0.0) require_matched(family, d, dp);
        return [d, dp, gy, gz, g0](double, const Vec&, const SamplePath&, double y, const Vec& z) {
            GSuite g = zero_gsuite(d, dp);
            g.value.setConstant(gy * y + g0);
            if (gz != 0.0) {
                g.value += gz * z;
                g.dz = gz * identity(d);
            }
            g.dy.setConstant(gy);
            return g;
        };
    }
    if (family == "additive") {
        const Params p = resolve(family, params, {{"c0", 1.0}, {"c1", 0.0}});
        const double c0 = p.at("c0"), c1 = p.at("c1");
        return [d, dp, c0, c1](double t, const Vec&, const SamplePath&, double, const Vec&) {
            GSuite g = zero_gsuite(d, dp);
            g.value.setConstant(c0 + c1 * t);
            return g;
        };
    }
    if (family == "brownian") {
        const double c = resolve(family, params, {{"c", 1.0}}).at("c");
        return [d, dp, c](double t, const Vec&, const SamplePath& path, double, const Vec&) {
            GSuite g = zero_gsuite(d, dp);
            g.value = c * path.value_at(t);
            g.dw = c * identity(d);
            return g;
        };
    }
    throw ParameterError("unknown g family '" + family + "'");
}

CoefficientSuite make_suite(const std::string& f_family, const Params& f_params, const std::string& g_family,
                            const Params& g_params, std::size_t noise_dim, std::size_t space_dim) {
    CoefficientSuite s;
    s.noise_dim = noise_dim;
    s.space_dim = space_dim;
    s.f = make_f(f_family, f_params, space_dim);
    s.g = make_g(g_family, g_params, noise_dim, space_dim);
    return s;
}

MarkovPotential make_potential(const std::string& family, const Params& params) {
    const F3 zero = constant(0.0);
    Scalar s{zero, zero, zero, zero, zero, zero, zero};
    if (family == "constant") {
        s.value = constant(resolve(family, params, {{"c", 1.0}}).at("c"));
    } else if (family == "time") {
        resolve(family, params, {});
        s.value = [](double t, double, double) { return t; };
        s.t = constant(1.0);
    } else if (family == "b") {
        resolve(family, params, {});
        s.value = [](double, double, double b) { return b; };
        s.b = constant(1.0);
    } else if (family == "b_squared") {
        resolve(family, params, {});
        s.value = [](double, double, double b) { return b * b; };
        s.b = [](double, double, double b) { return 2.0 * b; };
        s.bb = constant(2.0);
    } else if (family == "x_times_b") {
        resolve(family, params, {});
        s.value = [](double, double x, double b) { return x * b; };
        s.x = [](double, double, double b) { return b; };
        s.b = [](double, double x, double) { return x; };
        s.xb = constant(1.0);
    } else if (family == "exp_x_plus_b") {
        resolve(family, params, {});
        const F3 e = [](double, double x, double b) { return std::exp(x + b); };
        s = Scalar{e, zero, e, e, e, e, e};
    } else if (family == "x_squared") {
        resolve(family, params, {});
        s.value = [](double, double x, double) { return x * x; };
        s.x = [](double, double x, double) { return 2.0 * x; };
        s.xx = constant(2.0);
    } else if (family == "x_cubed") {
        resolve(family, params, {});
        s.value = [](double, double x, double) { return x * x * x; };
        s.x = [](double, double x, double) { return 3.0 * x * x; };
        s.xx = [](double, double x, double) { return 6.0 * x; };
    } else if (family == "t_plus_x") {
        resolve(family, params, {});
        s.value = [](double t, double x, double) { return t + x; };
        s.t = constant(1.0);
        s.x = constant(1.0);
    } else if (family == "sin_b") {
        resolve(family, params, {});
        s.value = [](double, double, double b) { return std::sin(b); };
        s.b = [](double, double, double b) { return std::cos(b); };
        s.bb = [](double, double, double b) { return -std::sin(b); };
    } else if (family == "transported_quadratic") {
        const double sigma = resolve(family, params, {{"sigma", 1.0}}).at("sigma");
        s = transported(
            sigma, [](double, double y) { return y * y; }, [](double, double) { return 0.0; },
            [](double, double y) { return 2.0 * y; }, [](double, double) { return 2.0; });
    } else if (family == "transported_cubic") {
        const double sigma = resolve(family, params, {{"sigma", 1.0}}).at("sigma");
        s = transported(
            sigma, [](double, double y) { return y * y * y; }, [](double, double) { return 0.0; },
            [](double, double y) { return 3.0 * y * y; }, [](double, double y) { return 6.0 * y; });
    } else if (family == "transported_bump") {
        const Params p = resolve(family, params, {{"sigma", 1.0}, {"width", 1.0}, {"height", 1.0}});
        const double sigma = p.at("sigma"), w2 = p.at("width") * p.at("width"), h = p.at("height");
        if (!(w2 > 0.0)) throw ParameterError("transported_bump width must be positive");
        auto psi = [=](double, double y) { return h * std::exp(-0.5 * y * y / w2); };
        s = transported(
            sigma, psi, [](double, double) { return 0.0; }, [=](double t, double y) { return -y / w2 * psi(t, y); },
            [=](double t, double y) { return (y * y / w2 - 1.0) / w2 * psi(t, y); });
    } else if (family == "transported_heat") {
        const Params p =
            resolve(family, params, {{"sigma", 1.0}, {"a", 0.5}, {"s", 1.0}, {"mass", 1.0}, {"tilt", 0.0}});
        const double sigma = p.at("sigma"), a = p.at("a"), s0 = p.at("s"), mass = p.at("mass"), tilt = p.at("tilt");
        if (!(s0 > 0.0) || a < 0.0) throw ParameterError("transported_heat needs s > 0 and a >= 0");
        auto var = [=](double t) { return s0 + 2.0 * a * t; };
        auto psi = [=](double t, double y) { return mass * gaussian_density(y, var(t)); };
        auto d2 = [=](double t, double y) {
            const double v = var(t);
            return (y * y / v - 1.0) / v * psi(t, y);
        };
        s = transported(
            sigma, [=](double t, double y) { return psi(t, y) + tilt * t; },
            [=](double t, double y) { return a * d2(t, y) + tilt; },
            [=](double t, double y) { return -y / var(t) * psi(t, y); }, d2);
    } else {
        throw ParameterError("unknown field family '" + family + "'");
    }
    return lift(std::move(s));
}

RandomField make_field(const std::string& family, const Params& params) {
    return markov_field(make_potential(family, params), 1, 1);
}

InitialData make_initial(const std::string& family, const Params& params) {
    if (family == "gaussian") {
        const Params p = resolve(family, params, {{"mass", 1.0}, {"var", 1.0}, {"mean", 0.0}, {"offset", 0.0}});
        const double mass = p.at("mass"), var = p.at("var"), mean = p.at("mean"), offset = p.at("offset");
        if (!(var > 0.0)) throw ParameterError("gaussian initial data needs var > 0");
        return [=](double x) { return mass * gaussian_density(x - mean, var) + offset; };
    }
    if (family == "tent") {
        const Params p = resolve(family, params, {{"height", 1.0}, {"width", 1.0}});
        const double h = p.at("height"), w = p.at("width");
        if (!(w > 0.0)) throw ParameterError("tent initial data needs width > 0");
        return [=](double x) { return std::max(0.0, h - std::abs(x) / w); };
    }
    throw ParameterError("unknown initial-data family '" + family + "'");
}

}  // namespace pathwise
