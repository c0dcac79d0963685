#pragma once

#include "pathwise/paths.hpp"
#include "pathwise/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pathwise {

/// Value and derivatives of u at one point (t, x, omega). x has dimension d', the path d.
/// dxw(i, j) = d/dx_i d/domega_j u, dww(i, j) = d/domega_i d/domega_j u.
struct DerivativeSuite {
    double value = 0.0;
    double dt = 0.0;
    Vec dx;
    Mat dxx;
    Vec dw;
    Mat dxw;
    Mat dww;
};

enum class FieldKind { markovian, sampled, composite };

class RandomField {
public:
    using Evaluator = std::function<double(double t, const Vec& x, const SamplePath& path)>;
    using SuiteEvaluator = std::function<DerivativeSuite(double t, const Vec& x, const SamplePath& path)>;

    RandomField(std::size_t noise_dim, std::size_t space_dim, FieldKind kind, Evaluator eval,
                SuiteEvaluator suite = {});

    std::size_t noise_dim() const { return noise_dim_; }
    std::size_t space_dim() const { return space_dim_; }
    FieldKind kind() const { return kind_; }
    bool has_suite() const { return static_cast<bool>(suite_); }

    /// u(t, x, omega); throws ParameterError when t lies beyond the path horizon.
    double operator()(double t, const Vec& x, const SamplePath& path) const;
    /// Throws ContractError when the field carries no derivative suite.
    DerivativeSuite suite(double t, const Vec& x, const SamplePath& path) const;

private:
    void check_query(double t, const Vec& x, const SamplePath& path) const;

    std::size_t noise_dim_;
    std::size_t space_dim_;
    FieldKind kind_;
    Evaluator eval_;
    SuiteEvaluator suite_;
};

double evaluate(const RandomField& field, double t, const Vec& x, const SamplePath& path);

/// phi(t, x, b) together with its partials. Every member must be set.
struct MarkovPotential {
    std::function<double(double, const Vec&, const Vec&)> value;
    std::function<double(double, const Vec&, const Vec&)> dt;
    std::function<Vec(double, const Vec&, const Vec&)> dx;
    std::function<Mat(double, const Vec&, const Vec&)> dxx;
    std::function<Vec(double, const Vec&, const Vec&)> db;
    std::function<Mat(double, const Vec&, const Vec&)> dxb;
    std::function<Mat(double, const Vec&, const Vec&)> dbb;
};

/// u(t, x, omega) = phi(t, x, B_t(omega)). Path derivatives are the b-partials of phi; the
/// time derivative is phi_t (the Ito drift minus half the trace of phi_bb).
RandomField markov_field(MarkovPotential phi, std::size_t noise_dim, std::size_t space_dim);

/// max over nodes t_k <= T of |u(t_k) - u(0) - sum dt-integral - sum trapezoidal d-omega integral|.
double verify_functional_ito(const RandomField& field, const SamplePath& path, const Vec& x, double horizon);

enum class Interpolation { nearest, linear };

/// Values on a rectangular (t, x) grid, one spatial dimension. values[i * xs.size() + j] = u(times[i], xs[j]).
struct FieldSamples {
    std::vector<double> times;
    std::vector<double> xs;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * xs.size() + j]; }
};

RandomField sampled_field(FieldSamples samples, Interpolation interpolation);

/// CSV `t,x,value` in row-major order.
void write_samples_csv(const FieldSamples& samples, std::ostream& out);
void write_samples_csv(const FieldSamples& samples, const std::string& filename);

}  // namespace pathwise
