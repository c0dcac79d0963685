#pragma once

#include "pathwise/coefficients.hpp"
#include "pathwise/fields.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace pathwise {

/// Named real parameters of a family. Unknown names are rejected, missing ones take the family default.
using Params = std::map<std::string, double>;

/// f families: heat{a}: a tr(gamma); linear{a, b, c, s}: a tr(gamma) + b sum(z) + c y + s;
/// hjb{a_lo, a_hi}: max(a_lo tr(gamma), a_hi tr(gamma)).
FCoeff make_f(const std::string& family, const Params& params, std::size_t space_dim);

/// g families (one noise component per space dimension where z enters):
/// zero; transport{sigma}: sigma z; linear{gy, gz, g0}: gy y + gz z + g0; additive{c0, c1}: c0 + c1 t;
/// brownian{c}: c B_t.
GFunction make_g(const std::string& family, const Params& params, std::size_t noise_dim, std::size_t space_dim);

CoefficientSuite make_suite(const std::string& f_family, const Params& f_params, const std::string& g_family,
                            const Params& g_params, std::size_t noise_dim, std::size_t space_dim);

/// One-dimensional Markov potentials phi(t, x, b):
/// constant{c}, time, b, b_squared, x_times_b, exp_x_plus_b, x_squared, x_cubed, t_plus_x, sin_b,
/// transported_quadratic{sigma}, transported_cubic{sigma}, transported_bump{sigma, width, height},
/// transported_heat{sigma, a, s, mass, tilt}: mass N(x + sigma b; 0, s + 2 a t) + tilt t.
MarkovPotential make_potential(const std::string& family, const Params& params);
RandomField make_field(const std::string& family, const Params& params);

using InitialData = std::function<double(double)>;

/// gaussian{mass, var, mean, offset}: mass N(x; mean, var) + offset; tent{height, width}: max(0, height - |x| / width).
InitialData make_initial(const std::string& family, const Params& params);

std::vector<std::string> f_families();
std::vector<std::string> g_families();
std::vector<std::string> field_families();
std::vector<std::string> initial_families();

/// Standard normal density with variance `var`.
double gaussian_density(double x, double var);

}  // namespace pathwise
