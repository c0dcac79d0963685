#pragma once

#include <cstddef>
#include <vector>

namespace pathwise {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0, 1] (Golub-Welsch).
QuadratureRule gauss_legendre_unit(std::size_t n);

/// n-point Gauss-Hermite rule for the standard normal: sum w_i phi(x_i) ~ E[phi(N(0, 1))].
QuadratureRule gauss_hermite_normal(std::size_t n);

}  // namespace pathwise
