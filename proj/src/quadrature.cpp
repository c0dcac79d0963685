#include "pathwise/quadrature.hpp"

#include "pathwise/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace pathwise {

namespace {

// Eigen-decomposition of the symmetric Jacobi matrix with zero diagonal and the given off-diagonal.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mass) {
    const auto n = offdiag.size() + 1;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        jacobi(k, k + 1) = offdiag(k);
        jacobi(k + 1, k) = offdiag(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) throw InternalError("quadrature eigen-solve failed");
    QuadratureRule rule;
    for (Eigen::Index k = 0; k < n; ++k) {
        rule.nodes.push_back(eig.eigenvalues()(k));
        const double v0 = eig.eigenvectors()(0, k);
        rule.weights.push_back(mass * v0 * v0);
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_legendre_unit(std::size_t n) {
    if (n < 1) throw ParameterError("quadrature needs at least one node");
    if (n == 1) return {{0.5}, {1.0}};
    Eigen::VectorXd off(static_cast<Eigen::Index>(n - 1));
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        off(static_cast<Eigen::Index>(k - 1)) = kk / std::sqrt(4.0 * kk * kk - 1.0);
    }
    QuadratureRule rule = golub_welsch(off, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
        rule.weights[i] *= 0.5;
    }
    return rule;
}

QuadratureRule gauss_hermite_normal(std::size_t n) {
    if (n < 1) throw ParameterError("quadrature needs at least one node");
    if (n == 1) return {{0.0}, {1.0}};
    // probabilists' Hermite recurrence: off-diagonal sqrt(k)
    Eigen::VectorXd off(static_cast<Eigen::Index>(n - 1));
    for (std::size_t k = 1; k < n; ++k) off(static_cast<Eigen::Index>(k - 1)) = std::sqrt(static_cast<double>(k));
    return golub_welsch(off, 1.0);
}

}  // namespace pathwise
