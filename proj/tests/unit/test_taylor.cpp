#include "helpers.hpp"

#include "pathwise/errors.hpp"
#include "pathwise/families.hpp"
#include "pathwise/taylor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pathwise;

namespace {

GSuite zero_g(std::size_t d, std::size_t dp) {
    return GSuite{Vec::Zero(d), Mat::Zero(d, d), Mat::Zero(dp, d), Vec::Zero(d), Mat::Zero(dp, d)};
}

SecondLevel level_from(const Vec& b, const Mat& levy) {
    return SecondLevel{b, Mat(0.5 * (b * b.transpose() + levy)), levy};
}

Jet jet1(double a, double z, double gamma, double y = 0.0) { return Jet{a, scalar_vec(z), scalar_mat(gamma), y}; }

Mat random_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> n;
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng);
    return m;
}

// u(t) = int_0^t B^1 o dB^2 as a field with no spatial dependence; its path derivative is (0, B^1_t).
RandomField levy_field() {
    auto eval = [](double t, const Vec&, const SamplePath& p) {
        const std::size_t k = p.index_of(t);
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += 0.5 * (p.value(i, 0) + p.value(i + 1, 0)) * p.increment(i, 1);
        return acc;
    };
    auto suite = [eval](double t, const Vec& x, const SamplePath& p) {
        DerivativeSuite s;
        s.value = eval(t, x, p);
        s.dx = Vec::Zero(1);
        s.dxx = Mat::Zero(1, 1);
        s.dw = Vec::Zero(2);
        s.dw(1) = p.value_at(t)(0);
        s.dxw = Mat::Zero(1, 2);
        s.dww = Mat::Zero(2, 2);
        s.dww(0, 1) = s.dww(1, 0) = 1.0;
        return s;
    };
    return RandomField(2, 1, FieldKind::composite, eval, suite);
}

CoefficientSuite levy_suite() {
    CoefficientSuite s;
    s.noise_dim = 2;
    s.space_dim = 1;
    s.f = make_f("heat", {{"a", 0.0}}, 1);
    s.g = [](double t, const Vec&, const SamplePath& p, double, const Vec&) {
        GSuite g = zero_g(2, 1);
        g.value(1) = p.value_at(t)(0);
        g.dw(0, 1) = 1.0;
        return g;
    };
    return s;
}

}  // namespace

TEST(TaylorOperator, DeterministicPolynomial) {
    const SecondLevel lvl = level_from(scalar_vec(0.3), Mat::Zero(1, 1));
    EXPECT_NEAR(taylor_operator(zero_g(1, 1), jet1(1.0, 2.0, 6.0), lvl, 0.1, scalar_vec(0.2)), 0.42, 1e-15);
}

TEST(TaylorOperator, TransportHandEvaluation) {
    GSuite g = zero_g(1, 1);
    g.value(0) = 3.0;
    g.dz(0, 0) = 1.0;
    const SecondLevel lvl = level_from(scalar_vec(0.05), Mat::Zero(1, 1));
    EXPECT_NEAR(taylor_operator(g, jet1(5.0, 3.0, 4.0, 2.0), lvl, 0.01, scalar_vec(0.1)), 0.105, 1e-15);
}

TEST(TaylorOperator, RejectsBadInput) {
    const SecondLevel lvl = level_from(Vec::Ones(1), Mat::Zero(1, 1));
    Jet j{0.0, Vec::Zero(2), Mat::Zero(2, 2), 0.0};
    j.gamma(0, 1) = 1.0;
    EXPECT_THROW(taylor_operator(zero_g(1, 2), j, lvl, 0.1, Vec::Zero(2)), ContractError);
    EXPECT_THROW(taylor_operator(zero_g(1, 1), jet1(0, 0, 0), lvl, 0.1, Vec::Zero(2)), ContractError);
    EXPECT_THROW(taylor_operator(zero_g(1, 1), jet1(0, 0, 0), lvl, 0.0, Vec::Zero(1)), ParameterError);
}

TEST(TaylorOperator, InvariantUnderYShiftWhenGIgnoresY) {
    const CoefficientSuite s = make_suite("heat", {}, "transport", {{"sigma", 0.7}}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 256, 8);
    const SecondLevel lvl = second_level(p, 0.5, 0.75);
    for (double c : {-3.0, 0.5, 10.0}) {
        const double y = 0.4;
        const GSuite g0 = s.g(0.75, scalar_vec(0.1), p, y, scalar_vec(1.2));
        const GSuite g1 = s.g(0.75, scalar_vec(0.1), p, y + c, scalar_vec(1.2));
        EXPECT_EQ(taylor_operator(g0, jet1(0.3, 1.2, -0.8, y), lvl, 0.25, scalar_vec(0.2)),
                  taylor_operator(g1, jet1(0.3, 1.2, -0.8, y + c), lvl, 0.25, scalar_vec(0.2)));
    }
}

TEST(TaylorOperator, RandomJetsMatchIndependentSquareForm) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_real_distribution<double> uni(0.01, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index d = dim(rng), dp = dim(rng);
        GSuite g{random_mat(rng, d, 1), random_mat(rng, d, d), random_mat(rng, dp, d), random_mat(rng, d, 1),
                 random_mat(rng, dp, d)};
        const Mat s = random_mat(rng, dp, dp);
        Jet j{random_mat(rng, 1, 1)(0, 0), random_mat(rng, dp, 1), Mat(s + s.transpose()), 0.0};
        const Mat a = random_mat(rng, d, d);
        const SecondLevel lvl = level_from(random_mat(rng, d, 1), Mat(a - a.transpose()));
        const Vec h = random_mat(rng, dp, 1);
        const double delta = uni(rng);

        // Completed-square form written out independently of the library.
        const Vec& b = lvl.increment;
        const Mat n = g.dx + j.z * g.dy.transpose();
        const Mat m = g.dw + g.value * g.dy.transpose() + n.transpose() * g.dz;
        const Vec shifted = h - g.dz * b;
        const double expected = -j.a * delta + j.z.dot(h) - g.value.dot(b) + 0.5 * shifted.dot(j.gamma * shifted) +
                                0.5 * (m.array() * (b * b.transpose() + lvl.levy.transpose()).array()).sum() -
                                (n.array() * (h * b.transpose()).array()).sum();
        const double got = taylor_operator(g, j, lvl, delta, h);
        ASSERT_NEAR(got, expected, 1e-10 * std::max(1.0, std::abs(expected))) << "trial " << trial;
    }
}

TEST(TaylorOperator, SymmetricPerturbationOfAreaIsLinear) {
    std::mt19937_64 rng(7);
    GSuite g{random_mat(rng, 2, 1), random_mat(rng, 2, 2), random_mat(rng, 2, 2), random_mat(rng, 2, 1),
             random_mat(rng, 2, 2)};
    const Mat s0 = random_mat(rng, 2, 2);
    Jet j{0.3, random_mat(rng, 2, 1), Mat(s0 + s0.transpose()), 0.0};
    const Vec b = random_mat(rng, 2, 1);
    const Mat a = random_mat(rng, 2, 2);
    const Mat levy = a - a.transpose();
    const Vec h = random_mat(rng, 2, 1);
    const Mat sym = random_mat(rng, 2, 2);
    const Mat S = sym + sym.transpose();

    const Mat n = g.dx + j.z * g.dy.transpose() + j.gamma * g.dz;
    const Mat m = g.dw + g.value * g.dy.transpose() + n.transpose() * g.dz;
    const double base = taylor_operator(g, j, level_from(b, levy), 0.2, h);
    for (double s : {0.5, 1.0, 2.0}) {
        const Mat pert = levy + s * S;
        const SecondLevel lvl{b, Mat(0.5 * (b * b.transpose() + pert)), pert};
        EXPECT_NEAR(taylor_operator(g, j, lvl, 0.2, h) - base, 0.5 * s * (m.array() * S.array()).sum(), 1e-12);
    }
}

TEST(Expand, ConstantAndQuadraticFields) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 128, 1);
    const RandomField c = make_field("constant", {{"c", 2.5}});
    const RandomField q = make_field("x_squared", {});
    for (double delta : {0.0078125, 0.25, 0.5})
        for (double h : {-0.7, 0.0, 0.3}) {
            EXPECT_DOUBLE_EQ(expand(c, s, 0.5, scalar_vec(0.2), delta, scalar_vec(h), p), 2.5);
            EXPECT_NEAR(expand(q, s, 0.5, scalar_vec(0.2), delta, scalar_vec(h), p), (0.2 + h) * (0.2 + h), 1e-14);
        }
    EXPECT_THROW(expand(c, s, 0.5, scalar_vec(0.0), 0.75, scalar_vec(0.0), p), DomainError);
}

TEST(Expand, TransportedQuadraticIsExact) {
    const double sigma = 1.3;
    const CoefficientSuite s = make_suite("heat", {{"a", 0.0}}, "transport", {{"sigma", sigma}}, 1, 1);
    const RandomField u = make_field("transported_quadratic", {{"sigma", sigma}});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SamplePath p = sample_path(1, 1.0, 1024, seed);
        for (double delta : {1.0 / 1024, 1.0 / 64, 0.25})
            for (double h : {-0.5, 0.1, 1.0})
                EXPECT_LE(std::abs(remainder(u, s, 0.75, scalar_vec(0.3), delta, scalar_vec(h), p)), 1e-10);
    }
}

TEST(Expand, PathDependentFieldUsesTransposedArea) {
    const RandomField u = levy_field();
    const CoefficientSuite s = levy_suite();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SamplePath p = sample_path(2, 1.0, 512, seed);
        for (double delta : {1.0 / 512, 1.0 / 16, 0.5}) {
            const double r = remainder(u, s, 0.75, Vec::Zero(1), delta, Vec::Zero(1), p);
            EXPECT_LE(std::abs(r), 1e-12) << "seed " << seed << " delta " << delta;
        }
    }
}

TEST(Remainder, CubicIsHCubed) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 64, 1);
    const RandomField u = make_field("x_cubed", {});
    for (double h : {-0.5, 0.125, 0.75})
        EXPECT_NEAR(remainder(u, s, 0.5, scalar_vec(0.4), 0.25, scalar_vec(h), p), h * h * h, 1e-14);
}

TEST(OrderEstimate, CubicSlope) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 12, 1);
    ScanLattice lat = ScanLattice::dyadic(12, 4);
    lat.multipliers = {-1.0, 1.0};
    const OrderFit fit = order_estimate(make_field("x_cubed", {}), s, 0.5, scalar_vec(0.4), p, lat, 2);
    EXPECT_NEAR(fit.slope, 1.5, 0.05);
    EXPECT_EQ(fit.n_points, lat.points(1).size());
}

TEST(OrderEstimate, ExactQuadraticHasNoUsablePoints) {
    const CoefficientSuite s = make_suite("heat", {{"a", 0.0}}, "transport", {{"sigma", 1.0}}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 12, 3);
    EXPECT_THROW(order_estimate(make_field("transported_quadratic", {{"sigma", 1.0}}), s, 0.5, scalar_vec(0.0), p,
                                ScanLattice::dyadic(10, 4)),
                 InsufficientDataError);
}

TEST(OrderEstimate, ThreadCountDoesNotChangeFit) {
    const CoefficientSuite s = make_suite("heat", {{"a", 0.0}}, "transport", {{"sigma", 1.0}}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 14, 4);
    const RandomField u = make_field("transported_bump", {{"sigma", 1.0}});
    const ScanLattice lat = ScanLattice::dyadic(12, 6);
    const OrderFit a = order_estimate(u, s, 0.5, scalar_vec(0.1), p, lat, 1);
    const OrderFit b = order_estimate(u, s, 0.5, scalar_vec(0.1), p, lat, 3);
    EXPECT_EQ(a.slope, b.slope);
    EXPECT_EQ(a.intercept, b.intercept);
    EXPECT_GT(a.slope, 1.0);
}

TEST(ScanLattice, Shapes) {
    const ScanLattice lat = ScanLattice::dyadic(8, 6);
    ASSERT_EQ(lat.deltas.size(), 3u);
    EXPECT_EQ(lat.deltas.front(), 1.0 / 64);
    EXPECT_EQ(lat.points(1).size(), 15u);
    EXPECT_NEAR(lat.points(1)[0].h(0), -2.0 / 8, 1e-15);
    ScanLattice prod;
    prod.pairing = Pairing::product;
    prod.deltas = {0.1, 0.2};
    prod.hs = {Vec::Zero(2), Vec::Ones(2)};
    EXPECT_EQ(prod.points(2).size(), 4u);
    EXPECT_THROW(prod.points(1), ContractError);
    EXPECT_THROW(ScanLattice::dyadic(3, 5), ParameterError);
}
