#include "helpers.hpp"

#include "pathwise/errors.hpp"
#include "pathwise/families.hpp"
#include "pathwise/viscosity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace pathwise;

namespace {

ScanLattice fine_lattice() { return ScanLattice::dyadic(20, 13); }

const SamplePath& fine_path(std::uint64_t seed) {
    static std::map<std::uint64_t, SamplePath> cache;
    auto it = cache.find(seed);
    if (it == cache.end()) it = cache.emplace(seed, sample_path(1, 1.0, 1 << 20, seed)).first;
    return it->second;
}

ViscosityOptions options(ScanLattice lattice) {
    ViscosityOptions o;
    o.lattice = std::move(lattice);
    return o;
}

RandomField plus_tilt(const RandomField& u, double tilt) {
    return RandomField(
        u.noise_dim(), u.space_dim(), FieldKind::composite,
        [u, tilt](double t, const Vec& x, const SamplePath& p) { return u(t, x, p) + tilt * t; },
        [u, tilt](double t, const Vec& x, const SamplePath& p) {
            DerivativeSuite s = u.suite(t, x, p);
            s.value += tilt * t;
            s.dt += tilt;
            return s;
        });
}

}  // namespace

TEST(CanonicalJet, ClosedForms) {
    const SamplePath p = sample_path(1, 1.0, 64, 2);
    const Jet q = canonical_jet(make_field("x_squared", {}), 0.5, scalar_vec(1.5), p);
    EXPECT_EQ(q.a, 0.0);
    EXPECT_EQ(q.z(0), 3.0);
    EXPECT_EQ(q.gamma(0, 0), 2.0);
    EXPECT_EQ(q.y, 2.25);

    const Jet b = canonical_jet(make_field("b_squared", {}), 0.5, scalar_vec(0.0), p);
    EXPECT_EQ(b.a, 0.0);
    EXPECT_EQ(b.z(0), 0.0);
    EXPECT_DOUBLE_EQ(b.y, p.value(32, 0) * p.value(32, 0));

    const Jet l = canonical_jet(make_field("t_plus_x", {}), 0.5, scalar_vec(0.25), p);
    EXPECT_EQ(l.a, 1.0);
    EXPECT_EQ(l.z(0), 1.0);
    EXPECT_EQ(l.gamma(0, 0), 0.0);
    EXPECT_EQ(l.y, 0.75);

    FieldSamples fs{{0.0, 1.0}, {0.0, 1.0}, {1, 1, 1, 1}};
    EXPECT_THROW(canonical_jet(sampled_field(fs, Interpolation::linear), 0.5, scalar_vec(0.5), p), ContractError);
}

TEST(JetMembership, QuadraticEqualityCase) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 12, 2);
    const RandomField u = make_field("x_squared", {});
    const Jet j = canonical_jet(u, 0.5, scalar_vec(0.3), p);
    for (JetSide side : {JetSide::super, JetSide::sub}) {
        const JetVerdict v = jet_membership(u, s, 0.5, scalar_vec(0.3), p, j, side, 0.25, ScanLattice::dyadic(12, 4), 0.05);
        EXPECT_NEAR(v.ratio_max, 0.0, 1e-9);
        EXPECT_TRUE(v.member);
    }
}

TEST(JetMembership, SteeperParaboloidIsSuperNotSub) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 12, 2);
    const RandomField u = make_field("x_squared", {});
    Jet j = canonical_jet(u, 0.5, scalar_vec(0.0), p);
    j.gamma(0, 0) = 4.0;
    const ScanLattice lat = ScanLattice::dyadic(12, 4);
    EXPECT_TRUE(jet_membership(u, s, 0.5, scalar_vec(0.0), p, j, JetSide::super, 0.25, lat, 0.05).member);
    const JetVerdict sub = jet_membership(u, s, 0.5, scalar_vec(0.0), p, j, JetSide::sub, 0.25, lat, 0.05);
    EXPECT_FALSE(sub.member);
    EXPECT_GT(sub.ratio_max, 1.0);
}

TEST(JetMembership, TimeSlotOrientation) {
    // Raising a lowers the backward expansion by eps * delta, so the super-jet side breaks and a - eps stays.
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 12, 2);
    const RandomField u = make_field("t_plus_x", {});
    const ScanLattice lat = ScanLattice::dyadic(12, 4);
    Jet j = canonical_jet(u, 0.5, scalar_vec(0.0), p);
    const double eps = 0.5;
    j.a += eps;
    const JetVerdict up = jet_membership(u, s, 0.5, scalar_vec(0.0), p, j, JetSide::super, 0.25, lat, 0.05);
    EXPECT_FALSE(up.member);
    EXPECT_NEAR(up.ratio_max, eps * std::pow(1.0 / 4096, -0.25), 1e-9);
    j.a -= 2 * eps;
    EXPECT_TRUE(jet_membership(u, s, 0.5, scalar_vec(0.0), p, j, JetSide::super, 0.25, lat, 0.05).member);
    EXPECT_FALSE(jet_membership(u, s, 0.5, scalar_vec(0.0), p, j, JetSide::sub, 0.25, lat, 0.05).member);
}

TEST(JetMembership, GammaMonotone) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath& p = fine_path(2);
    const RandomField u = make_field("transported_bump", {{"sigma", 0.0}});
    const ScanLattice lat = fine_lattice();
    for (double x : {-0.5, 0.0, 0.7}) {
        Jet j = canonical_jet(u, 0.5, scalar_vec(x), p);
        const JetVerdict base = jet_membership(u, s, 0.5, scalar_vec(x), p, j, JetSide::super, 0.25, lat, 0.05);
        ASSERT_TRUE(base.member);
        for (double e : {0.01, 0.1, 1.0}) {
            Jet k = j;
            k.gamma(0, 0) += e;
            const JetVerdict v = jet_membership(u, s, 0.5, scalar_vec(x), p, k, JetSide::super, 0.25, lat, 0.05);
            EXPECT_TRUE(v.member);
            EXPECT_LE(v.ratio_max, base.ratio_max + 1e-15);
        }
    }
}

TEST(JetMembership, LatticeBeyondAnchorRejected) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 64, 2);
    const RandomField u = make_field("x_squared", {});
    const Jet j = canonical_jet(u, 0.1, scalar_vec(0.0), p);
    EXPECT_THROW(jet_membership(u, s, 0.125, scalar_vec(0.0), p, j, JetSide::super, 0.25, ScanLattice::dyadic(2, 1),
                                0.05),
                 DomainError);
}

TEST(CheckPoint, StrictSubsolution) {
    const CoefficientSuite s = make_suite("heat", {{"a", 0.0}}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 12, 2);
    const RandomField u = plus_tilt(make_field("constant", {{"c", 0.0}}), -1.0);
    const auto opts = options(ScanLattice::dyadic(12, 4));
    const Jet j = canonical_jet(u, 0.5, scalar_vec(0.0), p);
    ASSERT_EQ(j.a, -1.0);
    const PointVerdict sub = check_point(u, s, 0.5, scalar_vec(0.0), p, {j}, SolutionSide::subsolution, opts);
    const PointVerdict sup = check_point(u, s, 0.5, scalar_vec(0.0), p, {j}, SolutionSide::supersolution, opts);
    EXPECT_TRUE(sub.pass);
    EXPECT_FALSE(sup.pass);
    EXPECT_EQ(sub.skipped, 0u);
    EXPECT_DOUBLE_EQ(sub.checks[0].a_minus_f, -1.0);
}

TEST(CheckPoint, NonMembersAreSkipped) {
    const CoefficientSuite s = make_suite("heat", {}, "zero", {}, 1, 1);
    const SamplePath p = sample_path(1, 1.0, 1 << 12, 2);
    const RandomField u = make_field("x_squared", {});
    Jet j = canonical_jet(u, 0.5, scalar_vec(0.0), p);
    j.gamma(0, 0) = -10.0;  // a - f = 5 violates the subsolution inequality, but the jet is no super-jet
    const PointVerdict v = check_point(u, s, 0.5, scalar_vec(0.0), p, {j}, SolutionSide::subsolution,
                                       options(ScanLattice::dyadic(12, 4)));
    EXPECT_TRUE(v.pass);
    EXPECT_EQ(v.skipped, 1u);
}

TEST(Consistency, TransportedHeatPassesBothSides) {
    for (double sigma : {0.0, 0.5, 1.0}) {
        const CoefficientSuite s = make_suite("heat", {{"a", 0.5}}, "transport", {{"sigma", sigma}}, 1, 1);
        const RandomField u = make_field("transported_heat", {{"sigma", sigma}});
        std::vector<SamplePath> paths{fine_path(1), fine_path(2)};
        std::vector<ConsistencyPoint> pts{{0.25, -0.4}, {0.625, 0.2}, {0.875, 1.1}};
        const ConsistencyReport r = consistency_experiment(u, s, pts, paths, options(fine_lattice()), 2);
        EXPECT_TRUE(r.pass()) << "sigma " << sigma << " max ratio " << r.max_ratio;
        EXPECT_LE(r.max_abs_a_minus_f, 1e-9);
        EXPECT_LE(r.max_ratio, 0.05);
        EXPECT_EQ(r.records.size(), 12u);
    }
}

TEST(Consistency, CorruptedFieldFailsSubsolutionSide) {
    const CoefficientSuite s = make_suite("heat", {{"a", 0.5}}, "transport", {{"sigma", 1.0}}, 1, 1);
    const RandomField u = plus_tilt(make_field("transported_heat", {}), 0.1);
    std::vector<ConsistencyPoint> pts{{0.25, -0.4}, {0.625, 0.2}};
    const ConsistencyReport r = consistency_experiment(u, s, pts, {fine_path(1)}, options(fine_lattice()));
    EXPECT_FALSE(r.subsolution_pass);
    EXPECT_TRUE(r.supersolution_pass);
    EXPECT_GE(r.sub_violation, 0.09);
}

TEST(Consistency, ThreadCountDoesNotChangeRecords) {
    const CoefficientSuite s = make_suite("heat", {{"a", 0.5}}, "transport", {{"sigma", 1.0}}, 1, 1);
    const RandomField u = make_field("transported_heat", {});
    std::vector<SamplePath> paths{sample_path(1, 1.0, 1 << 12, 5), sample_path(1, 1.0, 1 << 12, 6),
                                  sample_path(1, 1.0, 1 << 12, 7)};
    std::vector<ConsistencyPoint> pts{{0.5, 0.0}, {0.75, -1.0}};
    const auto opts = options(ScanLattice::dyadic(12, 6));
    const ConsistencyReport a = consistency_experiment(u, s, pts, paths, opts, 1);
    const ConsistencyReport b = consistency_experiment(u, s, pts, paths, opts, 3);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].ratio_max, b.records[i].ratio_max);
        EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    }
}

TEST(ChangeOfVariable, VerdictsAgreeUnderExponentialRescaling) {
    const CoefficientSuite s = make_suite("heat", {{"a", 0.5}}, "transport", {{"sigma", 1.0}}, 1, 1);
    const Rate one = [](double) { return 1.0; };
    const CoefficientSuite st = change_of_variable(s, one);
    const auto opts = options(fine_lattice());
    for (double tilt : {0.0, 0.1, -0.1}) {
        const RandomField u = plus_tilt(make_field("transported_heat", {}), tilt);
        const RandomField ut = transform_field(u, one);
        for (double x : {-0.5, 0.4}) {
            const SamplePath& p = fine_path(3);
            const Vec xv = scalar_vec(x);
            for (SolutionSide side : {SolutionSide::subsolution, SolutionSide::supersolution}) {
                const PointVerdict a = check_point(u, s, 0.5, xv, p, {canonical_jet(u, 0.5, xv, p)}, side, opts);
                const PointVerdict b = check_point(ut, st, 0.5, xv, p, {canonical_jet(ut, 0.5, xv, p)}, side, opts);
                EXPECT_EQ(a.pass, b.pass) << "tilt " << tilt << " x " << x;
                EXPECT_EQ(a.skipped, b.skipped);
                EXPECT_NEAR(b.checks[0].a_minus_f, std::exp(0.5) * a.checks[0].a_minus_f, 1e-10);
            }
        }
    }
}
