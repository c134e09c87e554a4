#include "dsm/homotopy.hpp"
#include "dsm/problem_suite.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace {

using dsm::FlowConfig;
using dsm::NonlinearProblem;
using dsm::PathSpec;
using dsm::SolveStatus;
using dsm::Vector;
using dsm::suite::vec;

NonlinearProblem builtin(const char* name, std::size_t n = 0) {
    const auto& d = *dsm::find_problem(name);
    return n == 0 ? d.problem() : d.problem(n);
}

TEST(SegmentPath, Midpoint) {
    EXPECT_EQ(dsm::segment_path({vec({0.0}), vec({4.0}), 11}, 0.5), vec({2.0}));
}

TEST(SegmentPath, EndpointsExact) {
    const PathSpec spec{vec({0.1, 0.7}), vec({1.0 / 3.0, -2.9}), 5};
    EXPECT_EQ(dsm::segment_path(spec, 0.0), spec.u_start);
    EXPECT_EQ(dsm::segment_path(spec, 1.0), spec.v_end);
    EXPECT_EQ(spec.node(0), 0.0);
    EXPECT_EQ(spec.node(4), 1.0);
}

TEST(SegmentPath, ConvexCombination) {
    EXPECT_EQ(dsm::segment_path({vec({1.0, 0.0}), vec({0.0, 1.0}), 2}, 0.25), vec({0.75, 0.25}));
}

TEST(SegmentPath, OutsideUnitIntervalRejected) {
    const PathSpec spec{vec({0.0}), vec({1.0}), 3};
    EXPECT_THROW((void)dsm::segment_path(spec, -0.01), dsm::ContractViolation);
    EXPECT_THROW((void)dsm::segment_path(spec, 1.01), dsm::ContractViolation);
}

TEST(SegmentPath, Affinity) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(-5.0, 5.0), S(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const PathSpec spec{vec({U(rng), U(rng), U(rng)}), vec({U(rng), U(rng), U(rng)}), 11};
        const Vector dir = spec.v_end - spec.u_start;
        for (int k = 0; k < 5; ++k) {
            const double s = S(rng);
            const Vector diff = dsm::segment_path(spec, s) - dsm::segment_path(spec, 0.0);
            EXPECT_LE((diff - s * dir).norm(), 1e-12);
        }
    }
}

TEST(PathSpec, Validation) {
    EXPECT_THROW((PathSpec{vec({0.0}), vec({1.0}), 1}.validate()), dsm::ContractViolation);
    EXPECT_THROW((PathSpec{vec({0.0}), vec({1.0, 2.0}), 3}.validate()), dsm::ContractViolation);
}

TEST(InjectivitySweep, CubicLimitsCoincide) {
    const double root = dsm::oracle::bisect([](double u) { return u + u * u * u - 2.0; }, 0.0, 2.0);
    const auto res = dsm::injectivity_sweep(builtin("monotone_cubic"), {vec({0.0}), vec({5.0}), 11},
                                            vec({2.0}), FlowConfig{}, 1e-7);
    ASSERT_EQ(res.nodes.size(), 11u);
    EXPECT_TRUE(res.injective_verdict);
    EXPECT_LE(res.max_limit_spread, 1e-7);
    EXPECT_FALSE(res.first_failure.has_value());
    for (const auto& n : res.nodes) {
        EXPECT_EQ(n.status, SolveStatus::Converged);
        EXPECT_NEAR(n.u_limit[0], root, 1e-7);
    }
    EXPECT_DOUBLE_EQ(res.nodes[4].s, 0.4);
}

TEST(InjectivitySweep, LinearSpdLimitIsInverseImage) {
    const auto star = dsm::oracle::solve2(2, 1, 1, 2, 1, 1);
    const auto res = dsm::injectivity_sweep(builtin("linear_spd", 2), {vec({-2.0, 3.0}), vec({4.0, 1.0}), 11},
                                            vec({1.0, 1.0}), FlowConfig{}, 1e-7);
    EXPECT_TRUE(res.injective_verdict);
    for (const auto& n : res.nodes) {
        EXPECT_NEAR(n.u_limit[0], star[0], 1e-7);
        EXPECT_NEAR(n.u_limit[1], star[1], 1e-7);
        EXPECT_NEAR(n.u_limit[0], 1.0 / 3.0, 1e-7);
    }
}

TEST(InjectivitySweep, ExpNeverConverges) {
    FlowConfig cfg;
    cfg.escape_radius = 10.0;
    const auto res = dsm::injectivity_sweep(builtin("scalar_exp"), {vec({-1.0}), vec({2.0}), 11},
                                            vec({0.0}), cfg, 1e-7);
    EXPECT_FALSE(res.injective_verdict);
    ASSERT_TRUE(res.first_failure.has_value());
    EXPECT_EQ(*res.first_failure, 0u);
    for (const auto& n : res.nodes) {
        EXPECT_TRUE(n.status == SolveStatus::EscapedBall || n.status == SolveStatus::HorizonReached);
    }
}

TEST(InjectivitySweep, KeepsTracesOnRequest) {
    const auto res = dsm::injectivity_sweep(builtin("identity"), {vec({0.0}), vec({1.0}), 3},
                                            vec({0.5}), FlowConfig{}, 1e-7, true);
    for (const auto& n : res.nodes) ASSERT_TRUE(n.trace.has_value());
    EXPECT_EQ(res.nodes[1].trace->size(), 1u);  // s = 0.5 starts at the root
}

TEST(InjectivitySweep, DistinctLimitsGiveFalseVerdict) {
    // sin has many preimages of 0; nodes near 0 and pi flow to different roots.
    const NonlinearProblem sine("sine", 1, [](const Vector& u) { return Vector(u.array().sin()); },
                                [](const Vector& u) { return dsm::Matrix::Constant(1, 1, std::cos(u[0])); });
    const auto res = dsm::injectivity_sweep(sine, {vec({0.2}), vec({3.0}), 2}, vec({0.0}), FlowConfig{}, 1e-7);
    EXPECT_EQ(res.nodes[0].status, SolveStatus::Converged);
    EXPECT_EQ(res.nodes[1].status, SolveStatus::Converged);
    EXPECT_FALSE(res.injective_verdict);
    EXPECT_NEAR(res.max_limit_spread, M_PI, 1e-7);
    EXPECT_EQ(res.first_failure.value_or(99), 1u);
}

TEST(InjectivitySweep, RefinementKeepsTrueVerdicts) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (const char* name : {"identity", "linear_spd", "monotone_cubic", "trig_perturbed"}) {
        const auto p = builtin(name, 2);
        for (int trial = 0; trial < 3; ++trial) {
            const Vector a = vec({U(rng), U(rng)}), b = vec({U(rng), U(rng)}), f = vec({U(rng), U(rng)});
            const auto coarse = dsm::injectivity_sweep(p, {a, b, 11}, f, FlowConfig{}, 1e-7);
            const auto fine = dsm::injectivity_sweep(p, {a, b, 21}, f, FlowConfig{}, 1e-7);
            EXPECT_TRUE(coarse.injective_verdict) << name;
            EXPECT_TRUE(fine.injective_verdict) << name;
        }
    }
}

FlowConfig stability_config() {
    // eta(t) must stay resolvable against rounding in u, so the flows stop at
    // g = 1e-6.
    FlowConfig cfg;
    cfg.residual_tol = 1e-6;
    return cfg;
}

TEST(StabilityCheck, IdentityIsExactlyContractive) {
    const auto rep = dsm::stability_check(builtin("identity"), vec({2.0}), vec({1.0}), 1e-3,
                                          vec({1.0}), stability_config());
    EXPECT_TRUE(rep.applicable);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.sup_ratio, 1.0, 1e-6);
    EXPECT_NEAR(rep.decay_c3, 1.0, 1e-6);
}

TEST(StabilityCheck, CubicNearRoot) {
    const auto p = builtin("monotone_cubic");
    const auto rep = dsm::stability_check(p, vec({0.5}), vec({1.0}), 1e-4, vec({2.0}), stability_config());
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(rep.sup_ratio, 10.0);
    EXPECT_TRUE(std::isfinite(rep.decay_c3));
    const auto a = dsm::solve_dsm(p, vec({0.5}), vec({2.0}));
    const auto b = dsm::solve_dsm(p, vec({0.5 + 1e-4}), vec({2.0}));
    EXPECT_NEAR(a.u_final[0], 1.0, 1e-7);
    EXPECT_NEAR(b.u_final[0], 1.0, 1e-7);
}

TEST(StabilityCheck, ZeroDeltaByConvention) {
    const auto rep = dsm::stability_check(builtin("identity"), vec({2.0}), vec({1.0}), 0.0,
                                          vec({1.0}), stability_config());
    EXPECT_EQ(rep.sup_ratio, 0.0);
    EXPECT_EQ(rep.decay_c3, 0.0);
    EXPECT_TRUE(rep.pass);
}

TEST(StabilityCheck, InapplicableWhenFlowDiverges) {
    FlowConfig cfg = stability_config();
    cfg.escape_radius = 5.0;
    const auto rep = dsm::stability_check(builtin("scalar_exp"), vec({0.0}), vec({1.0}), 1e-3,
                                          vec({0.0}), cfg);
    EXPECT_FALSE(rep.applicable);
    EXPECT_FALSE(rep.pass);
}

TEST(StabilityCheck, RejectsBadDirection) {
    EXPECT_THROW((void)dsm::stability_check(builtin("identity"), vec({2.0}), vec({2.0}), 1e-3,
                                            vec({1.0}), stability_config()),
                 dsm::ContractViolation);
    EXPECT_THROW((void)dsm::stability_check(builtin("identity"), vec({2.0}), vec({1.0}), -1e-3,
                                            vec({1.0}), stability_config()),
                 dsm::ContractViolation);
}

TEST(StabilityCheck, DecayBoundedAcrossSuite) {
    std::mt19937_64 rng(77);
    for (const char* name : {"linear_spd", "monotone_cubic", "trig_perturbed", "coupled_2d"}) {
        const auto& d = *dsm::find_problem(name);
        const auto p = d.problem(2);
        const auto start = dsm::sample_ball(d.start_region(2), 2, rng())[1];
        Vector dir = vec({1.0, 1.0}).normalized();
        Vector f = d.known_root->f.size() == 2 ? d.known_root->f : Vector::Constant(2, d.known_root->f[0]);
        const auto rep = dsm::stability_check(p, start, dir, 1e-4, f, stability_config());
        EXPECT_TRUE(rep.applicable) << name;
        EXPECT_TRUE(std::isfinite(rep.decay_c3)) << name;
        EXPECT_TRUE(rep.pass) << name;
    }
}

}  // namespace
