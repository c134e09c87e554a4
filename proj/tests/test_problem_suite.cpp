#include "dsm/problem_suite.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace {

using dsm::Ball;
using dsm::ProblemTag;
using dsm::Vector;
using dsm::suite::vec;

TEST(Registry, ListsRequiredProblems) {
    std::set<std::string> names;
    for (const auto& d : dsm::registry_list()) names.insert(d.name);
    for (const char* want : {"identity", "linear_spd", "scalar_exp", "monotone_cubic",
                             "trig_perturbed", "coupled_2d"}) {
        EXPECT_TRUE(names.count(want)) << want;
    }
    EXPECT_GE(dsm::registry_list().size(), 6u);
    EXPECT_EQ(dsm::find_problem("nope"), nullptr);
}

TEST(Registry, ScalarExpIsTheCounterexample) {
    const auto& d = *dsm::find_problem("scalar_exp");
    EXPECT_TRUE(d.has_tag(ProblemTag::Counterexample));
    EXPECT_FALSE(d.has_tag(ProblemTag::Surjective));
    ASSERT_TRUE(d.known_m.has_value());
    for (double R : {0.5, 1.0, 3.0}) {
        EXPECT_DOUBLE_EQ(d.known_m->m(Ball(vec({0.0}), R)), std::exp(R));
    }
    EXPECT_FALSE(d.root_for(vec({0.0})).has_value());
}

TEST(Registry, IdentityRoot) {
    const auto& d = *dsm::find_problem("identity");
    EXPECT_EQ(*d.root_for(vec({7.0})), vec({7.0}));
    EXPECT_EQ(d.known_root->root, vec({7.0}));
}

TEST(Registry, CubicRootMatchesBisection) {
    const auto& d = *dsm::find_problem("monotone_cubic");
    EXPECT_NEAR((*d.root_for(vec({2.0})))[0], 1.0, 1e-15);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-50.0, 50.0);
    for (int k = 0; k < 50; ++k) {
        const double y = U(rng);
        const double want = dsm::oracle::bisect([y](double u) { return u + u * u * u - y; }, -10, 10);
        EXPECT_NEAR((*d.root_for(vec({y})))[0], want, 1e-12 * (1 + std::abs(want)));
    }
}

TEST(Registry, KnownRootsSolveTheirEquations) {
    for (const auto& d : dsm::registry_list()) {
        ASSERT_TRUE(d.known_root.has_value()) << d.name;
        const auto p = d.problem(static_cast<std::size_t>(d.known_root->root.size()));
        EXPECT_LE(dsm::evaluate_residual(p, d.known_root->root, d.known_root->f).g, 1e-12) << d.name;
    }
}

TEST(Registry, RootForSolvesRandomRightHandSides) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-4.0, 4.0);
    for (const auto& d : dsm::registry_list()) {
        if (!d.root_for) continue;
        const std::size_t n = d.fixed_dimension ? *d.fixed_dimension : 3;
        const auto p = d.problem(n);
        for (int k = 0; k < 20; ++k) {
            Vector f = Vector::NullaryExpr(static_cast<Eigen::Index>(n), [&] { return U(rng); });
            if (d.name == "scalar_exp") f = f.array().abs() + 0.01;
            const auto root = d.root_for(f);
            ASSERT_TRUE(root.has_value()) << d.name;
            EXPECT_LE(dsm::evaluate_residual(p, *root, f).g, 1e-12 * (1 + f.norm())) << d.name;
        }
    }
}

TEST(Registry, TrigInverseBoundedByTwo) {
    const auto p = dsm::find_problem("trig_perturbed")->problem(3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-20.0, 20.0), R(0.0, 10.0);
    for (int k = 0; k < 20; ++k) {
        const Ball ball(vec({U(rng), U(rng), U(rng)}), R(rng));
        EXPECT_LE(dsm::estimate_m(p, ball, 200, rng()).m_hat, 2.0);
    }
}

TEST(Registry, KnownMFormulasAgreeWithDenseSampling) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> C(-3.0, 3.0), R(0.1, 4.0);
    for (const auto& d : dsm::registry_list()) {
        if (!d.known_m || !d.accepts_dimension(1)) continue;
        const auto p = d.problem(1);
        for (int k = 0; k < 10; ++k) {
            const Ball ball(vec({d.name == "scalar_exp" ? 0.0 : C(rng)}), R(rng));
            const double est = dsm::estimate_m(p, ball, 10, 1).m_hat;
            const double exact = d.known_m->m(ball);
            // Sampling is a lower bound, tight to grid resolution in 1-D.
            EXPECT_LE(est, exact * (1 + 1e-12)) << d.name;
            EXPECT_GE(est, exact * (1 - 1e-3)) << d.name;
        }
    }
}

TEST(Registry, KnownMFormulasBoundSamplingInFixedDimension) {
    for (const auto& d : dsm::registry_list()) {
        if (!d.known_m || d.accepts_dimension(1)) continue;
        const auto p = d.problem();
        const Ball ball(Vector::Zero(static_cast<Eigen::Index>(*d.fixed_dimension)), 1.5);
        EXPECT_LE(dsm::estimate_m(p, ball, 500, 3).m_hat, d.known_m->m(ball) * (1 + 1e-12)) << d.name;
    }
}

TEST(Registry, TrigMFormulaInMultipleDimensions) {
    const auto& d = *dsm::find_problem("trig_perturbed");
    // Interval [2, 2.5] per axis: cos is decreasing there, min at 2.5.
    EXPECT_DOUBLE_EQ(d.known_m->m(Ball(vec({2.25, 0.0}), 0.25)), 1.0 / (1.0 + 0.5 * std::cos(2.5)));
    EXPECT_DOUBLE_EQ(d.known_m->m(Ball(vec({0.0, 3.0}), 0.2)), 2.0);
}

TEST(Registry, CoupledJacobianNonsingularOnValidRegion) {
    const auto& d = *dsm::find_problem("coupled_2d");
    ASSERT_TRUE(d.valid_region.has_value());
    const auto p = d.problem();
    for (const auto& u : dsm::sample_ball(*d.valid_region, 2000, 3)) {
        EXPECT_GT(p.jacobian(u).determinant(), 0.8);
    }
    EXPECT_TRUE(d.valid_region->contains(d.start_region(2).center, -d.start_region(2).radius));
}

TEST(Registry, DimensionRules) {
    EXPECT_THROW((void)dsm::find_problem("linear_spd")->problem(3), dsm::ContractViolation);
    EXPECT_NO_THROW((void)dsm::find_problem("identity")->problem(5));
    EXPECT_FALSE(dsm::find_problem("scalar_exp")->accepts_dimension(2));
}

}  // namespace
