#include "dsm/dopri5.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using dsm::Vector;

double integrate_decay(double h, int steps) {
    auto rhs = [](const Vector& y) { return Vector(-y); };
    Vector y = Vector::Constant(1, 1.0);
    Vector dy = rhs(y);
    for (int k = 0; k < steps; ++k) {
        auto s = dsm::rk::dopri5_step(rhs, y, dy, h);
        y = s.y;
        dy = s.dy_end;
    }
    return y[0];
}

TEST(Dopri5, FifthOrderConvergence) {
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(integrate_decay(0.2, 5) - exact);
    const double e2 = std::abs(integrate_decay(0.1, 10) - exact);
    // Global error O(h^5): halving h divides the error by ~32.
    EXPECT_NEAR(std::log2(e1 / e2), 5.0, 0.3);
}

TEST(Dopri5, ErrorEstimateIsFourthOrderLocal) {
    auto rhs = [](const Vector& y) { return Vector(-y); };
    const Vector y = Vector::Constant(1, 1.0);
    const double big = dsm::rk::dopri5_step(rhs, y, rhs(y), 0.2).error.norm();
    const double small = dsm::rk::dopri5_step(rhs, y, rhs(y), 0.1).error.norm();
    EXPECT_NEAR(std::log2(big / small), 5.0, 0.3);
}

TEST(Dopri5, FsalDerivativeMatchesRhs) {
    auto rhs = [](const Vector& y) { return Vector(y.array().sin()); };
    Vector y(2);
    y << 0.3, -1.1;
    const auto s = dsm::rk::dopri5_step(rhs, y, rhs(y), 0.05);
    EXPECT_LE((s.dy_end - rhs(s.y)).norm(), 0.0);
}

TEST(PiController, ShrinksOnRejectionGrowsOnSmallError) {
    dsm::rk::PiController c;
    EXPECT_LT(c.next(0.1, 4.0), 0.1);
    // No growth right after a rejection.
    EXPECT_LE(c.next(0.1, 1e-6), 0.1);
    EXPECT_GT(c.next(0.1, 1e-6), 0.1);
    EXPECT_LE(c.next(0.1, 1e-12), 0.5 + 1e-15);
    EXPECT_NEAR(c.next(0.1, std::nan("")), 0.02, 1e-15);
}

}  // namespace
