#pragma once

/**
 * @file dopri5.hpp
 * @brief Dormand-Prince 5(4) embedded pair and a PI step-size controller for
 * autonomous systems y' = rhs(y).
 *
 * The fifth-order solution is propagated (local extrapolation); the difference
 * to the embedded fourth-order solution drives step control.
 */

#include "dsm/types.hpp"

#include <algorithm>
#include <cmath>

namespace dsm::rk {

namespace tableau {
// Nodes c2..c6 (c7 = 1) are implicit in the autonomous form.
inline constexpr Real a21 = 1.0 / 5.0;
inline constexpr Real a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr Real a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr Real a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                      a54 = -212.0 / 729.0;
inline constexpr Real a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                      a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr Real b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                      b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - b* (fifth minus fourth order weights).
inline constexpr Real e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                      e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
}  // namespace tableau

/// Result of one trial step. `dy_end` = rhs(y) at the new point (FSAL).
struct StepResult {
    Vector y;
    Vector dy_end;
    Vector error;
};

/// One Dormand-Prince step of size h from (y, dy = rhs(y)).
template <class Rhs>
[[nodiscard]] StepResult dopri5_step(Rhs&& rhs, const Vector& y, const Vector& dy, Real h) {
    using namespace tableau;
    const Vector& k1 = dy;
    const Vector k2 = rhs(Vector(y + h * (a21 * k1)));
    const Vector k3 = rhs(Vector(y + h * (a31 * k1 + a32 * k2)));
    const Vector k4 = rhs(Vector(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Vector k5 = rhs(Vector(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Vector k6 = rhs(Vector(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    StepResult out;
    out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    out.dy_end = rhs(out.y);
    out.error = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.dy_end);
    return out;
}

/// Scaled RMS error norm with per-component scale atol + rtol * max(|y|, |y_new|).
[[nodiscard]] inline Real error_norm(const Vector& error, const Vector& y, const Vector& y_new,
                                     Real rtol, Real atol) {
    const Vector scale = (atol + rtol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array()).matrix();
    return std::sqrt((error.cwiseQuotient(scale)).squaredNorm() / static_cast<Real>(error.size()));
}

/// Proportional-integral step-size controller (exponents 0.7/5, 0.4/5).
class PiController {
public:
    explicit PiController(Real safety = 0.9) : safety_(safety) {}

    /// Next step size after a trial of size h with scaled error err.
    /// An accepted step is one with err <= 1.
    [[nodiscard]] Real next(Real h, Real err) {
        constexpr Real alpha = 0.7 / 5.0;
        constexpr Real beta = 0.4 / 5.0;
        constexpr Real min_factor = 0.2;
        constexpr Real max_factor = 5.0;
        if (!std::isfinite(err)) {
            rejected_last_ = true;
            return h * min_factor;
        }
        const Real e = std::max(err, 1e-10);
        if (err <= 1.0) {
            Real factor = safety_ * std::pow(e, -alpha) * std::pow(err_prev_, beta);
            factor = std::clamp(factor, min_factor, max_factor);
            if (rejected_last_) factor = std::min(factor, 1.0);
            err_prev_ = std::max(err, 1e-4);
            rejected_last_ = false;
            return h * factor;
        }
        rejected_last_ = true;
        return h * std::max(min_factor, safety_ * std::pow(e, -1.0 / 5.0));
    }

private:
    Real safety_;
    Real err_prev_ = 1e-4;
    bool rejected_last_ = false;
};

}  // namespace dsm::rk
