#pragma once

/**
 * @file newton_flow.hpp
 * @brief Integration of the continuous Newton flow
 *
 *     u'(t) = -[F'(u)]^{-1} (F(u) - f),   u(0) = u0,
 *
 * with an adaptive Dormand-Prince 5(4) pair. Along the exact flow the residual
 * g(t) = |F(u(t)) - f| obeys g(t) = g(0) e^{-t} for every problem, which is what
 * check_residual_law measures on a recorded trajectory.
 */

#include "dsm/dopri5.hpp"
#include "dsm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsm {

struct FlowConfig {
    Real residual_tol = 1e-10;
    Real t_max = 40.0;
    Real rk_rel_tol = 1e-10;
    Real rk_abs_tol = 1e-12;
    Real max_step = 0.02;
    Real min_step = 1e-12;
    Real initial_step = 1e-2;
    Real safety = 0.9;
    std::optional<Real> escape_radius;

    void validate() const {
        auto positive = [](Real x) { return x > 0.0 && std::isfinite(x); };
        if (!positive(residual_tol) || !positive(t_max) || !positive(rk_rel_tol) ||
            !positive(rk_abs_tol) || !positive(max_step) || !positive(min_step) ||
            !positive(initial_step)) {
            throw ContractViolation("FlowConfig: tolerances, horizon and step bounds must be > 0");
        }
        if (min_step > max_step) throw ContractViolation("FlowConfig: min_step > max_step");
        if (!(safety > 0.0 && safety <= 1.0)) throw ContractViolation("FlowConfig: safety in (0,1]");
        if (escape_radius && !(*escape_radius >= 0.0)) {
            throw ContractViolation("FlowConfig: escape_radius must be >= 0");
        }
    }
};

struct TrajectoryPoint {
    Real t = 0.0;
    Vector u;
    Real g = 0.0;
    Real velocity_norm = 0.0;
    /// Full u'(t); kept for dense output.
    Vector velocity;
    bool step_accepted = true;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::size_t rejected_steps = 0;

    [[nodiscard]] bool empty() const noexcept { return points.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] const TrajectoryPoint& front() const { return points.front(); }
    [[nodiscard]] const TrajectoryPoint& back() const { return points.back(); }
};

enum class SolveStatus { Converged, EscapedBall, HorizonReached, SingularJacobian };

[[nodiscard]] constexpr std::string_view to_string(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::EscapedBall: return "EscapedBall";
        case SolveStatus::HorizonReached: return "HorizonReached";
        case SolveStatus::SingularJacobian: return "SingularJacobian";
    }
    return "Unknown";
}

struct SolveResult {
    SolveStatus status = SolveStatus::HorizonReached;
    Trajectory trajectory;
    Vector u_final;
    Real g_final = 0.0;
    std::string message;
};

namespace detail {

struct Direction {
    Vector v;  ///< solves F'(u) v = F(u) - f
    Real g = 0.0;
};

inline Direction newton_direction_with_residual(const NonlinearProblem& problem, const Vector& u,
                                                const Vector& f) {
    Residual r = evaluate_residual(problem, u, f);
    const Matrix jac = problem.jacobian(u);
    const Real jac_norm = jac.cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::PartialPivLU<Matrix> lu(jac);
    const Real pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (jac_norm == 0.0 || pivot < 1e-12 * jac_norm) {
        throw SingularJacobianError(u, pivot);
    }
    return {lu.solve(r.residual), r.g};
}

}  // namespace detail

/// Solves F'(u) v = F(u) - f by LU with partial pivoting. The flow velocity is -v.
///
/// Throws SingularJacobianError when the smallest pivot falls below
/// 1e-12 * |F'(u)|_inf.
[[nodiscard]] inline Vector newton_direction(const NonlinearProblem& problem, const Vector& u,
                                             const Vector& f) {
    return detail::newton_direction_with_residual(problem, u, f).v;
}

/// Integrates the Newton flow from u0 until g <= residual_tol, the escape
/// radius is exceeded, t_max is reached, or the linear solve fails.
/// Mathematical failures are reported through SolveResult::status.
[[nodiscard]] inline SolveResult solve_dsm(const NonlinearProblem& problem, const Vector& u0,
                                           const Vector& f, const FlowConfig& config = {}) {
    config.validate();
    require_state(u0, "solve_dsm(u0)");
    require_state(f, "solve_dsm(f)");
    require_dimension(u0, problem.dimension(), "solve_dsm(u0)");
    require_dimension(f, problem.dimension(), "solve_dsm(f)");

    SolveResult result;
    result.u_final = u0;

    auto rhs = [&](const Vector& y) -> Vector {
        return -detail::newton_direction_with_residual(problem, y, f).v;
    };

    detail::Direction start;
    try {
        start = detail::newton_direction_with_residual(problem, u0, f);
    } catch (const SingularJacobianError& e) {
        result.status = SolveStatus::SingularJacobian;
        result.g_final = evaluate_residual(problem, u0, f).g;
        result.message = e.what();
        return result;
    }

    Vector u = u0;
    Vector du = -start.v;
    Real t = 0.0;
    result.trajectory.points.push_back({t, u, start.g, du.norm(), du, true});
    result.g_final = start.g;
    if (start.g <= config.residual_tol) {
        result.status = SolveStatus::Converged;
        return result;
    }

    rk::PiController controller(config.safety);
    Real h = std::min(config.initial_step, config.max_step);

    while (true) {
        const Real remaining = config.t_max - t;
        const bool last_step = h >= remaining;
        const Real step = last_step ? remaining : h;

        std::optional<rk::StepResult> trial;
        Real err = std::numeric_limits<Real>::infinity();
        try {
            trial = rk::dopri5_step(rhs, u, du, step);
            err = rk::error_norm(trial->error, u, trial->y, config.rk_rel_tol, config.rk_abs_tol);
        } catch (const SingularJacobianError&) {
            trial.reset();
        } catch (const EvaluationError&) {
            trial.reset();
        }

        const Real proposed = controller.next(step, err);
        if (!trial || !(err <= 1.0)) {
            ++result.trajectory.rejected_steps;
            h = std::min(proposed, config.max_step);
            if (h < config.min_step) {
                result.status = SolveStatus::SingularJacobian;
                result.message = "step size fell below min_step at t=" + std::to_string(t);
                return result;
            }
            continue;
        }

        t = last_step ? config.t_max : t + step;
        u = std::move(trial->y);
        du = std::move(trial->dy_end);
        const Real g = evaluate_residual(problem, u, f).g;
        result.trajectory.points.push_back({t, u, g, du.norm(), du, true});
        result.u_final = u;
        result.g_final = g;

        if (g <= config.residual_tol) {
            result.status = SolveStatus::Converged;
            return result;
        }
        if (config.escape_radius && (u - u0).norm() > *config.escape_radius) {
            result.status = SolveStatus::EscapedBall;
            return result;
        }
        if (last_step) {
            result.status = SolveStatus::HorizonReached;
            return result;
        }
        h = std::min(proposed, config.max_step);
    }
}

/// State at time t by cubic Hermite interpolation between recorded points.
/// Times outside the recorded span clamp to the end points.
[[nodiscard]] inline Vector dense_state(const Trajectory& traj, Real t) {
    if (traj.empty()) throw ContractViolation("dense_state: empty trajectory");
    const auto& pts = traj.points;
    if (t <= pts.front().t) return pts.front().u;
    if (t >= pts.back().t) return pts.back().u;
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](Real x, const TrajectoryPoint& p) { return x < p.t; });
    const TrajectoryPoint& b = *it;
    const TrajectoryPoint& a = *(it - 1);
    const Real h = b.t - a.t;
    if (h <= 0.0) return b.u;
    const Real s = (t - a.t) / h;
    const Real s2 = s * s;
    const Real s3 = s2 * s;
    const Real h00 = 2 * s3 - 3 * s2 + 1;
    const Real h10 = s3 - 2 * s2 + s;
    const Real h01 = -2 * s3 + 3 * s2;
    const Real h11 = s3 - s2;
    return h00 * a.u + h10 * h * a.velocity + h01 * b.u + h11 * h * b.velocity;
}

struct ResidualLawReport {
    Real slope = 0.0;
    Real max_deviation = 0.0;
    bool pass = false;
    std::size_t points_used = 0;
};

/// Least-squares slope of ln g(t) against t, plus the largest pointwise
/// deviation from ln g(0) - t. Passes iff |slope + 1| <= slope_tol and the
/// deviation is at most 10 * slope_tol.
[[nodiscard]] inline ResidualLawReport check_residual_law(const Trajectory& traj, Real slope_tol) {
    if (!(slope_tol > 0.0)) throw ContractViolation("check_residual_law: slope_tol must be > 0");
    std::size_t usable = 0;
    while (usable < traj.size() && traj.points[usable].g > 0.0) ++usable;
    if (usable < 10) {
        throw InsufficientDataError("check_residual_law: need >= 10 points with g > 0, have " +
                                    std::to_string(usable));
    }
    const Real t0 = traj.points.front().t;
    const Real log_g0 = std::log(traj.points.front().g);
    Real mean_t = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < usable; ++i) {
        mean_t += traj.points[i].t - t0;
        mean_y += std::log(traj.points[i].g);
    }
    mean_t /= static_cast<Real>(usable);
    mean_y /= static_cast<Real>(usable);

    Real sxy = 0.0, sxx = 0.0, dev = 0.0;
    for (std::size_t i = 0; i < usable; ++i) {
        const Real dt = traj.points[i].t - t0;
        const Real y = std::log(traj.points[i].g);
        sxy += (dt - mean_t) * (y - mean_y);
        sxx += (dt - mean_t) * (dt - mean_t);
        dev = std::max(dev, std::abs(y - (log_g0 - dt)));
    }
    if (sxx == 0.0) throw InsufficientDataError("check_residual_law: all points share one time");

    ResidualLawReport rep;
    rep.slope = sxy / sxx;
    rep.max_deviation = dev;
    rep.points_used = usable;
    rep.pass = std::abs(rep.slope + 1.0) <= slope_tol && dev <= 10.0 * slope_tol;
    return rep;
}

}  // namespace dsm
