#pragma once

/**
 * @file certificates.hpp
 * @brief Sampled estimates of the derivative bounds over a ball and the
 * machine-checkable conditions built from them.
 *
 *   m(R)  = sup_{u in B(u0,R)} |[F'(u)]^{-1}|   (= sup 1/sigma_min)
 *   M1(R) = sup |F'(u)|,  M2(R) = sup |F''(u)|
 *
 * Sampling only ever sees finitely many points, so every estimate here is a
 * lower bound on the true supremum. Certificates carry `empirical = true` to
 * say so. In one dimension a 1001-point grid across the interval is added,
 * which makes the estimate tight to grid resolution.
 */

#include "dsm/newton_flow.hpp"
#include "dsm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace dsm {

inline constexpr Real kInf = std::numeric_limits<Real>::infinity();

// ---------------------------------------------------------------------------
// Spectral helpers
// ---------------------------------------------------------------------------

struct SpectralExtremes {
    Real sigma_max = 0.0;
    Real sigma_min = 0.0;
    /// |A^{-1}| = 1/sigma_min, +inf when A is numerically singular.
    Real inverse_norm = kInf;
};

/// Extreme singular values from a full SVD. A matrix with
/// sigma_min < 1e-14 * sigma_max is treated as singular.
[[nodiscard]] inline SpectralExtremes spectral_extremes(const Matrix& a) {
    const Eigen::JacobiSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    SpectralExtremes out;
    out.sigma_max = s(0);
    out.sigma_min = s(s.size() - 1);
    const bool singular = out.sigma_max == 0.0 || out.sigma_min < 1e-14 * out.sigma_max;
    out.inverse_norm = singular ? kInf : 1.0 / out.sigma_min;
    return out;
}

[[nodiscard]] inline Real spectral_norm(const Matrix& a) {
    return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

// ---------------------------------------------------------------------------
// Ball sampling
// ---------------------------------------------------------------------------

/// Deterministic points in the ball: the center first, then uniform draws
/// (normalized Gaussian direction times radius * U^{1/n}). A larger count with
/// the same seed extends the sequence of a smaller one.
[[nodiscard]] inline std::vector<Vector> sample_ball(const Ball& ball, std::size_t count,
                                                     std::uint64_t seed) {
    std::vector<Vector> pts;
    if (count == 0) return pts;
    pts.reserve(count);
    pts.push_back(ball.center);
    const auto n = ball.center.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<Real> normal(0.0, 1.0);
    std::uniform_real_distribution<Real> uniform(0.0, 1.0);
    while (pts.size() < count) {
        Vector dir(n);
        for (Eigen::Index i = 0; i < n; ++i) dir[i] = normal(rng);
        const Real len = dir.norm();
        const Real u = uniform(rng);
        if (len == 0.0) continue;
        const Real r = ball.radius * std::pow(u, 1.0 / static_cast<Real>(n));
        pts.push_back(ball.center + (r / len) * dir);
    }
    return pts;
}

/// 1001 equally spaced points across [c - R, c + R] for scalar problems.
[[nodiscard]] inline std::vector<Vector> interval_grid(const Ball& ball, std::size_t points = 1001) {
    std::vector<Vector> grid;
    if (ball.center.size() != 1) return grid;
    if (ball.radius == 0.0) return {ball.center};
    const Real lo = ball.center[0] - ball.radius;
    const Real hi = ball.center[0] + ball.radius;
    grid.reserve(points);
    for (std::size_t k = 0; k < points; ++k) {
        const Real s = static_cast<Real>(k) / static_cast<Real>(points - 1);
        Vector p(1);
        p[0] = k + 1 == points ? hi : lo + s * (hi - lo);
        grid.push_back(std::move(p));
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Condition estimates
// ---------------------------------------------------------------------------

struct ConditionEstimate {
    Ball ball;
    Real m_hat = 0.0;
    Real M1_hat = 0.0;
    std::optional<Real> M2_hat;
    std::size_t sample_count = 0;
    std::size_t grid_points = 0;
    Vector witness_m;
    Vector witness_M1;
    std::optional<Vector> witness_M2;
    bool empirical = true;
    bool singular_sample = false;
};

namespace detail {

inline void validate_sampling(const NonlinearProblem& problem, const Ball& ball,
                              std::size_t sample_count) {
    if (sample_count < 1) throw ContractViolation("estimate: sample_count must be >= 1");
    require_state(ball.center, "estimate(ball.center)");
    require_dimension(ball.center, problem.dimension(), "estimate(ball.center)");
}

inline std::vector<Vector> estimation_points(const Ball& ball, std::size_t sample_count,
                                             std::uint64_t seed, std::size_t& grid_points) {
    std::vector<Vector> pts = sample_ball(ball, sample_count, seed);
    std::vector<Vector> grid = interval_grid(ball);
    grid_points = grid.size();
    pts.insert(pts.end(), std::make_move_iterator(grid.begin()),
               std::make_move_iterator(grid.end()));
    return pts;
}

inline ConditionEstimate first_order_bounds(const NonlinearProblem& problem, const Ball& ball,
                                            const std::vector<Vector>& pts) {
    ConditionEstimate est;
    est.ball = ball;
    est.m_hat = -1.0;
    est.M1_hat = -1.0;
    for (const Vector& u : pts) {
        const SpectralExtremes s = spectral_extremes(problem.jacobian(u));
        if (s.inverse_norm == kInf) est.singular_sample = true;
        if (s.inverse_norm > est.m_hat) {
            est.m_hat = s.inverse_norm;
            est.witness_m = u;
        }
        if (s.sigma_max > est.M1_hat) {
            est.M1_hat = s.sigma_max;
            est.witness_M1 = u;
        }
    }
    return est;
}

}  // namespace detail

/// Sampled m(R) and M1(R) over the ball. A singular Jacobian at any sample
/// makes m_hat = +inf with that sample as witness.
[[nodiscard]] inline ConditionEstimate estimate_m(const NonlinearProblem& problem, const Ball& ball,
                                                  std::size_t sample_count, std::uint64_t seed) {
    detail::validate_sampling(problem, ball, sample_count);
    std::size_t grid = 0;
    const auto pts = detail::estimation_points(ball, sample_count, seed, grid);
    ConditionEstimate est = detail::first_order_bounds(problem, ball, pts);
    est.sample_count = sample_count;
    est.grid_points = grid;
    return est;
}

/// estimate_m plus M2_hat: the largest spectral norm of the central
/// difference (F'(u + h d) - F'(u - h d)) / 2h over sampled points u and unit
/// directions d, with h = 1e-4 (1 + |u|).
[[nodiscard]] inline ConditionEstimate estimate_derivative_bounds(const NonlinearProblem& problem,
                                                                  const Ball& ball,
                                                                  std::size_t sample_count,
                                                                  std::uint64_t seed) {
    detail::validate_sampling(problem, ball, sample_count);
    std::size_t grid = 0;
    const auto pts = detail::estimation_points(ball, sample_count, seed, grid);
    ConditionEstimate est = detail::first_order_bounds(problem, ball, pts);
    est.sample_count = sample_count;
    est.grid_points = grid;

    // Directions come from their own stream so the sample points match estimate_m.
    std::mt19937_64 dir_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<Real> normal(0.0, 1.0);
    const auto n = ball.center.size();
    Real best = -1.0;
    for (const Vector& u : pts) {
        Vector d(n);
        if (n == 1) {
            d[0] = 1.0;
        } else {
            do {
                for (Eigen::Index i = 0; i < n; ++i) d[i] = normal(dir_rng);
            } while (d.norm() == 0.0);
            d.normalize();
        }
        const Real h = 1e-4 * (1.0 + u.norm());
        const Matrix second = (problem.jacobian(u + h * d) - problem.jacobian(u - h * d)) / (2.0 * h);
        const Real nrm = spectral_norm(second);
        if (nrm > best) {
            best = nrm;
            est.witness_M2 = u;
        }
    }
    est.M2_hat = best;
    return est;
}

/// max over the recorded points of |[F'(u)]^{-1}|.
[[nodiscard]] inline Real realized_inverse_bound(const NonlinearProblem& problem,
                                                 const Trajectory& traj) {
    Real m = 0.0;
    for (const auto& p : traj.points) {
        m = std::max(m, spectral_extremes(problem.jacobian(p.u)).inverse_norm);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

enum class CertificateKind { TrapBall, Surjectivity, Hadamard };

[[nodiscard]] constexpr std::string_view to_string(CertificateKind k) noexcept {
    switch (k) {
        case CertificateKind::TrapBall: return "TrapBall";
        case CertificateKind::Surjectivity: return "Surjectivity";
        case CertificateKind::Hadamard: return "Hadamard";
    }
    return "Unknown";
}

using WitnessValue = std::variant<Real, Vector, std::string>;
using WitnessMap = std::map<std::string, WitnessValue>;

struct Certificate {
    CertificateKind kind = CertificateKind::TrapBall;
    bool holds = false;
    bool empirical = false;
    WitnessMap witnesses;
    WitnessMap inputs_digest;

    [[nodiscard]] Real real(const std::string& key) const {
        return std::get<Real>(witnesses.at(key));
    }
    [[nodiscard]] const Vector& vec(const std::string& key) const {
        return std::get<Vector>(witnesses.at(key));
    }
};

/// Trap-ball condition m(R) g(0) <= R (inclusive). +inf m_hat never holds.
[[nodiscard]] inline Certificate trap_ball_check(Real m_hat, Real g0, Real R) {
    if (std::isnan(m_hat) || !(g0 >= 0.0) || !(R > 0.0)) {
        throw ContractViolation("trap_ball_check: need m_hat not NaN, g0 >= 0, R > 0");
    }
    Certificate c;
    c.kind = CertificateKind::TrapBall;
    const Real bound = m_hat == kInf ? kInf : m_hat * g0;
    c.holds = bound <= R;
    c.witnesses = {{"m_hat", m_hat}, {"g0", g0}, {"R", R}, {"slack", R - bound}};
    c.inputs_digest = {{"m_hat", m_hat}, {"g0", g0}, {"R", R}};
    return c;
}

namespace detail {

inline bool surjectivity_verdict(const Vector& r_grid, const Vector& ratios, Real& growth,
                                 Real& required) {
    const auto last = r_grid.size() - 1;
    required = std::sqrt(r_grid[last] / r_grid[0]);
    if (ratios[0] > 0.0) {
        growth = ratios[last] / ratios[0];
    } else {
        growth = ratios[last] > 0.0 ? kInf : 0.0;
    }
    return last > 0 && growth >= required;
}

}  // namespace detail

/// Tabulates R / m_hat(R) over the grid. The verdict is a heuristic
/// unboundedness indicator: it holds iff the ratio at the largest R exceeds
/// the ratio at the smallest R by at least sqrt(R_max / R_min). A single-point
/// grid never holds.
[[nodiscard]] inline Certificate surjectivity_scan(const NonlinearProblem& problem, const Vector& u0,
                                                   const std::vector<Real>& r_grid,
                                                   std::size_t sample_count, std::uint64_t seed) {
    if (r_grid.empty()) throw ContractViolation("surjectivity_scan: empty R grid");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0) || !std::isfinite(r_grid[i])) {
            throw ContractViolation("surjectivity_scan: radii must be positive and finite");
        }
        if (i > 0 && !(r_grid[i] > r_grid[i - 1])) {
            throw ContractViolation("surjectivity_scan: R grid must be strictly increasing");
        }
    }
    const auto k = static_cast<Eigen::Index>(r_grid.size());
    Vector radii(k), m_hats(k), ratios(k);
    Real max_ratio = -1.0, argmax = r_grid.front();
    for (Eigen::Index i = 0; i < k; ++i) {
        const Real R = r_grid[static_cast<std::size_t>(i)];
        const ConditionEstimate est = estimate_m(problem, Ball(u0, R), sample_count, seed);
        radii[i] = R;
        m_hats[i] = est.m_hat;
        ratios[i] = est.m_hat == kInf ? 0.0 : R / est.m_hat;
        if (ratios[i] > max_ratio) {
            max_ratio = ratios[i];
            argmax = R;
        }
    }
    Certificate c;
    c.kind = CertificateKind::Surjectivity;
    c.empirical = true;
    Real growth = 0.0, required = 0.0;
    c.holds = detail::surjectivity_verdict(radii, ratios, growth, required);
    c.witnesses = {{"R_grid", radii},
                   {"m_hat", m_hats},
                   {"ratio", ratios},
                   {"max_ratio", max_ratio},
                   {"argmax_R", argmax},
                   {"growth_factor", growth},
                   {"required_factor", required},
                   {"verdict_basis",
                    std::string("heuristic: ratio(R_max)/ratio(R_min) >= sqrt(R_max/R_min)")}};
    c.inputs_digest = {{"problem", problem.name()},
                       {"u0", u0},
                       {"R_grid", radii},
                       {"sample_count", static_cast<Real>(sample_count)},
                       {"seed", static_cast<Real>(seed)}};
    return c;
}

// ---------------------------------------------------------------------------
// Growth-bound constants
// ---------------------------------------------------------------------------

/// Constants a, b of the growth bound |[F'(u)]^{-1}| <= a|u| + b.
struct HadamardBounds {
    Real a = 0.0;
    Real b = 1.0;

    HadamardBounds() = default;
    HadamardBounds(Real a_, Real b_) : a(a_), b(b_) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw ContractViolation("HadamardBounds: a must be >= 0");
        if (!(b > 0.0) || !std::isfinite(b)) throw ContractViolation("HadamardBounds: b must be > 0");
    }
};

/// With p = b/a: sup_t |u(t)| <= c1 = (|u0| + p) e^{a g0} - p and
/// |u'(t)| <= c2 e^{-t}, c2 = (a c1 + b) g0. For a = 0, p = +inf, c1 = |u0|
/// and c2 = b g0.
struct HadamardConstants {
    Real a = 0.0;
    Real b = 1.0;
    Real u0_norm = 0.0;
    Real g0 = 0.0;
    Real p = kInf;
    Real c1 = 0.0;
    Real c2 = 0.0;
};

[[nodiscard]] inline HadamardConstants hadamard_constants(const HadamardBounds& bounds,
                                                          Real u0_norm, Real g0) {
    if (!(bounds.a >= 0.0)) throw ContractViolation("hadamard_constants: a must be >= 0");
    if (!(bounds.b > 0.0)) throw ContractViolation("hadamard_constants: b must be > 0");
    if (!(u0_norm >= 0.0) || !(g0 >= 0.0)) {
        throw ContractViolation("hadamard_constants: norms must be >= 0");
    }
    HadamardConstants k;
    k.a = bounds.a;
    k.b = bounds.b;
    k.u0_norm = u0_norm;
    k.g0 = g0;
    if (bounds.a == 0.0) {
        k.p = kInf;
        k.c1 = u0_norm;
        k.c2 = bounds.b * g0;
        return k;
    }
    k.p = bounds.b / bounds.a;
    k.c1 = (u0_norm + k.p) * std::exp(bounds.a * g0) - k.p;
    k.c2 = (bounds.a * k.c1 + bounds.b) * g0;
    return k;
}

/// Samples B(u0, c2) and checks |[F'(u)]^{-1}| <= a|u| + b at every sample.
/// Holds iff the largest excess is <= 0.
[[nodiscard]] inline Certificate hadamard_check(const NonlinearProblem& problem,
                                                const HadamardBounds& bounds, const Vector& u0,
                                                const Vector& f, std::size_t sample_count,
                                                std::uint64_t seed) {
    const Real g0 = evaluate_residual(problem, u0, f).g;
    const HadamardConstants k = hadamard_constants(bounds, u0.norm(), g0);
    const Ball ball(u0, k.c2);
    std::size_t grid = 0;
    detail::validate_sampling(problem, ball, sample_count);
    const auto pts = detail::estimation_points(ball, sample_count, seed, grid);
    Real excess = -kInf;
    Vector witness = u0;
    for (const Vector& u : pts) {
        const Real inv = spectral_extremes(problem.jacobian(u)).inverse_norm;
        const Real e = inv - (bounds.a * u.norm() + bounds.b);
        if (e > excess) {
            excess = e;
            witness = u;
        }
    }
    Certificate c;
    c.kind = CertificateKind::Hadamard;
    c.empirical = true;
    c.holds = excess <= 0.0;
    c.witnesses = {{"a", k.a},         {"b", k.b},   {"u0_norm", k.u0_norm}, {"g0", k.g0},
                   {"p", k.p},         {"c1", k.c1}, {"c2", k.c2},           {"max_excess", excess},
                   {"witness", witness}};
    c.inputs_digest = {{"problem", problem.name()},
                       {"u0", u0},
                       {"f", f},
                       {"a", k.a},
                       {"b", k.b},
                       {"sample_count", static_cast<Real>(sample_count)},
                       {"seed", static_cast<Real>(seed)}};
    return c;
}

/// Recomputes `holds` from the stored witnesses alone.
[[nodiscard]] inline bool recheck(const Certificate& c) {
    switch (c.kind) {
        case CertificateKind::TrapBall: {
            const Real m = c.real("m_hat");
            return m != kInf && m * c.real("g0") <= c.real("R");
        }
        case CertificateKind::Surjectivity: {
            const Vector& radii = c.vec("R_grid");
            const Vector& m = c.vec("m_hat");
            Vector ratios(radii.size());
            for (Eigen::Index i = 0; i < radii.size(); ++i) {
                ratios[i] = m[i] == kInf ? 0.0 : radii[i] / m[i];
            }
            Real growth = 0.0, required = 0.0;
            return detail::surjectivity_verdict(radii, ratios, growth, required);
        }
        case CertificateKind::Hadamard: {
            const HadamardConstants k = hadamard_constants(HadamardBounds(c.real("a"), c.real("b")),
                                                           c.real("u0_norm"), c.real("g0"));
            auto close = [](Real x, Real y) {
                return x == y || std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
            };
            return close(k.c1, c.real("c1")) && close(k.c2, c.real("c2")) &&
                   c.real("max_excess") <= 0.0;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Convergence envelope
// ---------------------------------------------------------------------------

struct ConvergenceBoundReport {
    Real max_violation = 0.0;
    bool pass = false;
};

/// Checks |u(t_i) - u_final| <= m_hat g(0) e^{-t_i} (1 + slack) at every
/// recorded point, u_final standing in for u(inf). max_violation is the
/// largest positive excess (0 when the envelope holds).
[[nodiscard]] inline ConvergenceBoundReport verify_convergence_bound(const SolveResult& run,
                                                                     Real m_hat, Real slack) {
    if (run.status != SolveStatus::Converged) {
        throw ContractViolation("verify_convergence_bound: run did not converge");
    }
    if (!(m_hat > 0.0) || !(slack >= 0.0)) {
        throw ContractViolation("verify_convergence_bound: need m_hat > 0, slack >= 0");
    }
    const auto& pts = run.trajectory.points;
    if (pts.empty()) throw ContractViolation("verify_convergence_bound: empty trajectory");
    const Real g0 = pts.front().g;
    const Real t0 = pts.front().t;
    ConvergenceBoundReport rep;
    for (const auto& p : pts) {
        const Real dist = (p.u - run.u_final).norm();
        const Real envelope = m_hat * g0 * std::exp(-(p.t - t0)) * (1.0 + slack);
        rep.max_violation = std::max(rep.max_violation, dist - envelope);
    }
    rep.pass = rep.max_violation <= 0.0;
    return rep;
}

}  // namespace dsm
