#pragma once

/**
 * @file homotopy.hpp
 * @brief Injectivity sweep along the segment w(s) = (1 - s) u_start + s v_end
 * and the two-trajectory stability check.
 *
 * If F(u_start) = F(v_end) = f and F is injective, flowing from every node of
 * the segment must land on one limit. The sweep observes exactly that: it
 * solves from each node and compares the limits.
 */

#include "dsm/newton_flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace dsm {

struct PathSpec {
    Vector u_start;
    Vector v_end;
    std::size_t node_count = 11;

    void validate() const {
        require_state(u_start, "PathSpec(u_start)");
        require_state(v_end, "PathSpec(v_end)");
        if (u_start.size() != v_end.size()) {
            throw ContractViolation("PathSpec: endpoints differ in dimension");
        }
        if (node_count < 2) throw ContractViolation("PathSpec: node_count must be >= 2");
    }

    /// Node j sits at s = j / (node_count - 1).
    [[nodiscard]] Real node(std::size_t j) const {
        return j + 1 == node_count ? 1.0
                                   : static_cast<Real>(j) / static_cast<Real>(node_count - 1);
    }
};

/// (1 - s) u_start + s v_end; the end points are returned exactly.
[[nodiscard]] inline Vector segment_path(const PathSpec& spec, Real s) {
    if (!(s >= 0.0 && s <= 1.0)) throw ContractViolation("segment_path: s must lie in [0, 1]");
    if (spec.u_start.size() != spec.v_end.size()) {
        throw ContractViolation("segment_path: endpoints differ in dimension");
    }
    if (s == 0.0) return spec.u_start;
    if (s == 1.0) return spec.v_end;
    return (1.0 - s) * spec.u_start + s * spec.v_end;
}

struct HomotopyNode {
    Real s = 0.0;
    SolveStatus status = SolveStatus::HorizonReached;
    Vector u_limit;
    Real g_final = 0.0;
    std::optional<Trajectory> trace;
};

struct HomotopyResult {
    std::vector<HomotopyNode> nodes;
    bool injective_verdict = false;
    Real max_limit_spread = 0.0;
    Real coincidence_tol = 0.0;
    /// First node that failed to converge or whose limit departs from node 0's.
    std::optional<std::size_t> first_failure;
};

/// Runs solve_dsm from every node of the path. The verdict is true iff every
/// node converged and all limits lie within coincidence_tol of each other.
[[nodiscard]] inline HomotopyResult injectivity_sweep(const NonlinearProblem& problem,
                                                      const PathSpec& spec, const Vector& f,
                                                      const FlowConfig& config,
                                                      Real coincidence_tol,
                                                      bool keep_traces = false) {
    spec.validate();
    config.validate();
    require_dimension(spec.u_start, problem.dimension(), "injectivity_sweep(path)");
    require_dimension(f, problem.dimension(), "injectivity_sweep(f)");
    if (!(coincidence_tol > 0.0)) {
        throw ContractViolation("injectivity_sweep: coincidence_tol must be > 0");
    }

    HomotopyResult out;
    out.coincidence_tol = coincidence_tol;
    out.nodes.reserve(spec.node_count);
    for (std::size_t j = 0; j < spec.node_count; ++j) {
        const Real s = spec.node(j);
        SolveResult run = solve_dsm(problem, segment_path(spec, s), f, config);
        HomotopyNode node;
        node.s = s;
        node.status = run.status;
        node.u_limit = run.u_final;
        node.g_final = run.g_final;
        if (keep_traces) node.trace = std::move(run.trajectory);
        out.nodes.push_back(std::move(node));
    }

    bool all_converged = true;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        if (out.nodes[i].status != SolveStatus::Converged) {
            all_converged = false;
            if (!out.first_failure) out.first_failure = i;
            continue;
        }
        for (std::size_t j = i + 1; j < out.nodes.size(); ++j) {
            if (out.nodes[j].status != SolveStatus::Converged) continue;
            out.max_limit_spread = std::max(
                out.max_limit_spread, (out.nodes[i].u_limit - out.nodes[j].u_limit).norm());
        }
    }
    if (!out.first_failure && out.max_limit_spread > coincidence_tol) {
        for (std::size_t i = 1; i < out.nodes.size(); ++i) {
            if ((out.nodes[i].u_limit - out.nodes[0].u_limit).norm() > coincidence_tol) {
                out.first_failure = i;
                break;
            }
        }
    }
    out.injective_verdict = all_converged && out.max_limit_spread <= coincidence_tol;
    return out;
}

struct StabilityOptions {
    Real c_max = 100.0;
    std::size_t grid_points = 101;
};

struct StabilityReport {
    bool applicable = true;
    Real sup_ratio = 0.0;
    Real decay_c3 = 0.0;
    bool pass = false;
    /// End of the shared comparison grid.
    Real t_end = 0.0;
};

/// Flows from u_init and u_init + delta * delta_dir and compares the states on
/// a shared uniform grid over [0, t_end], t_end being the earlier of the two
/// convergence times (states are matched by cubic Hermite dense output).
///
///   sup_ratio = sup eta(t) / delta,   decay_c3 = sup eta(t) e^t / delta
///
/// The check is inapplicable when either flow fails to converge.
[[nodiscard]] inline StabilityReport stability_check(const NonlinearProblem& problem,
                                                     const Vector& u_init, const Vector& delta_dir,
                                                     Real delta, const Vector& f,
                                                     const FlowConfig& config,
                                                     const StabilityOptions& options = {}) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw ContractViolation("stability_check: delta must be finite and >= 0");
    }
    require_dimension(delta_dir, problem.dimension(), "stability_check(delta_dir)");
    if (std::abs(delta_dir.norm() - 1.0) > 1e-9) {
        throw ContractViolation("stability_check: delta_dir must be a unit vector");
    }
    if (options.grid_points < 2) throw ContractViolation("stability_check: grid_points >= 2");

    StabilityReport rep;
    if (delta == 0.0) {
        rep.pass = true;
        return rep;
    }

    const SolveResult a = solve_dsm(problem, u_init, f, config);
    const SolveResult b = solve_dsm(problem, Vector(u_init + delta * delta_dir), f, config);
    if (a.status != SolveStatus::Converged || b.status != SolveStatus::Converged) {
        rep.applicable = false;
        rep.pass = false;
        return rep;
    }

    rep.t_end = std::min(a.trajectory.back().t, b.trajectory.back().t);
    for (std::size_t k = 0; k < options.grid_points; ++k) {
        const Real t = rep.t_end * static_cast<Real>(k) / static_cast<Real>(options.grid_points - 1);
        const Real eta = (dense_state(a.trajectory, t) - dense_state(b.trajectory, t)).norm();
        rep.sup_ratio = std::max(rep.sup_ratio, eta / delta);
        rep.decay_c3 = std::max(rep.decay_c3, eta * std::exp(t) / delta);
    }
    rep.pass = std::isfinite(rep.sup_ratio) && std::isfinite(rep.decay_c3) &&
               rep.sup_ratio <= options.c_max;
    return rep;
}

}  // namespace dsm
