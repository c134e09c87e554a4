#pragma once

/**
 * @file problem.hpp
 * @brief The nonlinear map abstraction F : R^n -> R^n, residual evaluation and
 * the central-difference Jacobian used when no analytic F' is supplied.
 */

#include "dsm/types.hpp"

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

namespace dsm {

using MapFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

namespace detail {

inline std::string format_point(const Vector& u) {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        os << (i ? "," : "") << u[i];
    }
    os << ']';
    return os.str();
}

}  // namespace detail

/// A square nonlinear map with optional analytic Jacobian.
///
/// The callables must be deterministic and side-effect free. Instances are
/// immutable and may be shared between threads.
class NonlinearProblem {
public:
    NonlinearProblem(std::string name, std::size_t dimension, MapFn evaluate,
                     std::optional<JacobianFn> jacobian = std::nullopt)
        : name_(std::move(name)),
          dimension_(dimension),
          evaluate_(std::move(evaluate)),
          jacobian_(std::move(jacobian)) {
        if (dimension_ < 1) throw ContractViolation("NonlinearProblem: dimension must be >= 1");
        if (!evaluate_) throw ContractViolation("NonlinearProblem: evaluate must be callable");
        if (jacobian_ && !*jacobian_) jacobian_.reset();
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] bool has_analytic_jacobian() const noexcept { return jacobian_.has_value(); }

    /// F(u), checked for dimension and finiteness.
    [[nodiscard]] Vector evaluate(const Vector& u) const {
        require_dimension(u, dimension_, "evaluate");
        Vector y = evaluate_(u);
        if (static_cast<std::size_t>(y.size()) != dimension_) {
            throw EvaluationError(name_ + ": F changed the dimension");
        }
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (!std::isfinite(y[i])) {
                throw EvaluationError(name_ + ": non-finite F component " + std::to_string(i) +
                                      " at u=" + detail::format_point(u));
            }
        }
        return y;
    }

    /// The analytic F'(u); nullopt when none was supplied.
    [[nodiscard]] std::optional<Matrix> analytic_jacobian(const Vector& u) const {
        if (!jacobian_) return std::nullopt;
        require_dimension(u, dimension_, "jacobian");
        Matrix j = (*jacobian_)(u);
        const auto n = static_cast<Eigen::Index>(dimension_);
        if (j.rows() != n || j.cols() != n) {
            throw EvaluationError(name_ + ": Jacobian is not " + std::to_string(n) + "x" +
                                  std::to_string(n));
        }
        if (!j.allFinite()) {
            throw EvaluationError(name_ + ": non-finite Jacobian entry at u=" +
                                  detail::format_point(u));
        }
        return j;
    }

    /// F'(u): analytic when available, otherwise central differences.
    [[nodiscard]] Matrix jacobian(const Vector& u) const;

private:
    std::string name_;
    std::size_t dimension_;
    MapFn evaluate_;
    std::optional<JacobianFn> jacobian_;
};

struct Residual {
    Vector residual;
    Real g = 0.0;
};

/// F(u) - f and its Euclidean norm g.
[[nodiscard]] inline Residual evaluate_residual(const NonlinearProblem& problem, const Vector& u,
                                                const Vector& f) {
    require_dimension(u, problem.dimension(), "evaluate_residual(u)");
    require_dimension(f, problem.dimension(), "evaluate_residual(f)");
    Residual r;
    r.residual = problem.evaluate(u) - f;
    r.g = r.residual.norm();
    return r;
}

/// Default central-difference step: 1e-6 scaled by (1 + |u|_inf).
[[nodiscard]] inline Real default_fd_step(const Vector& u) {
    return 1e-6 * (1.0 + u.lpNorm<Eigen::Infinity>());
}

/// Column j = (F(u + h e_j) - F(u - h e_j)) / (2h).
[[nodiscard]] inline Matrix finite_difference_jacobian(const NonlinearProblem& problem,
                                                       const Vector& u, Real h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ContractViolation("finite_difference_jacobian: h must be positive and finite");
    }
    require_dimension(u, problem.dimension(), "finite_difference_jacobian");
    const auto n = u.size();
    Matrix jac(n, n);
    Vector probe = u;
    for (Eigen::Index j = 0; j < n; ++j) {
        probe[j] = u[j] + h;
        Vector plus;
        try {
            plus = problem.evaluate(probe);
        } catch (const EvaluationError& e) {
            throw EvaluationError(std::string("finite-difference probe ") +
                                  detail::format_point(probe) + ": " + e.what());
        }
        probe[j] = u[j] - h;
        Vector minus;
        try {
            minus = problem.evaluate(probe);
        } catch (const EvaluationError& e) {
            throw EvaluationError(std::string("finite-difference probe ") +
                                  detail::format_point(probe) + ": " + e.what());
        }
        probe[j] = u[j];
        jac.col(j) = (plus - minus) / (2.0 * h);
    }
    return jac;
}

inline Matrix NonlinearProblem::jacobian(const Vector& u) const {
    if (auto j = analytic_jacobian(u)) return *std::move(j);
    return finite_difference_jacobian(*this, u, default_fd_step(u));
}

}  // namespace dsm
