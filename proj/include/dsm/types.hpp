#pragma once

/**
 * @file types.hpp
 * @brief Vector/matrix aliases, the Ball type and the library's error types.
 *
 * The state space is R^n with the Euclidean inner product. Operator norms are
 * spectral norms throughout.
 */

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsm {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when F or F' produces a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the direct linear solve when F'(u) is numerically singular.
class SingularJacobianError : public std::runtime_error {
public:
    SingularJacobianError(Vector at, Real pivot)
        : std::runtime_error("singular Jacobian: pivot magnitude " + std::to_string(pivot)),
          point_(std::move(at)),
          pivot_(pivot) {}

    [[nodiscard]] const Vector& point() const noexcept { return point_; }
    [[nodiscard]] Real pivot() const noexcept { return pivot_; }

private:
    Vector point_;
    Real pivot_;
};

/// Raised when a trajectory is too short for a statistical check.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed ball B(center, radius) = {u : |u - center| <= radius}.
struct Ball {
    Vector center;
    Real radius = 0.0;

    Ball() = default;
    Ball(Vector c, Real r) : center(std::move(c)), radius(r) {
        if (!(radius >= 0.0) || !std::isfinite(radius)) {
            throw ContractViolation("Ball: radius must be finite and >= 0");
        }
    }

    [[nodiscard]] bool contains(const Vector& u, Real tol = 0.0) const {
        return (u - center).norm() <= radius + tol;
    }
};

/// Throws ContractViolation unless v is non-empty and finite.
inline void require_state(const Vector& v, const char* what) {
    if (v.size() < 1) {
        throw ContractViolation(std::string(what) + ": dimension must be >= 1");
    }
    if (!v.allFinite()) {
        throw ContractViolation(std::string(what) + ": components must be finite");
    }
}

inline void require_dimension(const Vector& v, std::size_t n, const char* what) {
    if (static_cast<std::size_t>(v.size()) != n) {
        throw ContractViolation(std::string(what) + ": expected dimension " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
    }
}

}  // namespace dsm
