#pragma once

/**
 * @file problem_suite.hpp
 * @brief Built-in problems with known structure.
 *
 * | name            | F                               | regime                           |
 * |-----------------|---------------------------------|----------------------------------|
 * | identity        | u (any n)                       | m = 1                            |
 * | linear_spd      | A u, A = [[2,1],[1,2]]          | m = 1 (eigenvalues 1, 3)         |
 * | scalar_exp      | e^u                             | m(R) = e^R at 0; e^u = 0 has no root |
 * | monotone_cubic  | u + u^3 (componentwise, any n)  | F' >= I                          |
 * | trig_perturbed  | u + sin(u)/2 (componentwise)    | F' in [1/2, 3/2], a = 0, b = 2   |
 * | coupled_2d      | (u1 + u2^3, u2 + u1^3)          | nonsingular on B(0, 1/2)         |
 */

#include "dsm/certificates.hpp"
#include "dsm/problem.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsm {

enum class ProblemTag { Surjective, Homeomorphism, Counterexample };

[[nodiscard]] constexpr std::string_view to_string(ProblemTag t) noexcept {
    switch (t) {
        case ProblemTag::Surjective: return "surjective";
        case ProblemTag::Homeomorphism: return "homeomorphism";
        case ProblemTag::Counterexample: return "counterexample";
    }
    return "unknown";
}

struct KnownRoot {
    Vector f;
    Vector root;
};

struct KnownMFormula {
    std::string text;
    /// Exact m(R) over the given ball.
    std::function<Real(const Ball&)> m;
};

struct ProblemDescriptor {
    std::string name;
    std::string formula;
    /// Set for problems defined in one dimension only.
    std::optional<std::size_t> fixed_dimension;
    std::size_t default_dimension = 1;
    std::function<NonlinearProblem(std::size_t)> make;
    std::optional<KnownRoot> known_root;
    /// Exact root for a given right-hand side, where one is available.
    std::function<std::optional<Vector>(const Vector&)> root_for;
    std::optional<KnownMFormula> known_m;
    std::optional<HadamardBounds> hadamard;
    std::vector<ProblemTag> tags;
    /// Region on which the Jacobian is known to be nonsingular (when not global).
    std::optional<Ball> valid_region;
    /// Region from which test starts are drawn.
    std::function<Ball(std::size_t)> start_region;

    [[nodiscard]] bool accepts_dimension(std::size_t n) const {
        return n >= 1 && (!fixed_dimension || *fixed_dimension == n);
    }

    [[nodiscard]] NonlinearProblem problem(std::size_t n) const {
        if (!accepts_dimension(n)) {
            throw ContractViolation(name + ": unsupported dimension " + std::to_string(n));
        }
        return make(n);
    }
    [[nodiscard]] NonlinearProblem problem() const { return problem(default_dimension); }

    [[nodiscard]] bool has_tag(ProblemTag t) const {
        for (auto x : tags) {
            if (x == t) return true;
        }
        return false;
    }
};

namespace suite {

inline Vector vec(std::initializer_list<Real> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (Real x : xs) v[i++] = x;
    return v;
}

inline Matrix spd_matrix() {
    Matrix a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    return a;
}

/// Real root of u^3 + u - y via Cardano, polished by Newton.
inline Real cubic_root(Real y) {
    const Real disc = std::sqrt(y * y / 4.0 + 1.0 / 27.0);
    Real u = std::cbrt(y / 2.0 + disc) + std::cbrt(y / 2.0 - disc);
    for (int k = 0; k < 3; ++k) u -= (u + u * u * u - y) / (1.0 + 3.0 * u * u);
    return u;
}

/// Root of u + sin(u)/2 - y. The map is increasing and the root lies in
/// [y - 1/2, y + 1/2].
inline Real trig_root(Real y) {
    Real lo = y - 0.5, hi = y + 0.5;
    for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
        const Real mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (mid + 0.5 * std::sin(mid) < y) lo = mid; else hi = mid;
    }
    Real u = 0.5 * (lo + hi);
    for (int k = 0; k < 2; ++k) u -= (u + 0.5 * std::sin(u) - y) / (1.0 + 0.5 * std::cos(u));
    return u;
}

/// min over [lo, hi] of cos.
inline Real min_cos(Real lo, Real hi) {
    constexpr Real pi = std::numbers::pi;
    const Real k = std::ceil((lo - pi) / (2.0 * pi));
    if (pi + 2.0 * pi * k <= hi) return -1.0;
    return std::min(std::cos(lo), std::cos(hi));
}

inline Ball centered(std::size_t n, Real c, Real r) {
    return Ball(Vector::Constant(static_cast<Eigen::Index>(n), c), r);
}

inline std::vector<ProblemDescriptor> build_registry() {
    std::vector<ProblemDescriptor> reg;

    {
        ProblemDescriptor d;
        d.name = "identity";
        d.formula = "F(u) = u";
        d.make = [](std::size_t n) {
            return NonlinearProblem(
                "identity", n, [](const Vector& u) { return u; },
                [n](const Vector&) {
                    return Matrix(Matrix::Identity(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n)));
                });
        };
        d.known_root = KnownRoot{vec({7.0}), vec({7.0})};
        d.root_for = [](const Vector& f) { return std::optional<Vector>(f); };
        d.known_m = KnownMFormula{"1", [](const Ball&) { return 1.0; }};
        d.hadamard = HadamardBounds(0.0, 1.0);
        d.tags = {ProblemTag::Surjective, ProblemTag::Homeomorphism};
        d.start_region = [](std::size_t n) { return centered(n, 0.0, 2.0); };
        reg.push_back(std::move(d));
    }
    {
        ProblemDescriptor d;
        d.name = "linear_spd";
        d.formula = "F(u) = A u, A = [[2,1],[1,2]]";
        d.fixed_dimension = 2;
        d.default_dimension = 2;
        d.make = [](std::size_t) {
            return NonlinearProblem(
                "linear_spd", 2, [](const Vector& u) { return Vector(spd_matrix() * u); },
                [](const Vector&) { return spd_matrix(); });
        };
        d.known_root = KnownRoot{vec({1.0, 1.0}), vec({1.0 / 3.0, 1.0 / 3.0})};
        d.root_for = [](const Vector& f) {
            return std::optional<Vector>(spd_matrix().ldlt().solve(f));
        };
        d.known_m = KnownMFormula{"1", [](const Ball&) { return 1.0; }};
        d.hadamard = HadamardBounds(0.0, 1.0);
        d.tags = {ProblemTag::Surjective, ProblemTag::Homeomorphism};
        d.start_region = [](std::size_t) { return centered(2, 0.0, 2.0); };
        reg.push_back(std::move(d));
    }
    {
        ProblemDescriptor d;
        d.name = "scalar_exp";
        d.formula = "F(u) = exp(u)";
        d.fixed_dimension = 1;
        d.make = [](std::size_t) {
            return NonlinearProblem(
                "scalar_exp", 1, [](const Vector& u) { return Vector(u.array().exp().matrix()); },
                [](const Vector& u) {
                    Matrix j(1, 1);
                    j(0, 0) = std::exp(u[0]);
                    return j;
                });
        };
        d.known_root = KnownRoot{vec({1.0}), vec({0.0})};
        d.root_for = [](const Vector& f) -> std::optional<Vector> {
            if (!(f[0] > 0.0)) return std::nullopt;
            return vec({std::log(f[0])});
        };
        d.known_m = KnownMFormula{"exp(R - c) on [c - R, c + R]; exp(R) at center 0",
                                  [](const Ball& b) { return std::exp(b.radius - b.center[0]); }};
        d.tags = {ProblemTag::Counterexample};
        d.start_region = [](std::size_t) { return centered(1, 0.0, 1.0); };
        reg.push_back(std::move(d));
    }
    {
        ProblemDescriptor d;
        d.name = "monotone_cubic";
        d.formula = "F(u)_i = u_i + u_i^3";
        d.make = [](std::size_t n) {
            return NonlinearProblem(
                "monotone_cubic", n,
                [](const Vector& u) { return Vector((u.array() + u.array().cube()).matrix()); },
                [](const Vector& u) {
                    return Matrix((1.0 + 3.0 * u.array().square()).matrix().asDiagonal());
                });
        };
        d.known_root = KnownRoot{vec({2.0}), vec({1.0})};
        d.root_for = [](const Vector& f) {
            return std::optional<Vector>(f.unaryExpr([](Real y) { return cubic_root(y); }));
        };
        d.known_m = KnownMFormula{
            "1 / (1 + 3 d^2), d = min_i max(0, |c_i| - R)", [](const Ball& b) {
                const Real d = (b.center.array().abs() - b.radius).cwiseMax(0.0).minCoeff();
                return 1.0 / (1.0 + 3.0 * d * d);
            }};
        d.hadamard = HadamardBounds(0.0, 1.0);
        d.tags = {ProblemTag::Surjective, ProblemTag::Homeomorphism};
        d.start_region = [](std::size_t n) { return centered(n, 0.0, 2.0); };
        reg.push_back(std::move(d));
    }
    {
        ProblemDescriptor d;
        d.name = "trig_perturbed";
        d.formula = "F(u)_i = u_i + 0.5 sin(u_i)";
        d.make = [](std::size_t n) {
            return NonlinearProblem(
                "trig_perturbed", n,
                [](const Vector& u) { return Vector((u.array() + 0.5 * u.array().sin()).matrix()); },
                [](const Vector& u) {
                    return Matrix((1.0 + 0.5 * u.array().cos()).matrix().asDiagonal());
                });
        };
        d.known_root = KnownRoot{vec({0.0}), vec({0.0})};
        d.root_for = [](const Vector& f) {
            return std::optional<Vector>(f.unaryExpr([](Real y) { return trig_root(y); }));
        };
        d.known_m = KnownMFormula{
            "1 / (1 + 0.5 min_i min cos over [c_i - R, c_i + R])", [](const Ball& b) {
                Real lowest = 1.0;
                for (Eigen::Index i = 0; i < b.center.size(); ++i) {
                    lowest = std::min(lowest, min_cos(b.center[i] - b.radius, b.center[i] + b.radius));
                }
                return 1.0 / (1.0 + 0.5 * lowest);
            }};
        d.hadamard = HadamardBounds(0.0, 2.0);
        d.tags = {ProblemTag::Surjective, ProblemTag::Homeomorphism};
        d.start_region = [](std::size_t n) { return centered(n, 0.0, 3.0); };
        reg.push_back(std::move(d));
    }
    {
        ProblemDescriptor d;
        d.name = "coupled_2d";
        d.formula = "F(u) = (u1 + u2^3, u2 + u1^3); det F' = 1 - 9 u1^2 u2^2 > 0 on B(0, 0.5)";
        d.fixed_dimension = 2;
        d.default_dimension = 2;
        auto map = [](const Vector& u) {
            return vec({u[0] + u[1] * u[1] * u[1], u[1] + u[0] * u[0] * u[0]});
        };
        d.make = [map](std::size_t) {
            return NonlinearProblem("coupled_2d", 2, map, [](const Vector& u) {
                Matrix j(2, 2);
                j << 1.0, 3.0 * u[1] * u[1], 3.0 * u[0] * u[0], 1.0;
                return j;
            });
        };
        const Vector root = vec({0.2, 0.3});
        d.known_root = KnownRoot{map(root), root};
        d.valid_region = Ball(vec({0.0, 0.0}), 0.5);
        d.start_region = [root](std::size_t) { return Ball(root, 0.1); };
        reg.push_back(std::move(d));
    }
    return reg;
}

}  // namespace suite

/// The built-in problems, constructed once.
[[nodiscard]] inline const std::vector<ProblemDescriptor>& registry_list() {
    static const std::vector<ProblemDescriptor> registry = suite::build_registry();
    return registry;
}

[[nodiscard]] inline const ProblemDescriptor* find_problem(std::string_view name) {
    for (const auto& d : registry_list()) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

}  // namespace dsm
