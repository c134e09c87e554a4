#pragma once

// Command-line front end: solve, certify, scan, homotopy, problems.
//
// Exit codes
//   solve     0 Converged, 2 EscapedBall, 3 HorizonReached, 4 SingularJacobian
//   certify   0 trap ball holds, 2 otherwise
//   scan      0 always (verdict is in the payload)
//   homotopy  0 verdict true, 2 otherwise
//   any       1 usage error

#include "dsm/dsm.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dsm::cli {

using io::Json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "1,2.5,-3" -> vector. Rejects empty cells and trailing garbage.
inline Vector parse_csv_vector(const std::string& text, const char* what) {
    std::vector<Real> vals;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        Real x = 0.0;
        try {
            x = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": cannot parse '" + cell + "'");
        }
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size() || !std::isfinite(x)) {
            throw UsageError(std::string(what) + ": cannot parse '" + cell + "'");
        }
        vals.push_back(x);
    }
    if (vals.empty() || (!text.empty() && text.back() == ',')) {
        throw UsageError(std::string(what) + ": expected comma-separated numbers");
    }
    return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline std::vector<Real> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline std::uint64_t default_seed() {
    if (const char* env = std::getenv("DSM_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("DSM_SEED: not an unsigned integer: ") + env);
        }
    }
    return 7;
}

struct Options {
    std::string problem;
    std::string u0;
    std::string f;
    std::string v;
    std::string r_grid = "0.5,1,2,4,8";
    Real tol = 1e-10;
    Real t_max = 40.0;
    Real rk_rel_tol = 1e-10;
    std::optional<Real> escape_radius;
    std::string trace;
    std::string format = "csv";
    std::string out;
    Real radius = 0.0;
    std::size_t samples = 2000;
    std::optional<std::uint64_t> seed;
    std::optional<Real> a;
    std::optional<Real> b;
    std::size_t nodes = 11;
    Real coincidence_tol = 1e-7;
};

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(const std::vector<std::string>& args) {
        CLI::App app{"Dynamical systems method solver for F(u) = f"};
        app.set_version_flag("--version", kVersion);
        app.require_subcommand(1);
        Options o;

        auto* solve = app.add_subcommand("solve", "Integrate the Newton flow to a root");
        add_problem(solve, o);
        solve->add_option("--tol", o.tol, "Residual tolerance")->check(CLI::PositiveNumber);
        solve->add_option("--t-max", o.t_max, "Flow-time horizon")->check(CLI::PositiveNumber);
        solve->add_option("--rk-rel-tol", o.rk_rel_tol)->check(CLI::PositiveNumber);
        solve->add_option("--escape-radius", o.escape_radius)->check(CLI::NonNegativeNumber);
        solve->add_option("--trace", o.trace, "Write the trajectory to this path");
        solve->add_option("--format", o.format, "Trace format")
            ->check(CLI::IsMember({"csv", "json"}));
        solve->add_option("--out", o.out, "Write the result document here instead of stdout");

        auto* certify = app.add_subcommand("certify", "Estimate bounds and check the trap ball");
        add_problem(certify, o);
        certify->add_option("--R", o.radius, "Ball radius")->required()->check(CLI::PositiveNumber);
        certify->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
        certify->add_option("--seed", o.seed);
        certify->add_option("--a", o.a, "Growth bound slope")->check(CLI::NonNegativeNumber);
        certify->add_option("--b", o.b, "Growth bound offset")->check(CLI::PositiveNumber);
        certify->add_option("--tol", o.tol)->check(CLI::PositiveNumber);
        certify->add_option("--out", o.out);

        auto* scan = app.add_subcommand("scan", "Tabulate R / m(R) over a radius grid");
        scan->add_option("--problem", o.problem)->required();
        scan->add_option("--u0", o.u0)->required();
        scan->add_option("--R-grid", o.r_grid);
        scan->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
        scan->add_option("--seed", o.seed);
        scan->add_option("--out", o.out);

        auto* homotopy = app.add_subcommand("homotopy", "Injectivity sweep along a segment");
        add_problem(homotopy, o);
        homotopy->add_option("--v", o.v, "Path end point")->required();
        homotopy->add_option("--nodes", o.nodes)->check(CLI::Range(2, 100000));
        homotopy->add_option("--tol", o.tol)->check(CLI::PositiveNumber);
        homotopy->add_option("--t-max", o.t_max)->check(CLI::PositiveNumber);
        homotopy->add_option("--escape-radius", o.escape_radius)->check(CLI::NonNegativeNumber);
        homotopy->add_option("--coincidence-tol", o.coincidence_tol)->check(CLI::PositiveNumber);
        homotopy->add_option("--out", o.out);

        auto* problems = app.add_subcommand("problems", "List the built-in problems");
        problems->add_option("--out", o.out);

        std::vector<const char*> argv;
        argv.push_back("dsm");
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp& e) {
            app.exit(e, out_, err_);
            return 0;
        } catch (const CLI::CallForVersion& e) {
            app.exit(e, out_, err_);
            return 0;
        } catch (const CLI::ParseError& e) {
            app.exit(e, out_, err_);
            return 1;
        }

        try {
            if (*solve) return cmd_solve(o);
            if (*certify) return cmd_certify(o);
            if (*scan) return cmd_scan(o);
            if (*homotopy) return cmd_homotopy(o);
            if (*problems) return cmd_problems(o);
        } catch (const UsageError& e) {
            err_ << "error: " << e.what() << '\n';
            return 1;
        } catch (const ContractViolation& e) {
            err_ << "error: " << e.what() << '\n';
            return 1;
        } catch (const EvaluationError& e) {
            err_ << "evaluation error: " << e.what() << '\n';
            return 1;
        }
        return 1;
    }

private:
    static void add_problem(CLI::App* cmd, Options& o) {
        cmd->add_option("--problem", o.problem, "Registered problem name")->required();
        cmd->add_option("--u0", o.u0, "Start point, comma separated")->required();
        cmd->add_option("--f", o.f, "Right-hand side, comma separated")->required();
    }

    const ProblemDescriptor& lookup(const std::string& name) {
        if (const auto* d = find_problem(name)) return *d;
        std::string names;
        for (const auto& d : registry_list()) names += (names.empty() ? "" : ", ") + d.name;
        throw UsageError("unknown problem '" + name + "'; registered: " + names);
    }

    NonlinearProblem instantiate(const ProblemDescriptor& d, const Vector& u0) {
        const auto n = static_cast<std::size_t>(u0.size());
        if (!d.accepts_dimension(n)) {
            throw UsageError(d.name + " does not accept dimension " + std::to_string(n));
        }
        return d.problem(n);
    }

    Vector parse_rhs(const std::string& text, const Vector& u0) {
        Vector f = parse_csv_vector(text, "--f");
        if (f.size() != u0.size()) throw UsageError("--f and --u0 differ in dimension");
        return f;
    }

    std::uint64_t seed(const Options& o) { return o.seed ? *o.seed : default_seed(); }

    Json manifest(const std::string& sub, const Options& o, Json params, Json outputs) {
        Json m = Json::object();
        m["subcommand"] = sub;
        m["problem"] = o.problem;
        m["parameters"] = std::move(params);
        m["seed"] = seed(o);
        m["outputs"] = std::move(outputs);
        m["tool_version"] = kVersion;
        return m;
    }

    void emit(const Json& doc, const Options& o) {
        const std::string text = doc.dump(2) + "\n";
        if (o.out.empty()) {
            out_ << text;
            return;
        }
        std::ofstream file(o.out, std::ios::binary);
        if (!file) throw UsageError("cannot open " + o.out);
        file << text;
    }

    static int exit_code(SolveStatus s) {
        switch (s) {
            case SolveStatus::Converged: return 0;
            case SolveStatus::EscapedBall: return 2;
            case SolveStatus::HorizonReached: return 3;
            case SolveStatus::SingularJacobian: return 4;
        }
        return 1;
    }

    int cmd_solve(const Options& o) {
        const auto& desc = lookup(o.problem);
        const Vector u0 = parse_csv_vector(o.u0, "--u0");
        const Vector f = parse_rhs(o.f, u0);
        const NonlinearProblem problem = instantiate(desc, u0);

        FlowConfig cfg;
        cfg.residual_tol = o.tol;
        cfg.t_max = o.t_max;
        cfg.rk_rel_tol = o.rk_rel_tol;
        cfg.escape_radius = o.escape_radius;
        const SolveResult result = solve_dsm(problem, u0, f, cfg);

        if (!o.trace.empty()) {
            std::ofstream file(o.trace, std::ios::binary);
            if (!file) throw UsageError("cannot open trace file " + o.trace);
            if (o.format == "json") {
                file << io::trace_json(result.trajectory).dump(2) << '\n';
            } else {
                io::write_trace_csv(file, result.trajectory);
            }
        }

        Json params = {{"u0", io::vector_json(u0)},
                       {"f", io::vector_json(f)},
                       {"tol", o.tol},
                       {"t_max", o.t_max},
                       {"rk_rel_tol", o.rk_rel_tol},
                       {"escape_radius", o.escape_radius ? Json(*o.escape_radius) : Json(nullptr)}};
        Json outputs = {{"trace", o.trace.empty() ? Json(nullptr) : Json(o.trace)},
                        {"format", o.format},
                        {"out", o.out.empty() ? Json(nullptr) : Json(o.out)}};
        Json doc = {{"manifest", manifest("solve", o, std::move(params), std::move(outputs))},
                    {"result", io::to_json(result)}};
        emit(doc, o);
        return exit_code(result.status);
    }

    int cmd_certify(const Options& o) {
        if (o.a.has_value() != o.b.has_value()) throw UsageError("--a and --b go together");
        const auto& desc = lookup(o.problem);
        const Vector u0 = parse_csv_vector(o.u0, "--u0");
        const Vector f = parse_rhs(o.f, u0);
        const NonlinearProblem problem = instantiate(desc, u0);
        const std::uint64_t s = seed(o);

        const Real g0 = evaluate_residual(problem, u0, f).g;
        const ConditionEstimate est =
            estimate_derivative_bounds(problem, Ball(u0, o.radius), o.samples, s);
        const Certificate trap = trap_ball_check(est.m_hat, g0, o.radius);

        FlowConfig cfg;
        cfg.residual_tol = o.tol;
        cfg.escape_radius = o.radius;
        const SolveResult run = solve_dsm(problem, u0, f, cfg);
        Json flow = io::to_json(run);
        Real displacement = 0.0;
        for (const auto& p : run.trajectory.points) {
            displacement = std::max(displacement, (p.u - u0).norm());
        }
        flow["max_displacement"] = io::real_json(displacement);
        if (run.status == SolveStatus::Converged && est.m_hat != kInf) {
            const Real m = std::max(est.m_hat, realized_inverse_bound(problem, run.trajectory));
            const auto bound = verify_convergence_bound(run, m, 1e-6);
            flow["convergence_bound"] = {{"m_hat", io::real_json(m)},
                                         {"max_violation", io::real_json(bound.max_violation)},
                                         {"pass", bound.pass}};
        }

        Json doc = Json::object();
        Json params = {{"u0", io::vector_json(u0)}, {"f", io::vector_json(f)},
                       {"R", o.radius},             {"samples", o.samples},
                       {"seed", s},                 {"tol", o.tol},
                       {"a", o.a ? Json(*o.a) : Json(nullptr)},
                       {"b", o.b ? Json(*o.b) : Json(nullptr)}};
        doc["manifest"] = manifest("certify", o, std::move(params),
                                   {{"out", o.out.empty() ? Json(nullptr) : Json(o.out)}});
        doc["seed"] = s;
        doc["g0"] = io::real_json(g0);
        doc["estimate"] = io::to_json(est);
        doc["trap_ball"] = io::to_json(trap);
        doc["flow"] = std::move(flow);
        if (o.a) {
            const HadamardBounds bounds(*o.a, *o.b);
            doc["hadamard"] = {
                {"constants", io::to_json(hadamard_constants(bounds, u0.norm(), g0))},
                {"certificate", io::to_json(hadamard_check(problem, bounds, u0, f, o.samples, s))}};
        }
        emit(doc, o);
        return trap.holds ? 0 : 2;
    }

    int cmd_scan(const Options& o) {
        const auto& desc = lookup(o.problem);
        const Vector u0 = parse_csv_vector(o.u0, "--u0");
        const NonlinearProblem problem = instantiate(desc, u0);
        const std::vector<Real> grid = to_std(parse_csv_vector(o.r_grid, "--R-grid"));
        const std::uint64_t s = seed(o);
        const Certificate cert = surjectivity_scan(problem, u0, grid, o.samples, s);

        Json params = {{"u0", io::vector_json(u0)},
                       {"R_grid", grid},
                       {"samples", o.samples},
                       {"seed", s}};
        Json doc = {{"manifest", manifest("scan", o, std::move(params),
                                          {{"out", o.out.empty() ? Json(nullptr) : Json(o.out)}})},
                    {"seed", s},
                    {"certificate", io::to_json(cert)}};
        emit(doc, o);
        return 0;
    }

    int cmd_homotopy(const Options& o) {
        const auto& desc = lookup(o.problem);
        const Vector u0 = parse_csv_vector(o.u0, "--u0");
        const Vector v = parse_csv_vector(o.v, "--v");
        if (v.size() != u0.size()) throw UsageError("--v and --u0 differ in dimension");
        const Vector f = parse_rhs(o.f, u0);
        const NonlinearProblem problem = instantiate(desc, u0);

        FlowConfig cfg;
        cfg.residual_tol = o.tol;
        cfg.t_max = o.t_max;
        cfg.escape_radius = o.escape_radius;
        const HomotopyResult res =
            injectivity_sweep(problem, PathSpec{u0, v, o.nodes}, f, cfg, o.coincidence_tol);

        Json params = {{"u0", io::vector_json(u0)},
                       {"v", io::vector_json(v)},
                       {"f", io::vector_json(f)},
                       {"nodes", o.nodes},
                       {"tol", o.tol},
                       {"t_max", o.t_max},
                       {"escape_radius", o.escape_radius ? Json(*o.escape_radius) : Json(nullptr)},
                       {"coincidence_tol", o.coincidence_tol}};
        Json doc = {{"manifest", manifest("homotopy", o, std::move(params),
                                          {{"out", o.out.empty() ? Json(nullptr) : Json(o.out)}})},
                    {"result", io::to_json(res)}};
        emit(doc, o);
        return res.injective_verdict ? 0 : 2;
    }

    int cmd_problems(const Options& o) {
        Json list = Json::array();
        for (const auto& d : registry_list()) list.push_back(io::to_json(d));
        Json doc = {{"manifest", manifest("problems", o, Json::object(),
                                          {{"out", o.out.empty() ? Json(nullptr) : Json(o.out)}})},
                    {"problems", std::move(list)}};
        emit(doc, o);
        return 0;
    }

    std::ostream& out_;
    std::ostream& err_;
};

/// Runs one CLI invocation; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return Runner(out, err).run(args);
}

}  // namespace dsm::cli
