#pragma once

/**
 * @file io.hpp
 * @brief JSON documents and CSV traces.
 *
 * Non-finite reals are written as the strings "inf", "-inf" and "nan" so every
 * document stays valid JSON. CSV values carry 17 significant digits; JSON
 * numbers use the shortest round-trip form. Both parse back to the same
 * doubles.
 */

#include "dsm/certificates.hpp"
#include "dsm/homotopy.hpp"
#include "dsm/newton_flow.hpp"
#include "dsm/problem_suite.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dsm::io {

using Json = nlohmann::ordered_json;

[[nodiscard]] inline Json real_json(Real x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

[[nodiscard]] inline Real json_real(const Json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::numeric_limits<Real>::quiet_NaN();
        throw std::invalid_argument("not a real: " + s);
    }
    return j.get<Real>();
}

[[nodiscard]] inline Json vector_json(const Vector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(real_json(v[i]));
    return arr;
}

[[nodiscard]] inline Vector json_vector(const Json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = json_real(j[i]);
    return v;
}

[[nodiscard]] inline Json witness_json(const WitnessMap& m) {
    Json out = Json::object();
    for (const auto& [key, value] : m) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Real>) {
                    out[key] = real_json(x);
                } else if constexpr (std::is_same_v<T, Vector>) {
                    out[key] = vector_json(x);
                } else {
                    out[key] = x;
                }
            },
            value);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory traces
// ---------------------------------------------------------------------------

[[nodiscard]] inline std::vector<std::string> trace_columns(std::size_t n) {
    std::vector<std::string> cols = {"t", "g", "velocity_norm"};
    for (std::size_t i = 0; i < n; ++i) cols.push_back("u_" + std::to_string(i));
    return cols;
}

[[nodiscard]] inline std::string format_real(Real x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Header `t,g,velocity_norm,u_0,...,u_{n-1}`, one row per point.
inline void write_trace_csv(std::ostream& os, const Trajectory& traj) {
    const std::size_t n = traj.empty() ? 0 : static_cast<std::size_t>(traj.front().u.size());
    const auto cols = trace_columns(n);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& p : traj.points) {
        os << format_real(p.t) << ',' << format_real(p.g) << ',' << format_real(p.velocity_norm);
        for (Eigen::Index i = 0; i < p.u.size(); ++i) os << ',' << format_real(p.u[i]);
        os << '\n';
    }
}

[[nodiscard]] inline Json trace_json(const Trajectory& traj) {
    const std::size_t n = traj.empty() ? 0 : static_cast<std::size_t>(traj.front().u.size());
    const auto cols = trace_columns(n);
    Json rows = Json::array();
    for (const auto& p : traj.points) {
        Json row = Json::object();
        row["t"] = real_json(p.t);
        row["g"] = real_json(p.g);
        row["velocity_norm"] = real_json(p.velocity_norm);
        for (std::size_t i = 0; i < n; ++i) row[cols[3 + i]] = real_json(p.u[static_cast<Eigen::Index>(i)]);
        rows.push_back(std::move(row));
    }
    return Json{{"columns", cols}, {"points", std::move(rows)}};
}

/// Parses a CSV trace back. Velocity vectors are not stored in traces and are
/// left empty.
[[nodiscard]] inline Trajectory read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("trace csv: missing header");
    std::size_t columns = 1;
    for (char c : line) columns += c == ',' ? 1 : 0;
    if (columns < 4 || line.rfind("t,g,velocity_norm,u_0", 0) != 0) {
        throw std::invalid_argument("trace csv: bad header '" + line + "'");
    }
    const auto n = static_cast<Eigen::Index>(columns - 3);
    Trajectory traj;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<Real> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != columns) throw std::invalid_argument("trace csv: ragged row");
        TrajectoryPoint p;
        p.t = vals[0];
        p.g = vals[1];
        p.velocity_norm = vals[2];
        p.u.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) p.u[i] = vals[3 + static_cast<std::size_t>(i)];
        traj.points.push_back(std::move(p));
    }
    return traj;
}

[[nodiscard]] inline Trajectory read_trace_json(const Json& doc) {
    const auto& cols = doc.at("columns");
    const auto n = static_cast<Eigen::Index>(cols.size()) - 3;
    Trajectory traj;
    for (const auto& row : doc.at("points")) {
        TrajectoryPoint p;
        p.t = json_real(row.at("t"));
        p.g = json_real(row.at("g"));
        p.velocity_norm = json_real(row.at("velocity_norm"));
        p.u.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p.u[i] = json_real(row.at(cols[static_cast<std::size_t>(3 + i)].get<std::string>()));
        }
        traj.points.push_back(std::move(p));
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Result documents
// ---------------------------------------------------------------------------

[[nodiscard]] inline Json to_json(const SolveResult& r) {
    Json j = Json::object();
    j["status"] = std::string(to_string(r.status));
    j["u_final"] = vector_json(r.u_final);
    j["g_final"] = real_json(r.g_final);
    j["steps"] = r.trajectory.empty() ? 0 : r.trajectory.size() - 1;
    j["rejected_steps"] = r.trajectory.rejected_steps;
    j["t_final"] = real_json(r.trajectory.empty() ? 0.0 : r.trajectory.back().t);
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

[[nodiscard]] inline Json to_json(const ConditionEstimate& e) {
    Json j = Json::object();
    j["ball"] = {{"center", vector_json(e.ball.center)}, {"radius", real_json(e.ball.radius)}};
    j["m_hat"] = real_json(e.m_hat);
    j["M1_hat"] = real_json(e.M1_hat);
    j["M2_hat"] = e.M2_hat ? real_json(*e.M2_hat) : Json(nullptr);
    j["sample_count"] = e.sample_count;
    j["grid_points"] = e.grid_points;
    j["witness_m"] = vector_json(e.witness_m);
    j["witness_M1"] = vector_json(e.witness_M1);
    j["witness_M2"] = e.witness_M2 ? vector_json(*e.witness_M2) : Json(nullptr);
    j["empirical"] = e.empirical;
    j["singular_sample"] = e.singular_sample;
    return j;
}

[[nodiscard]] inline Json to_json(const Certificate& c) {
    Json j = Json::object();
    j["kind"] = std::string(to_string(c.kind));
    j["holds"] = c.holds;
    j["empirical"] = c.empirical;
    j["witnesses"] = witness_json(c.witnesses);
    j["inputs_digest"] = witness_json(c.inputs_digest);
    return j;
}

[[nodiscard]] inline Json to_json(const HadamardConstants& k) {
    return Json{{"a", real_json(k.a)},         {"b", real_json(k.b)},
                {"u0_norm", real_json(k.u0_norm)}, {"g0", real_json(k.g0)},
                {"p", real_json(k.p)},         {"c1", real_json(k.c1)},
                {"c2", real_json(k.c2)}};
}

[[nodiscard]] inline Json to_json(const HomotopyResult& h) {
    Json nodes = Json::array();
    for (const auto& n : h.nodes) {
        nodes.push_back(Json{{"s", real_json(n.s)},
                             {"status", std::string(to_string(n.status))},
                             {"u_limit", vector_json(n.u_limit)},
                             {"g_final", real_json(n.g_final)}});
    }
    Json j = Json::object();
    j["nodes"] = std::move(nodes);
    j["verdict"] = h.injective_verdict;
    j["max_limit_spread"] = real_json(h.max_limit_spread);
    j["coincidence_tol"] = real_json(h.coincidence_tol);
    j["first_failure"] = h.first_failure ? Json(*h.first_failure) : Json(nullptr);
    return j;
}

[[nodiscard]] inline Json to_json(const ProblemDescriptor& d) {
    Json j = Json::object();
    j["name"] = d.name;
    j["formula"] = d.formula;
    j["dimension"] = d.fixed_dimension ? Json(*d.fixed_dimension) : Json("any");
    if (d.known_root) {
        j["known_root"] = {{"f", vector_json(d.known_root->f)},
                           {"root", vector_json(d.known_root->root)}};
    } else {
        j["known_root"] = nullptr;
    }
    j["known_m_formula"] = d.known_m ? Json(d.known_m->text) : Json(nullptr);
    if (d.hadamard) {
        j["hadamard"] = {{"a", real_json(d.hadamard->a)}, {"b", real_json(d.hadamard->b)}};
    } else {
        j["hadamard"] = nullptr;
    }
    Json tags = Json::array();
    for (auto t : d.tags) tags.push_back(std::string(to_string(t)));
    j["tags"] = std::move(tags);
    if (d.valid_region) {
        j["valid_region"] = {{"center", vector_json(d.valid_region->center)},
                             {"radius", real_json(d.valid_region->radius)}};
    }
    return j;
}

}  // namespace dsm::io
