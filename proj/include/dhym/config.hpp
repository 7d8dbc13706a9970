#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dhym/field_source.hpp"
#include "dhym/io.hpp"
#include "dhym/problem.hpp"

namespace dhym {

using nlohmann::json;

/// An angle in radians, optionally given exactly as a fraction of π.
struct Angle {
    double value = 0.0;
    std::optional<std::pair<long, long>> pi_fraction;
};

struct FieldSpec {
    enum class Family { quadratic, expression, sampled } family = Family::quadratic;
    QuadraticData quadratic;
    std::string expression;
    std::string path;
};

struct ProblemConfig {
    int n = 1;
    std::vector<double> lo, hi;
    std::vector<int> points_per_axis;
    Angle hat_theta;
    Angle theta0;
    double t_end = 1.0;
    double tol_stationary = 1e-6;
    int s_samples = 33;
    bool strict = false;
    std::uint64_t seed = 0;
    double slack_C = 10.0;
    FieldSpec phi;
    std::optional<FieldSpec> psi;          // defaults to φ, constant in t
    std::optional<FieldSpec> subsolution;
    std::optional<FieldSpec> target;       // second field for eval-functionals
    std::string output_directory = "out";
    double cadence = 0.0;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
    fail(ErrorKind::config, path + ": " + what);
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) config_error(path + key, "missing field");
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) config_error(path, "expected a number");
    return j.get<double>();
}

inline Angle parse_angle(const json& j, const std::string& path) {
    Angle a;
    if (j.is_object()) {
        const json& f = require(j, "pi_fraction", path + ".");
        if (!f.is_array() || f.size() != 2 || !f[0].is_number_integer() || !f[1].is_number_integer() ||
            f[1].get<long>() == 0)
            config_error(path + ".pi_fraction", "expected [numerator, nonzero denominator]");
        a.pi_fraction = {f[0].get<long>(), f[1].get<long>()};
        a.value = std::numbers::pi * static_cast<double>(a.pi_fraction->first) /
                  static_cast<double>(a.pi_fraction->second);
    } else {
        a.value = number(j, path);
    }
    return a;
}

inline json angle_json(const Angle& a) {
    if (a.pi_fraction) return json{{"pi_fraction", {a.pi_fraction->first, a.pi_fraction->second}}};
    return a.value;
}

inline cplx parse_complex(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    config_error(path, "expected a number or [re, im]");
}

inline FieldSpec parse_field(const json& j, int n, const std::string& path) {
    FieldSpec f;
    const json& fam = require(j, "family", path + ".");
    if (!fam.is_string()) config_error(path + ".family", "expected a string");
    const std::string family = fam.get<std::string>();
    if (family == "quadratic") {
        f.family = FieldSpec::Family::quadratic;
        const json& A = require(j, "A", path + ".");
        if (!A.is_array() || static_cast<int>(A.size()) != n)
            config_error(path + ".A", "expected an " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
        f.quadratic.A = CMat(n);
        for (int r = 0; r < n; ++r) {
            if (!A[r].is_array() || static_cast<int>(A[r].size()) != n)
                config_error(path + ".A[" + std::to_string(r) + "]", "expected " + std::to_string(n) + " entries");
            for (int c = 0; c < n; ++c)
                f.quadratic.A(r, c) =
                    parse_complex(A[r][c], path + ".A[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
        if (hermitian_defect(f.quadratic.A) > 1e-12 * (1.0 + f.quadratic.A.frobenius()))
            config_error(path + ".A", "quadratic coefficient matrix is not Hermitian");
        if (j.contains("linear")) {
            const json& l = j.at("linear");
            if (!l.is_array() || static_cast<int>(l.size()) != 2 * n)
                config_error(path + ".linear", "expected " + std::to_string(2 * n) + " numbers");
            for (std::size_t k = 0; k < l.size(); ++k)
                f.quadratic.linear.push_back(number(l[k], path + ".linear[" + std::to_string(k) + "]"));
        }
        if (j.contains("constant")) f.quadratic.constant = number(j.at("constant"), path + ".constant");
    } else if (family == "expression") {
        f.family = FieldSpec::Family::expression;
        const json& e = require(j, "expr", path + ".");
        if (!e.is_string()) config_error(path + ".expr", "expected a string");
        f.expression = e.get<std::string>();
        Expression::compile(f.expression, n);  // validate now
    } else if (family == "sampled") {
        f.family = FieldSpec::Family::sampled;
        const json& p = require(j, "path", path + ".");
        if (!p.is_string()) config_error(path + ".path", "expected a string");
        f.path = p.get<std::string>();
    } else {
        config_error(path + ".family", "unknown family '" + family + "' (quadratic, expression, sampled)");
    }
    return f;
}

inline json field_json(const FieldSpec& f) {
    switch (f.family) {
        case FieldSpec::Family::quadratic: {
            json A = json::array();
            const int n = f.quadratic.A.n;
            for (int r = 0; r < n; ++r) {
                json row = json::array();
                for (int c = 0; c < n; ++c) row.push_back({f.quadratic.A(r, c).real(), f.quadratic.A(r, c).imag()});
                A.push_back(row);
            }
            json out{{"family", "quadratic"}, {"A", A}, {"constant", f.quadratic.constant}};
            if (!f.quadratic.linear.empty()) out["linear"] = f.quadratic.linear;
            return out;
        }
        case FieldSpec::Family::expression: return json{{"family", "expression"}, {"expr", f.expression}};
        case FieldSpec::Family::sampled: return json{{"family", "sampled"}, {"path", f.path}};
    }
    return {};
}

}  // namespace detail

inline ProblemConfig parse_config_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) config_error("<root>", "expected a JSON object");
    ProblemConfig c;
    const json& n = require(j, "n", "");
    if (!n.is_number_integer() || n.get<int>() < 1 || n.get<int>() > kMaxComplexDim)
        config_error("n", "expected an integer in [1, " + std::to_string(kMaxComplexDim) + "]");
    c.n = n.get<int>();
    const int axes = 2 * c.n;
    const json& box = require(j, "box", "");
    for (const char* key : {"lo", "hi"}) {
        const json& v = require(box, key, "box.");
        if (!v.is_array() || static_cast<int>(v.size()) != axes)
            config_error(std::string("box.") + key, "expected " + std::to_string(axes) + " numbers");
        auto& dst = std::string(key) == "lo" ? c.lo : c.hi;
        for (int a = 0; a < axes; ++a) dst.push_back(number(v[a], std::string("box.") + key));
    }
    const json& pts = require(j, "points_per_axis", "");
    if (pts.is_number_integer()) {
        c.points_per_axis.assign(axes, pts.get<int>());
    } else if (pts.is_array() && static_cast<int>(pts.size()) == axes) {
        for (const auto& p : pts) {
            if (!p.is_number_integer()) config_error("points_per_axis", "expected integers");
            c.points_per_axis.push_back(p.get<int>());
        }
    } else {
        config_error("points_per_axis", "expected an integer or " + std::to_string(axes) + " integers");
    }
    c.hat_theta = parse_angle(require(j, "hat_theta", ""), "hat_theta");
    if (!(c.hat_theta.value > 0.0 && c.hat_theta.value < std::numbers::pi / 2.0))
        config_error("hat_theta", "hypercritical range violated: must lie in (0, pi/2), got " +
                                      std::to_string(c.hat_theta.value));
    c.theta0 = j.contains("theta0") ? parse_angle(j.at("theta0"), "theta0") : Angle{0.05, std::nullopt};
    if (!(c.theta0.value > 0.0 && c.theta0.value < std::numbers::pi / 4.0))
        config_error("theta0", "must lie in (0, pi/4), got " + std::to_string(c.theta0.value));
    if (j.contains("t_end")) c.t_end = number(j.at("t_end"), "t_end");
    if (!(c.t_end >= 0.0)) config_error("t_end", "must be non-negative");
    if (j.contains("tol_stationary")) c.tol_stationary = number(j.at("tol_stationary"), "tol_stationary");
    if (!(c.tol_stationary > 0.0)) config_error("tol_stationary", "must be positive");
    if (j.contains("s_samples")) {
        const json& s = j.at("s_samples");
        if (!s.is_number_integer() || s.get<int>() < 3 || s.get<int>() % 2 == 0)
            config_error("s_samples", "expected an odd integer >= 3");
        c.s_samples = s.get<int>();
    }
    if (j.contains("strict")) {
        if (!j.at("strict").is_boolean()) config_error("strict", "expected a boolean");
        c.strict = j.at("strict").get<bool>();
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            config_error("seed", "expected a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("slack_C")) c.slack_C = number(j.at("slack_C"), "slack_C");
    if (!(c.slack_C >= 0.0)) config_error("slack_C", "must be non-negative");
    c.phi = parse_field(require(j, "phi", ""), c.n, "phi");
    if (j.contains("psi")) c.psi = parse_field(j.at("psi"), c.n, "psi");
    if (j.contains("subsolution")) c.subsolution = parse_field(j.at("subsolution"), c.n, "subsolution");
    if (j.contains("target")) c.target = parse_field(j.at("target"), c.n, "target");
    if (j.contains("output")) {
        const json& o = j.at("output");
        if (o.contains("directory")) {
            if (!o.at("directory").is_string()) config_error("output.directory", "expected a string");
            c.output_directory = o.at("directory").get<std::string>();
        }
        if (o.contains("cadence")) c.cadence = number(o.at("cadence"), "output.cadence");
        if (!(c.cadence >= 0.0)) config_error("output.cadence", "must be non-negative");
    }
    // Grid invariants are reported with their own messages.
    make_grid(c.n, c.lo, c.hi, c.points_per_axis);
    return c;
}

inline ProblemConfig parse_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, path + ": invalid JSON: " + e.what());
    } catch (const Error& e) {
        fail(ErrorKind::config, e.what());
    }
    return parse_config_json(j);
}

inline json config_to_json(const ProblemConfig& c) {
    using namespace detail;
    json j{{"n", c.n},
           {"box", {{"lo", c.lo}, {"hi", c.hi}}},
           {"points_per_axis", c.points_per_axis},
           {"hat_theta", angle_json(c.hat_theta)},
           {"theta0", angle_json(c.theta0)},
           {"t_end", c.t_end},
           {"tol_stationary", c.tol_stationary},
           {"s_samples", c.s_samples},
           {"strict", c.strict},
           {"seed", c.seed},
           {"slack_C", c.slack_C},
           {"phi", field_json(c.phi)},
           {"output", {{"directory", c.output_directory}, {"cadence", c.cadence}}}};
    if (c.psi) j["psi"] = field_json(*c.psi);
    if (c.subsolution) j["subsolution"] = field_json(*c.subsolution);
    if (c.target) j["target"] = field_json(*c.target);
    return j;
}

inline GridSpec config_grid(const ProblemConfig& c) { return make_grid(c.n, c.lo, c.hi, c.points_per_axis); }

/// Sampled paths resolve relative to base_dir.
inline FieldSource make_source(const FieldSpec& f, const GridSpec& g, const std::filesystem::path& base_dir) {
    switch (f.family) {
        case FieldSpec::Family::quadratic: return FieldSource::quadratic(f.quadratic);
        case FieldSpec::Family::expression: return FieldSource::expression(Expression::compile(f.expression, g.n));
        case FieldSpec::Family::sampled: {
            std::filesystem::path p(f.path);
            if (p.is_relative()) p = base_dir / p;
            return FieldSource::sampled(read_snapshot(p.string(), g));
        }
    }
    fail(ErrorKind::config, "unknown field family");
}

inline Problem build_problem(const ProblemConfig& c, const std::filesystem::path& base_dir = ".") {
    Problem p;
    p.grid = config_grid(c);
    p.hat_theta = c.hat_theta.value;
    p.theta0 = c.theta0.value;
    p.phi = make_source(c.phi, p.grid, base_dir);
    p.psi = c.psi ? make_source(*c.psi, p.grid, base_dir) : p.phi;
    if (c.subsolution) p.subsolution = make_source(*c.subsolution, p.grid, base_dir);
    p.t_end = c.t_end;
    return p;
}

}  // namespace dhym
