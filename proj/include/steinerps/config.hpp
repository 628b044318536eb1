#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinerps/solver.hpp"

namespace steinerps {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline json parse_toml_scalar(const std::string& tok) {
    const std::string t = trim(tok);
    if (t.empty()) throw ConfigError("toml: empty value");
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"') throw ConfigError("toml: unterminated string: " + t);
        return t.substr(1, t.size() - 2);
    }
    if (t == "true") return true;
    if (t == "false") return false;
    if (t == "inf" || t == "+inf") return "inf";  // JSON carries infinity as a string
    char* end = nullptr;
    const long long iv = std::strtoll(t.c_str(), &end, 10);
    if (end && *end == '\0' && t.find_first_of(".eE") == std::string::npos) return iv;
    const double dv = std::strtod(t.c_str(), &end);
    if (end && *end == '\0') return dv;
    throw ConfigError("toml: cannot parse value: " + t);
}

inline json parse_toml_value(const std::string& tok) {
    const std::string t = trim(tok);
    if (!t.empty() && t.front() == '[') {
        if (t.back() != ']') throw ConfigError("toml: unterminated array: " + t);
        json arr = json::array();
        std::string body = t.substr(1, t.size() - 2);
        std::string item;
        std::stringstream ss(body);
        while (std::getline(ss, item, ',')) {
            if (trim(item).empty()) continue;
            arr.push_back(parse_toml_scalar(item));
        }
        return arr;
    }
    return parse_toml_scalar(t);
}

/// Minimal TOML reader covering what the configs need: [section] headers,
/// key = value with strings, numbers, booleans and flat arrays. (There is
/// no TOML library in the toolchain; JSON configs are accepted as-is.)
inline json parse_toml(std::istream& in) {
    json root = json::object();
    json* section = &root;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("toml: bad section header at line " + std::to_string(lineno));
            std::string path = trim(line.substr(1, line.size() - 2));
            section = &root;
            std::stringstream ss(path);
            std::string part;
            while (std::getline(ss, part, '.')) {
                part = trim(part);
                if (part.empty()) throw ConfigError("toml: empty section name at line " + std::to_string(lineno));
                section = &(*section)[part];
                if (section->is_null()) *section = json::object();
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("toml: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("toml: empty key at line " + std::to_string(lineno));
        (*section)[key] = parse_toml_value(line.substr(eq + 1));
    }
    return root;
}

}  // namespace detail

/// Load a config file: TOML (default) or JSON (by extension or a leading
/// brace).
inline json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    const std::string t = detail::trim(text);
    const bool looks_json = (!t.empty() && t.front() == '{') ||
                            (path.size() > 5 && path.substr(path.size() - 5) == ".json");
    if (looks_json) {
        try {
            return json::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("json parse error: ") + e.what());
        }
    }
    std::stringstream ss(text);
    return detail::parse_toml(ss);
}

inline json domain_to_json(const DomainSpec& spec) {
    json p = json::object();
    switch (spec.family) {
        case DomainFamily::slab:
        case DomainFamily::cross:
        case DomainFamily::half_slab:
            p["half_width"] = spec.half_width;
            break;
        case DomainFamily::pinched_minus:
        case DomainFamily::pinched_plus:
            p["epsilon"] = spec.epsilon;
            break;
        case DomainFamily::ball:
            p["radius"] = spec.radius;
            break;
        case DomainFamily::box:
            p["half_extents"] = spec.half_extents;
            break;
        case DomainFamily::staircase:
        case DomainFamily::custom:
            break;
    }
    return json{{"family", family_name(spec.family)}, {"params", p}};
}

inline DomainSpec domain_from_json(const json& j) {
    if (!j.contains("family")) throw ConfigError("domain: missing family");
    const std::string fam = j.at("family").get<std::string>();
    // Parameters may sit flat next to "family" or nested under "params".
    json p = j.contains("params") ? j.at("params") : j;
    auto num = [&](const char* key, double fallback) {
        return p.contains(key) ? p.at(key).get<double>() : fallback;
    };
    if (fam == "slab") return DomainSpec::slab(num("half_width", 1.0));
    if (fam == "cross") return DomainSpec::cross(num("half_width", 1.0));
    if (fam == "half_slab") return DomainSpec::half_slab(num("half_width", 1.0));
    if (fam == "pinched_minus") return DomainSpec::pinched(false, num("epsilon", 0.5));
    if (fam == "pinched_plus") return DomainSpec::pinched(true, num("epsilon", 0.5));
    if (fam == "ball" || fam == "interval") return DomainSpec::ball(num("radius", 1.0));
    if (fam == "box") {
        std::vector<double> he;
        if (p.contains("half_extents"))
            for (const auto& v : p.at("half_extents")) he.push_back(v.get<double>());
        if (he.empty()) he.push_back(num("radius", 1.0));
        return DomainSpec::box(std::move(he));
    }
    if (fam == "staircase") return DomainSpec::staircase();
    throw ConfigError("domain: unknown family '" + fam + "'");
}

inline double q_from_json(const json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return kInf;
        throw ConfigError("problem: q must be a number or \"inf\"");
    }
    return v.get<double>();
}

/// Build a ProblemConfig from the parsed config document.
inline ProblemConfig problem_from_json(const json& root) {
    ProblemConfig cfg;
    try {
        const json& prob = root.at("problem");
        cfg.dim = prob.at("dim").get<int>();
        cfg.p = prob.at("p").get<double>();
        cfg.q = q_from_json(prob.at("q"));
        cfg.domain = domain_from_json(root.at("domain"));
        const json& grid = root.at("grid");
        cfg.half_extent = grid.at("half_extent").get<double>();
        cfg.spacing = grid.at("spacing").get<double>();
        if (root.contains("confinement") && root.at("confinement").contains("n"))
            cfg.confinement_n = root.at("confinement").at("n").get<int>();
        if (root.contains("solver")) {
            const json& s = root.at("solver");
            if (s.contains("max_iterations")) cfg.solver.max_iterations = s.at("max_iterations").get<std::int64_t>();
            if (s.contains("tolerance")) cfg.solver.tolerance = s.at("tolerance").get<double>();
            if (s.contains("window")) cfg.solver.window = s.at("window").get<int>();
            if (s.contains("sym_cadence")) cfg.solver.sym_cadence = s.at("sym_cadence").get<int>();
            if (s.contains("refine_levels")) cfg.solver.refine_levels = s.at("refine_levels").get<int>();
            if (s.contains("grad_smoothing")) cfg.solver.grad_smoothing = s.at("grad_smoothing").get<double>();
            if (s.contains("seed")) cfg.solver.seed = s.at("seed").get<std::uint64_t>();
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline json problem_to_json(const ProblemConfig& cfg) {
    json j;
    j["problem"] = {{"dim", cfg.dim}, {"p", cfg.p}};
    if (std::isinf(cfg.q)) j["problem"]["q"] = "inf";
    else j["problem"]["q"] = cfg.q;
    j["domain"] = domain_to_json(cfg.domain);
    const Grid g = cfg.grid();
    j["grid"] = {{"half_extent", cfg.half_extent},
                 {"spacing", cfg.spacing},
                 {"cells_per_axis", g.cells_per_axis()},
                 {"dim", cfg.dim}};
    if (cfg.confinement_n) j["confinement"] = {{"n", *cfg.confinement_n}};
    j["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                   {"tolerance", cfg.solver.tolerance},
                   {"window", cfg.solver.window},
                   {"sym_cadence", cfg.solver.sym_cadence},
                   {"refine_levels", cfg.solver.refine_levels},
                   {"grad_smoothing", cfg.solver.grad_smoothing},
                   {"seed", cfg.solver.seed}};
    return j;
}

}  // namespace steinerps
