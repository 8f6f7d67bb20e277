#include "sdtf/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace sdtf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError("value '" + v + "' for key '" + key + "' is not a number");
    }
}

std::size_t parse_size(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long n = std::stoll(v, &pos);
        if (pos != v.size() || n < 0) throw std::invalid_argument("");
        return static_cast<std::size_t>(n);
    } catch (...) {
        throw ConfigError("value '" + v + "' for key '" + key + "' is not a non-negative integer");
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("value '" + v + "' for key '" + key + "' is not a boolean");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::pair<std::string, Setter>>& key_table() {
    static const std::map<std::string, std::pair<std::string, Setter>> table = {
        {"scenario", {"scenario name", [](RunConfig& c, const std::string& v) { c.scenario = v; }}},
        {"nx", {"horizontal subdivisions", [](RunConfig& c, const std::string& v) { c.nx = parse_size(v, "nx"); }}},
        {"ny_fluid", {"fluid vertical subdivisions", [](RunConfig& c, const std::string& v) { c.ny_fluid = parse_size(v, "ny_fluid"); }}},
        {"ny_porous", {"porous vertical subdivisions", [](RunConfig& c, const std::string& v) { c.ny_porous = parse_size(v, "ny_porous"); }}},
        {"wellbore_h", {"wellbore target mesh size", [](RunConfig& c, const std::string& v) { c.wellbore_h = parse_double(v, "wellbore_h"); }}},
        {"wellbore_left_profile", {"literal or symmetric", [](RunConfig& c, const std::string& v) {
             if (v != "literal" && v != "symmetric") throw ConfigError("wellbore_left_profile must be literal or symmetric");
             c.wellbore_left_profile = v; }}},
        {"wellbore_head_dirichlet", {"porous boundary head", [](RunConfig& c, const std::string& v) { c.wellbore_head_dirichlet = parse_double(v, "wellbore_head_dirichlet"); }}},
        {"deg_velocity", {"velocity degree 1..3", [](RunConfig& c, const std::string& v) { c.deg_velocity = static_cast<int>(parse_size(v, "deg_velocity")); }}},
        {"deg_pressure", {"pressure degree 1..3", [](RunConfig& c, const std::string& v) { c.deg_pressure = static_cast<int>(parse_size(v, "deg_pressure")); }}},
        {"deg_head", {"head degree 1..3", [](RunConfig& c, const std::string& v) { c.deg_head = static_cast<int>(parse_size(v, "deg_head")); }}},
        {"nu", {"kinematic viscosity", [](RunConfig& c, const std::string& v) { c.nu = parse_double(v, "nu"); }}},
        {"g", {"gravitational acceleration", [](RunConfig& c, const std::string& v) { c.g = parse_double(v, "g"); }}},
        {"S", {"specific mass storativity", [](RunConfig& c, const std::string& v) { c.storativity = parse_double(v, "S"); }}},
        {"K", {"isotropic hydraulic conductivity", [](RunConfig& c, const std::string& v) { c.k_iso = parse_double(v, "K"); }}},
        {"alpha", {"BJS slip parameter", [](RunConfig& c, const std::string& v) { c.alpha_bjs = parse_double(v, "alpha"); }}},
        {"scheme", {"BDF2 | BDF2_TF | BDF3 | BDF3_TF", [](RunConfig& c, const std::string& v) { c.scheme = v; }}},
        {"schedule", {"constant | k_n1 | k_n2 | k_n3 | k_n5", [](RunConfig& c, const std::string& v) { c.schedule = v; }}},
        {"k", {"constant step size", [](RunConfig& c, const std::string& v) { c.k = parse_double(v, "k"); }}},
        {"t0", {"start time", [](RunConfig& c, const std::string& v) { c.t0 = parse_double(v, "t0"); }}},
        {"T", {"final time", [](RunConfig& c, const std::string& v) { c.t_end = parse_double(v, "T"); }}},
        {"max_steps", {"step cap (0 = none)", [](RunConfig& c, const std::string& v) { c.max_steps = parse_size(v, "max_steps"); }}},
        {"eps", {"adaptive tolerance", [](RunConfig& c, const std::string& v) { c.eps = parse_double(v, "eps"); }}},
        {"gamma_hat", {"growth safety factor", [](RunConfig& c, const std::string& v) { c.gamma_hat = parse_double(v, "gamma_hat"); }}},
        {"gamma_check", {"rejection safety factor", [](RunConfig& c, const std::string& v) { c.gamma_check = parse_double(v, "gamma_check"); }}},
        {"k_min", {"smallest admissible step", [](RunConfig& c, const std::string& v) { c.k_min = parse_double(v, "k_min"); }}},
        {"k_max", {"largest admissible step", [](RunConfig& c, const std::string& v) { c.k_max = parse_double(v, "k_max"); }}},
        {"tau_cap", {"none | theory | <number>", [](RunConfig& c, const std::string& v) {
             if (v == "none") { c.tau_cap.reset(); return; }
             if (v == "theory") { c.tau_cap = 1.0315; return; }
             c.tau_cap = parse_double(v, "tau_cap"); }}},
        {"growth_exponent", {"controller growth exponent", [](RunConfig& c, const std::string& v) { c.growth_exponent = parse_double(v, "growth_exponent"); }}},
        {"outdir", {"output directory", [](RunConfig& c, const std::string& v) { c.outdir = v; }}},
        {"csv", {"write CSV outputs", [](RunConfig& c, const std::string& v) { c.write_csv = parse_bool(v, "csv"); }}},
        {"vtk", {"write VTK outputs", [](RunConfig& c, const std::string& v) { c.write_vtk = parse_bool(v, "vtk"); }}},
        {"seed", {"RNG seed for property scenarios", [](RunConfig& c, const std::string& v) { c.seed = parse_size(v, "seed"); }}},
        {"mode", {"scenario-specific switch", [](RunConfig& c, const std::string& v) { c.mode = v; }}},
    };
    return table;
}

}  // namespace

PhysicalParams RunConfig::physical_params() const {
    return PhysicalParams::isotropic(nu, g, storativity, k_iso, alpha_bjs);
}

FeDegrees RunConfig::degrees() const { return {deg_velocity, deg_pressure, deg_head}; }

SchemeKind RunConfig::scheme_kind() const {
    if (scheme == "BDF2") return SchemeKind::bdf2;
    if (scheme == "BDF2_TF") return SchemeKind::bdf2_tf;
    if (scheme == "BDF3") return SchemeKind::bdf3;
    if (scheme == "BDF3_TF") return SchemeKind::bdf3_tf_const;
    throw ConfigError("unknown scheme '" + scheme + "'");
}

void RunConfig::validate() const {
    if (scenario.empty()) throw ConfigError("scenario missing");
    physical_params().validate();  // positivity constraints
    scheme_kind();
    if (!(k > 0.0)) throw ConfigError("k must be positive");
    if (!(t_end > t0)) throw ConfigError("T must exceed t0");
    if (deg_velocity < 1 || deg_velocity > 3 || deg_pressure < 1 || deg_pressure > 3 ||
        deg_head < 1 || deg_head > 3) {
        throw ConfigError("element degrees must be within 1..3");
    }
    if (nx == 0 || ny_fluid == 0 || ny_porous == 0) throw ConfigError("subdivisions must be positive");
    if (schedule != "constant" && schedule != "k_n1" && schedule != "k_n2" && schedule != "k_n3" &&
        schedule != "k_n5") {
        throw ConfigError("unknown schedule '" + schedule + "'");
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = key_table().find(key);
        if (it == key_table().end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        try {
            it->second.second(config, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto it = key_table().find(key);
    if (it == key_table().end()) throw ConfigError("override: unknown key '" + key + "'");
    it->second.second(config, value);
}

std::string config_documentation() {
    std::ostringstream os;
    os << "Configuration keys (key=value per line, '#' comments):\n";
    for (const auto& [key, entry] : key_table()) {
        os << "  " << key << " - " << entry.first << "\n";
    }
    return os.str();
}

}  // namespace sdtf
