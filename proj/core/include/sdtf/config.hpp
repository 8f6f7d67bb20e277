#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sdtf/stokes_darcy.hpp"
#include "sdtf/time_integration.hpp"

namespace sdtf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key=value run configuration. Every key has a default except the
/// scenario name, which callers must supply (file or CLI).
struct RunConfig {
    std::string scenario;

    // mesh
    std::size_t nx = 8;
    std::size_t ny_fluid = 8;
    std::size_t ny_porous = 8;
    double wellbore_h = 0.25;
    std::string wellbore_left_profile = "literal";  // or "symmetric"
    double wellbore_head_dirichlet = 1e4;

    // discretization
    int deg_velocity = 2;
    int deg_pressure = 1;
    int deg_head = 2;

    // physics
    double nu = 1.0;
    double g = 1.0;
    double storativity = 1.0;
    double k_iso = 1.0;
    double alpha_bjs = 1.0;

    // time stepping
    std::string scheme = "BDF2_TF";  // BDF2 | BDF2_TF | BDF3 | BDF3_TF
    std::string schedule = "constant";
    double k = 0.025;
    double t0 = 0.0;
    double t_end = 1.0;
    std::size_t max_steps = 0;  // 0: no cap

    // adaptive controller
    double eps = 1e-4;
    double gamma_hat = 1.0;
    double gamma_check = 0.5;
    double k_min = 1e-8;
    double k_max = 0.5;
    std::optional<double> tau_cap;  // "tau_cap=theory" -> 1.0315
    double growth_exponent = 1.0 / 3.0;

    // harness
    std::string outdir = "out";
    bool write_csv = true;
    bool write_vtk = false;
    std::uint64_t seed = 20240815;
    std::string mode;  // scenario-specific switch

    PhysicalParams physical_params() const;
    FeDegrees degrees() const;
    SchemeKind scheme_kind() const;
    void validate() const;
};

/// Parses key=value lines ('#' comments). Unknown keys, malformed values,
/// and constraint violations raise ConfigError with the line number.
RunConfig parse_config(const std::string& text);

/// parse_config plus a single "key=value" override application.
void apply_override(RunConfig& config, const std::string& assignment);

std::string config_documentation();

}  // namespace sdtf
