#pragma once

#include "nimcav/coupling.hpp"
#include "nimcav/force.hpp"
#include "nimcav/gaussian.hpp"

#include <map>
#include <string>
#include <vector>

namespace nimcav {

struct GridSpec {
    double start = 0.0, stop = 0.0, step = 1.0;   // SI
    std::vector<double> values() const;
};

enum class CachePolicy { use, refresh, off };
enum class CoefficientBackend { direct, database };

// Everything that determines an output. Keys are flat and dotted with the display
// unit in the name (cavity.length_um = 12.44); see config_keys() for the schema.
struct RunConfig {
    CavityGeometry cavity;
    double finesse = 0.0;   // > 0 overrides both reflectivities
    NanowireSpec nanowire;
    Material material;
    Polarization polarization = Polarization::perpendicular;
    CouplingMethod method = CouplingMethod::approx;
    CouplingSettings coupling;
    CoefficientBackend backend = CoefficientBackend::direct;
    PowerBudget power;
    double quality_factor = 1e5;
    std::vector<double> temperatures{0.02, 4.0, 300.0};
    std::vector<double> numerical_apertures{0.15, 0.7};

    GridSpec x_grid{-3e-6, 3e-6, 100e-9};
    GridSpec z_grid{-192.5e-9, 192.5e-9, 5e-9};
    GridSpec radius_grid{10e-9, 250e-9, 10e-9};
    int length_points = 241;
    double length_half_window = 0.0;   // 0: 0.3 FSR
    double figures_z_step = 2e-9;
    double database_x_step = 50e-9, database_z_step = 2e-9, database_x_max = 0.0;

    CachePolicy cache_policy = CachePolicy::use;
    std::string output_dir = "out";
    std::string cache_dir;             // empty: environment / default

    // Applies the finesse override; call after edits.
    CavityGeometry effective_cavity() const;
};

struct ConfigKey {
    std::string key, description;
    bool affects_output = true;   // output.dir / cache.* do not enter the hash
};
const std::vector<ConfigKey>& config_keys();

// Throws ConfigError naming the offending key/line.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

// "key = value" lines, '#' comments, blank lines ignored. Unknown keys are errors.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// Sorted "key = value" lines of every output-affecting key (round trips through parse_config).
std::string canonical_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

} // namespace nimcav
