#include "nimcav/config.hpp"
#include "nimcav/hash.hpp"
#include "nimcav/optomech.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace nimcav {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d))
        throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, v));
    return d;
}

int to_int(const std::string& key, const std::string& v)
{
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
    return static_cast<int>(d);
}

std::vector<double> to_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
    return out;
}

// 12 significant digits: display values such as 12.44 survive the unit scaling
std::string num(double v) { return fmt::format("{:.12g}", v); }

struct Entry {
    ConfigKey info;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Ref>
Entry real(std::string key, std::string desc, Ref ref, double unit, bool positive = false)
{
    Entry e;
    e.info = {key, std::move(desc), true};
    e.set = [key, ref, unit, positive](RunConfig& c, const std::string& v) {
        const double d = to_double(key, v);
        if (positive && !(d > 0.0)) throw ConfigError(fmt::format("{}: must be positive", key));
        ref(c) = d * unit;
    };
    e.get = [ref, unit](const RunConfig& c) { return num(ref(const_cast<RunConfig&>(c)) / unit); };
    return e;
}

template <class Ref>
Entry integer(std::string key, std::string desc, Ref ref, int lo, int hi)
{
    Entry e;
    e.info = {key, std::move(desc), true};
    e.set = [key, ref, lo, hi](RunConfig& c, const std::string& v) {
        const int i = to_int(key, v);
        if (i < lo || i > hi) throw ConfigError(fmt::format("{}: {} outside [{}, {}]", key, i, lo, hi));
        ref(c) = i;
    };
    e.get = [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); };
    return e;
}

Entry grid(std::string key, std::string desc, GridSpec RunConfig::*g, double unit, int part)
{
    return real(
        std::move(key), std::move(desc),
        [g, part](RunConfig& c) -> double& {
            auto& s = c.*g;
            return part == 0 ? s.start : part == 1 ? s.stop : s.step;
        },
        unit, part == 2);
}

#define REF(expr) [](RunConfig & c) -> auto& { return expr; }

std::vector<Entry> make_entries()
{
    std::vector<Entry> t;
    t.push_back(real("cavity.length_um", "nominal cavity length", REF(c.cavity.length), 1e-6, true));
    t.push_back(real("cavity.mirror_curvature_um", "mirror radius of curvature R_c", REF(c.cavity.mirror_curvature), 1e-6, true));
    t.push_back(real("cavity.mirror_size_um", "transverse mirror diameter D", REF(c.cavity.mirror_size), 1e-6, true));
    t.push_back(real("cavity.reflectivity_left", "left mirror power reflectivity", REF(c.cavity.reflectivity_left), 1.0, true));
    t.push_back(real("cavity.reflectivity_right", "right mirror power reflectivity", REF(c.cavity.reflectivity_right), 1.0, true));
    t.push_back(real("cavity.finesse", "empty finesse override (0 = use the reflectivities)", REF(c.finesse), 1.0));
    t.push_back(real("cavity.wavelength_nm", "wavelength", REF(c.cavity.wavelength), 1e-9, true));
    t.push_back(integer("cavity.order", "longitudinal order N", REF(c.cavity.longitudinal_order), 1, 100000));
    t.push_back(integer("cavity.eta_left", "left mirror sign (-1 or 1)", REF(c.cavity.eta_left), -1, 1));
    t.push_back(integer("cavity.eta_right", "right mirror sign (-1 or 1)", REF(c.cavity.eta_right), -1, 1));

    t.push_back(real("nanowire.radius_nm", "wire radius", REF(c.nanowire.radius), 1e-9, true));
    t.push_back(real("nanowire.index", "refractive index", REF(c.nanowire.refractive_index), 1.0, true));
    t.push_back(real("nanowire.length_um", "wire length (mechanics)", REF(c.nanowire.length), 1e-6, true));
    t.push_back(real("nanowire.x0_um", "transverse position", REF(c.nanowire.x0), 1e-6));
    t.push_back(real("nanowire.z0_nm", "axial position", REF(c.nanowire.z0), 1e-9));
    t.push_back(real("material.density", "kg/m^3", REF(c.material.density), 1.0, true));
    t.push_back(real("material.kappa_omega", "Hz m, Omega/2pi = kappa R / L^2", REF(c.material.kappa_omega), 1.0, true));

    Entry pol;
    pol.info = {"light.polarization", "par or perp", true};
    pol.set = [](RunConfig& c, const std::string& v) {
        try {
            c.polarization = parse_polarization(v);
        } catch (const std::invalid_argument&) {
            throw ConfigError(fmt::format("light.polarization: '{}' is not par or perp", v));
        }
    };
    pol.get = [](const RunConfig& c) { return std::string(to_string(c.polarization)); };
    t.push_back(pol);

    Entry method;
    method.info = {"coupling.method", "approx or exact", true};
    method.set = [](RunConfig& c, const std::string& v) {
        try {
            c.method = parse_method(v);
        } catch (const std::invalid_argument&) {
            throw ConfigError(fmt::format("coupling.method: '{}' is not approx or exact", v));
        }
    };
    method.get = [](const RunConfig& c) { return std::string(to_string(c.method)); };
    t.push_back(method);

    Entry backend;
    backend.info = {"coupling.source", "direct or database (cached grid, interpolated)", true};
    backend.set = [](RunConfig& c, const std::string& v) {
        if (v == "direct") c.backend = CoefficientBackend::direct;
        else if (v == "database") c.backend = CoefficientBackend::database;
        else throw ConfigError(fmt::format("coupling.source: '{}' is not direct or database", v));
    };
    backend.get = [](const RunConfig& c) {
        return std::string(c.backend == CoefficientBackend::direct ? "direct" : "database");
    };
    t.push_back(backend);

    t.push_back(integer("coupling.l_max", "Mie truncation order", REF(c.coupling.l_max), 0, 60));
    t.push_back(integer("coupling.expansion_terms", "plane waves per axis (exact method)", REF(c.coupling.expansion_terms), 1, 41));
    t.push_back(real("coupling.expansion_dk_per_um", "plane-wave spacing", REF(c.coupling.expansion_delta_k), 1e6, true));
    t.push_back(real("coupling.quadrature_tol", "relative change under mesh halving", REF(c.coupling.quadrature_tol), 1.0, true));
    t.push_back(integer("coupling.max_refinements", "mesh halvings", REF(c.coupling.max_refinements), 0, 8));

    t.push_back(real("power.input_uW", "input power P0", REF(c.power.input_power), 1e-6));
    t.push_back(real("power.eta_fiber", "fiber mode matching", REF(c.power.eta_fiber), 1.0));
    t.push_back(real("power.t_in", "input transmission", REF(c.power.t_in), 1.0));

    t.push_back(real("mech.quality_factor", "mechanical Q", REF(c.quality_factor), 1.0, true));
    Entry temps;
    temps.info = {"mech.temperatures_K", "comma separated", true};
    temps.set = [](RunConfig& c, const std::string& v) { c.temperatures = to_list("mech.temperatures_K", v); };
    temps.get = [](const RunConfig& c) {
        std::string s;
        for (std::size_t i = 0; i < c.temperatures.size(); ++i) s += (i ? "," : "") + num(c.temperatures[i]);
        return s;
    };
    t.push_back(temps);
    Entry nas;
    nas.info = {"mie.numerical_apertures", "collection NA list, comma separated", true};
    nas.set = [](RunConfig& c, const std::string& v) {
        auto l = to_list("mie.numerical_apertures", v);
        for (double a : l)
            if (!(a > 0.0 && a < 1.0)) throw ConfigError("mie.numerical_apertures: values must be in (0, 1)");
        c.numerical_apertures = l;
    };
    nas.get = [](const RunConfig& c) {
        std::string s;
        for (std::size_t i = 0; i < c.numerical_apertures.size(); ++i) s += (i ? "," : "") + num(c.numerical_apertures[i]);
        return s;
    };
    t.push_back(nas);

    t.push_back(grid("grid.x_start_um", "map x0 start", &RunConfig::x_grid, 1e-6, 0));
    t.push_back(grid("grid.x_stop_um", "map x0 stop", &RunConfig::x_grid, 1e-6, 1));
    t.push_back(grid("grid.x_step_um", "map x0 step", &RunConfig::x_grid, 1e-6, 2));
    t.push_back(grid("grid.z_start_nm", "map z0 start", &RunConfig::z_grid, 1e-9, 0));
    t.push_back(grid("grid.z_stop_nm", "map z0 stop", &RunConfig::z_grid, 1e-9, 1));
    t.push_back(grid("grid.z_step_nm", "map z0 step", &RunConfig::z_grid, 1e-9, 2));
    t.push_back(grid("grid.radius_start_nm", "radius scan start", &RunConfig::radius_grid, 1e-9, 0));
    t.push_back(grid("grid.radius_stop_nm", "radius scan stop", &RunConfig::radius_grid, 1e-9, 1));
    t.push_back(grid("grid.radius_step_nm", "radius scan step", &RunConfig::radius_grid, 1e-9, 2));
    t.push_back(integer("grid.length_points", "LZ panel length samples", REF(c.length_points), 3, 100000));
    t.push_back(real("grid.length_half_window_nm", "LZ half window (0 = 0.3 FSR)", REF(c.length_half_window), 1e-9));
    t.push_back(real("figures.z_step_nm", "on-axis step for the figure ridges", REF(c.figures_z_step), 1e-9, true));
    t.push_back(real("database.x_step_nm", "database x0 step", REF(c.database_x_step), 1e-9, true));
    t.push_back(real("database.z_step_nm", "database z0 step", REF(c.database_z_step), 1e-9, true));
    t.push_back(real("database.x_max_um", "database x0 extent (0 = 2 w0)", REF(c.database_x_max), 1e-6));

    Entry pol_cache;
    pol_cache.info = {"cache.policy", "use, refresh or off", false};
    pol_cache.set = [](RunConfig& c, const std::string& v) {
        if (v == "use") c.cache_policy = CachePolicy::use;
        else if (v == "refresh") c.cache_policy = CachePolicy::refresh;
        else if (v == "off") c.cache_policy = CachePolicy::off;
        else throw ConfigError(fmt::format("cache.policy: '{}' is not use, refresh or off", v));
    };
    pol_cache.get = [](const RunConfig& c) {
        return std::string(c.cache_policy == CachePolicy::use ? "use" : c.cache_policy == CachePolicy::refresh ? "refresh" : "off");
    };
    t.push_back(pol_cache);
    Entry cdir;
    cdir.info = {"cache.dir", "coefficient cache directory", false};
    cdir.set = [](RunConfig& c, const std::string& v) { c.cache_dir = v; };
    cdir.get = [](const RunConfig& c) { return c.cache_dir; };
    t.push_back(cdir);
    Entry odir;
    odir.info = {"output.dir", "output directory", false};
    odir.set = [](RunConfig& c, const std::string& v) { c.output_dir = v; };
    odir.get = [](const RunConfig& c) { return c.output_dir; };
    t.push_back(odir);
    std::sort(t.begin(), t.end(), [](const Entry& a, const Entry& b) { return a.info.key < b.info.key; });
    return t;
}

#undef REF

const std::vector<Entry>& entries()
{
    static const std::vector<Entry> t = make_entries();
    return t;
}

const Entry& find_entry(const std::string& key)
{
    for (const auto& e : entries())
        if (e.info.key == key) return e;
    throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

} // namespace

std::vector<double> GridSpec::values() const
{
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    if (stop < start) throw ConfigError("grid stop below start");
    // tolerate the stop value landing a rounding error past the last node
    return grid_range(start, stop + 1e-9 * step, step);
}

CavityGeometry RunConfig::effective_cavity() const
{
    CavityGeometry c = cavity;
    if (finesse > 0.0) c.reflectivity_left = c.reflectivity_right = reflectivity_for_finesse(finesse);
    return c;
}

const std::vector<ConfigKey>& config_keys()
{
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& e : entries()) k.push_back(e.info);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value)
{
    find_entry(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return find_entry(key).get(cfg); }

RunConfig parse_config(const std::string& text, const std::string& origin)
{
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    std::vector<std::string> seen;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, n));
        const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, n, key));
        seen.push_back(key);
        try {
            set_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", origin, n, e.what()));
        }
    }
    const auto& c = cfg.cavity;
    for (double r : {c.reflectivity_left, c.reflectivity_right})
        if (!(r > 0.0 && r < 1.0)) throw ConfigError(fmt::format("{}: reflectivities must be in (0, 1)", origin));
    if (std::abs(c.eta_left) != 1 || std::abs(c.eta_right) != 1)
        throw ConfigError(fmt::format("{}: mirror signs must be -1 or 1", origin));
    if (cfg.nanowire.refractive_index < 1.0) throw ConfigError(fmt::format("{}: nanowire.index below 1", origin));
    if (cfg.finesse < 0.0) throw ConfigError(fmt::format("{}: cavity.finesse must be >= 0", origin));
    if (c.length >= 2.0 * c.mirror_curvature) throw ConfigError(fmt::format("{}: unstable cavity (L >= 2 R_c)", origin));
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError(fmt::format("cannot read configuration '{}'", path));
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

std::string canonical_config(const RunConfig& cfg)
{
    std::string out;
    for (const auto& e : entries())
        if (e.info.affects_output) out += e.info.key + " = " + e.get(cfg) + "\n";
    return out;
}

std::string config_hash(const RunConfig& cfg)
{
    return sha256_hex(std::string(code_version) + "\n" + canonical_config(cfg));
}

} // namespace nimcav
