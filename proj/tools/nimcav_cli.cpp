// Batch front end: one subcommand per map / figure recipe.
#include "nimcav/config.hpp"
#include "nimcav/database.hpp"
#include "nimcav/force.hpp"
#include "nimcav/io.hpp"
#include "nimcav/mie.hpp"
#include "nimcav/validation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

using namespace nimcav;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path, out_dir, cache_dir;
    std::vector<std::string> overrides;
    int threads = 1;
    double seed_resolution_nm = 0.0;
    bool full = false;
    bool per_photon = false;
};

void info(const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); }

RunConfig build_config(const Options& opt)
{
    RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_config(opt.config_path);
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
        auto key = kv.substr(0, eq), val = kv.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        while (!val.empty() && val.front() == ' ') val.erase(0, 1);
        set_config_value(cfg, key, val);
    }
    // canonicalise so the computation uses exactly the hashed values
    RunConfig c = parse_config(canonical_config(cfg), "<canonical>");
    c.cache_policy = cfg.cache_policy;
    c.cache_dir = cfg.cache_dir;
    c.output_dir = opt.out_dir.empty() ? cfg.output_dir : opt.out_dir;
    return c;
}

std::string out_file(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); }

void emit(const RunConfig& cfg, const std::string& sub, const std::string& name, const MapGrid& map)
{
    const auto path = out_file(cfg, name);
    write_map_csv(path, map, make_header(sub, cfg));
    info(fmt::format("wrote {}", path));
}

void require_cells(const MapGrid& map, const std::string& what)
{
    for (auto f : map.ok)
        if (f) return;
    throw NumericalError(fmt::format("{}: every cell failed", what));
}

std::shared_ptr<CouplingDatabase> open_database(const RunConfig& cfg, const Options& opt)
{
    const auto cav = cfg.effective_cavity();
    auto db = std::make_shared<CouplingDatabase>(
        cfg.nanowire, cav, cfg.polarization, cfg.method, cfg.coupling,
        CouplingDatabase::default_x_grid(cav, cfg.database_x_step, cfg.database_x_max),
        CouplingDatabase::default_z_grid(cav, cfg.database_z_step));
    const auto path = cache_path(cache_root(opt.cache_dir, cfg), *db);
    if (cfg.cache_policy == CachePolicy::use) {
        std::string why;
        if (load_database(path, *db, &why)) {
            info(fmt::format("coefficient cache hit {}", path));
            return db;
        }
        info(fmt::format("coefficient cache miss ({}): {}", why, path));
    }
    info(fmt::format("computing {} coefficient nodes", db->x_nodes().size() * db->z_nodes().size()));
    db->populate(opt.threads);
    if (cfg.cache_policy != CachePolicy::off) {
        save_database(path, *db);
        info(fmt::format("stored {}", path));
    }
    return db;
}

// probe = most off-axis position of the map, fixes the quadrature mesh up front
CoefficientSource make_source(const RunConfig& cfg, const Options& opt, double probe_x, double probe_z)
{
    if (cfg.backend == CoefficientBackend::database) {
        auto db = open_database(cfg, opt);
        return [db](double x0, double z0) { return db->query(x0, z0); };
    }
    auto engine = std::make_shared<CouplingEngine>(cfg.nanowire, cfg.effective_cavity(), cfg.polarization, cfg.method,
                                                   cfg.coupling);
    engine->calibrate(std::abs(probe_x), probe_z);
    return engine_source(engine);
}

double max_abs_finite(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    return m;
}

void add_coefficient_payloads(MapGrid& m)
{
    for (const char* n : {"cr_plus", "ct_plus", "cr_minus", "ct_minus"}) {
        m.add(fmt::format("abs_{}", n), "1", 1.0);
        m.add(fmt::format("arg_{}", n), "rad", 1.0);
    }
    m.add("closs_plus", "1", 1.0);
    m.add("closs_minus", "1", 1.0);
    m.add("interpolated", "flag", 1.0);
}

void store_coefficients(MapGrid& m, std::size_t k, const ScatterCoefficients& c)
{
    const cplx v[4] = {c.cr_plus, c.ct_plus, c.cr_minus, c.ct_minus};
    const char* n[4] = {"cr_plus", "ct_plus", "cr_minus", "ct_minus"};
    for (int i = 0; i < 4; ++i) {
        m.get(fmt::format("abs_{}", n[i])).data[k] = std::abs(v[i]);
        m.get(fmt::format("arg_{}", n[i])).data[k] = std::arg(v[i]);
    }
    m.get("closs_plus").data[k] = c.closs_plus;
    m.get("closs_minus").data[k] = c.closs_minus;
    m.get("interpolated").data[k] = c.interpolated ? 1.0 : 0.0;
}

void init_payloads(MapGrid& m)
{
    for (auto& p : m.payloads) p.data.assign(m.size(), std::nan(""));
}

int cmd_mie(const RunConfig& cfg, const Options&)
{
    MapGrid m;
    m.rows = {"radius", "nm", 1e9, cfg.radius_grid.values()};
    for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
        for (double na : cfg.numerical_apertures)
            for (const char* part : {"sigma_R", "sigma_T", "sigma_scat"})
                m.add(fmt::format("{}_{}_NA{}", part, to_string(pol), na), "nm", 1e9);
        m.add(fmt::format("sigma_total_{}", to_string(pol)), "nm", 1e9);
    }
    init_payloads(m);
    m.ok.assign(m.size(), 1);
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        NanowireSpec s = cfg.nanowire;
        s.radius = m.rows.values[i];
        const auto c = mie_coefficients(s, cfg.cavity.wavelength, cfg.coupling.l_max);
        for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
            for (double na : cfg.numerical_apertures) {
                const auto x = cross_sections_1d(c, pol, std::asin(na));
                m.get(fmt::format("sigma_R_{}_NA{}", to_string(pol), na)).data[i] = x.sigma_R;
                m.get(fmt::format("sigma_T_{}_NA{}", to_string(pol), na)).data[i] = x.sigma_T;
                m.get(fmt::format("sigma_scat_{}_NA{}", to_string(pol), na)).data[i] = x.sigma_scat;
            }
            m.get(fmt::format("sigma_total_{}", to_string(pol))).data[i] = total_cross_section(c, pol);
        }
    }
    emit(cfg, "mie", "mie.csv", m);
    return 0;
}

int cmd_coeffs(const RunConfig& cfg, const Options& opt)
{
    const auto db = open_database(cfg, opt);
    MapGrid m;
    m.rows = {"x0", "um", 1e6, db->x_nodes()};
    m.cols = {"z0", "nm", 1e9, db->z_nodes()};
    add_coefficient_payloads(m);
    init_payloads(m);
    m.ok.assign(m.size(), 1);
    const std::size_t nz = db->z_nodes().size();
    for (std::size_t i = 0; i < db->x_nodes().size(); ++i)
        for (std::size_t j = 0; j < nz; ++j) store_coefficients(m, i * nz + j, db->query(db->x_nodes()[i], db->z_nodes()[j]));
    m.notes.push_back(fmt::format("database key {}", db->key_hash()));
    emit(cfg, "coeffs", "coeffs.csv", m);
    return 0;
}

int cmd_coupling(const RunConfig& cfg, const Options& opt)
{
    const auto cav = cfg.effective_cavity();
    MapGrid m;
    m.rows = {"radius", "nm", 1e9, cfg.radius_grid.values()};
    add_coefficient_payloads(m);
    init_payloads(m);
    m.ok.assign(m.size(), 0);
    parallel_for(m.n_rows(), opt.threads, [&](std::size_t i) {
        NanowireSpec s = cfg.nanowire;
        s.radius = m.rows.values[i];
        s.x0 = std::abs(s.x0);
        const auto c = nanowire_rt_coefficients(s, cav, cfg.polarization, cfg.method, cfg.coupling);
        store_coefficients(m, i, c);
        m.ok[i] = 1;
    });
    m.notes.push_back(fmt::format("position x0 = {} um, z0 = {} nm", cfg.nanowire.x0 * 1e6, cfg.nanowire.z0 * 1e9));
    emit(cfg, "coupling", "coupling.csv", m);
    return 0;
}

int cmd_lz(const RunConfig& cfg, const Options& opt)
{
    const auto cav = cfg.effective_cavity();
    const auto z0 = cfg.z_grid.values();
    const double x0 = cfg.nanowire.x0;
    const auto base = make_source(cfg, opt, x0, std::max(std::abs(z0.front()), std::abs(z0.back())));
    const CoefficientSource src = [base, x0](double, double z) { return base(x0, z); };
    LZOptions lo;
    lo.half_window = cfg.length_half_window;
    lo.n_length = cfg.length_points;
    lo.threads = opt.threads;
    const auto lz = lz_map(cav, src, z0, lo);
    require_cells(lz.profile, "lz-map");
    emit(cfg, "lz-map", "lz_panel.csv", lz.panel);
    emit(cfg, "lz-map", "lz_profile.csv", lz.profile);
    const auto& sh = lz.profile.get("shift").data;
    info(fmt::format("peak |shift| {:.3f} nm", max_abs_finite(sh) * 1e9));
    return 0;
}

int cmd_xz(const RunConfig& cfg, const Options& opt)
{
    const auto cav = cfg.effective_cavity();
    const auto xs = cfg.x_grid.values(), zs = cfg.z_grid.values();
    const auto src = make_source(cfg, opt, std::max(std::abs(xs.front()), std::abs(xs.back())),
                                 std::max(std::abs(zs.front()), std::abs(zs.back())));
    const auto xz = xz_locked_map(cav, src, xs, zs, opt.threads);
    require_cells(xz.map, "xz-map");
    emit(cfg, "xz-map", "xz_map.csv", xz.map);
    return 0;
}

int cmd_shift(const RunConfig& cfg, const Options& opt)
{
    const auto cav = cfg.effective_cavity();
    const auto radii = cfg.radius_grid.values();
    const auto sm = shift_map_vs_radius(cav, radii, cfg.z_grid.values(), cfg.polarization, cfg.method, cfg.coupling,
                                        opt.threads, cfg.nanowire.refractive_index);
    require_cells(sm.map, "shift-map");
    emit(cfg, "shift-map", "shift_map.csv", sm.map);
    MapGrid r;
    r.rows = sm.map.rows;
    r.add("ridge_abs_G_z", "nm", 1e9).data = sm.ridge_g;
    r.add("ridge_G2_over_kappa", "nm", 1e9).data = sm.ridge_c;
    r.ok.assign(r.size(), 1);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!std::isfinite(sm.ridge_g[i]) || !std::isfinite(sm.ridge_c[i])) r.ok[i] = 0;
    emit(cfg, "shift-map", "shift_ridges.csv", r);
    return 0;
}

int cmd_figures(const RunConfig& cfg, const Options&)
{
    const auto cav = cfg.effective_cavity();
    const auto f = axial_figures(cav, cfg.nanowire, cfg.polarization, cfg.method, cfg.coupling, cfg.figures_z_step,
                                 cfg.quality_factor, cfg.temperatures);
    // mechanics with the configured material
    const auto mode = mechanical_mode(cfg.nanowire, cfg.quality_factor, cfg.material);
    const auto g = single_photon_figures(mode, f.at_g.G_z, f.at_g.kappa_cav, cfg.temperatures);
    const auto c = single_photon_figures(mode, f.at_c.G_z, f.at_c.kappa_cav, cfg.temperatures);
    MapGrid m;
    m.rows = {"T", "K", 1.0, cfg.temperatures};
    auto put = [&](const std::string& name, const std::string& unit, double scale, double v) {
        m.add(name, unit, scale).data.assign(m.size(), v);
    };
    put("Omega_m_over_2pi", "Hz", 1.0 / (2.0 * pi), mode.frequency);
    put("M_eff", "kg", 1.0, mode.effective_mass);
    put("dz_zpf", "fm", 1e15, mode.zero_point_spread);
    put("z_G", "nm", 1e9, f.z_g);
    put("G_z", "rad/s/m", 1.0, g.G_z);
    put("g0", "rad/s", 1.0, g.g0);
    put("two_g0_over_Omega", "1", 1.0, g.ratio);
    put("dz1", "pm", 1e12, g.single_photon_displacement);
    put("F1", "fN", 1e15, g.single_photon_force);
    put("z_C", "nm", 1e9, f.z_c);
    put("kappa_cav_at_C", "rad/s", 1.0, c.kappa_cav);
    put("C1", "1", 1.0, c.static_cooperativity);
    put("C1_dynamic", "1", 1.0, c.dynamic_cooperativity);
    m.add("dz_th", "nm", 1e9).data = g.thermal_spread;
    m.ok.assign(m.size(), 1);
    emit(cfg, "figures", "figures.csv", m);
    std::printf("Omega_m/2pi = %.2f Hz, M_eff = %.4g kg, dz_zpf = %.4g m\n", mode.frequency / (2 * pi), mode.effective_mass,
                mode.zero_point_spread);
    std::printf("max |G_z| = %.4g rad/s/m at z0 = %.2f nm: 2 g0/Omega_m = %.4g, dz(1) = %.4g pm\n", g.G_z, f.z_g * 1e9,
                g.ratio, g.single_photon_displacement * 1e12);
    std::printf("max G_z^2/kappa at z0 = %.2f nm: C(1) = %.4g, C~(1) = %.4g\n", f.z_c * 1e9, c.static_cooperativity,
                c.dynamic_cooperativity);
    for (std::size_t i = 0; i < cfg.temperatures.size(); ++i)
        std::printf("dz_th(%g K) = %.4g nm\n", cfg.temperatures[i], g.thermal_spread[i] * 1e9);
    return 0;
}

int cmd_force(const RunConfig& cfg, const Options& opt)
{
    const auto cav = cfg.effective_cavity();
    if (opt.per_photon) {
        const auto m = force_vs_radius_per_photon(cav, cfg.radius_grid.values(), cfg.z_grid.values(), cfg.polarization,
                                                  cfg.method, cfg.coupling, opt.threads, cfg.nanowire.refractive_index);
        require_cells(m, "force-map --per-photon");
        emit(cfg, "force-map", "force_per_photon.csv", m);
        return 0;
    }
    const auto xs = cfg.x_grid.values(), zs = cfg.z_grid.values();
    const auto src = make_source(cfg, opt, std::max(std::abs(xs.front()), std::abs(xs.back())),
                                 std::max(std::abs(zs.front()), std::abs(zs.back())));
    const auto fm = force_map(cav, cfg.nanowire, cfg.polarization, src, xs, zs, cfg.power, opt.threads);
    require_cells(fm.forces, "force-map");
    MapGrid m = fm.forces;
    for (const auto& p : fm.locked.map.payloads) m.payloads.push_back(p);
    m.notes = fm.locked.map.notes;
    emit(cfg, "force-map", "force_map.csv", m);
    info(fmt::format("max |F_x| {:.3f} fN, max |F_z| {:.3f} fN", max_abs_finite(m.get("F_x").data) * 1e15,
                     max_abs_finite(m.get("F_z").data) * 1e15));
    return 0;
}

int cmd_validate(const RunConfig& cfg, const Options& opt)
{
    std::string report;
    int failed = 0;
    run_validation(opt.full, opt.threads, [&](const CheckResult& r) {
        const auto line = format_check(r);
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        report += line + "\n";
        if (!r.pass) ++failed;
    });
    write_text_file(out_file(cfg, "validate.txt"), report);
    return failed == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nanowire-in-cavity simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config_path, "configuration file (key = value)");
    app.add_option("--out", opt.out_dir, "output directory (overrides output.dir)");
    app.add_option("--cache", opt.cache_dir, "coefficient cache directory (overrides cache.dir and NIMCAV_CACHE_DIR)");
    app.add_option("--threads", opt.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed-resolution", opt.seed_resolution_nm, "coarse resonance-scan step in nm (0 = automatic)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--set", opt.overrides, "override a configuration key (key=value), repeatable");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&, const Options&);
    };
    const Sub subs[] = {
        {"mie", "1D cross-sections vs radius", cmd_mie},
        {"coeffs", "populate / query the coefficient database", cmd_coeffs},
        {"coupling", "nanowire coefficients vs radius at the configured position", cmd_coupling},
        {"lz-map", "cavity response vs (z0, L) and the resonance profile", cmd_lz},
        {"xz-map", "locked response over (x0, z0)", cmd_xz},
        {"shift-map", "resonance shift vs (radius, z0) and ridge lines", cmd_shift},
        {"figures", "mechanical mode and single-photon figures", cmd_figures},
        {"force-map", "optical force and curl over (x0, z0)", cmd_force},
        {"validate", "property and oracle suite", cmd_validate},
    };
    std::vector<CLI::App*> handles;
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        if (std::string(s.name) == "validate") sc->add_flag("--full", opt.full, "also run the map-based checks");
        if (std::string(s.name) == "force-map")
            sc->add_flag("--per-photon", opt.per_photon, "force per intracavity photon over (radius, z0) on axis");
        handles.push_back(sc);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (opt.seed_resolution_nm > 0.0) resonance_defaults().coarse_step = opt.seed_resolution_nm * 1e-9;
        const RunConfig cfg = build_config(opt);
        for (std::size_t i = 0; i < handles.size(); ++i)
            if (handles[i]->parsed()) {
                info(fmt::format("{} config {}", subs[i].name, config_hash(cfg)));
                return subs[i].run(cfg, opt);
            }
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
