#include "nimcav/optomech.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace nimcav {

namespace {
constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();
}

CoefficientSource engine_source(std::shared_ptr<CouplingEngine> engine)
{
    return [engine](double x0, double z0) { return engine->coefficients(x0, z0); };
}

Payload& MapGrid::add(const std::string& name, const std::string& unit, double scale)
{
    payloads.push_back({name, unit, scale, std::vector<double>(size(), nan_v)});
    return payloads.back();
}

const Payload& MapGrid::get(const std::string& name) const
{
    for (const auto& p : payloads)
        if (p.name == name) return p;
    throw std::out_of_range("MapGrid: no payload '" + name + "'");
}

Payload& MapGrid::get(const std::string& name)
{
    return const_cast<Payload&>(static_cast<const MapGrid&>(*this).get(name));
}

std::vector<double> grid_range(double start, double stop, double step)
{
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (stop < start) throw std::invalid_argument("grid stop below start");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> v(n + 1);
    for (long i = 0; i <= n; ++i) v[i] = start + i * step;
    return v;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f)
{
    unsigned t = threads > 0 ? unsigned(threads) : std::max(1u, std::thread::hardware_concurrency());
    t = std::min<unsigned>(t, unsigned(std::max<std::size_t>(n, 1)));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex em;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < t; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(em);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

LockedPixel locked_pixel(const CavityGeometry& cav, const CoefficientSource& src, double x0, double z0,
                         double seed_length)
{
    LockedPixel p;
    p.coeffs = src(x0, z0);
    for (double seed : {seed_length, nominal_resonance(cav)}) {
        try {
            p.res = find_resonance(cav, &p.coeffs, seed);
            p.resp = cavity_response(cav, &p.coeffs, p.res.resonant_length);
            p.ok = true;
            p.error.clear();
            return p;
        } catch (const NumericalError& e) {
            p.error = e.what();
        }
    }
    return p;
}

ResonanceProfile resonance_profile(const CavityGeometry& cav, const CoefficientSource& src,
                                   const std::vector<double>& x0, const std::vector<double>& z0)
{
    if (x0.size() != z0.size()) throw std::invalid_argument("resonance_profile: coordinate lists differ in size");
    ResonanceProfile prof{x0, z0, {}};
    double seed = nominal_resonance(cav);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        prof.pixels.push_back(locked_pixel(cav, src, x0[i], z0[i], seed));
        if (prof.pixels.back().ok) seed = prof.pixels.back().res.resonant_length;
    }
    return prof;
}

double coupling_prefactor(const CavityGeometry& cav)
{
    return 4.0 * pi * c_light / (cav.longitudinal_order * cav.wavelength * cav.wavelength);
}

std::vector<double> coupling_strength(const std::vector<double>& s, const std::vector<double>& l_res,
                                      const std::vector<unsigned char>& ok, const CavityGeometry& cav)
{
    const std::size_t n = s.size();
    if (l_res.size() != n || ok.size() != n) throw std::invalid_argument("coupling_strength: size mismatch");
    std::vector<double> g(n, nan_v);
    if (n < 2) return g;
    const double pre = coupling_prefactor(cav);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? i : i + 1;
        if (!ok[a] || !ok[b] || !ok[i]) continue;
        g[i] = pre * (l_res[b] - l_res[a]) / (s[b] - s[a]);
    }
    return g;
}

std::pair<double, double> parabolic_max(const std::vector<double>& x, const std::vector<double>& y)
{
    std::size_t best = x.size();
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::isfinite(y[i]) && (best == x.size() || y[i] > y[best])) best = i;
    if (best == x.size()) return {nan_v, nan_v};
    if (best == 0 || best + 1 == x.size() || !std::isfinite(y[best - 1]) || !std::isfinite(y[best + 1]))
        return {x[best], y[best]};
    const double h = x[best + 1] - x[best];
    const double ym = y[best - 1], y0 = y[best], yp = y[best + 1];
    const double den = ym - 2.0 * y0 + yp;
    if (!(den < 0.0)) return {x[best], y0};
    const double u = 0.5 * (ym - yp) / den;
    return {x[best] + u * h, y0 - 0.25 * (ym - yp) * u};
}

LZResult lz_map(const CavityGeometry& cav, const CoefficientSource& src, const std::vector<double>& z0,
                const LZOptions& opt)
{
    if (opt.n_length < 2) throw std::invalid_argument("lz_map: need at least two lengths");
    const double l0 = find_resonance(cav, nullptr, nominal_resonance(cav)).resonant_length;
    const double hw = opt.half_window > 0.0 ? opt.half_window : 0.3 * free_spectral_range(cav);
    LZResult out;
    out.panel.rows = {"z0", "nm", 1e9, z0};
    std::vector<double> ls(opt.n_length);
    for (int j = 0; j < opt.n_length; ++j) ls[j] = l0 - hw + 2.0 * hw * j / (opt.n_length - 1);
    out.panel.cols = {"L", "um", 1e6, ls};
    auto& pt = out.panel.add("C_T", "1", 1.0);
    auto& pl = out.panel.add("C_L", "1", 1.0);
    out.panel.ok.assign(out.panel.size(), 1);

    const auto prof = resonance_profile(cav, src, std::vector<double>(z0.size(), 0.0), z0);
    parallel_for(z0.size(), opt.threads, [&](std::size_t i) {
        const auto& c = prof.pixels[i].coeffs;
        for (int j = 0; j < opt.n_length; ++j) {
            const auto r = cavity_response(cav, &c, ls[j]);
            pt.data[i * opt.n_length + j] = r.C_T;
            pl.data[i * opt.n_length + j] = r.C_L;
        }
    });

    auto& g = out.profile;
    g.rows = {"z0", "nm", 1e9, z0};
    auto& lr = g.add("L_res", "um", 1e6);
    auto& sh = g.add("shift", "nm", 1e9);
    auto& fi = g.add("finesse", "1", 1.0);
    auto& ka = g.add("kappa_cav", "rad/s", 1.0);
    auto& ct = g.add("C_T_res", "1", 1.0);
    auto& cl = g.add("C_L_res", "1", 1.0);
    auto& gz = g.add("G_z", "rad/s/m", 1.0);
    g.ok.assign(z0.size(), 0);
    for (std::size_t i = 0; i < z0.size(); ++i) {
        const auto& p = prof.pixels[i];
        if (!p.ok) {
            g.notes.push_back(fmt::format("z0 = {:.3f} nm: {}", z0[i] * 1e9, p.error));
            continue;
        }
        g.ok[i] = 1;
        lr.data[i] = p.res.resonant_length;
        sh.data[i] = p.res.resonant_length - l0;
        fi.data[i] = p.res.finesse;
        ka.data[i] = p.res.linewidth_angular;
        ct.data[i] = p.resp.C_T;
        cl.data[i] = p.resp.C_L;
    }
    gz.data = coupling_strength(z0, lr.data, g.ok, cav);
    return out;
}

ShiftMapResult shift_map_vs_radius(const CavityGeometry& cav, const std::vector<double>& radii,
                                   const std::vector<double>& z0, Polarization pol, CouplingMethod method,
                                   const CouplingSettings& settings, int threads, double refractive_index)
{
    ShiftMapResult out;
    auto& m = out.map;
    m.rows = {"radius", "nm", 1e9, radii};
    m.cols = {"z0", "nm", 1e9, z0};
    auto& sh = m.add("shift", "nm", 1e9);
    auto& fi = m.add("finesse", "1", 1.0);
    auto& gz = m.add("G_z", "rad/s/m", 1.0);
    auto& ka = m.add("kappa_cav", "rad/s", 1.0);
    m.ok.assign(m.size(), 0);
    out.ridge_g.assign(radii.size(), nan_v);
    out.ridge_c.assign(radii.size(), nan_v);
    const double l0 = find_resonance(cav, nullptr, nominal_resonance(cav)).resonant_length;
    const std::size_t nz = z0.size();

    parallel_for(radii.size(), threads, [&](std::size_t i) {
        NanowireSpec spec;
        spec.radius = radii[i];
        spec.refractive_index = refractive_index;
        auto engine = std::make_shared<CouplingEngine>(spec, cav, pol, method, settings);
        const auto prof = resonance_profile(cav, engine_source(engine), std::vector<double>(nz, 0.0), z0);
        std::vector<double> lr(nz, nan_v), kap(nz, nan_v);
        std::vector<unsigned char> ok(nz, 0);
        for (std::size_t j = 0; j < nz; ++j) {
            const auto& p = prof.pixels[j];
            if (!p.ok) continue;
            ok[j] = 1;
            lr[j] = p.res.resonant_length;
            kap[j] = p.res.linewidth_angular;
            sh.data[i * nz + j] = lr[j] - l0;
            fi.data[i * nz + j] = p.res.finesse;
            ka.data[i * nz + j] = kap[j];
            m.ok[i * nz + j] = 1;
        }
        const auto g = coupling_strength(z0, lr, ok, cav);
        std::vector<double> ag(nz), gc(nz);
        for (std::size_t j = 0; j < nz; ++j) {
            gz.data[i * nz + j] = g[j];
            ag[j] = std::abs(g[j]);
            gc[j] = g[j] * g[j] / kap[j];
        }
        out.ridge_g[i] = parabolic_max(z0, ag).first;
        out.ridge_c[i] = parabolic_max(z0, gc).first;
    });
    return out;
}

MechanicalMode mechanical_mode(const NanowireSpec& spec, double quality_factor, const Material& mat)
{
    if (!(spec.radius > 0.0) || !(spec.length > 0.0))
        throw std::invalid_argument("mechanical_mode: radius and length must be positive");
    if (!(quality_factor > 0.0)) throw std::invalid_argument("mechanical_mode: quality factor must be positive");
    MechanicalMode m;
    m.frequency = 2.0 * pi * mat.kappa_omega * spec.radius / (spec.length * spec.length);
    m.effective_mass = mat.density * pi * spec.radius * spec.radius * spec.length / 4.0;
    m.zero_point_spread = std::sqrt(hbar / (2.0 * m.effective_mass * m.frequency));
    m.quality_factor = quality_factor;
    return m;
}

double thermal_spread(const MechanicalMode& m, double temperature)
{
    if (temperature < 0.0) throw std::invalid_argument("thermal_spread: negative temperature");
    return std::sqrt(k_boltzmann * temperature / (m.effective_mass * m.frequency * m.frequency));
}

OptomechFigures single_photon_figures(const MechanicalMode& m, double G_z, double kappa_cav,
                                      const std::vector<double>& temperatures)
{
    if (!(kappa_cav > 0.0)) throw std::invalid_argument("single_photon_figures: kappa_cav must be positive");
    OptomechFigures f;
    f.G_z = G_z;
    f.kappa_cav = kappa_cav;
    f.g0 = G_z * m.zero_point_spread;
    f.ratio = 2.0 * f.g0 / m.frequency;
    f.single_photon_displacement = f.ratio * m.zero_point_spread;
    f.single_photon_force = -hbar * f.g0 / m.zero_point_spread;
    f.static_cooperativity = 2.0 * f.g0 * f.g0 / (kappa_cav * m.frequency);
    const double gamma_m = m.frequency / m.quality_factor;
    f.dynamic_cooperativity = 2.0 * f.g0 * f.g0 / (kappa_cav * gamma_m);
    f.temperatures = temperatures;
    for (double t : temperatures) f.thermal_spread.push_back(thermal_spread(m, t));
    return f;
}

AxialFigures axial_figures(const CavityGeometry& cav, const NanowireSpec& spec, Polarization pol,
                           CouplingMethod method, const CouplingSettings& settings, double z_step,
                           double quality_factor, const std::vector<double>& temperatures)
{
    // one half period [0, lambda/4] holds the full |G| and G^2/kappa structure (G is odd in z0)
    const auto z0 = grid_range(0.0, 0.25 * cav.wavelength, z_step);
    auto engine = std::make_shared<CouplingEngine>(spec, cav, pol, method, settings);
    const auto prof = resonance_profile(cav, engine_source(engine), std::vector<double>(z0.size(), 0.0), z0);
    const std::size_t n = z0.size();
    std::vector<double> lr(n, nan_v), kap(n, nan_v);
    std::vector<unsigned char> ok(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (!prof.pixels[j].ok) continue;
        ok[j] = 1;
        lr[j] = prof.pixels[j].res.resonant_length;
        kap[j] = prof.pixels[j].res.linewidth_angular;
    }
    const auto g = coupling_strength(z0, lr, ok, cav);
    std::vector<double> ag(n), gc(n);
    for (std::size_t j = 0; j < n; ++j) {
        ag[j] = std::abs(g[j]);
        gc[j] = g[j] * g[j] / kap[j];
    }
    // the end points are one-sided differences at the extrema of L_res; skip them
    ag.front() = ag.back() = gc.front() = gc.back() = nan_v;
    const auto [zg, gmax] = parabolic_max(z0, ag);
    const auto [zc, cmax] = parabolic_max(z0, gc);
    if (!std::isfinite(gmax) || !std::isfinite(cmax)) throw NumericalError("axial_figures: no valid coupling profile");

    // kappa at z_c by linear interpolation on the grid
    const auto kappa_at = [&](double z) {
        const std::size_t i = std::min<std::size_t>(n - 2, std::size_t(std::max(0.0, z / z_step)));
        const double t = (z - z0[i]) / (z0[i + 1] - z0[i]);
        return kap[i] + t * (kap[i + 1] - kap[i]);
    };
    AxialFigures out;
    out.mode = mechanical_mode(spec, quality_factor);
    out.z_g = zg;
    out.z_c = zc;
    out.at_g = single_photon_figures(out.mode, gmax, kappa_at(zg), temperatures);
    const double kc = kappa_at(zc);
    out.at_c = single_photon_figures(out.mode, std::sqrt(cmax * kc), kc, temperatures);
    return out;
}

XZResult xz_locked_map(const CavityGeometry& cav, const CoefficientSource& src, const std::vector<double>& x0,
                       const std::vector<double>& z0, int threads)
{
    XZResult out;
    auto& m = out.map;
    m.rows = {"x0", "um", 1e6, x0};
    m.cols = {"z0", "um", 1e6, z0};
    auto& ct = m.add("C_T", "1", 1.0);
    auto& cl = m.add("C_L", "1", 1.0);
    auto& sh = m.add("shift", "nm", 1e9);
    auto& fi = m.add("finesse", "1", 1.0);
    m.ok.assign(m.size(), 0);
    out.pixels.resize(m.size());
    const double l0 = find_resonance(cav, nullptr, nominal_resonance(cav)).resonant_length;
    const std::size_t nz = z0.size();
    parallel_for(x0.size(), threads, [&](std::size_t i) {
        const auto prof = resonance_profile(cav, src, std::vector<double>(nz, x0[i]), z0);
        for (std::size_t j = 0; j < nz; ++j) {
            const auto& p = prof.pixels[j];
            const std::size_t k = i * nz + j;
            out.pixels[k] = p;
            if (!p.ok) continue;
            m.ok[k] = 1;
            ct.data[k] = p.resp.C_T;
            cl.data[k] = p.resp.C_L;
            sh.data[k] = p.res.resonant_length - l0;
            fi.data[k] = p.res.finesse;
        }
    });
    for (std::size_t k = 0; k < out.pixels.size(); ++k)
        if (!out.pixels[k].ok)
            m.notes.push_back(fmt::format("x0 = {:.4f} um, z0 = {:.4f} um: {}", x0[k / nz] * 1e6, z0[k % nz] * 1e6,
                                          out.pixels[k].error));
    return out;
}

} // namespace nimcav
