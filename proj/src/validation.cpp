#include "nimcav/validation.hpp"
#include "nimcav/io.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <random>

namespace nimcav {

namespace {

using clock_type = std::chrono::steady_clock;

template <class F>
CheckResult timed(std::string id, std::string name, F&& body)
{
    CheckResult r{std::move(id), std::move(name), false, {}, 0.0};
    const auto t0 = clock_type::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail += fmt::format(" exception: {}", e.what());
    }
    r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    return r;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    return m;
}

// Re(a x conj(b)) . n
double flux_density(const CVec3& a, const CVec3& b, const Vec3& n)
{
    const CVec3 x{a[1] * std::conj(b[2]) - a[2] * std::conj(b[1]), a[2] * std::conj(b[0]) - a[0] * std::conj(b[2]),
                  a[0] * std::conj(b[1]) - a[1] * std::conj(b[0])};
    return x[0].real() * n[0] + x[1].real() * n[1] + x[2].real() * n[2];
}

CavityGeometry reference_cavity() { return CavityGeometry{}; }

} // namespace

std::array<double, 2> stress_tensor_force(const NanowireSpec& spec, double wavelength, Polarization pol,
                                          const std::vector<OracleWave>& waves, const Vec3& rho0, int n_points)
{
    const auto mie = mie_coefficients(spec, wavelength, 5);
    const double k = 2.0 * pi / wavelength, R = spec.radius;
    // each wave as a multiple of the Mie incident wave of its direction; the reference
    // polarisation is read off the incident field next to the axis
    std::vector<cplx> weight;
    for (const auto& w : waves) {
        const double r_ref = 1e-4 * R;
        const auto s = cylinder_field(mie, pol, w.phi, r_ref, 0.0, FieldPart::incident);
        const auto u = to_cartesian(s.E, 0.0);
        cplx proj = 0.0;
        double norm = 0.0;
        for (int q = 0; q < 3; ++q) {
            proj += std::conj(u[q]) * w.polarization[q];
            norm += std::norm(u[q]);
        }
        const Vec3 kv = incidence_direction(w.phi);
        const double phase = k * (kv[0] * rho0[0] + kv[2] * rho0[2]);
        // E = sqrt(P / eps0 c) * amplitude with P = 1
        weight.push_back(w.amplitude * std::exp(I * phase) * proj / norm / std::sqrt(eps0 * c_light));
    }
    double fx = 0.0, fz = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double phi = 2.0 * pi * i / n_points;
        CVec3 E{}, B{};
        for (std::size_t j = 0; j < waves.size(); ++j) {
            const auto s = total_field(mie, pol, waves[j].phi, R * (1.0 + 1e-12), phi);
            const auto e = to_cartesian(s.E, phi), b = to_cartesian(s.B, phi);
            for (int q = 0; q < 3; ++q) {
                E[q] += weight[j] * e[q];
                B[q] += weight[j] * b[q];
            }
        }
        const Vec3 n = radial_unit(phi);
        cplx en = 0.0, bn = 0.0;
        double e2 = 0.0, b2 = 0.0;
        for (int q = 0; q < 3; ++q) {
            en += E[q] * n[q];
            bn += B[q] * n[q];
            e2 += std::norm(E[q]);
            b2 += std::norm(B[q]);
        }
        // <T> . n = (1/2) Re[eps0 (E.n) E* + (B.n) B* / mu0] - (1/4)(eps0 |E|^2 + |B|^2 / mu0) n
        double t[3];
        for (int q = 0; q < 3; ++q)
            t[q] = 0.5 * (eps0 * std::real(en * std::conj(E[q])) + std::real(bn * std::conj(B[q])) / mu0) -
                   0.25 * (eps0 * e2 + b2 / mu0) * n[q];
        fx += t[0];
        fz += t[2];
    }
    const double dl = R * 2.0 * pi / n_points;
    return {fx * dl, fz * dl};
}

double mie_flux_imbalance(const NanowireSpec& spec, double wavelength, Polarization pol, int l_max)
{
    const auto mie = mie_coefficients(spec, wavelength, l_max);
    const double r = 5.0 * wavelength;
    const int n = 4000;
    double net = 0.0, sca = 0.0;
    for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * pi * (i + 0.5) / n;
        const Vec3 nv = radial_unit(phi);
        auto flux = [&](FieldPart part) {
            const auto s = cylinder_field(mie, pol, 0.0, r, phi, part);
            return flux_density(to_cartesian(s.E, phi), to_cartesian(s.B, phi), nv);
        };
        const auto t = total_field(mie, pol, 0.0, r, phi);
        net += flux_density(to_cartesian(t.E, phi), to_cartesian(t.B, phi), nv);
        sca += flux(FieldPart::scattered);
    }
    return std::abs(net / sca);
}

double energy_balance_error(const CavityGeometry& cav, const ScatterCoefficients& c, double L)
{
    const auto resp = cavity_response(cav, &c, L);
    const auto a = intracavity_amplitudes(cav, &c, L);
    // hops are pure phases, so the moduli at z = 0 equal those at the wire
    const double wire = std::norm(a.A_plus) + std::norm(a.B_minus) - std::norm(a.A_minus) - std::norm(a.B_plus);
    return std::abs(resp.C_R + resp.C_T + wire - 1.0);
}

RingStats ring_statistics(const MapGrid& xz, double empty_finesse)
{
    const auto& F = xz.get("finesse").data;
    const auto& CL = xz.get("C_L").data;
    const std::size_t nx = xz.n_rows(), nz = xz.n_cols();
    const double half = 0.5 * empty_finesse;
    RingStats s;
    s.min_finesse = 1e300;
    for (double f : F)
        if (std::isfinite(f)) s.min_finesse = std::min(s.min_finesse, f);

    // one grid line: values along it, indices into the map; ends count as maxima
    // when not below their neighbour (x0 = 0 and z0 = +-lambda/4 are symmetry lines)
    auto scan = [&](const std::vector<std::size_t>& idx) {
        const std::size_t n = idx.size();
        std::vector<double> maxima;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = CL[idx[i]];
            if (!std::isfinite(c)) continue;
            const bool left = i == 0 || !std::isfinite(CL[idx[i - 1]]) || c >= CL[idx[i - 1]];
            const bool right = i + 1 == n || !std::isfinite(CL[idx[i + 1]]) || c >= CL[idx[i + 1]];
            if (left && right) maxima.push_back(double(i));
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double f0 = F[idx[i]], f1 = F[idx[i + 1]];
            if (!std::isfinite(f0) || !std::isfinite(f1) || (f0 - half) * (f1 - half) > 0.0 || f0 == f1) continue;
            const double pos = double(i) + (half - f0) / (f1 - f0);
            ++s.crossings;
            for (double m : maxima)
                if (std::abs(m - pos) <= 1.5) {
                    ++s.matched;
                    break;
                }
        }
    };
    for (std::size_t j = 0; j < nz; ++j) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < nx; ++i) idx.push_back(i * nz + j);
        scan(idx);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < nz; ++j) idx.push_back(i * nz + j);
        scan(idx);
    }
    s.loss_peaks_on_axis = true;
    for (std::size_t j = 0; j < nz; ++j)
        for (std::size_t i = 1; i < nx; ++i) {
            const double a = CL[(i - 1) * nz + j], b = CL[i * nz + j];
            if (std::isfinite(a) && std::isfinite(b) && b > a + 1e-6) s.loss_peaks_on_axis = false;
        }
    return s;
}

CheckResult check_empty_cavity()
{
    return timed("1", "empty-cavity finesse and resonant length", [](CheckResult& r) {
        const auto cav = reference_cavity();
        const auto t0 = clock_type::now();
        const auto res = find_resonance(cav, nullptr, nominal_resonance(cav));
        const double dt = std::chrono::duration<double>(clock_type::now() - t0).count();
        r.pass = std::abs(res.finesse - 522.0) <= 1.0 && std::abs(res.resonant_length - 12.440e-6) <= 0.001e-6 && dt < 1.0;
        r.detail = fmt::format("F = {:.3f} (522 +- 1), L_res = {:.6f} um (12.440 +- 0.001), solve {:.3f} s (< 1 s)",
                               res.finesse, res.resonant_length * 1e6, dt);
    });
}

CheckResult check_mode_geometry()
{
    return timed("2", "mode geometry", [](CheckResult& r) {
        const auto m = mode_geometry(12e-6, 28e-6, 770e-9);
        r.pass = std::abs(m.waist - 1.70e-6) <= 0.02e-6 && std::abs(m.rayleigh_length - 11.5e-6) <= 0.2e-6;
        r.detail = fmt::format("w0 = {:.4f} um (1.70 +- 0.02), z_R = {:.3f} um (11.5 +- 0.2)", m.waist * 1e6,
                               m.rayleigh_length * 1e6);
    });
}

CheckResult check_method_agreement(int threads)
{
    return timed("3", "approximate vs exact coefficients", [threads](CheckResult& r) {
        const auto cav = reference_cavity();
        std::vector<double> radii = grid_range(10e-9, 250e-9 + 1e-12, 10e-9);
        struct Row {
            double dm_r, dp_r, dm_t, dp_t;
        };
        std::vector<Row> rows(2 * radii.size());
        parallel_for(rows.size(), threads, [&](std::size_t k) {
            const auto pol = k < radii.size() ? Polarization::parallel : Polarization::perpendicular;
            NanowireSpec s;
            s.radius = radii[k % radii.size()];
            const auto a = forward_coefficients(s, cav, pol, CouplingMethod::approx);
            const auto e = forward_coefficients(s, cav, pol, CouplingMethod::exact);
            rows[k] = {std::abs(std::abs(a.first) / std::abs(e.first) - 1.0), std::abs(std::arg(a.first / e.first)),
                       std::abs(std::abs(a.second) / std::abs(e.second) - 1.0), std::abs(std::arg(a.second / e.second))};
        });
        Row worst{0, 0, 0, 0};
        double worst_r_radius = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k].dp_r > worst.dp_r) worst_r_radius = radii[k % radii.size()];
            worst.dm_r = std::max(worst.dm_r, rows[k].dm_r);
            worst.dp_r = std::max(worst.dp_r, rows[k].dp_r);
            worst.dm_t = std::max(worst.dm_t, rows[k].dm_t);
            worst.dp_t = std::max(worst.dp_t, rows[k].dp_t);
        }
        r.pass = worst.dm_r <= 0.05 && worst.dp_r <= 0.05 && worst.dm_t <= 0.05 && worst.dp_t <= 0.05;
        r.detail = fmt::format("max |C_r| rel {:.3f}, arg {:.3f} rad (at R = {:.0f} nm); max |C_t| rel {:.3f}, arg {:.3f} rad "
                               "(limits 0.05 / 0.05 rad)",
                               worst.dm_r, worst.dp_r, worst_r_radius * 1e9, worst.dm_t, worst.dp_t);
    });
}

CheckResult check_lz_nw2()
{
    return timed("4", "LZ map NW2 perpendicular", [](CheckResult& r) {
        const auto cav = reference_cavity();
        NanowireSpec s;
        s.radius = 65e-9;
        auto engine = std::make_shared<CouplingEngine>(s, cav, Polarization::perpendicular, CouplingMethod::approx);
        engine->calibrate(0.0, 0.25 * cav.wavelength);
        const auto z0 = grid_range(-0.25 * cav.wavelength, 0.25 * cav.wavelength + 1e-12, 5e-9);
        const auto lz = lz_map(cav, engine_source(engine), z0);
        const auto& sh = lz.profile.get("shift").data;
        const auto& fi = lz.profile.get("finesse").data;
        const auto& cl = lz.profile.get("C_L_res").data;
        const double peak = max_abs(sh);
        const double f0 = mirror_finesse(cav);
        // antinodes of the on-axis field at z0 = +-lambda/4 (the grid ends)
        const std::size_t n = z0.size();
        const double f_anti = std::max(fi.front(), fi.back());
        double cl_max = 0.0;
        for (double c : cl)
            if (std::isfinite(c)) cl_max = std::max(cl_max, c);
        const bool cl_dip = cl.front() < cl_max && cl.back() < cl_max;
        r.pass = within(peak, 3e-9, 30e-9) && f_anti < 0.5 * f0 && cl_dip;
        r.detail = fmt::format("peak |shift| = {:.2f} nm [3, 30]; finesse at antinodes {:.1f} < F0/2 = {:.1f}; "
                               "resonant C_L {:.3f} at antinode below profile max {:.3f}; {} z0 samples",
                               peak * 1e9, f_anti, 0.5 * f0, cl.front(), cl_max, n);
    });
}

CheckResult check_force_scale(int threads)
{
    return timed("5", "force scale and curl (NW2 perpendicular, 1 uW)", [threads](CheckResult& r) {
        const auto cav = reference_cavity();
        NanowireSpec s;
        s.radius = 65e-9;
        const auto pol = Polarization::perpendicular;
        auto engine = std::make_shared<CouplingEngine>(s, cav, pol, CouplingMethod::approx);
        const auto xs = grid_range(-3e-6, 3e-6 + 1e-12, 100e-9);
        const auto zs = grid_range(-0.8e-6, 0.8e-6 + 1e-12, 100e-9);
        engine->calibrate(3e-6, 0.8e-6);
        const PowerBudget power{1e-6, 0.8, 0.5};
        const auto fm = force_map(cav, s, pol, engine_source(engine), xs, zs, power, threads);

        // on-axis profile over one period at 8 nm
        const auto kern = force_kernels(s, cav.wavelength, pol);
        const auto z_axis = grid_range(-0.25 * cav.wavelength, 0.25 * cav.wavelength + 1e-12, 0.25 * cav.wavelength / 24);
        const auto prof = resonance_profile(cav, engine_source(engine), std::vector<double>(z_axis.size(), 0.0), z_axis);
        double fz_peak = 0.0, fx_axis = 0.0;
        for (const auto& p : prof.pixels) {
            if (!p.ok) continue;
            const auto f = total_force(cav, kern, p.coeffs, p.res.resonant_length, power);
            fz_peak = std::max(fz_peak, std::abs(f.fz));
            fx_axis = std::max(fx_axis, std::abs(f.fx));
        }
        const double fx_map = max_abs(fm.forces.get("F_x").data);
        const double fz_map = max_abs(fm.forces.get("F_z").data);
        const double curl = max_abs(fm.forces.get("curl").data);
        const bool scale = within(fz_peak, 0.3e-15, 3e-15);
        const bool fx_small = fx_map <= 0.2 * fz_map;   // "one order of magnitude": at least 5x below
        const bool curl_ok = within(curl, 0.5e-9, 1.5e-9);
        r.pass = scale && fx_small && curl_ok;
        r.detail = fmt::format("on-axis max |F_z| = {:.3f} fN [0.3, 3]; map max |F_x| = {:.3f} fN vs |F_z| = {:.3f} fN "
                               "(ratio {:.2f} <= 0.2); max |curl| = {:.3f} nN/m [0.5, 1.5]; on-axis |F_x| {:.1e} fN",
                               fz_peak * 1e15, fx_map * 1e15, fz_map * 1e15, fx_map / fz_map, curl * 1e9, fx_axis * 1e15);
    });
}

CheckResult check_pair_force_oracle()
{
    return timed("6", "pairwise force vs Maxwell-stress quadrature", [](CheckResult& r) {
        std::mt19937_64 rng(20240607);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double lambda = 770e-9, k = 2.0 * pi / lambda;
        double worst = 0.0;
        int n = 0;
        for (int t = 0; t < 20; ++t) {
            const auto pol = t % 2 ? Polarization::perpendicular : Polarization::parallel;
            NanowireSpec s;
            s.radius = 20e-9 + 230e-9 * u(rng);
            const Vec3 rho0{400e-9 * (u(rng) - 0.5), 0.0, 400e-9 * (u(rng) - 0.5)};
            std::vector<OracleWave> waves;
            std::vector<PlaneWaveComponent> comps;
            for (int j = 0; j < 2; ++j) {
                const double phi = 2.0 * pi * u(rng);
                const cplx a = std::polar(0.3 + u(rng), 2.0 * pi * u(rng));
                const double sgn = u(rng) < 0.5 ? -1.0 : 1.0;
                const Vec3 kv = incidence_direction(phi);
                const Vec3 e = pol == Polarization::parallel ? Vec3{0.0, sgn, 0.0}
                                                             : Vec3{sgn * std::cos(phi), 0.0, sgn * std::sin(phi)};
                waves.push_back({a, phi, e});
                PlaneWaveComponent c;
                c.amplitude = a;
                c.wavevector = {k * kv[0], 0.0, k * kv[2]};
                c.polarization = e;
                c.phi = phi;
                comps.push_back(c);
            }
            const auto brute = stress_tensor_force(s, lambda, pol, waves, rho0);
            const auto kern = force_kernels(s, lambda, pol);
            const auto f = total_force(kern, comps, rho0[0], rho0[2], 1.0);
            const double err = std::hypot(f.fx - brute[0], f.fz - brute[1]) / std::hypot(brute[0], brute[1]);
            worst = std::max(worst, err);
            ++n;
        }
        r.pass = worst <= 0.01;
        r.detail = fmt::format("{} random pairs, worst relative vector error {:.2e} (<= 1e-2)", n, worst);
    });
}

CheckResult check_single_photon(int threads)
{
    return timed("7", "single-photon figures", [threads](CheckResult& r) {
        const auto cav = reference_cavity();
        CavityGeometry hf = cav;
        hf.reflectivity_left = hf.reflectivity_right = reflectivity_for_finesse(50000.0);
        struct Case {
            CavityGeometry cav;
            NanowireSpec spec;
            Polarization pol;
        };
        const std::vector<Case> cases{{cav, {100e-9, 2.61, 500e-6}, Polarization::parallel},
                                      {cav, {65e-9, 2.61, 70e-6}, Polarization::perpendicular},
                                      {hf, {225e-9, 2.61, 1400e-6}, Polarization::perpendicular}};
        std::vector<AxialFigures> f(cases.size());
        parallel_for(cases.size(), threads, [&](std::size_t i) {
            f[i] = axial_figures(cases[i].cav, cases[i].spec, cases[i].pol, CouplingMethod::approx);
        });
        const double ratio = f[0].at_g.ratio;
        const double dz1 = f[1].at_g.single_photon_displacement;
        const double dzth = thermal_spread(f[1].mode, 300.0);
        const double c1 = f[2].at_c.static_cooperativity;
        r.pass = within(ratio, 5e3, 2e4) && within(dz1, 10e-12, 40e-12) && within(dzth, 5e-9, 20e-9) && within(c1, 0.07, 0.28);
        r.detail = fmt::format("NW1 par 2g0/Om = {:.0f} [5e3, 2e4]; NW2 perp dz(1) = {:.1f} pm [10, 40], "
                               "dz_th(300 K) = {:.2f} nm [5, 20]; NW4 perp F0 = 50000 C(1) = {:.3f} [0.07, 0.28]",
                               ratio, dz1 * 1e12, dzth * 1e9, c1);
    });
}

CheckResult check_qualitative(int threads)
{
    return timed("8", "qualitative structure suite", [threads](CheckResult& r) {
        const auto cav = reference_cavity();
        const double q = 0.25 * cav.wavelength;
        std::vector<std::string> parts;
        bool ok = true;

        // positive resonant-length shifts at large radii (parallel)
        {
            const auto z0 = grid_range(-q, q + 1e-12, q / 12);
            const auto sm = shift_map_vs_radius(cav, {130e-9, 170e-9, 210e-9, 250e-9}, z0, Polarization::parallel,
                                                CouplingMethod::approx, {}, threads);
            double mx = -1.0;
            for (double v : sm.map.get("shift").data)
                if (std::isfinite(v)) mx = std::max(mx, v);
            const bool p = mx > 0.5e-9;
            ok = ok && p;
            parts.push_back(fmt::format("max shift R in [130, 250] nm par = {:+.2f} nm (> +0.5) {}", mx * 1e9, p ? "ok" : "FAIL"));
        }
        // node shift above antinode shift inside the 65-112 nm parallel band
        {
            const std::vector<double> radii{70e-9, 90e-9, 110e-9};
            const auto sm = shift_map_vs_radius(cav, radii, {-q, 0.0, q}, Polarization::parallel, CouplingMethod::approx, {},
                                                threads);
            const auto& sh = sm.map.get("shift").data;
            std::string vals;
            bool p = true;
            for (std::size_t i = 0; i < radii.size(); ++i) {
                const double node = std::abs(sh[i * 3 + 1]), anti = std::abs(sh[i * 3]);
                p = p && std::isfinite(node) && std::isfinite(anti) && node > anti;
                vals += fmt::format(" {:.0f}:{:.2f}/{:.2f}", radii[i] * 1e9, node * 1e9, anti * 1e9);
            }
            ok = ok && p;
            parts.push_back(fmt::format("|node|/|antinode| shift nm{} {}", vals, p ? "ok" : "FAIL"));
        }
        // loss rings on the F = F0/2 contour for NW2 perp, none for R = 10 nm par
        {
            const auto xs = grid_range(0.0, 2.5e-6 + 1e-12, 100e-9);
            const auto zs = grid_range(-q, q + 1e-12, q / 8);
            auto xz = [&](double radius, Polarization pol) {
                NanowireSpec s;
                s.radius = radius;
                auto e = std::make_shared<CouplingEngine>(s, cav, pol, CouplingMethod::approx);
                e->calibrate(xs.back(), q);
                return xz_locked_map(cav, engine_source(e), xs, zs, threads);
            };
            const double f0 = mirror_finesse(cav);
            const auto ring = ring_statistics(xz(65e-9, Polarization::perpendicular).map, f0);
            const auto none = ring_statistics(xz(10e-9, Polarization::parallel).map, f0);
            const bool p1 = ring.crossings >= 10 && ring.matched >= 0.9 * ring.crossings && !ring.loss_peaks_on_axis;
            const bool p2 = none.crossings == 0 && none.min_finesse > 0.5 * f0 && none.loss_peaks_on_axis;
            ok = ok && p1 && p2;
            parts.push_back(fmt::format("NW2 perp rings: {}/{} F0/2 crossings on C_L maxima {}; R10 par: {} crossings, "
                                        "min F = {:.0f}, C_L max on axis {}",
                                        ring.matched, ring.crossings, p1 ? "ok" : "FAIL", none.crossings, none.min_finesse,
                                        p2 ? "ok" : "FAIL"));
        }
        // sign(F_z) = sign(G_z), i.e. disagreement with F = -hbar G N, somewhere (perp)
        {
            const std::vector<double> radii{100e-9, 175e-9, 200e-9};
            const auto zz = grid_range(0.0, q + 1e-12, q / 16);
            const auto fm = force_vs_radius_per_photon(cav, radii, zz, Polarization::perpendicular, CouplingMethod::approx,
                                                       {}, threads);
            const auto& fp = fm.get("F_z_per_photon").data;
            const auto& g = fm.get("G_z").data;
            const std::size_t nz = zz.size();
            int regions = 0, points = 0;
            for (std::size_t i = 0; i < radii.size(); ++i) {
                double fmax = 0.0, gmax = 0.0;
                for (std::size_t j = 0; j < nz; ++j) {
                    if (std::isfinite(fp[i * nz + j])) fmax = std::max(fmax, std::abs(fp[i * nz + j]));
                    if (std::isfinite(g[i * nz + j])) gmax = std::max(gmax, std::abs(g[i * nz + j]));
                }
                int run = 0;
                bool counted = false;
                for (std::size_t j = 1; j + 1 < nz; ++j) {
                    const double a = fp[i * nz + j], b = g[i * nz + j];
                    // both well away from zero so the sign is meaningful
                    const bool dis = std::isfinite(a) && std::isfinite(b) && std::abs(a) > 0.05 * fmax &&
                                     std::abs(b) > 0.05 * gmax && a * b > 0.0;
                    run = dis ? run + 1 : 0;
                    if (dis) ++points;
                    if (run >= 2 && !counted) {
                        ++regions;
                        counted = true;
                    }
                }
            }
            const bool p = regions >= 1;
            ok = ok && p;
            parts.push_back(fmt::format("sign(F_z) = sign(G_z) regions: {} radii ({} points) {}", regions, points, p ? "ok" : "FAIL"));
        }
        r.pass = ok;
        r.detail = fmt::format("{}", fmt::join(parts, "; "));
    });
}

CheckResult check_properties(int threads)
{
    return timed("9", "property suite", [threads](CheckResult& r) {
        const auto cav = reference_cavity();
        std::vector<std::string> parts;
        bool ok = true;

        // energy conservation, independent wire-loss route
        double e_worst = 0.0;
        int samples = 0;
        for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
            NanowireSpec s;
            s.radius = 65e-9;
            CouplingEngine engine(s, cav, pol, CouplingMethod::approx);
            engine.calibrate(0.6e-6, 0.25 * cav.wavelength);
            for (double x : {0.0, 0.6e-6})
                for (double z : {0.0, 50e-9, 120e-9, 0.25 * cav.wavelength}) {
                    const auto c = engine.coefficients(x, z);
                    const auto res = find_resonance(cav, &c, nominal_resonance(cav));
                    for (int i = -4; i <= 4; ++i) {
                        e_worst = std::max(e_worst, energy_balance_error(cav, c, res.resonant_length + 0.5 * i * res.linewidth_length));
                        ++samples;
                    }
                }
        }
        const bool p_energy = e_worst <= 1e-9;
        ok = ok && p_energy;
        parts.push_back(fmt::format("energy {} pts max {:.1e} (1e-9)", samples, e_worst));

        // symmetry relations: direction flip and x mirror, bit-exact on assembled entries
        bool p_sym = true;
        {
            NanowireSpec s;
            s.radius = 150e-9;
            CouplingEngine engine(s, cav, Polarization::perpendicular, CouplingMethod::approx);
            engine.calibrate(1e-6, 0.25 * cav.wavelength);
            for (double x : {0.0, 0.4e-6, 1e-6})
                for (double z : {37e-9, 101e-9}) {
                    const auto a = engine.coefficients(x, z);
                    const auto b = engine.coefficients(x, -z);
                    const auto f = flip_direction(a, cav);
                    const auto m = engine.coefficients(-x, z);
                    const auto mx = mirror_x(a, cav);
                    p_sym = p_sym && f.cr_plus == b.cr_plus && f.ct_plus == b.ct_plus && f.cr_minus == b.cr_minus &&
                            f.ct_minus == b.ct_minus && mx.cr_plus == m.cr_plus && mx.ct_plus == m.ct_plus &&
                            mx.cr_minus == m.cr_minus && mx.ct_minus == m.ct_minus;
                    // S -> M -> S
                    const auto back = scatter_from_transfer(nanowire_transfer_matrix(a));
                    p_sym = p_sym && std::abs(back.cr_plus - a.cr_plus) < 1e-14 && std::abs(back.ct_plus - a.ct_plus) < 1e-14 &&
                            std::abs(back.cr_minus - a.cr_minus) < 1e-14 && std::abs(back.ct_minus - a.ct_minus) < 1e-14;
                }
        }
        ok = ok && p_sym;
        parts.push_back(fmt::format("symmetries {}", p_sym ? "exact" : "BROKEN"));

        // Mie flux balance
        double flux = 0.0;
        for (auto pol : {Polarization::parallel, Polarization::perpendicular})
            for (double radius : {10e-9, 65e-9, 150e-9, 250e-9}) {
                NanowireSpec s;
                s.radius = radius;
                flux = std::max(flux, mie_flux_imbalance(s, cav.wavelength, pol));
            }
        const bool p_flux = flux <= 1e-6;
        ok = ok && p_flux;
        parts.push_back(fmt::format("Mie flux {:.1e} (1e-6)", flux));

        // plane-wave reconstruction of the transverse field in the Rayleigh volume
        double rec = 0.0;
        {
            const auto m = mode_geometry(cav);
            for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
                const auto comps = plane_wave_expansion_3d(m, pol);
                const auto u = mode_polarization(pol);
                double peak = 0.0, err = 0.0;
                for (int iz = -4; iz <= 4; ++iz)
                    for (int ix = -4; ix <= 4; ++ix)
                        for (int iy = -4; iy <= 4; ++iy) {
                            const double z = m.rayleigh_length * iz / 4.0, w = m.w(z);
                            const Vec3 p{w * ix / 4.0, w * iy / 4.0, z};
                            const auto a = reconstruct_field(comps, p);
                            const auto b = hg_field(m, 0, 0, p, +1, pol);
                            cplx at = 0.0, bt = 0.0;
                            for (int c = 0; c < 3; ++c) {
                                at += a[c] * u[c];
                                bt += b[c] * u[c];
                            }
                            peak = std::max(peak, std::abs(bt));
                            err = std::max(err, std::abs(at - bt));
                        }
                rec = std::max(rec, err / peak);
            }
        }
        const bool p_rec = rec <= 0.01;
        ok = ok && p_rec;
        parts.push_back(fmt::format("reconstruction {:.2e} (1e-2)", rec));

        // force linear in the input power
        double lin = 0.0;
        {
            NanowireSpec s;
            s.radius = 65e-9;
            CouplingEngine engine(s, cav, Polarization::perpendicular, CouplingMethod::approx);
            const auto c = engine.coefficients(0.3e-6, 70e-9);
            const auto kern = force_kernels(s, cav.wavelength, Polarization::perpendicular);
            const double L = find_resonance(cav, &c, nominal_resonance(cav)).resonant_length;
            const auto f1 = total_force(cav, kern, c, L, PowerBudget{1e-6, 0.8, 0.5});
            const auto f2 = total_force(cav, kern, c, L, PowerBudget{2.5e-6, 0.8, 0.5});
            lin = std::hypot(f2.fx - 2.5 * f1.fx, f2.fz - 2.5 * f1.fz) / std::hypot(f2.fx, f2.fz);
        }
        const bool p_lin = lin <= 1e-12;
        ok = ok && p_lin;
        parts.push_back(fmt::format("linearity {:.1e} (1e-12)", lin));

        // determinism: the same map twice, and with a different thread count
        bool p_det = true;
        {
            RunConfig cfg;
            NanowireSpec s;
            s.radius = 65e-9;
            auto run = [&](int th) {
                auto e = std::make_shared<CouplingEngine>(s, cav, Polarization::perpendicular, CouplingMethod::approx);
                e->calibrate(0.0, 0.25 * cav.wavelength);
                LZOptions opt;
                opt.n_length = 61;
                opt.threads = th;
                const auto lz = lz_map(cav, engine_source(e), grid_range(0.0, 0.25 * cav.wavelength, 40e-9), opt);
                const auto h = make_header("lz-map", cfg);
                return format_map_csv(lz.panel, h) + format_map_csv(lz.profile, h);
            };
            const auto a = run(1), b = run(1), c = run(std::max(2, threads));
            p_det = a == b && a == c;
        }
        ok = ok && p_det;
        parts.push_back(fmt::format("determinism {}", p_det ? "byte-identical" : "DIFFERS"));

        r.pass = ok;
        r.detail = fmt::format("{}", fmt::join(parts, "; "));
    });
}

std::vector<CheckResult> run_validation(bool full, int threads, const std::function<void(const CheckResult&)>& on_result)
{
    std::vector<std::function<CheckResult()>> checks;
    checks.push_back([] { return check_empty_cavity(); });
    checks.push_back([] { return check_mode_geometry(); });
    if (full) checks.push_back([threads] { return check_method_agreement(threads); });
    if (full) checks.push_back([] { return check_lz_nw2(); });
    if (full) checks.push_back([threads] { return check_force_scale(threads); });
    checks.push_back([] { return check_pair_force_oracle(); });
    if (full) checks.push_back([threads] { return check_single_photon(threads); });
    if (full) checks.push_back([threads] { return check_qualitative(threads); });
    checks.push_back([threads] { return check_properties(threads); });
    std::vector<CheckResult> out;
    for (auto& c : checks) {
        out.push_back(c());
        if (on_result) on_result(out.back());
    }
    return out;
}

std::string format_check(const CheckResult& r)
{
    return fmt::format("[{}] criterion {}: {} ({:.1f} s) -- {}", r.pass ? "PASS" : "FAIL", r.id, r.name, r.seconds, r.detail);
}

} // namespace nimcav
