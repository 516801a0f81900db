#include "nimcav/force.hpp"
#include "nimcav/bessel.hpp"
#include "nimcav/mie.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nimcav {

namespace {
constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();
}

ForceKernels force_kernels(const NanowireSpec& spec, double wavelength, Polarization pol, int l_max)
{
    if (!(spec.radius > 0.0)) throw std::invalid_argument("force_kernels: radius must be positive");
    if (!(spec.refractive_index >= 1.0)) throw std::invalid_argument("force_kernels: refractive index below 1");
    if (!(wavelength > 0.0)) throw std::invalid_argument("force_kernels: wavelength must be positive");
    if (l_max < 0) throw std::invalid_argument("force_kernels: negative l_max");
    ForceKernels f;
    f.l_max = l_max;
    f.pol = pol;
    f.k = 2.0 * pi / wavelength;
    const double n = spec.refractive_index, rho = f.k * spec.radius;
    f.K = 4.0 * (n * n - 1.0) / (pi * c_light * spec.radius);
    const auto out = cylinder_functions(l_max + 1, rho);
    const auto in = cylinder_functions(l_max + 1, n * rho, false);
    f.D.resize(l_max + 2);
    for (int l = 0; l <= l_max + 1; ++l) {
        if (pol == Polarization::parallel)
            f.D[l] = f.k * (in.J(l) * out.dH(l) - n * in.dJ(l) * out.H(l));
        else
            f.D[l] = f.k * (in.dJ(l) * out.H(l) - n * in.J(l) * out.dH(l));
    }
    f.lambda.resize(l_max + 1);
    for (int l = 0; l <= l_max; ++l) {
        const double num = pol == Polarization::parallel
                               ? in.J(l) * in.J(l + 1)
                               : double(l) * (l + 1) / (rho * rho) * in.J(l) * in.J(l + 1) + in.dJ(l) * in.dJ(l + 1);
        f.lambda[l] = num / (std::norm(f.D[l]) * std::norm(f.D[l + 1]));
    }
    return f;
}

double polarization_sign(const PlaneWaveComponent& c, Polarization pol)
{
    const Vec3 ref = pol == Polarization::parallel ? Vec3{0.0, -1.0, 0.0} : azimuthal_unit(c.phi);
    const double d = c.polarization[0] * ref[0] + c.polarization[1] * ref[1] + c.polarization[2] * ref[2];
    return d >= 0.0 ? 1.0 : -1.0;
}

cplx pair_force(const ForceKernels& kern, const PlaneWaveComponent& c1, const PlaneWaveComponent& c2,
                const Vec3& rho0, double p_inc)
{
    const double a1 = std::abs(c1.amplitude), a2 = std::abs(c2.amplitude);
    if (a1 == 0.0 || a2 == 0.0) return 0.0;
    const double s1 = polarization_sign(c1, kern.pol), s2 = polarization_sign(c2, kern.pol);
    const auto kr = [&](const PlaneWaveComponent& c) {
        return c.wavevector[0] * rho0[0] + c.wavevector[2] * rho0[2];
    };
    const double phase = std::arg(c1.amplitude) - std::arg(c2.amplitude) + (kr(c1) - kr(c2)) + 0.5 * (c1.phi + c2.phi);
    cplx sum = 0.0;
    for (int l = 0; l <= kern.l_max; ++l)
        sum += kern.lambda[l] *
               std::imag(std::conj(kern.D[l]) * kern.D[l + 1] * std::exp(-I * (l + 0.5) * (c1.phi - c2.phi)));
    return p_inc * kern.K * a1 * a2 * s1 * s2 * std::exp(-I * phase) * sum;
}

std::vector<PlaneWaveComponent> intracavity_components(const ModeGeometry& m, Polarization pol,
                                                       const IntracavityAmplitudes& amps, int n_terms,
                                                       double delta_k)
{
    auto fwd = plane_wave_expansion_2d(m, pol, +1, n_terms, delta_k);
    auto bwd = plane_wave_expansion_2d(m, pol, -1, n_terms, delta_k);
    for (auto& c : fwd) c.amplitude *= amps.A_plus;
    for (auto& c : bwd) c.amplitude *= amps.B_minus;
    fwd.insert(fwd.end(), bwd.begin(), bwd.end());
    return fwd;
}

ForceVector total_force(const ForceKernels& kern, const std::vector<PlaneWaveComponent>& comps, double x0,
                        double z0, double p_inc)
{
    const Vec3 rho0{x0, 0.0, z0};
    cplx f = 0.0;
    for (const auto& a : comps)
        for (const auto& b : comps) f += pair_force(kern, a, b, rho0, p_inc);
    ForceVector v;
    v.fx = f.imag();
    v.fz = f.real();
    v.x0 = x0;
    v.z0 = z0;
    v.pol = kern.pol;
    return v;
}

ForceVector total_force(const CavityGeometry& cav, const ForceKernels& kern, const ScatterCoefficients& coeffs,
                        double length, const PowerBudget& power, int n_terms, double delta_k)
{
    const auto amps = intracavity_amplitudes(cav, &coeffs, length);
    const auto comps = intracavity_components(mode_geometry(cav), kern.pol, amps, n_terms, delta_k);
    auto v = total_force(kern, comps, coeffs.x0, coeffs.z0, power.incident());
    v.input_power = power.input_power;
    return v;
}

std::vector<double> map_curl(const MapGrid& forces)
{
    const auto& fx = forces.get("F_x").data;
    const auto& fz = forces.get("F_z").data;
    const auto& xs = forces.rows.values;
    const auto& zs = forces.cols.values;
    const std::size_t nx = xs.size(), nz = zs.size();
    std::vector<double> curl(nx * nz, nan_v);
    if (nx < 3 || nz < 3) return curl;
    // central differences only: the border stays NaN
    for (std::size_t i = 1; i + 1 < nx; ++i)
        for (std::size_t j = 1; j + 1 < nz; ++j) {
            const auto& ok = forces.ok;
            if (!ok[i * nz + j - 1] || !ok[i * nz + j + 1] || !ok[(i - 1) * nz + j] || !ok[(i + 1) * nz + j]) continue;
            const double dfx_dz = (fx[i * nz + j + 1] - fx[i * nz + j - 1]) / (zs[j + 1] - zs[j - 1]);
            const double dfz_dx = (fz[(i + 1) * nz + j] - fz[(i - 1) * nz + j]) / (xs[i + 1] - xs[i - 1]);
            curl[i * nz + j] = dfx_dz - dfz_dx;
        }
    return curl;
}

ForceMapResult force_map(const CavityGeometry& cav, const NanowireSpec& spec, Polarization pol,
                         const CoefficientSource& src, const std::vector<double>& x0, const std::vector<double>& z0,
                         const PowerBudget& power, int threads)
{
    ForceMapResult out;
    out.locked = xz_locked_map(cav, src, x0, z0, threads);
    const auto kern = force_kernels(spec, cav.wavelength, pol);
    auto& m = out.forces;
    m.rows = out.locked.map.rows;
    m.cols = out.locked.map.cols;
    auto& fx = m.add("F_x", "fN", 1e15);
    auto& fz = m.add("F_z", "fN", 1e15);
    m.ok = out.locked.map.ok;
    parallel_for(m.size(), threads, [&](std::size_t k) {
        const auto& p = out.locked.pixels[k];
        if (!p.ok) return;
        const auto f = total_force(cav, kern, p.coeffs, p.res.resonant_length, power);
        fx.data[k] = f.fx;
        fz.data[k] = f.fz;
    });
    auto& curl = m.add("curl", "nN/m", 1e9);
    curl.data = map_curl(m);
    return out;
}

MapGrid force_vs_radius_per_photon(const CavityGeometry& cav, const std::vector<double>& radii,
                                   const std::vector<double>& z0, Polarization pol, CouplingMethod method,
                                   const CouplingSettings& settings, int threads, double refractive_index)
{
    MapGrid m;
    m.rows = {"radius", "nm", 1e9, radii};
    m.cols = {"z0", "nm", 1e9, z0};
    auto& fp = m.add("F_z_per_photon", "fN", 1e15);
    auto& gz = m.add("G_z", "rad/s/m", 1.0);
    auto& np = m.add("photons_per_W", "1/W", 1.0);
    m.ok.assign(m.size(), 0);
    const std::size_t nz = z0.size();
    const PowerBudget unit{1.0, 1.0, 1.0};
    parallel_for(radii.size(), threads, [&](std::size_t i) {
        NanowireSpec spec;
        spec.radius = radii[i];
        spec.refractive_index = refractive_index;
        auto engine = std::make_shared<CouplingEngine>(spec, cav, pol, method, settings);
        const auto kern = force_kernels(spec, cav.wavelength, pol, settings.l_max);
        const auto prof = resonance_profile(cav, engine_source(engine), std::vector<double>(nz, 0.0), z0);
        std::vector<double> lr(nz, nan_v);
        std::vector<unsigned char> ok(nz, 0);
        for (std::size_t j = 0; j < nz; ++j) {
            const auto& p = prof.pixels[j];
            if (!p.ok) continue;
            ok[j] = 1;
            lr[j] = p.res.resonant_length;
            const double L = p.res.resonant_length;
            const auto f = total_force(cav, kern, p.coeffs, L, unit);
            const auto amps = intracavity_amplitudes(cav, &p.coeffs, L);
            const double n = intracavity_photon_number(cav, amps, L, z0[j], 1.0);
            fp.data[i * nz + j] = f.fz / n;
            np.data[i * nz + j] = n;
            m.ok[i * nz + j] = 1;
        }
        const auto g = coupling_strength(z0, lr, ok, cav);
        for (std::size_t j = 0; j < nz; ++j) gz.data[i * nz + j] = g[j];
    });
    return m;
}

} // namespace nimcav
