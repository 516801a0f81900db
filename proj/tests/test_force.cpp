#include "nimcav/force.hpp"
#include "nimcav/validation.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace nimcav;

namespace {

NanowireSpec wire(double r, double n = 2.61)
{
    NanowireSpec s;
    s.radius = r;
    s.refractive_index = n;
    return s;
}

PlaneWaveComponent axial(cplx a, Polarization pol, int dir = 1)
{
    const double k = 2 * pi / 770e-9;
    PlaneWaveComponent c;
    c.amplitude = a;
    c.wavevector = {0.0, 0.0, dir * k};
    c.polarization = pol == Polarization::parallel ? Vec3{0.0, -1.0, 0.0} : Vec3{double(dir), 0.0, 0.0};
    c.phi = dir > 0 ? 0.0 : pi;
    return c;
}

ForceMapResult on_axis_forces(double r, Polarization pol, const std::vector<double>& x0, const std::vector<double>& z0)
{
    const CavityGeometry cav;
    auto e = std::make_shared<CouplingEngine>(wire(r), cav, pol, CouplingMethod::approx);
    double xm = 0.0, zm = 0.0;
    for (double x : x0) xm = std::max(xm, std::abs(x));
    for (double z : z0) zm = std::max(zm, std::abs(z));
    e->calibrate(xm, zm);
    return force_map(cav, wire(r), pol, engine_source(e), x0, z0, PowerBudget{});
}

} // namespace

TEST_CASE("kernel prefactor vanishes without index contrast")
{
    const auto k = force_kernels(wire(100e-9, 1.0), 770e-9, Polarization::perpendicular);
    CHECK(k.K == 0.0);
    const auto f = total_force(k, {axial(1.0, Polarization::perpendicular)}, 0.0, 0.0, 1.0);
    CHECK(f.fx == 0.0);
    CHECK(f.fz == 0.0);
    const auto k2 = force_kernels(wire(100e-9), 770e-9, Polarization::parallel);
    CHECK(k2.K == doctest::Approx(4 * (2.61 * 2.61 - 1) / (pi * c_light * 100e-9)).epsilon(1e-14));
    CHECK(k2.lambda.size() == 6);
}

TEST_CASE("single plane wave pushes along its direction")
{
    for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
        for (double r : {40e-9, 150e-9}) {
            const auto kern = force_kernels(wire(r), 770e-9, pol);
            const auto f = total_force(kern, {axial(0.7, pol)}, 0.0, 0.0, 1.0);
            CHECK(f.fz > 0.0);
            CHECK(std::abs(f.fx) < 1e-12 * f.fz);
            const auto g = total_force(kern, {axial(0.7, pol, -1)}, 0.0, 0.0, 1.0);
            CHECK(g.fz == doctest::Approx(-f.fz).epsilon(1e-10));
            // brute-force stress tensor
            const auto bf = stress_tensor_force(wire(r), 770e-9, pol, {{0.7, 0.0, axial(0.7, pol).polarization}},
                                                {0.0, 0.0, 0.0});
            CHECK(f.fz == doctest::Approx(bf[1]).epsilon(1e-2));
            CHECK(std::abs(bf[0]) < 1e-2 * std::abs(bf[1]));
        }
    }
}

TEST_CASE("force is a sum over ordered pairs and linear in power")
{
    const auto kern = force_kernels(wire(120e-9), 770e-9, Polarization::perpendicular);
    const auto m = mode_geometry(CavityGeometry{});
    auto comps = plane_wave_expansion_2d(m, Polarization::perpendicular, 1, 3);
    auto back = plane_wave_expansion_2d(m, Polarization::perpendicular, -1, 3);
    for (auto& c : back) c.amplitude *= cplx(0.3, -0.8);
    comps.insert(comps.end(), back.begin(), back.end());
    const Vec3 rho{0.21e-6, 0.0, 47e-9};
    cplx sum = 0.0;
    for (const auto& a : comps)
        for (const auto& b : comps) sum += pair_force(kern, a, b, rho, 1.0);
    const auto f = total_force(kern, comps, rho[0], rho[2], 1.0);
    CHECK(f.fx == doctest::Approx(sum.imag()).epsilon(1e-12));
    CHECK(f.fz == doctest::Approx(sum.real()).epsilon(1e-12));
    const auto g = total_force(kern, comps, rho[0], rho[2], 2.5);
    CHECK(g.fx == doctest::Approx(2.5 * f.fx).epsilon(1e-12));
    CHECK(g.fz == doctest::Approx(2.5 * f.fz).epsilon(1e-12));
    for (auto& c : comps) c.amplitude = 0.0;
    const auto z = total_force(kern, comps, rho[0], rho[2], 1.0);
    CHECK(z.fx == 0.0);
    CHECK(z.fz == 0.0);
}

TEST_CASE("pair force oracle at random offsets")
{
    const auto r = check_pair_force_oracle();
    CHECK_MESSAGE(r.pass, r.detail);
}

TEST_CASE("axial force profile of the perpendicular NW2 wire")
{
    const CavityGeometry cav;
    const double q = 0.25 * cav.wavelength;
    std::vector<double> z;
    const int n = 48;
    for (int i = 0; i < n; ++i) z.push_back(-q + 2 * q * i / n);
    const auto res = on_axis_forces(65e-9, Polarization::perpendicular, {0.0}, z);
    const auto& fz = res.forces.get("F_z").data;
    const auto& fx = res.forces.get("F_x").data;
    double mx = -1e300, mn = 1e300;
    cplx h1 = 0.0, h2 = 0.0;
    for (int i = 0; i < n; ++i) {
        REQUIRE(res.forces.ok[i]);
        mx = std::max(mx, fz[i]);
        mn = std::min(mn, fz[i]);
        CHECK(std::abs(fx[i]) < 1e-9 * std::max(std::abs(fz[i]), 1e-18));
        const double ph = 2 * pi * i / n;
        h1 += fz[i] * std::exp(-I * ph);
        h2 += fz[i] * std::exp(-2.0 * I * ph);
    }
    // sawtooth-like: strong second harmonic and unequal lobes
    CHECK(std::abs(h2) > 0.1 * std::abs(h1));
    CHECK(std::abs(mx + mn) > 0.02 * mx);
}

TEST_CASE("a thin parallel wire is drawn to the intensity maxima")
{
    const CavityGeometry cav;
    const double q = 0.25 * cav.wavelength;
    // antinodes at z = +-lambda/4, node at the centre
    const auto res = on_axis_forces(10e-9, Polarization::parallel, {0.0, 0.6e-6}, {-0.5 * q, 0.5 * q, q});
    const auto& fz = res.forces.get("F_z").data;
    const auto& fx = res.forces.get("F_x").data;
    CHECK(fz[0] < 0.0);
    CHECK(fz[1] > 0.0);
    CHECK(fx[5] < 0.0);   // off axis at the antinode, pulled back to x = 0
}

TEST_CASE("curl uses central differences")
{
    MapGrid g;
    g.rows = {"x0", "um", 1e6, {0.0, 1.0, 2.0}};
    g.cols = {"z0", "nm", 1e9, {0.0, 1.0, 2.0}};
    g.ok.assign(9, 1);
    auto& fx = g.add("F_x", "fN", 1e15);
    auto& fz = g.add("F_z", "fN", 1e15);
    fx.data.resize(9);
    fz.data.resize(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            fx.data[3 * i + j] = 2.0 * j;   // dFx/dz = 2
            fz.data[3 * i + j] = -3.0 * i;  // dFz/dx = -3
        }
    const auto c = map_curl(g);
    CHECK(c[4] == doctest::Approx(5.0));
    CHECK(std::isnan(c[0]));
    g.ok[1] = 0;
    CHECK(std::isnan(map_curl(g)[4]));
}
