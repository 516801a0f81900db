#include "nimcav/optomech.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace nimcav;

namespace {

NanowireSpec wire(double r, double len)
{
    NanowireSpec s;
    s.radius = r;
    s.length = len;
    return s;
}

CoefficientSource approx_source(double r, Polarization pol, double x_probe, double z_probe)
{
    auto e = std::make_shared<CouplingEngine>(wire(r, 70e-6), CavityGeometry{}, pol, CouplingMethod::approx);
    e->calibrate(x_probe, z_probe);
    return engine_source(e);
}

} // namespace

TEST_CASE("mechanical mode of the reference wires")
{
    const auto m1 = mechanical_mode(wire(100e-9, 500e-6));
    CHECK(m1.frequency / (2 * pi) == doctest::Approx(1250.4).epsilon(1e-12));
    const auto m2 = mechanical_mode(wire(65e-9, 70e-6));
    CHECK(m2.frequency / (2 * pi) == doctest::Approx(3126.0 * 65e-9 / (70e-6 * 70e-6)).epsilon(1e-12));
    CHECK(m2.effective_mass == doctest::Approx(7.456e-16).epsilon(1e-3));
    CHECK(m2.zero_point_spread ==
          doctest::Approx(std::sqrt(hbar / (2 * m2.effective_mass * m2.frequency))).epsilon(1e-14));
    CHECK(thermal_spread(m2, 0.0) == 0.0);
    CHECK(thermal_spread(m2, 300.0) / thermal_spread(m2, 4.0) == doctest::Approx(std::sqrt(75.0)).epsilon(1e-12));
    CHECK_THROWS_AS(mechanical_mode(wire(0.0, 1e-6)), std::invalid_argument);
    CHECK_THROWS_AS(thermal_spread(m2, -1.0), std::invalid_argument);
}

TEST_CASE("single-photon figures recombine from their factors")
{
    const auto m = mechanical_mode(wire(65e-9, 70e-6), 1e5);
    const double G = -3.2e17, kappa = 1.4e11;
    const auto f = single_photon_figures(m, G, kappa);
    const double g0 = G * m.zero_point_spread;
    CHECK(f.g0 == g0);
    CHECK(f.static_cooperativity == doctest::Approx(2 * g0 * g0 / (kappa * m.frequency)).epsilon(1e-15));
    CHECK(f.dynamic_cooperativity == doctest::Approx(f.static_cooperativity * m.quality_factor).epsilon(1e-12));
    CHECK(f.single_photon_displacement == doctest::Approx(2 * g0 / m.frequency * m.zero_point_spread).epsilon(1e-15));
    CHECK(f.single_photon_force * m.zero_point_spread == doctest::Approx(-hbar * g0).epsilon(1e-15));
    CHECK(f.thermal_spread.size() == 3);
    CHECK_THROWS_AS(single_photon_figures(m, G, 0.0), std::invalid_argument);
}

TEST_CASE("coupling prefactor and finite differences")
{
    const CavityGeometry cav;
    CHECK(coupling_prefactor(cav) * 0.1 == doctest::Approx(1.986e19).epsilon(1e-3));
    std::vector<double> s{0, 1e-9, 2e-9, 3e-9, 4e-9}, l(5);
    for (int i = 0; i < 5; ++i) l[i] = 12e-6 + 0.2 * s[i];
    const auto g = coupling_strength(s, l, {1, 1, 1, 1, 1}, cav);
    for (double v : g) CHECK(v == doctest::Approx(0.2 * coupling_prefactor(cav)).epsilon(1e-9));
    const auto h = coupling_strength(s, l, {1, 1, 0, 1, 1}, cav);
    CHECK(std::isnan(h[1]));
    CHECK(std::isnan(h[2]));
    CHECK(std::isnan(h[3]));
    CHECK_FALSE(std::isnan(h[0]));
}

TEST_CASE("parabolic refinement of a sampled parabola is exact")
{
    std::vector<double> x, y;
    for (int i = 0; i < 11; ++i) {
        x.push_back(0.1 * i);
        y.push_back(3.0 - 2.0 * std::pow(x.back() - 0.437, 2));
    }
    const auto [xm, ym] = parabolic_max(x, y);
    CHECK(xm == doctest::Approx(0.437).epsilon(1e-12));
    CHECK(ym == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("grid ranges include the end point")
{
    const auto g = grid_range(-1.0, 1.0, 0.25);
    CHECK(g.size() == 9);
    CHECK(g.back() == doctest::Approx(1.0));
}

TEST_CASE("resonance shift symmetry along the axis")
{
    const CavityGeometry cav;
    const double q = 0.25 * cav.wavelength;
    const auto src = approx_source(65e-9, Polarization::perpendicular, 0.0, q);
    const double l0 = nominal_resonance(cav);
    auto shift = [&](double z) {
        const auto p = locked_pixel(cav, src, 0.0, z, l0);
        REQUIRE(p.ok);
        return p.res.resonant_length - l0;
    };
    for (double z : {20e-9, 75e-9, 150e-9}) {
        const double a = shift(z), b = shift(-z);
        CHECK(std::abs(a - b) <= 1e-2 * std::abs(a) + 1e-13);
        // one half wavelength further along the same standing wave
        CHECK(std::abs(shift(z + 2 * q) - a) <= 5e-2 * std::abs(a) + 1e-13);
    }
    // node and antinode are extrema of the shift, so G vanishes there
    const double h = 1e-9;
    for (double z : {0.0, q}) {
        const double g = (shift(z + h) - shift(z - h)) / (2 * h);
        const double gmid = (shift(0.5 * q + h) - shift(0.5 * q - h)) / (2 * h);
        CHECK(std::abs(g) < 0.05 * std::abs(gmid));
    }
}

TEST_CASE("far off-axis wire leaves the empty cavity")
{
    const CavityGeometry cav;
    const auto src = approx_source(65e-9, Polarization::perpendicular, 8e-6, 0.0);
    const auto p = locked_pixel(cav, src, 8e-6, 37e-9, nominal_resonance(cav));
    REQUIRE(p.ok);
    CHECK(p.res.finesse == doctest::Approx(mirror_finesse(cav)).epsilon(1e-3));
    CHECK(std::abs(p.res.resonant_length - nominal_resonance(cav)) < 1e-12);
}

TEST_CASE("G from the length shift agrees with the cavity-frequency route")
{
    const CavityGeometry cav;
    const double q = 0.25 * cav.wavelength, z = 0.5 * q, h = 2e-9;
    const auto src = approx_source(65e-9, Polarization::perpendicular, 0.0, q);
    const double l0 = nominal_resonance(cav);
    std::vector<double> s{z - h, z, z + h}, l;
    for (double v : s) l.push_back(locked_pixel(cav, src, 0.0, v, l0).res.resonant_length);
    const double g_len = coupling_strength(s, l, {1, 1, 1}, cav)[1];
    // omega_cav = N pi c / L_res at the actual resonant length
    auto omega = [&](double L) { return cav.longitudinal_order * pi * c_light / L; };
    const double g_freq = -(omega(l[2]) - omega(l[0])) / (2 * h);
    CHECK(g_len * g_freq > 0.0);
    CHECK(std::abs(g_len / g_freq) > 0.5);
    CHECK(std::abs(g_len / g_freq) < 2.0);
}

TEST_CASE("lz map payloads are consistent")
{
    const CavityGeometry cav;
    const auto src = approx_source(65e-9, Polarization::perpendicular, 0.0, 0.25 * cav.wavelength);
    LZOptions opt;
    opt.n_length = 31;
    const auto r = lz_map(cav, src, {0.0, 40e-9, 80e-9}, opt);
    CHECK(r.panel.size() == 3 * 31);
    const auto& ct = r.panel.get("C_T").data;
    const auto& cl = r.panel.get("C_L").data;
    for (std::size_t i = 0; i < ct.size(); ++i) CHECK(ct[i] + cl[i] <= 1.0 + 1e-12);
    const auto& fi = r.profile.get("finesse").data;
    for (double f : fi) CHECK(f < mirror_finesse(cav));
    CHECK_THROWS(r.profile.get("no such payload"));
}
