#include "nimcav/cavity.hpp"
#include "nimcav/validation.hpp"

#include <doctest.h>

#include <cmath>

using namespace nimcav;

namespace {

ScatterCoefficients sample_wire(double z0)
{
    NanowireSpec s;
    s.radius = 130e-9;
    s.x0 = 0.2e-6;
    s.z0 = z0;
    return nanowire_rt_coefficients(s, CavityGeometry{}, Polarization::perpendicular, CouplingMethod::approx);
}

} // namespace

TEST_CASE("empty-cavity finesse and reflectivity inverse")
{
    const CavityGeometry cav;
    CHECK(mirror_finesse(cav) == doctest::Approx(pi * std::sqrt(0.994) / (1 - 0.994)).epsilon(1e-12));
    for (double f : {522.0, 5000.0, 50000.0}) {
        CavityGeometry c;
        c.reflectivity_left = c.reflectivity_right = reflectivity_for_finesse(f);
        CHECK(mirror_finesse(c) == doctest::Approx(f).epsilon(1e-9));
    }
}

TEST_CASE("empty cavity follows the Airy function")
{
    const CavityGeometry cav;
    const double R = cav.reflectivity_left, lres = nominal_resonance(cav);
    const double coef = 4 * R / ((1 - R) * (1 - R));
    for (double d : {-150e-9, -3e-9, -0.2e-9, 0.0, 0.1e-9, 1e-9, 40e-9, 190e-9}) {
        const auto r = cavity_response(cav, nullptr, lres + d);
        const double airy = 1.0 / (1.0 + coef * std::pow(std::sin(cav.k() * d), 2));
        CHECK(r.C_T == doctest::Approx(airy).epsilon(1e-10));
        CHECK(r.C_R + r.C_T == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(lres * 1e6 == doctest::Approx(12.440291).epsilon(1e-7));
}

TEST_CASE("resonance search on the empty cavity")
{
    const CavityGeometry cav;
    const auto res = find_resonance(cav, nullptr, cav.length);
    CHECK(res.resonant_length == doctest::Approx(nominal_resonance(cav)).epsilon(1e-12));
    CHECK(res.finesse == doctest::Approx(522.026).epsilon(1e-4));
    CHECK(res.peak_transmission == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.linewidth_angular == doctest::Approx(cavity_linewidth_angular(res.resonant_length, res.finesse)));
}

TEST_CASE("Lorentzian fit recovers synthetic parameters")
{
    std::vector<double> x, y;
    for (int i = 0; i <= 200; ++i) {
        const double u = -5.0 + 0.05 * i;
        x.push_back(u);
        y.push_back(0.01 + 0.9 / (1 + std::pow(2 * (u - 0.37) / 0.8, 2)));
    }
    LorentzFit g;
    g.offset = 0.0;
    g.amplitude = 1.0;
    g.center = 0.0;
    g.fwhm = 1.0;
    const auto f = fit_lorentzian(x, y, g);
    CHECK(f.center == doctest::Approx(0.37).epsilon(1e-9));
    CHECK(f.fwhm == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(f.amplitude == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(f.offset == doctest::Approx(0.01).epsilon(1e-8));
    CHECK(f.residual < 1e-10);
    CHECK_THROWS_AS(fit_lorentzian({1, 2, 3}, {1, 2, 3}, g), std::invalid_argument);
}

TEST_CASE("intracavity build-up at resonance")
{
    const CavityGeometry cav;
    const double L = nominal_resonance(cav);
    const auto a = intracavity_amplitudes(cav, nullptr, L);
    const double T = 1 - cav.reflectivity_left;
    CHECK(std::norm(a.A_plus) == doctest::Approx(T / (T * T)).epsilon(1e-9));
    // the backward wave is the forward one after the right mirror
    CHECK(std::norm(a.A_minus) == doctest::Approx(cav.reflectivity_right * std::norm(a.A_plus)).epsilon(1e-9));
    CHECK(std::norm(a.B_plus) == std::norm(a.A_plus));
    const double n = intracavity_photon_number(cav, a, L, 0.0, 1e-6);
    const double omega = 2 * pi * c_light / cav.wavelength;
    const double energy = (std::norm(a.A_plus) + std::norm(a.A_minus)) * L * 1e-6 / c_light;
    CHECK(n == doctest::Approx(energy / (hbar * omega)).epsilon(1e-12));
}

TEST_CASE("energy balance with a lossy wire")
{
    const CavityGeometry cav;
    const double lres = nominal_resonance(cav);
    for (double z0 : {-150e-9, 0.0, 37e-9}) {
        const auto c = sample_wire(z0);
        for (double d : {-30e-9, 0.0, 5e-9}) {
            CHECK(energy_balance_error(cav, c, lres + d) < 1e-9);
            const auto r = cavity_response(cav, &c, lres + d);
            CHECK(r.C_L >= 0.0);
        }
    }
}

TEST_CASE("wire outside the cavity is rejected")
{
    const CavityGeometry cav;
    ScatterCoefficients c;
    c.z0 = 7e-6;
    CHECK_THROWS_AS(cavity_response(cav, &c, cav.length), std::invalid_argument);
    CHECK_THROWS_AS(cavity_response(cav, nullptr, -1.0), std::invalid_argument);
}

TEST_CASE("no-op wire leaves the cavity unchanged")
{
    const CavityGeometry cav;
    ScatterCoefficients c;
    c.z0 = 1.3e-6;
    const double L = nominal_resonance(cav) + 2e-9;
    const auto a = cavity_response(cav, &c, L), b = cavity_response(cav, nullptr, L);
    CHECK(a.C_T == doctest::Approx(b.C_T).epsilon(1e-12));
    CHECK(std::abs(a.c_r - b.c_r) < 1e-12);
}
