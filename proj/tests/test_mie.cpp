#include "nimcav/bessel.hpp"
#include "nimcav/force.hpp"
#include "nimcav/mie.hpp"
#include "nimcav/quadrature.hpp"
#include "nimcav/validation.hpp"

#include <doctest.h>

#include <cmath>

using namespace nimcav;

namespace {

// std:: special functions as the independent route
double std_j(int n, double x) { return n >= 0 ? std::cyl_bessel_j(n, x) : (n % 2 ? -1 : 1) * std::cyl_bessel_j(-n, x); }
double std_y(int n, double x) { return n >= 0 ? std::cyl_neumann(n, x) : (n % 2 ? -1 : 1) * std::cyl_neumann(-n, x); }
cplx std_h(int n, double x) { return {std_j(n, x), std_y(n, x)}; }
double std_dj(int n, double x) { return 0.5 * (std_j(n - 1, x) - std_j(n + 1, x)); }
cplx std_dh(int n, double x) { return 0.5 * (std_h(n - 1, x) - std_h(n + 1, x)); }

NanowireSpec wire(double r)
{
    NanowireSpec s;
    s.radius = r;
    return s;
}

} // namespace

TEST_CASE("Bessel J and Y agree with the standard library")
{
    for (double x : {0.05, 0.3, 1.0, 4.7, 12.0, 24.9, 25.1, 40.0, 80.0}) {
        std::vector<double> j, y;
        bessel_jy(10, x, j, y);
        for (int n = 0; n <= 10; ++n) {
            const double jr = std::cyl_bessel_j(n, x), yr = std::cyl_neumann(n, x);
            CHECK(std::abs(j[n] - jr) <= 1e-12 * std::max(1.0, std::abs(jr)));
            CHECK(std::abs(y[n] - yr) <= 1e-11 * std::max(1.0, std::abs(yr)));
        }
    }
}

TEST_CASE("cylinder functions handle negative orders and derivatives")
{
    const double x = 2.3;
    const auto cf = cylinder_functions(6, x);
    for (int l = -6; l <= 6; ++l) {
        CHECK(cf.J(l) == doctest::Approx(std_j(l, x)).epsilon(1e-12));
        CHECK(std::abs(cf.dJ(l) - std_dj(l, x)) < 1e-12);
        CHECK(std::abs(cf.H(l) - std_h(l, x)) < 1e-11 * std::abs(std_h(l, x)));
        CHECK(std::abs(cf.dH(l) - std_dh(l, x)) < 1e-11 * std::abs(std_dh(l, x)));
    }
}

TEST_CASE("Mie coefficients match the boundary-condition solution")
{
    const double lam = 770e-9, k = 2 * pi / lam, n = 2.61;
    for (double r : {10e-9, 65e-9, 170e-9, 250e-9}) {
        const auto c = mie_coefficients(wire(r), lam, 6);
        const double x = k * r;
        for (int l = -6; l <= 6; ++l) {
            const double jn = std_j(l, n * x), djn = std_dj(l, n * x);
            const cplx b = (jn * std_dj(l, x) - n * djn * std_j(l, x)) / (jn * std_dh(l, x) - n * djn * std_h(l, x));
            const cplx a = (n * jn * std_dj(l, x) - djn * std_j(l, x)) / (n * jn * std_dh(l, x) - djn * std_h(l, x));
            CHECK(std::abs(c.b_par[l + 6] - b) < 1e-10);
            CHECK(std::abs(c.a_perp[l + 6] - a) < 1e-10);
        }
        // even in l
        for (int l = 1; l <= 6; ++l) CHECK(std::abs(c.b_par[6 + l] - c.b_par[6 - l]) < 1e-14);
    }
}

TEST_CASE("zero radius gives no scattering")
{
    const auto c = mie_coefficients(wire(0.0), 770e-9);
    CHECK(total_cross_section(c, Polarization::parallel) == 0.0);
    CHECK(total_cross_section(c, Polarization::perpendicular) == 0.0);
}

TEST_CASE("invalid Mie inputs are rejected")
{
    CHECK_THROWS_AS(mie_coefficients(wire(-1e-9), 770e-9), std::invalid_argument);
    NanowireSpec s = wire(50e-9);
    s.refractive_index = 0.5;
    CHECK_THROWS_AS(mie_coefficients(s, 770e-9), std::invalid_argument);
    CHECK_THROWS_AS(mie_coefficients(wire(50e-9), 0.0), std::invalid_argument);
    const auto c = mie_coefficients(wire(100e-9), 770e-9);
    CHECK_THROWS_AS(scattered_field(c, Polarization::parallel, 0.0, 50e-9, 0.3), std::invalid_argument);
}

TEST_CASE("parallel polarisation keeps the field along the wire axis")
{
    const auto c = mie_coefficients(wire(150e-9), 770e-9);
    for (double phi : {0.0, 0.7, 2.0, 4.0}) {
        for (double r : {50e-9, 200e-9, 1e-6}) {
            const auto s = total_field(c, Polarization::parallel, 0.3, r, phi);
            CHECK(std::abs(s.E[0]) == 0.0);
            CHECK(std::abs(s.E[1]) == 0.0);
            CHECK(std::abs(s.B[2]) == 0.0);
        }
    }
}

TEST_CASE("tangential fields are continuous at the surface")
{
    const double R = 120e-9;
    const auto c = mie_coefficients(wire(R), 770e-9, 10);
    for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
        for (double phi : {0.2, 1.9, 3.5}) {
            const auto in = cylinder_field(c, pol, 0.0, R, phi, FieldPart::internal);
            auto out = cylinder_field(c, pol, 0.0, R, phi, FieldPart::incident);
            const auto sc = cylinder_field(c, pol, 0.0, R, phi, FieldPart::scattered);
            for (int i = 0; i < 3; ++i) out.E[i] += sc.E[i];
            // E_phi and E_y are tangential
            const double scale = std::abs(out.E[1]) + std::abs(out.E[2]) + 1.0;
            CHECK(std::abs(in.E[1] - out.E[1]) < 1e-10 * scale);
            CHECK(std::abs(in.E[2] - out.E[2]) < 1e-10 * scale);
        }
    }
}

TEST_CASE("a thin wire scatters almost isotropically in parallel polarisation")
{
    const auto c = mie_coefficients(wire(10e-9), 770e-9);
    const auto d = emission_diagram(c, Polarization::parallel, 0.0, 100e-6);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 72; ++i) {
        const double v = d(2 * pi * i / 72);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK((hi - lo) / hi < 0.05);
}

TEST_CASE("emission diagram integrates to the total cross-section")
{
    for (double r : {30e-9, 65e-9, 200e-9}) {
        const auto c = mie_coefficients(wire(r), 770e-9);
        for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
            const auto d = emission_diagram(c, pol, 0.0, 20e-6);
            const double total = gauss_legendre(d, 0.0, 2 * pi, 200);
            CHECK(total == doctest::Approx(total_cross_section(c, pol)).epsilon(1e-9));
            const auto x = cross_sections_1d(c, pol, std::asin(0.15));
            CHECK(x.sigma_R + x.sigma_T + x.sigma_scat == doctest::Approx(total).epsilon(1e-9));
        }
    }
}

TEST_CASE("Mie flux balance for a lossless wire")
{
    for (double r : {10e-9, 65e-9, 150e-9, 250e-9})
        for (auto pol : {Polarization::parallel, Polarization::perpendicular})
            CHECK(mie_flux_imbalance(wire(r), 770e-9, pol) < 1e-6);
}

TEST_CASE("truncation at l_max = 5 is converged for the radii used")
{
    CHECK(truncation_change(wire(250e-9), 770e-9, 5) < 1e-6);
}

TEST_CASE("force denominators are the Mie denominators")
{
    const double lam = 770e-9, k = 2 * pi / lam, n = 2.61;
    for (double r : {20e-9, 100e-9, 240e-9}) {
        const double x = k * r;
        const auto kp = force_kernels(wire(r), lam, Polarization::parallel);
        const auto ks = force_kernels(wire(r), lam, Polarization::perpendicular);
        REQUIRE(kp.D.size() == 7);
        for (int l = 0; l <= 6; ++l) {
            const double jn = std_j(l, n * x), djn = std_dj(l, n * x);
            const cplx den_b = jn * std_dh(l, x) - n * djn * std_h(l, x);
            const cplx den_a = n * jn * std_dh(l, x) - djn * std_h(l, x);
            CHECK(std::abs(kp.D[l] - k * den_b) <= 1e-10 * std::abs(k * den_b));
            CHECK(std::abs(ks.D[l] + k * den_a) <= 1e-10 * std::abs(k * den_a));
        }
    }
}
