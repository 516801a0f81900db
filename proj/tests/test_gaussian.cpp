#include "nimcav/gaussian.hpp"
#include "nimcav/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nimcav;

TEST_CASE("mode constants follow the stable-resonator formulas")
{
    const auto m = mode_geometry(12e-6, 28e-6, 770e-9);
    const double g = 1.0 - 12.0 / 28.0;
    const double zr = 6e-6 * std::sqrt((1 + g) / (1 - g));
    CHECK(m.rayleigh_length == doctest::Approx(zr).epsilon(1e-14));
    CHECK(m.waist == doctest::Approx(std::sqrt(zr * 770e-9 / pi)).epsilon(1e-14));
    CHECK(m.rayleigh_length * 1e6 == doctest::Approx(11.489).epsilon(1e-4));

    // short-cavity limit: (L/2) sqrt(2 Rc / L - 1)
    const double L = 1e-9, Rc = 28e-6;
    CHECK(mode_geometry(L, Rc, 770e-9).rayleigh_length ==
          doctest::Approx(0.5 * L * std::sqrt(2 * Rc / L - 1)).epsilon(1e-6));

    CHECK_THROWS(mode_geometry(60e-6, 28e-6, 770e-9));
    CHECK_THROWS(mode_geometry(-1e-6, 28e-6, 770e-9));
}

TEST_CASE("beam radius, Gouy phase and curvature")
{
    const auto m = mode_geometry(CavityGeometry{});
    CHECK(m.w(0.0) == m.waist);
    CHECK(m.inv_curvature(0.0) == 0.0);
    CHECK(std::isinf(m.curvature(0.0)));
    for (double z : {1e-7, 2e-6, 6.22e-6, 20e-6}) {
        CHECK(m.gouy(-z) == -m.gouy(z));
        CHECK(m.w(z) == doctest::Approx(m.waist * std::sqrt(1 + std::pow(z / m.rayleigh_length, 2))).epsilon(1e-14));
        CHECK(m.curvature(z) == doctest::Approx(z + m.rayleigh_length * m.rayleigh_length / z).epsilon(1e-14));
    }
    CHECK(m.gouy(m.rayleigh_length) == doctest::Approx(pi / 4).epsilon(1e-14));
    // beam radius on the mirrors, well inside the 12 um caps
    CHECK(m.w(0.5 * 12.44e-6) * 1e6 == doctest::Approx(1.915).epsilon(1e-3));
}

TEST_CASE("fundamental mode is normalised on transverse planes")
{
    const auto m = mode_geometry(CavityGeometry{});
    CHECK(std::abs(hg_scalar(m, 0, 0, 0, 0, 0, 1)) == doctest::Approx(std::sqrt(2 / pi) / m.waist).epsilon(1e-14));
    for (auto [nx, ny] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{2, 1}}) {
        for (double z : {0.0, 6.22e-6}) {
            const double a = 5 * m.w(z);
            const double norm = gauss_legendre([&](double x) {
                return gauss_legendre([&](double y) { return std::norm(hg_scalar(m, nx, ny, x, y, z, 1)); }, -a, a, 80);
            }, -a, a, 80);
            CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("counter-propagating modes are complex conjugates")
{
    const auto m = mode_geometry(CavityGeometry{});
    const cplx f = hg_scalar(m, 0, 0, 0.3e-6, -0.2e-6, 2e-6, 1);
    const cplx b = hg_scalar(m, 0, 0, 0.3e-6, -0.2e-6, 2e-6, -1);
    CHECK(std::abs(f - std::conj(b)) == 0.0);
}

TEST_CASE("propagation matrices compose")
{
    const auto m = mode_geometry(CavityGeometry{});
    const auto a = propagation_matrix(-5e-6, 1e-6, m);
    const auto b = propagation_matrix(1e-6, 6e-6, m);
    const auto c = propagation_matrix(-5e-6, 6e-6, m);
    const auto ab = b * a;
    CHECK(std::abs(ab.m11 - c.m11) < 1e-12);
    CHECK(std::abs(ab.m22 - c.m22) < 1e-12);
    CHECK(std::abs(ab.m12) < 1e-15);
    CHECK(std::abs(c.det() - 1.0) < 1e-12);
    // forward wave picks up phi0(z2) - phi0(z1)
    CHECK(std::arg(c.m11 / std::exp(I * (m.phase0(6e-6) - m.phase0(-5e-6)))) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mirror matrices conserve energy")
{
    for (int eta : {-1, 1}) {
        const auto mm = mirror_matrix(0.994, eta);
        // lossless mirror: |det| = 1 for the forward/backward transfer matrix of a beam splitter
        CHECK(std::abs(std::abs(mm.det()) - 1.0) < 1e-12);
    }
}

TEST_CASE("plane-wave expansion reconstructs the transverse field")
{
    const auto m = mode_geometry(CavityGeometry{});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-m.waist, m.waist), uz(-m.rayleigh_length, m.rayleigh_length);
    for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
        const auto comps = plane_wave_expansion_3d(m, pol);
        CHECK(comps.size() == 81);
        const double scale = std::abs(hg_scalar(m, 0, 0, 0, 0, 0, 1));
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const Vec3 p{ux(rng), ux(rng), uz(rng)};
            const auto e = reconstruct_field(comps, p);
            const auto ref = hg_field(m, 0, 0, p, 1, pol);
            worst = std::max(worst, std::hypot(std::abs(e[0] - ref[0]), std::abs(e[1] - ref[1])) / scale);
        }
        CHECK(worst < 1e-2);
        for (const auto& c : comps) {
            const auto& kv = c.wavevector;
            const auto& e = c.polarization;
            CHECK(std::abs(kv[0] * e[0] + kv[1] * e[1] + kv[2] * e[2]) < 1e-6 * m.k());
            CHECK(std::hypot(kv[0], kv[1], kv[2]) == doctest::Approx(m.k()).epsilon(1e-12));
        }
    }
}
