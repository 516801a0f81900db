#include "nimcav/gaussian.hpp"

#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/hermite.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nimcav {

double mirror_finesse(const CavityGeometry& cav)
{
    const double r = std::sqrt(std::sqrt(cav.reflectivity_left * cav.reflectivity_right));
    return pi * r / (1.0 - r * r);
}

double reflectivity_for_finesse(double finesse)
{
    if (!(finesse > 0.0)) throw std::invalid_argument("reflectivity_for_finesse: finesse must be positive");
    // pi r / (1 - r^2) = F  ->  F r^2 + pi r - F = 0
    const double r = (-pi + std::sqrt(pi * pi + 4.0 * finesse * finesse)) / (2.0 * finesse);
    return r * r;
}

double ModeGeometry::w(double z) const
{
    const double u = z / rayleigh_length;
    return waist * std::sqrt(1.0 + u * u);
}

double ModeGeometry::gouy(double z) const { return std::atan(z / rayleigh_length); }

double ModeGeometry::curvature(double z) const
{
    if (z == 0.0) return std::numeric_limits<double>::infinity();
    return rayleigh_length * rayleigh_length / z + z;
}

double ModeGeometry::inv_curvature(double z) const
{
    return z / (z * z + rayleigh_length * rayleigh_length);
}

double ModeGeometry::phase0(double z, int nx, int ny) const
{
    return k() * z - (1.0 + nx + ny) * gouy(z);
}

ModeGeometry mode_geometry(double length, double mirror_curvature, double wavelength)
{
    if (!(length > 0.0) || !(mirror_curvature > 0.0) || !(wavelength > 0.0))
        throw std::invalid_argument("mode_geometry: lengths must be positive");
    const double g = 1.0 - length / mirror_curvature;
    if (!(g > 0.0 && g < 1.0)) throw std::domain_error("mode_geometry: unstable cavity (g outside (0, 1))");
    ModeGeometry m;
    m.wavelength = wavelength;
    m.rayleigh_length = 0.5 * length * std::sqrt((1.0 + g) / (1.0 - g));
    m.waist = std::sqrt(m.rayleigh_length * wavelength / pi);
    return m;
}

ModeGeometry mode_geometry(const CavityGeometry& cav)
{
    return mode_geometry(cav.length, cav.mirror_curvature, cav.wavelength);
}

Vec3 mode_polarization(Polarization p)
{
    return p == Polarization::parallel ? Vec3{0.0, -1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
}

cplx hg_scalar(const ModeGeometry& m, int nx, int ny, double x, double y, double z, int direction)
{
    if (nx < 0 || ny < 0) throw std::invalid_argument("hg_scalar: negative mode index");
    const double w = m.w(z);
    const double r2 = x * x + y * y;
    const double norm = std::sqrt(2.0 / (pi * m.waist * m.waist)) /
                        std::sqrt(std::ldexp(1.0, nx + ny) * boost::math::factorial<double>(nx) *
                                  boost::math::factorial<double>(ny));
    double amp = norm * m.waist / w * std::exp(-r2 / (w * w));
    if (nx > 0) amp *= boost::math::hermite(nx, std::sqrt(2.0) * x / w);
    if (ny > 0) amp *= boost::math::hermite(ny, std::sqrt(2.0) * y / w);
    const double phase = m.phase0(z, nx, ny) + 0.5 * m.k() * r2 * m.inv_curvature(z);
    return amp * std::exp(I * (direction >= 0 ? phase : -phase));
}

CVec3 hg_field(const ModeGeometry& m, int nx, int ny, const Vec3& point, int direction, Polarization p)
{
    const cplx s = hg_scalar(m, nx, ny, point[0], point[1], point[2], direction);
    const Vec3 e = mode_polarization(p);
    return {s * e[0], s * e[1], s * e[2]};
}

TransferMatrix2 phase_matrix(double dphi)
{
    return {std::exp(I * dphi), 0.0, 0.0, std::exp(-I * dphi)};
}

TransferMatrix2 propagation_matrix(double z1, double z2, const ModeGeometry& m, int nx, int ny)
{
    return phase_matrix(m.phase0(z2, nx, ny) - m.phase0(z1, nx, ny));
}

TransferMatrix2 mirror_matrix(double reflectivity, int eta)
{
    if (!(reflectivity >= 0.0 && reflectivity < 1.0))
        throw std::invalid_argument("mirror_matrix: reflectivity must be in [0, 1)");
    if (eta != 1 && eta != -1) throw std::invalid_argument("mirror_matrix: eta must be +1 or -1");
    const double r = std::sqrt(reflectivity), t = std::sqrt(1.0 - reflectivity);
    return {1.0 / t, eta * r / t, eta * r / t, 1.0 / t};
}

namespace {

void check_sampling(int n_terms, double delta_k, double k, int dims)
{
    if (n_terms < 1 || n_terms % 2 == 0) throw std::invalid_argument("plane wave expansion: n_terms must be odd");
    if (!(delta_k > 0.0)) throw std::invalid_argument("plane wave expansion: delta_k must be positive");
    const double kmax = (n_terms / 2) * delta_k;
    if (dims * kmax * kmax >= k * k)
        throw std::invalid_argument("plane wave expansion: sampling beyond the propagating shell");
}

} // namespace

std::vector<PlaneWaveComponent> plane_wave_expansion_3d(const ModeGeometry& m, Polarization p,
                                                        int n_terms, double delta_k)
{
    const double k = m.k();
    check_sampling(n_terms, delta_k, k, 2);
    const double w0 = m.waist;
    const double pref = w0 / std::pow(2.0 * pi, 1.5) * delta_k * delta_k;
    const int h = n_terms / 2;
    std::vector<PlaneWaveComponent> out;
    out.reserve(n_terms * n_terms);
    for (int jx = -h; jx <= h; ++jx) {
        for (int jy = -h; jy <= h; ++jy) {
            const double kx = jx * delta_k, ky = jy * delta_k;
            const double kz = std::sqrt(k * k - kx * kx - ky * ky);
            PlaneWaveComponent c;
            c.amplitude = pref * std::exp(-w0 * w0 * (kx * kx + ky * ky) / 4.0);
            c.wavevector = {kx, ky, kz};
            // k = k(-sin xi sin phi, -cos xi, sin xi cos phi)
            const double cx = -ky / k;
            const double sx = std::sqrt(1.0 - cx * cx);
            c.xi = std::acos(cx);
            c.phi = std::atan2(-kx, kz);
            const double sp = std::sin(c.phi), cp = std::cos(c.phi);
            if (p == Polarization::parallel)
                c.polarization = {cx * sp, -sx, -cx * cp};
            else
                c.polarization = {cp, 0.0, sp};
            c.index = jx;
            out.push_back(c);
        }
    }
    return out;
}

std::vector<PlaneWaveComponent> plane_wave_expansion_2d(const ModeGeometry& m, Polarization p,
                                                        int direction, int n_terms, double delta_k)
{
    if (direction != 1 && direction != -1) throw std::invalid_argument("plane_wave_expansion_2d: direction must be +1 or -1");
    const double k = m.k();
    check_sampling(n_terms, delta_k, k, 1);
    const double w0 = m.waist;
    const double pref = std::sqrt(w0) / std::pow(2.0 * pi, 0.75) * delta_k;
    const int h = n_terms / 2;
    std::vector<PlaneWaveComponent> out;
    out.reserve(n_terms);
    for (int j = -h; j <= h; ++j) {
        const double kx = direction * j * delta_k;
        const double kz = std::sqrt(k * k - kx * kx);
        PlaneWaveComponent c;
        c.amplitude = pref * std::exp(-std::pow(0.5 * w0 * kx, 2));
        c.wavevector = {kx, 0.0, direction * kz};
        c.phi = direction > 0 ? -std::atan(kx / kz) : pi + std::atan(kx / kz);
        c.xi = 0.5 * pi;
        if (p == Polarization::parallel)
            c.polarization = {0.0, -1.0, 0.0};
        else
            c.polarization = {direction * std::cos(c.phi), 0.0, direction * std::sin(c.phi)};
        c.index = j;
        out.push_back(c);
    }
    return out;
}

CVec3 reconstruct_field(const std::vector<PlaneWaveComponent>& comps, const Vec3& point)
{
    CVec3 e{};
    for (const auto& c : comps) {
        const double ph = c.wavevector[0] * point[0] + c.wavevector[1] * point[1] + c.wavevector[2] * point[2];
        const cplx a = c.amplitude * std::exp(I * ph);
        for (int i = 0; i < 3; ++i) e[i] += a * c.polarization[i];
    }
    return e;
}

double y_envelope(const ModeGeometry& m, double y)
{
    const double w = m.waist;
    return std::pow(2.0 / (pi * w * w), 0.25) * std::exp(-y * y / (w * w));
}

} // namespace nimcav
