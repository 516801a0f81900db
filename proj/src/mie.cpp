#include "nimcav/mie.hpp"
#include "nimcav/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace nimcav {

Polarization parse_polarization(const std::string& s)
{
    if (s == "par" || s == "parallel") return Polarization::parallel;
    if (s == "perp" || s == "perpendicular") return Polarization::perpendicular;
    throw std::invalid_argument("unknown polarization '" + s + "' (expected par or perp)");
}

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

cplx minus_i_pow(int l)
{
    switch (((l % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
    }
}

} // namespace

MieCoefficients mie_coefficients(const NanowireSpec& spec, double wavelength, int l_max)
{
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
        throw std::invalid_argument("mie_coefficients: wavelength must be positive");
    if (l_max < 0) throw std::invalid_argument("mie_coefficients: l_max must be >= 0");
    if (!(spec.radius >= 0.0) || !std::isfinite(spec.radius))
        throw std::invalid_argument("mie_coefficients: radius must be >= 0");
    if (!(spec.refractive_index >= 1.0) || !std::isfinite(spec.refractive_index))
        throw std::invalid_argument("mie_coefficients: refractive index must be >= 1");

    MieCoefficients c;
    c.l_max = l_max;
    c.wavelength = wavelength;
    c.spec = spec;
    const std::size_t size = 2 * l_max + 1;
    c.b_par.assign(size, 0.0);
    c.a_perp.assign(size, 0.0);
    c.f_par.assign(size, 0.0);
    c.g_perp.assign(size, 0.0);
    if (spec.radius == 0.0) return c;

    const double n = spec.refractive_index;
    const double rho = c.k() * spec.radius;
    const auto out = cylinder_functions(l_max, rho);
    const auto in = cylinder_functions(l_max, n * rho, false);
    const cplx wr = 2.0 * I / (pi * rho); // J H' - H J'

    for (int l = -l_max; l <= l_max; ++l) {
        const double jn = in.J(l), djn = in.dJ(l);
        const double j = out.J(l), dj = out.dJ(l);
        const cplx h = out.H(l), dh = out.dH(l);
        const cplx den_b = jn * dh - n * djn * h;
        const cplx den_a = n * jn * dh - djn * h;
        const std::size_t i = l + l_max;
        c.b_par[i] = (jn * dj - n * djn * j) / den_b;
        c.a_perp[i] = (n * jn * dj - djn * j) / den_a;
        // Wronskian forms of (J - b H)/(n J(n rho)) and (J - a H)/(n^2 J(n rho))
        c.f_par[i] = wr / (n * den_b);
        c.g_perp[i] = wr / (n * den_a);
        if (!finite(c.b_par[i]) || !finite(c.a_perp[i]) || !finite(c.f_par[i]) || !finite(c.g_perp[i]))
            throw NumericalError("mie_coefficients: non-finite coefficient");
    }
    return c;
}

double total_cross_section(const MieCoefficients& c, Polarization pol)
{
    double s = std::norm(c.scat(pol, 0));
    for (int l = 1; l <= c.l_max; ++l) s += 2.0 * std::norm(c.scat(pol, l));
    return 4.0 / c.k() * s;
}

double truncation_change(const NanowireSpec& spec, double wavelength, int l_max)
{
    const auto lo = mie_coefficients(spec, wavelength, l_max);
    const auto hi = mie_coefficients(spec, wavelength, l_max + 3);
    double worst = 0.0;
    for (auto p : {Polarization::parallel, Polarization::perpendicular}) {
        const double a = total_cross_section(lo, p), b = total_cross_section(hi, p);
        if (b > 0.0) worst = std::max(worst, std::abs(b - a) / b);
    }
    return worst;
}

Vec3 radial_unit(double phi) { return {std::sin(phi), 0.0, -std::cos(phi)}; }
Vec3 azimuthal_unit(double phi) { return {std::cos(phi), 0.0, std::sin(phi)}; }
Vec3 incidence_direction(double phi_i) { return {-std::sin(phi_i), 0.0, std::cos(phi_i)}; }

CVec3 to_cartesian(const CVec3& v, double phi)
{
    const Vec3 er = radial_unit(phi), ep = azimuthal_unit(phi);
    return {v[0] * er[0] + v[1] * ep[0], v[2], v[0] * er[2] + v[1] * ep[2]};
}

CylindricalFieldSample cylinder_field(const MieCoefficients& c, Polarization pol, double phi_i,
                                      double r, double phi, FieldPart part)
{
    if (!(r >= 0.0)) throw std::invalid_argument("cylinder_field: r must be >= 0");
    if (part == FieldPart::scattered && r < c.spec.radius * (1.0 - 1e-12))
        throw std::invalid_argument("cylinder_field: scattered field requested inside the wire");

    CylindricalFieldSample s;
    s.r = r;
    s.phi = phi;
    const double n = c.spec.refractive_index;
    const double k = c.k();
    const double kap = part == FieldPart::internal ? n * k : k;
    const double x = kap * r;
    const int L = c.l_max;

    // Sums S_M = sum_l w_l M_l / kap and S_N = sum_l w_l N_l / kap with w_l = E0 (-i)^l e^{-il phi_i} coef_l / k
    // so that M = kap (...), N = kap (...).
    cplx mr = 0.0, mphi = 0.0, ny = 0.0;
    if (part == FieldPart::scattered) {
        if (r == 0.0) throw std::invalid_argument("cylinder_field: r = 0");
        const auto cf = cylinder_functions(L, x);
        for (int l = -L; l <= L; ++l) {
            const cplx w = minus_i_pow(l) * std::exp(I * double(l) * (phi - phi_i)) * c.scat(pol, l);
            mr += w * I * double(l) * cf.H(l) / x;
            mphi += -w * cf.dH(l);
            ny += -w * cf.H(l);
        }
    } else {
        const auto cf = cylinder_functions(L, x, false);
        for (int l = -L; l <= L; ++l) {
            cplx w = minus_i_pow(l) * std::exp(I * double(l) * (phi - phi_i));
            if (part == FieldPart::internal) w *= c.inner(pol, l);
            // J_l(x)/x -> delta_{|l|,1}/2 as x -> 0
            const double jx = x > 0.0 ? cf.J(l) / x : (std::abs(l) == 1 ? 0.5 * (l > 0 ? 1.0 : -1.0) : 0.0);
            mr += w * I * double(l) * jx;
            mphi += -w * cf.dJ(l);
            ny += -w * cf.J(l);
        }
    }
    // scale: E_l/k * kap
    const double scale = kap / k;
    mr *= scale;
    mphi *= scale;
    ny *= scale;
    const double bn = part == FieldPart::internal ? n : 1.0;

    if (pol == Polarization::parallel) {
        // E = sgn sum E_l coef N, B = -(i/c) sgn' sum E_l coef M
        const double se = part == FieldPart::scattered ? -1.0 : 1.0;
        s.E = {0.0, 0.0, se * ny};
        const cplx sb = part == FieldPart::scattered ? I / c_light : -I * bn / c_light;
        s.B = {sb * mr, sb * mphi, 0.0};
    } else {
        const cplx se = part == FieldPart::scattered ? I : -I;
        s.E = {se * mr, se * mphi, 0.0};
        const double sb = part == FieldPart::scattered ? 1.0 / c_light : -bn / c_light;
        s.B = {0.0, 0.0, sb * ny};
    }
    return s;
}

CylindricalFieldSample total_field(const MieCoefficients& c, Polarization pol, double phi_i,
                                   double r, double phi)
{
    if (r < c.spec.radius) return cylinder_field(c, pol, phi_i, r, phi, FieldPart::internal);
    auto s = cylinder_field(c, pol, phi_i, r, phi, FieldPart::incident);
    const auto t = cylinder_field(c, pol, phi_i, r, phi, FieldPart::scattered);
    for (int i = 0; i < 3; ++i) {
        s.E[i] += t.E[i];
        s.B[i] += t.B[i];
    }
    return s;
}

std::function<double(double)> emission_diagram(const MieCoefficients& c, Polarization pol,
                                               double phi_i, double r)
{
    if (!(r > 0.0)) throw std::invalid_argument("emission_diagram: r must be positive");
    const int L = c.l_max;
    const auto cf = cylinder_functions(L, c.k() * r);
    std::vector<cplx> sh(2 * L + 1), sdh(2 * L + 1);
    for (int l = -L; l <= L; ++l) {
        sh[l + L] = c.scat(pol, l) * cf.H(l);
        sdh[l + L] = c.scat(pol, l) * cf.dH(l);
    }
    return [sh, sdh, L, r, phi_i](double phi) {
        cplx u = 0.0, v = 0.0;
        const double psi = phi - phi_i - 0.5 * pi;
        for (int l = -L; l <= L; ++l) {
            const cplx e = std::exp(I * double(l) * psi);
            u += sh[l + L] * e;
            v += sdh[l + L] * e;
        }
        return r * std::real(I * u * std::conj(v));
    };
}

CrossSections1D cross_sections_1d(const MieCoefficients& c, Polarization pol,
                                  double collection_half_angle, double r)
{
    if (!(collection_half_angle > 0.0 && collection_half_angle < 0.5 * pi))
        throw std::invalid_argument("cross_sections_1d: collection half angle must be in (0, pi/2)");
    const auto d = emission_diagram(c, pol, 0.0, r);
    const double t = collection_half_angle;
    CrossSections1D x;
    x.collection_half_angle = t;
    x.sigma_R = gauss_legendre(d, -t, t, 64);
    x.sigma_T = gauss_legendre(d, pi - t, pi + t, 64);
    x.sigma_scat = gauss_legendre(d, t, pi - t, 96) + gauss_legendre(d, pi + t, 2.0 * pi - t, 96);
    return x;
}

} // namespace nimcav
