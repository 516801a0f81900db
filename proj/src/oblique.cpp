#include "nimcav/oblique.hpp"
#include "nimcav/bessel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace nimcav {

namespace {

cplx i_pow(int l)
{
    switch (((l % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

} // namespace

ObliqueScattering oblique_scattering(const NanowireSpec& spec, double wavelength, const Vec3& kvec,
                                     const CVec3& e_vec, int l_max)
{
    ObliqueScattering s;
    s.l_max = l_max;
    s.k = 2.0 * pi / wavelength;
    s.beta = kvec[1];
    const double kt2 = kvec[0] * kvec[0] + kvec[2] * kvec[2];
    if (!(kt2 > 0.0)) throw std::invalid_argument("oblique_scattering: wave travels along the wire axis");
    s.gamma = std::sqrt(kt2);
    const std::size_t size = 2 * l_max + 1;
    s.ce.assign(size, 0.0);
    s.ch.assign(size, 0.0);
    s.pe.assign(size, 0.0);
    s.ph.assign(size, 0.0);
    if (spec.radius == 0.0) return s;

    const double k = s.k, beta = s.beta, g0 = s.gamma;
    const double m2 = spec.refractive_index * spec.refractive_index;
    const double g1 = std::sqrt(m2 * k * k - beta * beta);
    const double a = spec.radius;
    const double theta_k = std::atan2(kvec[0], kvec[2]);

    // longitudinal amplitudes of the incident wave; Z0 H = k x E / k
    const cplx ey0 = e_vec[1];
    const cplx hy0 = (kvec[2] * e_vec[0] - kvec[0] * e_vec[2]) / k;

    const auto out = cylinder_functions(l_max, g0 * a);
    const auto in = cylinder_functions(l_max, g1 * a, false);
    const cplx s0 = I / (g0 * g0), s1 = I / (g1 * g1);

    for (int l = -l_max; l <= l_max; ++l) {
        const cplx ph = i_pow(l) * std::exp(-I * double(l) * theta_k);
        const cplx e = ey0 * ph, h = hy0 * ph;
        const double jo = out.J(l), djo = out.dJ(l), ji = in.J(l), dji = in.dJ(l);
        const cplx ho = out.H(l), dho = out.dH(l);
        const cplx il_a = I * double(l) / a;

        Eigen::Matrix4cd A;
        Eigen::Vector4cd b;
        // unknowns (c, d, p, q): scattered E_y, Zh_y; internal E_y, Zh_y
        A << ho, 0.0, -ji, 0.0,
             0.0, ho, 0.0, -ji,
             s0 * beta * il_a * ho, -s0 * k * g0 * dho, -s1 * beta * il_a * ji, s1 * k * g1 * dji,
             s0 * k * g0 * dho, s0 * beta * il_a * ho, -s1 * k * m2 * g1 * dji, -s1 * beta * il_a * ji;
        b << -e * jo,
             -h * jo,
             -s0 * (beta * il_a * e * jo - k * g0 * h * djo),
             -s0 * (beta * il_a * h * jo + k * g0 * e * djo);
        const Eigen::Vector4cd x = A.partialPivLu().solve(b);
        const std::size_t i = l + l_max;
        s.ce[i] = x(0);
        s.ch[i] = x(1);
        s.pe[i] = x(2);
        s.ph[i] = x(3);
        for (int q = 0; q < 4; ++q)
            if (!std::isfinite(x(q).real()) || !std::isfinite(x(q).imag()))
                throw NumericalError("oblique_scattering: singular boundary system");
    }
    return s;
}

void accumulate(ObliqueScattering& into, const ObliqueScattering& w)
{
    if (into.ce.empty()) {
        into = w;
        return;
    }
    if (into.l_max != w.l_max || into.beta != w.beta)
        throw std::invalid_argument("accumulate: waves must share l_max and k_y");
    for (std::size_t i = 0; i < into.ce.size(); ++i) {
        into.ce[i] += w.ce[i];
        into.ch[i] += w.ch[i];
        into.pe[i] += w.pe[i];
        into.ph[i] += w.ph[i];
    }
}

namespace {

// E (magnetic = false) or c B (magnetic = true), vacuum outside the wire.
CVec3 evaluate(const ObliqueScattering& s, double x0, double z0, const Vec3& p, bool magnetic)
{
    const double dx = p[0] - x0, dz = p[2] - z0;
    const double rho = std::hypot(dx, dz);
    if (rho == 0.0) throw std::invalid_argument("oblique field: point on the wire axis");
    const double th = std::atan2(dx, dz);
    const double x = s.gamma * rho;
    const auto cf = cylinder_functions(s.l_max, x);

    cplx ey = 0.0, hy = 0.0, dey = 0.0, dhy = 0.0, tey = 0.0, thy = 0.0;
    const cplx step = std::exp(I * th);
    cplx e = std::exp(-I * double(s.l_max) * th);
    for (int l = -s.l_max; l <= s.l_max; ++l) {
        const std::size_t i = l + s.l_max;
        const cplx h = cf.H(l) * e, dh = cf.dH(l) * e;
        ey += s.ce[i] * h;
        hy += s.ch[i] * h;
        dey += s.ce[i] * dh;
        dhy += s.ch[i] * dh;
        tey += s.ce[i] * h * (I * double(l));
        thy += s.ch[i] * h * (I * double(l));
        e *= step;
    }
    // d/drho = gamma * d/dx ; d/dtheta -> i l
    const cplx f = I / (s.gamma * s.gamma);
    cplx er, et, ay;
    if (!magnetic) {
        er = f * (s.beta * s.gamma * dey + s.k / rho * thy);
        et = f * (s.beta / rho * tey - s.k * s.gamma * dhy);
        ay = ey;
    } else {
        er = f * (s.beta * s.gamma * dhy - s.k / rho * tey);
        et = f * (s.beta / rho * thy + s.k * s.gamma * dey);
        ay = hy;
    }
    const cplx yph = std::exp(I * s.beta * p[1]);
    const double c = std::cos(th), sn = std::sin(th);
    return {(er * sn + et * c) * yph, ay * yph, (er * c - et * sn) * yph};
}

} // namespace

CVec3 oblique_scattered_field(const ObliqueScattering& s, double x0, double z0, const Vec3& p)
{
    return evaluate(s, x0, z0, p, false);
}

CVec3 oblique_scattered_cb(const ObliqueScattering& s, double x0, double z0, const Vec3& p)
{
    return evaluate(s, x0, z0, p, true);
}

} // namespace nimcav
