#pragma once

#include "nimcav/model.hpp"

#include <vector>

namespace nimcav {

// Plane wave E = E_vec exp(i k.(r - r0)) scattered by an infinite cylinder along y
// centred at r0, with arbitrary (propagating) k. Solved order by order from the
// continuity of E_y, E_theta, H_y, H_theta on the surface, using the longitudinal
// components E_y and Zh = Z0 H_y as potentials. Internal frame is the direct
// cylindrical frame z - z0 = rho cos(theta), x - x0 = rho sin(theta).
struct ObliqueScattering {
    int l_max = 5;
    double k = 0.0;
    double beta = 0.0;    // k_y
    double gamma = 0.0;   // transverse wavenumber outside
    std::vector<cplx> ce, ch;   // scattered E_y and Z0 H_y coefficients, l = -l_max..l_max
    std::vector<cplx> pe, ph;   // internal coefficients
};

ObliqueScattering oblique_scattering(const NanowireSpec& spec, double wavelength, const Vec3& kvec,
                                     const CVec3& e_vec, int l_max = 5);

// Add the coefficient sets of waves sharing the same k_y (the fields are linear in them).
void accumulate(ObliqueScattering& into, const ObliqueScattering& w);

// Scattered E (Cartesian) at point p for a wire at (x0, z0); y-phase exp(i beta y).
CVec3 oblique_scattered_field(const ObliqueScattering& s, double x0, double z0, const Vec3& p);
// Same for the magnetic field, returned as c B.
CVec3 oblique_scattered_cb(const ObliqueScattering& s, double x0, double z0, const Vec3& p);

} // namespace nimcav
