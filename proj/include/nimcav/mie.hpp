#pragma once

#include "nimcav/bessel.hpp"
#include "nimcav/model.hpp"

#include <functional>
#include <vector>

namespace nimcav {

// Scattering (b_l / a_l) and internal (f_l / g_l) coefficients for a
// normally incident plane wave, l in [-l_max, l_max].
struct MieCoefficients {
    int l_max = 5;
    double wavelength = 770e-9;
    NanowireSpec spec;
    std::vector<cplx> b_par, a_perp, f_par, g_perp;

    double k() const { return 2.0 * pi / wavelength; }
    cplx b(int l) const { return b_par[l + l_max]; }
    cplx a(int l) const { return a_perp[l + l_max]; }
    cplx f(int l) const { return f_par[l + l_max]; }
    cplx g(int l) const { return g_perp[l + l_max]; }
    // b_l for parallel, a_l for perpendicular
    cplx scat(Polarization p, int l) const { return p == Polarization::parallel ? b(l) : a(l); }
    cplx inner(Polarization p, int l) const { return p == Polarization::parallel ? f(l) : g(l); }
};

MieCoefficients mie_coefficients(const NanowireSpec& spec, double wavelength, int l_max = 5);

// Relative change of the total cross-section of either polarisation when the
// truncation goes from l_max to l_max + 3.
double truncation_change(const NanowireSpec& spec, double wavelength, int l_max);

enum class FieldPart { incident, scattered, internal };

// Fields in the indirect frame (e_r, e_phi, e_y): component 0 = r, 1 = phi, 2 = y.
// Position relative to the wire: x - x0 = r sin(phi), z - z0 = -r cos(phi).
struct CylindricalFieldSample {
    double r = 0.0, phi = 0.0, y = 0.0;
    CVec3 E{}, B{};
};

// Field per unit incident amplitude E0 = 1 at the wire (amplitude along the
// mode polarisation: -e_y for parallel, e_x at phi_i = 0 for perpendicular).
CylindricalFieldSample cylinder_field(const MieCoefficients& c, Polarization pol, double phi_i,
                                      double r, double phi, FieldPart part = FieldPart::scattered);

inline CylindricalFieldSample scattered_field(const MieCoefficients& c, Polarization pol,
                                              double phi_i, double r, double phi)
{
    return cylinder_field(c, pol, phi_i, r, phi, FieldPart::scattered);
}

// Total field (incident + scattered outside, internal inside).
CylindricalFieldSample total_field(const MieCoefficients& c, Polarization pol, double phi_i,
                                   double r, double phi);

// Indirect-frame components -> Cartesian (x, y, z).
CVec3 to_cartesian(const CVec3& v, double phi);
Vec3 radial_unit(double phi);
Vec3 azimuthal_unit(double phi);

// Incident direction of the Mie plane wave: k_i = k(-sin phi_i e_x + cos phi_i e_z).
Vec3 incidence_direction(double phi_i);

// phi -> d sigma / d phi (m per rad) evaluated at radius r (exact Hankel values).
std::function<double(double)> emission_diagram(const MieCoefficients& c, Polarization pol,
                                               double phi_i, double r = 1e-3);

// (4/k)(|s_0|^2 + 2 sum |s_l|^2)
double total_cross_section(const MieCoefficients& c, Polarization pol);

struct CrossSections1D {
    double sigma_R = 0.0, sigma_T = 0.0, sigma_scat = 0.0;
    double collection_half_angle = 0.0;
};

// Reflection window around phi = 0, transmission window around phi = pi, rest is scatter.
CrossSections1D cross_sections_1d(const MieCoefficients& c, Polarization pol,
                                  double collection_half_angle, double r = 1e-3);

} // namespace nimcav
