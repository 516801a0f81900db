#pragma once

#include "nimcav/model.hpp"

#include <vector>

namespace nimcav {

struct CavityGeometry {
    double length = 12.44e-6;            // nominal length, fixes the mode and Gouy phases
    double mirror_curvature = 28e-6;     // R_c
    double mirror_size = 12e-6;          // D, transverse diameter of the mirror caps
    double reflectivity_left = 0.994;
    double reflectivity_right = 0.994;
    double wavelength = 770e-9;
    int longitudinal_order = 32;
    int eta_left = -1, eta_right = 1;

    double k() const { return 2.0 * pi / wavelength; }
    double g() const { return 1.0 - length / mirror_curvature; }
};

// Empty-cavity finesse pi sqrt(R)/(1-R) for equal mirrors (geometric mean otherwise).
double mirror_finesse(const CavityGeometry& cav);
// Mirror reflectivity giving the requested empty-cavity finesse.
double reflectivity_for_finesse(double finesse);

struct ModeGeometry {
    double waist = 0.0;            // w0
    double rayleigh_length = 0.0;  // z_R
    double wavelength = 770e-9;

    double k() const { return 2.0 * pi / wavelength; }
    double w(double z) const;
    double gouy(double z) const;
    double curvature(double z) const;        // R(z), infinite at z = 0
    double inv_curvature(double z) const;    // 1/R(z), 0 at z = 0
    // on-axis phase phi_0 = k z - (1 + nx + ny) Psi(z)
    double phase0(double z, int nx = 0, int ny = 0) const;
};

ModeGeometry mode_geometry(const CavityGeometry& cav);
ModeGeometry mode_geometry(double length, double mirror_curvature, double wavelength);

// -e_y (parallel) or e_x (perpendicular)
Vec3 mode_polarization(Polarization p);

// Scalar Hermite-Gaussian field E^{(+/-)}_{nx,ny}, normalised on transverse planes.
cplx hg_scalar(const ModeGeometry& m, int nx, int ny, double x, double y, double z, int direction);
CVec3 hg_field(const ModeGeometry& m, int nx, int ny, const Vec3& point, int direction, Polarization p);

struct TransferMatrix2 {
    cplx m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

    TransferMatrix2 operator*(const TransferMatrix2& o) const
    {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }
    cplx det() const { return m11 * m22 - m12 * m21; }
};

struct ReducedFieldPair {
    cplx forward = 0.0, backward = 0.0;
};

inline ReducedFieldPair operator*(const TransferMatrix2& t, const ReducedFieldPair& f)
{
    return {t.m11 * f.forward + t.m12 * f.backward, t.m21 * f.forward + t.m22 * f.backward};
}

TransferMatrix2 propagation_matrix(double z1, double z2, const ModeGeometry& m, int nx = 0, int ny = 0);
// Phase-only propagation by an explicit phase difference.
TransferMatrix2 phase_matrix(double dphi);
TransferMatrix2 mirror_matrix(double reflectivity, int eta);

struct PlaneWaveComponent {
    cplx amplitude = 0.0;
    Vec3 wavevector{};       // (kx, ky, kz)
    Vec3 polarization{};     // unit, orthogonal to wavevector
    double phi = 0.0, xi = 0.5 * pi;
    int index = 0;           // signed j for the 2D expansion
};

// 3D expansion of the forward fundamental mode at z = 0, n_terms x n_terms components.
std::vector<PlaneWaveComponent> plane_wave_expansion_3d(const ModeGeometry& m, Polarization p,
                                                        int n_terms = 9, double delta_k = 0.75e6);
// 2D (xz plane) expansion used by the force computation; direction = +1 or -1.
std::vector<PlaneWaveComponent> plane_wave_expansion_2d(const ModeGeometry& m, Polarization p,
                                                        int direction, int n_terms = 9,
                                                        double delta_k = 0.75e6);

// Sum of components at a point.
CVec3 reconstruct_field(const std::vector<PlaneWaveComponent>& comps, const Vec3& point);

// Normalised y-profile (2/(pi w0^2))^{1/4} exp(-y^2/w0^2) of the 2D force variant.
double y_envelope(const ModeGeometry& m, double y);

} // namespace nimcav
