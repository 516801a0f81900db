#pragma once

#include "nimcav/cavity.hpp"
#include "nimcav/gaussian.hpp"
#include "nimcav/optomech.hpp"

#include <vector>

namespace nimcav {

struct ForceVector {
    double fx = 0.0, fz = 0.0;
    double x0 = 0.0, z0 = 0.0;
    double input_power = 0.0;   // P_inc^0
    Polarization pol = Polarization::parallel;
};

// Lambda_l, D_l (l = 0..l_max+1 for D) and K = 4 (n^2 - 1) / (pi c R).
struct ForceKernels {
    int l_max = 5;
    double k = 0.0, K = 0.0;
    Polarization pol = Polarization::parallel;
    std::vector<double> lambda;   // l = 0..l_max
    std::vector<cplx> D;          // l = 0..l_max+1
};
ForceKernels force_kernels(const NanowireSpec& spec, double wavelength, Polarization pol, int l_max = 5);

// Sign of a component's polarisation against the Mie incident polarisation of its
// direction: +1 for parallel, +1 / -1 for perpendicular waves in the forward /
// backward hemisphere.
double polarization_sign(const PlaneWaveComponent& c, Polarization pol);

// F~ for one ordered pair; amplitudes in sqrt(W) * (mode units), the field being
// sqrt(P / eps0 c) * amplitude. F_pair = Im F~ e_x + Re F~ e_z.
cplx pair_force(const ForceKernels& kern, const PlaneWaveComponent& c1, const PlaneWaveComponent& c2,
                const Vec3& rho0, double p_inc);

struct PowerBudget {
    double input_power = 1e-6;   // P_inc^0
    double eta_fiber = 0.8;
    double t_in = 0.5;
    double incident() const { return eta_fiber * t_in * input_power; }
};

// Forward components weighted by A+ and backward ones by B-.
std::vector<PlaneWaveComponent> intracavity_components(const ModeGeometry& m, Polarization pol,
                                                       const IntracavityAmplitudes& amps, int n_terms = 9,
                                                       double delta_k = 0.75e6);

ForceVector total_force(const ForceKernels& kern, const std::vector<PlaneWaveComponent>& comps, double x0,
                        double z0, double p_inc);

// Force at a locked (or explicit) length for a nanowire whose coefficients are given.
ForceVector total_force(const CavityGeometry& cav, const ForceKernels& kern, const ScatterCoefficients& coeffs,
                        double length, const PowerBudget& power, int n_terms = 9, double delta_k = 0.75e6);

// rows x0, cols z0: F_x, F_z, curl (dF_x/dz - dF_z/dx) plus the locked-map payloads.
struct ForceMapResult {
    XZResult locked;
    MapGrid forces;
};
ForceMapResult force_map(const CavityGeometry& cav, const NanowireSpec& spec, Polarization pol,
                         const CoefficientSource& src, const std::vector<double>& x0, const std::vector<double>& z0,
                         const PowerBudget& power, int threads = 1);

// Central differences; NaN on the border and next to flagged pixels.
std::vector<double> map_curl(const MapGrid& forces);

// rows radius, cols z0 (on axis, perpendicular): F_z per intracavity photon and G_z.
MapGrid force_vs_radius_per_photon(const CavityGeometry& cav, const std::vector<double>& radii,
                                   const std::vector<double>& z0, Polarization pol, CouplingMethod method,
                                   const CouplingSettings& settings = {}, int threads = 1,
                                   double refractive_index = 2.61);

} // namespace nimcav
