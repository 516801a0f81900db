#pragma once

#include "nimcav/cavity.hpp"
#include "nimcav/coupling.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nimcav {

// Coefficients at an arbitrary wire position (engine, database, ...).
using CoefficientSource = std::function<ScatterCoefficients(double x0, double z0)>;
CoefficientSource engine_source(std::shared_ptr<CouplingEngine> engine);

struct MapAxis {
    std::string name, unit;   // display unit
    double scale = 1.0;       // SI -> display
    std::vector<double> values;
};

struct Payload {
    std::string name, unit;
    double scale = 1.0;
    std::vector<double> data;   // row-major, NaN on flagged cells
};

// Rectangular map (or profile when cols is empty). Every cell has an ok flag.
struct MapGrid {
    MapAxis rows, cols;
    std::deque<Payload> payloads;   // add() references stay valid
    std::vector<unsigned char> ok;
    std::vector<std::string> notes;

    std::size_t n_rows() const { return rows.values.size(); }
    std::size_t n_cols() const { return cols.values.empty() ? 1 : cols.values.size(); }
    std::size_t size() const { return n_rows() * n_cols(); }
    Payload& add(const std::string& name, const std::string& unit, double scale);
    const Payload& get(const std::string& name) const;
    Payload& get(const std::string& name);
};

std::vector<double> grid_range(double start, double stop, double step);

// Run f(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

// Locked resonance at one wire position.
struct LockedPixel {
    bool ok = false;
    ScatterCoefficients coeffs;
    ResonanceResult res;
    CavityResponse resp;
    std::string error;
};
LockedPixel locked_pixel(const CavityGeometry& cav, const CoefficientSource& src, double x0, double z0,
                         double seed_length);

// Resonance along a line of positions, seeded from the previous point.
struct ResonanceProfile {
    std::vector<double> x0, z0;
    std::vector<LockedPixel> pixels;
};
ResonanceProfile resonance_profile(const CavityGeometry& cav, const CoefficientSource& src,
                                   const std::vector<double>& x0, const std::vector<double>& z0);

struct LZResult {
    MapGrid panel;     // rows z0, cols L: C_T, C_L
    MapGrid profile;   // rows z0: resonant length, shift, finesse, kappa, C_T, C_L at resonance, G_z
};
struct LZOptions {
    double half_window = 0.0;   // default 0.3 FSR around the empty resonance
    int n_length = 241;
    int threads = 1;
};
LZResult lz_map(const CavityGeometry& cav, const CoefficientSource& src, const std::vector<double>& z0,
                const LZOptions& opt = {});

// (4 pi c / N lambda^2)
double coupling_prefactor(const CavityGeometry& cav);
// G = prefactor dL/ds by central differences (one-sided at the ends); NaN next to
// flagged samples.
std::vector<double> coupling_strength(const std::vector<double>& s, const std::vector<double>& l_res,
                                      const std::vector<unsigned char>& ok, const CavityGeometry& cav);

// Parabolic refinement of the maximum of y on a uniform grid: (position, value).
std::pair<double, double> parabolic_max(const std::vector<double>& x, const std::vector<double>& y);

struct ShiftMapResult {
    MapGrid map;                  // rows radius, cols z0: shift, finesse, G_z, kappa
    std::vector<double> ridge_g;  // argmax_z |G_z| per radius
    std::vector<double> ridge_c;  // argmax_z G_z^2 / kappa per radius
};
ShiftMapResult shift_map_vs_radius(const CavityGeometry& cav, const std::vector<double>& radii,
                                   const std::vector<double>& z0, Polarization pol, CouplingMethod method,
                                   const CouplingSettings& settings = {}, int threads = 1,
                                   double refractive_index = 2.61);

struct MechanicalMode {
    double frequency = 0.0;          // Omega_m, rad/s
    double effective_mass = 0.0;     // kg
    double zero_point_spread = 0.0;  // m
    double quality_factor = 1e5;
};
MechanicalMode mechanical_mode(const NanowireSpec& spec, double quality_factor = 1e5, const Material& mat = {});

struct OptomechFigures {
    double G_z = 0.0, kappa_cav = 0.0;
    double g0 = 0.0;
    double ratio = 0.0;                      // 2 g0 / Omega_m
    double single_photon_displacement = 0.0; // dz(1)
    double single_photon_force = 0.0;        // -hbar g0 / dz_zpf
    double static_cooperativity = 0.0;       // C(1)
    double dynamic_cooperativity = 0.0;      // C~(1)
    std::vector<double> temperatures, thermal_spread;
};
double thermal_spread(const MechanicalMode& m, double temperature);
OptomechFigures single_photon_figures(const MechanicalMode& m, double G_z, double kappa_cav,
                                      const std::vector<double>& temperatures = {0.02, 4.0, 300.0});

// On-axis figures with the ridge choice: ratio and dz(1) from max |G_z|, the
// cooperativities from max G_z^2 / kappa_cav (kappa at that position).
struct AxialFigures {
    OptomechFigures at_g, at_c;
    double z_g = 0.0, z_c = 0.0;
    MechanicalMode mode;
};
AxialFigures axial_figures(const CavityGeometry& cav, const NanowireSpec& spec, Polarization pol,
                           CouplingMethod method, const CouplingSettings& settings = {}, double z_step = 2e-9,
                           double quality_factor = 1e5, const std::vector<double>& temperatures = {0.02, 4.0, 300.0});

// rows x0, cols z0: C_T, C_L, shift, finesse at the locked length. Rows run in
// parallel, each row is tracked sequentially along z0.
struct XZResult {
    MapGrid map;
    std::vector<LockedPixel> pixels;
};
XZResult xz_locked_map(const CavityGeometry& cav, const CoefficientSource& src, const std::vector<double>& x0,
                       const std::vector<double>& z0, int threads = 1);

} // namespace nimcav
