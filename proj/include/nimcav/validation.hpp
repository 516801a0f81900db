#pragma once

#include "nimcav/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nimcav {

struct CheckResult {
    std::string id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// The nine acceptance checks; tolerances are fixed inside each.
CheckResult check_empty_cavity();
CheckResult check_mode_geometry();
CheckResult check_method_agreement(int threads = 1);
CheckResult check_lz_nw2();
CheckResult check_force_scale(int threads = 1);
CheckResult check_pair_force_oracle();
CheckResult check_single_photon(int threads = 1);
CheckResult check_qualitative(int threads = 1);
CheckResult check_properties(int threads = 1);

// Fast suite used by `validate` (checks 1, 2, 6, 9); full adds the map-based ones.
std::vector<CheckResult> run_validation(bool full, int threads = 1,
                                        const std::function<void(const CheckResult&)>& on_result = {});
std::string format_check(const CheckResult& r);

// Brute-force Maxwell-stress force per unit length on the wire for a set of plane
// waves (amplitude, direction phi, polarisation vector), wire at rho0. Fields from
// the Mie total field on a circle just outside the surface, n_points samples.
struct OracleWave {
    cplx amplitude;
    double phi;
    Vec3 polarization;
};
std::array<double, 2> stress_tensor_force(const NanowireSpec& spec, double wavelength, Polarization pol,
                                          const std::vector<OracleWave>& waves, const Vec3& rho0,
                                          int n_points = 720);

// Net Poynting flux of the total field through a circle of radius r divided by the
// scattered flux; zero for a lossless wire.
double mie_flux_imbalance(const NanowireSpec& spec, double wavelength, Polarization pol, int l_max = 12);

// Largest deviation |C_R + C_T + P_wire - 1| with the wire loss taken from the
// intracavity amplitudes (power in minus power out at the wire).
double energy_balance_error(const CavityGeometry& cav, const ScatterCoefficients& c, double L);

// Ring test on a locked XZ map (rows x0 >= 0, cols z0): fraction of F = F0/2
// crossings along grid lines that sit within 1.5 steps of a C_L local maximum,
// and the number of crossings.
struct RingStats {
    int crossings = 0, matched = 0;
    double min_finesse = 0.0;
    bool loss_peaks_on_axis = false;   // C_L never increases away from x0 = 0
};
RingStats ring_statistics(const MapGrid& xz, double empty_finesse);

} // namespace nimcav
