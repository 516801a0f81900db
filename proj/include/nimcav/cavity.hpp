#pragma once

#include "nimcav/coupling.hpp"
#include "nimcav/gaussian.hpp"

#include <optional>
#include <vector>

namespace nimcav {

struct CavityResponse {
    cplx c_r = 0.0, c_t = 0.0;
    double C_R = 0.0, C_T = 0.0, C_L = 0.0;
    double cavity_length = 0.0;
    Polarization pol = Polarization::parallel;
};

struct ResonanceResult {
    double resonant_length = 0.0;
    double finesse = 0.0;
    double linewidth_length = 0.0;   // FWHM in cavity length
    double linewidth_angular = 0.0;  // kappa_cav, rad/s
    double peak_transmission = 0.0;
    double fit_residual = 0.0;       // rms residual / peak height
};

struct IntracavityAmplitudes {
    cplx A_plus = 0.0, A_minus = 0.0;   // left sub-cavity, referred to z = 0
    cplx B_plus = 0.0, B_minus = 0.0;   // right sub-cavity, referred to z = 0
};

// Round-trip chain for a scanned length L. The mode geometry and the mirror Gouy
// phases stay those of the nominal cav.length; L only moves the mirror planes.
TransferMatrix2 cavity_transfer_matrix(const CavityGeometry& cav, const ScatterCoefficients* nw, double L);

// Pumped from the left only (F_v = 0). nw == nullptr is the empty cavity.
CavityResponse cavity_response(const CavityGeometry& cav, const ScatterCoefficients* nw, double L,
                               Polarization pol = Polarization::parallel);

// Empty-cavity resonance of order N from the round-trip phase (nominal Gouy phase).
double nominal_resonance(const CavityGeometry& cav);
double free_spectral_range(const CavityGeometry& cav);

struct LorentzFit {
    double offset = 0.0, amplitude = 0.0, center = 0.0, fwhm = 0.0;
    double residual = 0.0;   // rms / amplitude
};

// offset + amplitude / (1 + (2 (x - center) / fwhm)^2), Levenberg-Marquardt.
LorentzFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y, const LorentzFit& guess);

struct ResonanceOptions {
    double half_window = 0.0;        // default 0.3 FSR
    double max_fit_residual = 0.05;
    double coarse_step = 0.0;        // default min(FSR / 2000, empty FWHM / 4)
};

// Options used when none are passed; set once before any map runs (not synchronised).
ResonanceOptions& resonance_defaults();

// Transmission peak in [center - half_window, center + half_window].
ResonanceResult find_resonance(const CavityGeometry& cav, const ScatterCoefficients* nw, double center,
                               const ResonanceOptions& opt = resonance_defaults());

IntracavityAmplitudes intracavity_amplitudes(const CavityGeometry& cav, const ScatterCoefficients* nw, double L);

// Photon number from the circulating powers |A|^2 P_inc, |B|^2 P_inc in each
// sub-cavity: U = (P_inc / c) [(|A+|^2 + |A-|^2)(L/2 + z0) + (|B+|^2 + |B-|^2)(L/2 - z0)].
double intracavity_photon_number(const CavityGeometry& cav, const IntracavityAmplitudes& a, double L, double z0,
                                 double p_inc);

// kappa_cav = 2 pi (c / 2 L) / finesse
double cavity_linewidth_angular(double length, double finesse);

} // namespace nimcav
