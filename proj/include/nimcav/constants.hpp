#pragma once

#include <complex>
#include <numbers>

namespace nimcav {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

inline constexpr double c_light = 299792458.0;       // m/s
inline constexpr double mu0 = 1.25663706212e-6;      // H/m
inline constexpr double eps0 = 8.8541878128e-12;     // F/m
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K

} // namespace nimcav
