#pragma once

#include "nimcav/constants.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace nimcav {

using Vec3 = std::array<double, 3>;   // (x, y, z)
using CVec3 = std::array<cplx, 3>;

enum class Polarization { parallel, perpendicular };

inline const char* to_string(Polarization p)
{
    return p == Polarization::parallel ? "par" : "perp";
}

Polarization parse_polarization(const std::string& s);

// Thrown when a computation cannot reach its accuracy target (CLI exit code 2).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NanowireSpec {
    double radius = 65e-9;          // m
    double refractive_index = 2.61;
    double length = 70e-6;          // m, mechanics only
    double x0 = 0.0, z0 = 0.0;      // m
};

// SiC defaults used by the mechanics formulas.
struct Material {
    double density = 3210.0;        // kg/m^3
    double kappa_omega = 3126.0;    // Hz m, Omega_m / 2pi = kappa_omega R / L^2
};

} // namespace nimcav
