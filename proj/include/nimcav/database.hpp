#pragma once

#include "nimcav/coupling.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace nimcav {

// Forward coefficients on an (x0, z0) grid with x0 >= 0 and z0 in [-lambda/4, lambda/4];
// queries use |x0| and fold z0 into one lambda/2 period. The C_r carrier
// exp(-2i phi0(z0)) is divided out before interpolating and restored at the query
// position, so nodes come back bit-identical.
class CouplingDatabase {
public:
    CouplingDatabase(NanowireSpec spec, CavityGeometry cav, Polarization pol, CouplingMethod method,
                     CouplingSettings settings, std::vector<double> x0, std::vector<double> z0);

    // z0 from 0 to lambda/4 (end included), x0 from 0 to x_max (2 w0 when 0).
    static std::vector<double> default_z_grid(const CavityGeometry& cav, double step = 2e-9);
    static std::vector<double> default_x_grid(const CavityGeometry& cav, double step = 50e-9, double x_max = 0.0);

    // Stored z nodes: -z_n .. z_n from the given non-negative list.
    const std::vector<double>& x_nodes() const { return x_; }
    const std::vector<double>& z_nodes() const { return z_; }

    void populate(int threads = 1);
    bool populated() const { return populated_; }

    // Key fields (JSON) and their SHA-256; any change of geometry, wire, method,
    // truncations or grids changes the hash.
    std::string key_json() const;
    std::string key_hash() const;

    // (C_r^+, C_t^+) per node, row-major over (x, z).
    const std::vector<std::array<cplx, 2>>& entries() const { return fwd_; }
    void set_entries(std::vector<std::array<cplx, 2>> e);

    ScatterCoefficients query(double x0, double z0) const;
    bool covers(double x0) const { return std::abs(x0) <= x_.back() * (1.0 + 1e-12); }

    const NanowireSpec& spec() const { return spec_; }
    const CavityGeometry& cavity() const { return cav_; }
    Polarization polarization() const { return pol_; }
    CouplingMethod method() const { return method_; }

private:
    std::pair<cplx, cplx> forward_interp(double x, double zf, double z_true, bool& interpolated) const;

    NanowireSpec spec_;
    CavityGeometry cav_;
    ModeGeometry mode_;
    Polarization pol_;
    CouplingMethod method_;
    CouplingSettings settings_;
    std::vector<double> x_, z_;
    std::vector<std::array<cplx, 2>> fwd_;
    bool populated_ = false;
};

// Fold z0 into [-lambda/4, lambda/4].
double fold_half_period(double z0, double wavelength);

} // namespace nimcav
