#pragma once

#include "nimcav/gaussian.hpp"
#include "nimcav/mie.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace nimcav {

enum class CouplingMethod { approx, exact };
enum class MirrorSide { left, right };

const char* to_string(CouplingMethod m);
CouplingMethod parse_method(const std::string& s);

struct ScatterCoefficients {
    cplx cr_plus = 0.0, ct_plus = 1.0;     // incidence from the left (+z)
    cplx cr_minus = 0.0, ct_minus = 1.0;   // incidence from the right (-z)
    double closs_plus = 0.0, closs_minus = 0.0;
    double x0 = 0.0, z0 = 0.0;
    Polarization pol = Polarization::parallel;
    CouplingMethod method = CouplingMethod::approx;
    bool symmetry_completed = false;
    bool interpolated = false;
};

// |C_loss| = sqrt(1 - |C_r|^2 - |C_t|^2), clamped at 0 above -1e-9.
double loss_magnitude(cplx cr, cplx ct);

// Truncation and quadrature settings shared by both methods.
struct CouplingSettings {
    int l_max = 5;
    int expansion_terms = 9;            // exact method, per axis
    double expansion_delta_k = 0.75e6;  // 1/m
    double quadrature_tol = 1e-4;       // relative change under mesh halving
    int max_refinements = 3;
};

using FieldFunction = std::function<CVec3(const Vec3&)>;

// Approximate scattered field: single plane wave k e_z with amplitude E00(r0) and
// the y-envelope exp(-y^2/w(z)^2).
FieldFunction scattered_field_approx(const MieCoefficients& coeffs, const ModeGeometry& mode,
                                     Polarization pol, double x0, double z0);

// Sum of oblique-incidence scattered fields for the 3D plane-wave expansion of the
// forward fundamental mode.
FieldFunction scattered_field_exact(const NanowireSpec& spec, const ModeGeometry& mode,
                                    Polarization pol, const CouplingSettings& settings);

// Quadrature mesh on a spherical mirror cap with the conjugate target mode folded
// into the weights: integral = sum_i w_i (E(p_i) . t_i).
struct CapMesh {
    MirrorSide side = MirrorSide::right;
    int n_theta = 0, n_phi = 0;
    std::vector<Vec3> points;
    std::vector<CVec3> weighted_target;   // dS * conj(target) / cap norm
};

CapMesh build_cap_mesh(const CavityGeometry& cav, const ModeGeometry& mode, MirrorSide side,
                       int px, int py, Polarization target, int n_theta, int n_phi);
cplx integrate_on_mesh(const CapMesh& mesh, const FieldFunction& field);

// Initial mesh from the phase-resolution rule (< pi/8 phase change per cell).
std::pair<int, int> initial_cap_mesh(const CavityGeometry& cav, const ModeGeometry& mode, double x0, double z0);

// Projection of a scattered field onto the (px, py) mode with the given polarisation,
// propagating away from the wire through the chosen mirror. Refines until successive
// halvings agree to settings.quadrature_tol.
cplx project_onto_mode(const FieldFunction& field, int px, int py, Polarization target, MirrorSide side,
                       const CavityGeometry& cav, const ModeGeometry& mode, const CouplingSettings& settings,
                       double x0 = 0.0, double z0 = 0.0);

// C^{(+)} at (x0, z0); the minus-direction entries are filled by symmetry from a
// second evaluation at (x0, -z0).
ScatterCoefficients nanowire_rt_coefficients(const NanowireSpec& spec, const CavityGeometry& cav,
                                             Polarization pol, CouplingMethod method,
                                             const CouplingSettings& settings = {});

// Forward-incidence coefficients only: (C_r^+, C_t^+).
std::pair<cplx, cplx> forward_coefficients(const NanowireSpec& spec, const CavityGeometry& cav,
                                           Polarization pol, CouplingMethod method,
                                           const CouplingSettings& settings = {});

bool is_symmetric(const CavityGeometry& cav);

// Direction flip (z0 -> -z0): the returned coefficients describe the wire at
// (x0, -z0). Mirror x0 -> -x0 multiplies by (-1)^(mx + qx), here mx = qx = 0.
ScatterCoefficients flip_direction(const ScatterCoefficients& c, const CavityGeometry& cav);
ScatterCoefficients mirror_x(const ScatterCoefficients& c, const CavityGeometry& cav, int mx = 0, int qx = 0);
// Combine forward coefficients at (x0, z0) and (x0, -z0) into a full entry at (x0, z0).
ScatterCoefficients extend_by_symmetry(std::pair<cplx, cplx> plus_at_z0, std::pair<cplx, cplx> plus_at_minus_z0,
                                       const CavityGeometry& cav);

TransferMatrix2 nanowire_transfer_matrix(const ScatterCoefficients& c);
// Inverse map: S coefficients (cr+, ct+, cr-, ct-) from M.
ScatterCoefficients scatter_from_transfer(const TransferMatrix2& m);

// Memoised forward coefficients for one wire/polarisation/method on arbitrary
// positions; the quadrature mesh is chosen adaptively once at the first (or an
// explicitly given probe) position and reused. Thread safe.
class CouplingEngine {
public:
    CouplingEngine(NanowireSpec spec, CavityGeometry cav, Polarization pol, CouplingMethod method,
                   CouplingSettings settings = {});

    // probe position for the mesh choice (use the most off-axis position of a map)
    void calibrate(double x0, double z0);
    std::pair<cplx, cplx> forward(double x0, double z0);
    ScatterCoefficients coefficients(double x0, double z0);

    const NanowireSpec& spec() const { return spec_; }
    const CavityGeometry& cavity() const { return cav_; }
    Polarization polarization() const { return pol_; }
    CouplingMethod method() const { return method_; }
    const CouplingSettings& settings() const { return settings_; }

private:
    std::pair<cplx, cplx> compute(double x0, double z0);

    NanowireSpec spec_;
    CavityGeometry cav_;
    ModeGeometry mode_;
    Polarization pol_;
    CouplingMethod method_;
    CouplingSettings settings_;
    MieCoefficients mie_;
    std::mutex mtx_;
    std::shared_ptr<const CapMesh> left_, right_;
    std::map<std::pair<long long, long long>, std::pair<cplx, cplx>> memo_;
};

} // namespace nimcav
