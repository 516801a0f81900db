#include "nimcav/coupling.hpp"
#include "nimcav/oblique.hpp"
#include "nimcav/quadrature.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace nimcav {

const char* to_string(CouplingMethod m) { return m == CouplingMethod::approx ? "approx" : "exact"; }

CouplingMethod parse_method(const std::string& s)
{
    if (s == "approx") return CouplingMethod::approx;
    if (s == "exact") return CouplingMethod::exact;
    throw std::invalid_argument("unknown coupling method '" + s + "' (expected approx or exact)");
}

double loss_magnitude(cplx cr, cplx ct)
{
    const double rest = 1.0 - std::norm(cr) - std::norm(ct);
    if (rest < -1e-9)
        throw NumericalError(fmt::format("loss_magnitude: |C_r|^2 + |C_t|^2 = {:.12f} exceeds 1", 1.0 - rest));
    return rest > 0.0 ? std::sqrt(rest) : 0.0;
}

FieldFunction scattered_field_approx(const MieCoefficients& coeffs, const ModeGeometry& mode,
                                     Polarization pol, double x0, double z0)
{
    const cplx e00 = hg_scalar(mode, 0, 0, x0, 0.0, z0, +1);
    return [coeffs, mode, pol, x0, z0, e00](const Vec3& p) -> CVec3 {
        if (e00 == 0.0) return {};
        const double dx = p[0] - x0, dz = p[2] - z0;
        const double r = std::hypot(dx, dz);
        const double phi = std::atan2(dx, -dz);
        const double w = mode.w(p[2]);
        const double env = std::exp(-p[1] * p[1] / (w * w));
        const auto s = cylinder_field(coeffs, pol, 0.0, r, phi, FieldPart::scattered);
        const auto e = to_cartesian(s.E, phi);
        const cplx a = e00 * env;
        return {a * e[0], a * e[1], a * e[2]};
    };
}

FieldFunction scattered_field_exact(const NanowireSpec& spec, const ModeGeometry& mode,
                                    Polarization pol, const CouplingSettings& settings)
{
    const auto comps = plane_wave_expansion_3d(mode, pol, settings.expansion_terms, settings.expansion_delta_k);
    // group the waves by k_y: same transverse wavenumber, coefficients add up
    std::map<double, ObliqueScattering> groups;
    for (const auto& c : comps) {
        const double ph = c.wavevector[0] * spec.x0 + c.wavevector[2] * spec.z0;
        const cplx amp = c.amplitude * std::exp(I * ph);
        const CVec3 ev{amp * c.polarization[0], amp * c.polarization[1], amp * c.polarization[2]};
        // oblique_scattering expects k_y = wavevector[1]; the y-phase is relative to y = 0
        auto s = oblique_scattering(spec, mode.wavelength, c.wavevector, ev, settings.l_max);
        // combine waves of the same k_y but different k_x only if gamma matches
        auto key = c.wavevector[1];
        auto it = groups.find(key);
        if (it == groups.end()) {
            groups.emplace(key, std::move(s));
        } else {
            // different k_x give different gamma only through k_y; gamma = sqrt(k^2 - k_y^2)
            accumulate(it->second, s);
        }
    }
    std::vector<ObliqueScattering> list;
    for (auto& [ky, s] : groups) list.push_back(std::move(s));
    const double x0 = spec.x0, z0 = spec.z0;
    return [list, x0, z0](const Vec3& p) -> CVec3 {
        CVec3 e{};
        for (const auto& s : list) {
            const auto f = oblique_scattered_field(s, x0, z0, p);
            for (int i = 0; i < 3; ++i) e[i] += f[i];
        }
        return e;
    };
}

CapMesh build_cap_mesh(const CavityGeometry& cav, const ModeGeometry& mode, MirrorSide side,
                       int px, int py, Polarization target, int n_theta, int n_phi)
{
    if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("build_cap_mesh: mesh sizes must be positive");
    const double rc = cav.mirror_curvature;
    const double half = 0.5 * cav.mirror_size / rc;
    if (!(half > 0.0 && half < 1.0)) throw std::invalid_argument("build_cap_mesh: mirror size must be below 2 R_c");
    const double theta_f = std::acos(std::sqrt(1.0 - half * half));
    const double zc = side == MirrorSide::right ? 0.5 * cav.length - rc : -0.5 * cav.length + rc;
    const double t0 = side == MirrorSide::right ? 0.0 : pi - theta_f;
    const double t1 = side == MirrorSide::right ? theta_f : pi;
    const int dir = side == MirrorSide::right ? +1 : -1;
    const Vec3 ep = mode_polarization(target);

    const auto& rule = gauss_legendre_rule(n_theta);
    CapMesh m;
    m.side = side;
    m.n_theta = n_theta;
    m.n_phi = n_phi;
    m.points.reserve(std::size_t(n_theta) * n_phi);
    m.weighted_target.reserve(std::size_t(n_theta) * n_phi);
    const double dphi = 2.0 * pi / n_phi;
    double norm = 0.0;
    std::vector<cplx> tconj;
    std::vector<double> wts;
    for (int i = 0; i < n_theta; ++i) {
        const double th = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * rule.nodes[i];
        const double wth = 0.5 * (t1 - t0) * rule.weights[i] * rc * rc * std::sin(th);
        for (int j = 0; j < n_phi; ++j) {
            const double ph = (j + 0.5) * dphi;
            const Vec3 p{rc * std::sin(th) * std::cos(ph), rc * std::sin(th) * std::sin(ph), zc + rc * std::cos(th)};
            const cplx t = hg_scalar(mode, px, py, p[0], p[1], p[2], dir);
            const double w = wth * dphi;
            norm += w * std::norm(t);
            m.points.push_back(p);
            tconj.push_back(std::conj(t));
            wts.push_back(w);
        }
    }
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        const cplx a = wts[i] * tconj[i] / norm;
        m.weighted_target.push_back({a * ep[0], a * ep[1], a * ep[2]});
    }
    return m;
}

cplx integrate_on_mesh(const CapMesh& mesh, const FieldFunction& field)
{
    cplx s = 0.0;
    for (std::size_t i = 0; i < mesh.points.size(); ++i) {
        const CVec3 e = field(mesh.points[i]);
        const CVec3& t = mesh.weighted_target[i];
        s += e[0] * t[0] + e[1] * t[1] + e[2] * t[2];
    }
    return s;
}

std::pair<int, int> initial_cap_mesh(const CavityGeometry& cav, const ModeGeometry& mode, double x0, double z0)
{
    // Phase of the integrand ~ k |p - r0| - mode phase. Bound its gradient over the
    // part of the cap where the target mode exceeds 1e-3 of its peak.
    const double k = mode.k();
    const double rho_cap = 0.5 * cav.mirror_size;
    const double w = mode.w(0.5 * cav.length);
    const double rho = std::min(rho_cap, w * std::sqrt(std::log(1e3)));
    const double d = 0.5 * cav.length - std::abs(z0);
    const double lateral = rho + std::abs(x0);
    const double grad = k * lateral / std::hypot(lateral, d) + k * rho / cav.mirror_curvature;
    const double cell = pi / 8.0;
    // Gauss-Legendre resolves roughly one cell per node pair; trapezoid in phi one per node
    int n_theta = static_cast<int>(std::ceil(grad * rho_cap / cell / 2.0));
    int n_phi = static_cast<int>(std::ceil(grad * rho * 2.0 * pi / cell / 4.0));
    n_theta = std::max(n_theta, 16);
    n_phi = std::max(n_phi + (n_phi % 2), 32);
    return {n_theta, n_phi};
}

cplx project_onto_mode(const FieldFunction& field, int px, int py, Polarization target, MirrorSide side,
                       const CavityGeometry& cav, const ModeGeometry& mode, const CouplingSettings& settings,
                       double x0, double z0)
{
    auto [nt, np] = initial_cap_mesh(cav, mode, x0, z0);
    cplx prev = integrate_on_mesh(build_cap_mesh(cav, mode, side, px, py, target, nt, np), field);
    for (int level = 0; level < settings.max_refinements; ++level) {
        nt *= 2;
        np *= 2;
        const cplx cur = integrate_on_mesh(build_cap_mesh(cav, mode, side, px, py, target, nt, np), field);
        if (std::abs(cur - prev) <= settings.quadrature_tol * std::abs(cur) + 1e-12) return cur;
        prev = cur;
    }
    throw NumericalError(fmt::format("project_onto_mode: cap quadrature not converged after {} halvings "
                                     "(last mesh {}x{}, value {:.6e}{:+.6e}i)",
                                     settings.max_refinements, nt, np, prev.real(), prev.imag()));
}

namespace {

FieldFunction make_field(const NanowireSpec& spec, const MieCoefficients& mie, const ModeGeometry& mode,
                         Polarization pol, CouplingMethod method, const CouplingSettings& settings)
{
    if (method == CouplingMethod::approx) return scattered_field_approx(mie, mode, pol, spec.x0, spec.z0);
    return scattered_field_exact(spec, mode, pol, settings);
}

std::pair<cplx, cplx> coefficients_from_projections(cplx alpha, cplx beta, const ModeGeometry& mode, double z0)
{
    const cplx cr = beta * std::exp(-2.0 * I * mode.phase0(z0));
    const cplx ct = alpha + 1.0;
    return {cr, ct};
}

} // namespace

std::pair<cplx, cplx> forward_coefficients(const NanowireSpec& spec, const CavityGeometry& cav,
                                           Polarization pol, CouplingMethod method,
                                           const CouplingSettings& settings)
{
    const auto mode = mode_geometry(cav);
    const auto mie = mie_coefficients(spec, cav.wavelength, settings.l_max);
    const auto field = make_field(spec, mie, mode, pol, method, settings);
    const cplx alpha = project_onto_mode(field, 0, 0, pol, MirrorSide::right, cav, mode, settings, spec.x0, spec.z0);
    const cplx beta = project_onto_mode(field, 0, 0, pol, MirrorSide::left, cav, mode, settings, spec.x0, spec.z0);
    return coefficients_from_projections(alpha, beta, mode, spec.z0);
}

bool is_symmetric(const CavityGeometry& cav)
{
    return cav.reflectivity_left == cav.reflectivity_right;
}

ScatterCoefficients extend_by_symmetry(std::pair<cplx, cplx> plus_at_z0, std::pair<cplx, cplx> plus_at_minus_z0,
                                       const CavityGeometry& cav)
{
    if (!is_symmetric(cav)) throw std::invalid_argument("extend_by_symmetry: cavity is not symmetric");
    ScatterCoefficients c;
    c.cr_plus = plus_at_z0.first;
    c.ct_plus = plus_at_z0.second;
    c.cr_minus = plus_at_minus_z0.first;
    c.ct_minus = plus_at_minus_z0.second;
    c.closs_plus = loss_magnitude(c.cr_plus, c.ct_plus);
    c.closs_minus = loss_magnitude(c.cr_minus, c.ct_minus);
    c.symmetry_completed = true;
    return c;
}

ScatterCoefficients flip_direction(const ScatterCoefficients& c, const CavityGeometry& cav)
{
    if (!is_symmetric(cav)) throw std::invalid_argument("flip_direction: cavity is not symmetric");
    ScatterCoefficients f = c;
    std::swap(f.cr_plus, f.cr_minus);
    std::swap(f.ct_plus, f.ct_minus);
    std::swap(f.closs_plus, f.closs_minus);
    f.z0 = -c.z0;
    f.symmetry_completed = true;
    return f;
}

ScatterCoefficients mirror_x(const ScatterCoefficients& c, const CavityGeometry& cav, int mx, int qx)
{
    if (!is_symmetric(cav)) throw std::invalid_argument("mirror_x: cavity is not symmetric");
    ScatterCoefficients f = c;
    const double s = ((mx + qx) % 2) ? -1.0 : 1.0;
    f.cr_plus *= s;
    f.ct_plus *= s;
    f.cr_minus *= s;
    f.ct_minus *= s;
    f.x0 = -c.x0;
    f.symmetry_completed = true;
    return f;
}

ScatterCoefficients nanowire_rt_coefficients(const NanowireSpec& spec, const CavityGeometry& cav,
                                             Polarization pol, CouplingMethod method,
                                             const CouplingSettings& settings)
{
    if (spec.x0 < 0.0) throw std::invalid_argument("nanowire_rt_coefficients: x0 must be >= 0 (use mirror_x)");
    const auto plus = forward_coefficients(spec, cav, pol, method, settings);
    NanowireSpec flipped = spec;
    flipped.z0 = -spec.z0;
    const auto minus = spec.z0 == 0.0 ? plus : forward_coefficients(flipped, cav, pol, method, settings);
    auto c = extend_by_symmetry(plus, minus, cav);
    c.x0 = spec.x0;
    c.z0 = spec.z0;
    c.pol = pol;
    c.method = method;
    return c;
}

TransferMatrix2 nanowire_transfer_matrix(const ScatterCoefficients& c)
{
    if (std::abs(c.ct_minus) < 1e-14) throw NumericalError("nanowire_transfer_matrix: vanishing transmission");
    const cplx d = c.ct_minus;
    return {(c.ct_plus * c.ct_minus - c.cr_plus * c.cr_minus) / d, c.cr_minus / d, -c.cr_plus / d, 1.0 / d};
}

ScatterCoefficients scatter_from_transfer(const TransferMatrix2& m)
{
    if (std::abs(m.m22) < 1e-300) throw NumericalError("scatter_from_transfer: singular matrix");
    ScatterCoefficients c;
    c.ct_minus = 1.0 / m.m22;
    c.cr_minus = m.m12 * c.ct_minus;
    c.cr_plus = -m.m21 * c.ct_minus;
    c.ct_plus = (m.m11 * c.ct_minus + c.cr_plus * c.cr_minus) / c.ct_minus;
    return c;
}

CouplingEngine::CouplingEngine(NanowireSpec spec, CavityGeometry cav, Polarization pol, CouplingMethod method,
                               CouplingSettings settings)
    : spec_(spec), cav_(cav), mode_(mode_geometry(cav)), pol_(pol), method_(method), settings_(settings),
      mie_(mie_coefficients(spec, cav.wavelength, settings.l_max))
{
}

void CouplingEngine::calibrate(double x0, double z0)
{
    NanowireSpec s = spec_;
    s.x0 = x0;
    s.z0 = z0;
    const auto field = make_field(s, mie_, mode_, pol_, method_, settings_);
    auto [nt, np] = initial_cap_mesh(cav_, mode_, x0, z0);
    std::shared_ptr<const CapMesh> best_l, best_r;
    for (auto side : {MirrorSide::left, MirrorSide::right}) {
        int t = nt, p = np;
        auto mesh = std::make_shared<const CapMesh>(build_cap_mesh(cav_, mode_, side, 0, 0, pol_, t, p));
        cplx prev = integrate_on_mesh(*mesh, field);
        bool ok = false;
        for (int level = 0; level < settings_.max_refinements; ++level) {
            auto finer = std::make_shared<const CapMesh>(build_cap_mesh(cav_, mode_, side, 0, 0, pol_, 2 * t, 2 * p));
            const cplx cur = integrate_on_mesh(*finer, field);
            if (std::abs(cur - prev) <= settings_.quadrature_tol * std::abs(cur) + 1e-12) {
                ok = true;
                break; // the coarser mesh already meets the tolerance
            }
            t *= 2;
            p *= 2;
            mesh = finer;
            prev = cur;
        }
        if (!ok) throw NumericalError("CouplingEngine: cap quadrature not converged at the calibration position");
        (side == MirrorSide::left ? best_l : best_r) = mesh;
    }
    std::lock_guard lock(mtx_);
    left_ = best_l;
    right_ = best_r;
}

std::pair<cplx, cplx> CouplingEngine::compute(double x0, double z0)
{
    std::shared_ptr<const CapMesh> l, r;
    {
        std::lock_guard lock(mtx_);
        l = left_;
        r = right_;
    }
    if (!l || !r) {
        calibrate(x0, z0);
        std::lock_guard lock(mtx_);
        l = left_;
        r = right_;
    }
    NanowireSpec s = spec_;
    s.x0 = std::abs(x0);
    s.z0 = z0;
    const auto field = make_field(s, mie_, mode_, pol_, method_, settings_);
    const cplx alpha = integrate_on_mesh(*r, field);
    const cplx beta = integrate_on_mesh(*l, field);
    return coefficients_from_projections(alpha, beta, mode_, z0);
}

std::pair<cplx, cplx> CouplingEngine::forward(double x0, double z0)
{
    // fundamental mode: C(-x0) = C(x0)
    const auto key = std::make_pair(std::llround(std::abs(x0) * 1e12), std::llround(z0 * 1e12));
    {
        std::lock_guard lock(mtx_);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
    }
    const auto v = compute(key.first * 1e-12, key.second * 1e-12);
    std::lock_guard lock(mtx_);
    memo_.emplace(key, v);
    return v;
}

ScatterCoefficients CouplingEngine::coefficients(double x0, double z0)
{
    auto c = extend_by_symmetry(forward(x0, z0), forward(x0, -z0), cav_);
    c.x0 = x0;
    c.z0 = z0;
    c.pol = pol_;
    c.method = method_;
    return c;
}

} // namespace nimcav
