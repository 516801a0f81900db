#include "nimcav/cavity.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nimcav {

namespace {

// phase k z - Psi(z_gouy) between two planes
TransferMatrix2 hop(const ModeGeometry& m, double z1, double g1, double z2, double g2)
{
    return phase_matrix(m.k() * (z2 - z1) - (m.gouy(g2) - m.gouy(g1)));
}

void check_length(double L)
{
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("cavity length must be positive");
}

} // namespace

TransferMatrix2 cavity_transfer_matrix(const CavityGeometry& cav, const ScatterCoefficients* nw, double L)
{
    check_length(L);
    const auto m = mode_geometry(cav);
    const double hl = 0.5 * L, hn = 0.5 * cav.length;
    const auto ml = mirror_matrix(cav.reflectivity_left, cav.eta_left);
    const auto mr = mirror_matrix(cav.reflectivity_right, cav.eta_right);
    if (!nw) return mr * hop(m, -hl, -hn, hl, hn) * ml;
    const double z0 = nw->z0;
    if (!(std::abs(z0) < hl)) throw std::invalid_argument("nanowire outside the cavity");
    return mr * hop(m, z0, z0, hl, hn) * nanowire_transfer_matrix(*nw) * hop(m, -hl, -hn, z0, z0) * ml;
}

CavityResponse cavity_response(const CavityGeometry& cav, const ScatterCoefficients* nw, double L, Polarization pol)
{
    const auto M = cavity_transfer_matrix(cav, nw, L);
    if (std::abs(M.m22) < 1e-300) throw NumericalError("cavity_response: singular transfer matrix");
    CavityResponse r;
    r.cavity_length = L;
    r.pol = nw ? nw->pol : pol;
    r.c_r = -M.m21 / M.m22;
    r.c_t = M.det() / M.m22;
    r.C_R = std::norm(r.c_r);
    r.C_T = std::norm(r.c_t);
    r.C_L = 1.0 - r.C_R - r.C_T;
    if (r.C_L < 0.0 && r.C_L > -1e-9) r.C_L = 0.0;
    return r;
}

double nominal_resonance(const CavityGeometry& cav)
{
    // empty cavity, eta_L eta_R = -1: k L - 2 Psi(L/2) = N pi
    const auto m = mode_geometry(cav);
    const double gouy = 2.0 * m.gouy(0.5 * cav.length);
    const double extra = cav.eta_left * cav.eta_right < 0 ? 0.0 : 0.5 * pi;
    return (cav.longitudinal_order * pi + gouy + extra) / cav.k();
}
double free_spectral_range(const CavityGeometry& cav) { return 0.5 * cav.wavelength; }

double cavity_linewidth_angular(double length, double finesse)
{
    return 2.0 * pi * (c_light / (2.0 * length)) / finesse;
}

namespace {

struct LorentzFunctor : Eigen::DenseFunctor<double> {
    const std::vector<double>& x;
    const std::vector<double>& y;
    double x0, sx;   // centring / scaling of the abscissa

    LorentzFunctor(const std::vector<double>& xs, const std::vector<double>& ys, double c, double s)
        : Eigen::DenseFunctor<double>(4, int(xs.size())), x(xs), y(ys), x0(c), sx(s) {}

    int operator()(const InputType& p, ValueType& f) const
    {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = 2.0 * ((x[i] - x0) / sx - p(2)) / p(3);
            f(i) = p(0) + p(1) / (1.0 + u * u) - y[i];
        }
        return 0;
    }
    int df(const InputType& p, JacobianType& j) const
    {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = (x[i] - x0) / sx - p(2);
            const double u = 2.0 * d / p(3);
            const double q = 1.0 / (1.0 + u * u);
            j(i, 0) = 1.0;
            j(i, 1) = q;
            j(i, 2) = p(1) * q * q * 8.0 * d / (p(3) * p(3));
            j(i, 3) = p(1) * q * q * 8.0 * d * d / (p(3) * p(3) * p(3));
        }
        return 0;
    }
};

} // namespace

LorentzFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y, const LorentzFit& guess)
{
    if (x.size() != y.size() || x.size() < 5) throw std::invalid_argument("fit_lorentzian: need at least 5 points");
    if (!(guess.fwhm > 0.0)) throw std::invalid_argument("fit_lorentzian: initial width must be positive");
    const double sx = guess.fwhm;
    LorentzFunctor f(x, y, guess.center, sx);
    Eigen::VectorXd p(4);
    p << guess.offset, guess.amplitude, 0.0, 1.0;
    Eigen::LevenbergMarquardt<LorentzFunctor> lm(f);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.setMaxfev(2000);
    lm.minimize(p);
    LorentzFit out;
    out.offset = p(0);
    out.amplitude = p(1);
    out.center = guess.center + p(2) * sx;
    out.fwhm = std::abs(p(3)) * sx;
    Eigen::VectorXd r(x.size());
    f(p, r);
    out.residual = std::sqrt(r.squaredNorm() / double(x.size())) / std::max(std::abs(out.amplitude), 1e-300);
    if (!std::isfinite(out.center) || !std::isfinite(out.fwhm))
        throw NumericalError("fit_lorentzian: fit diverged");
    return out;
}

ResonanceOptions& resonance_defaults()
{
    static ResonanceOptions opt;
    return opt;
}

ResonanceResult find_resonance(const CavityGeometry& cav, const ScatterCoefficients* nw, double center,
                               const ResonanceOptions& opt)
{
    const double fsr = free_spectral_range(cav);
    const double hw = opt.half_window > 0.0 ? opt.half_window : 0.3 * fsr;
    if (hw >= 0.5 * fsr) throw std::invalid_argument("find_resonance: window wider than one free spectral range");
    auto ct = [&](double L) { return cavity_response(cav, nw, L).C_T; };

    // coarse scan: FSR/2000, or finer when the empty cavity peak would be undersampled
    const double fwhm0 = fsr / mirror_finesse(cav);
    const double step = opt.coarse_step > 0.0 ? opt.coarse_step : std::min(fsr / 2000.0, fwhm0 / 4.0);
    const int n = static_cast<int>(std::ceil(2.0 * hw / step));
    std::vector<double> ys(n + 1);
    int best = 0;
    for (int i = 0; i <= n; ++i) {
        ys[i] = ct(center - hw + i * step);
        if (ys[i] > ys[best]) best = i;
    }
    const double ymax = ys[best], ymin = *std::min_element(ys.begin(), ys.end());
    if (!(ymax > 0.0) || ymax - ymin < 1e-3 * ymax)
        throw NumericalError(fmt::format("find_resonance: no transmission peak near L = {:.6f} um", center * 1e6));
    if (best == 0 || best == n)
        throw NumericalError(fmt::format("find_resonance: peak at the window edge near L = {:.6f} um", center * 1e6));
    int regions = 0;
    const double half_level = 0.5 * (ymax + ymin);
    for (int i = 0; i <= n; ++i)
        if (ys[i] > half_level && (i == 0 || ys[i - 1] <= half_level)) ++regions;
    if (regions > 1) throw NumericalError("find_resonance: several peaks in the scan window");

    // refine the maximum, then the half-maximum crossings
    // Brent in units of the coarse step around the sample (its tolerance has an absolute part)
    const double lc = center - hw + best * step;
    const auto mx = boost::math::tools::brent_find_minima([&](double u) { return -ct(lc + u * step); }, -1.0, 1.0,
                                                          std::numeric_limits<double>::digits / 2);
    const double lpk = lc + mx.first * step, ypk = -mx.second;
    const double half = 0.5 * (ypk + ymin);
    auto crossing = [&](double lo, double hi) {
        boost::math::tools::eps_tolerance<double> tol(48);
        std::uintmax_t it = 200;
        auto r = boost::math::tools::bisect([&](double L) { return ct(L) - half; }, lo, hi, tol, it);
        return 0.5 * (r.first + r.second);
    };
    double lo = lpk, hi = lpk;
    while (ct(lo) > half) {
        lo -= step;
        if (lo < center - hw) throw NumericalError("find_resonance: peak wider than the scan window");
    }
    while (ct(hi) > half) {
        hi += step;
        if (hi > center + hw) throw NumericalError("find_resonance: peak wider than the scan window");
    }
    const double left = crossing(lo, lpk), right = crossing(lpk, hi);
    const double width = right - left;

    // Lorentzian fit over +-5 FWHM at FWHM/20 sampling
    const double span = std::min(5.0 * width, hw);
    const int m = static_cast<int>(std::ceil(2.0 * span / (width / 20.0)));
    std::vector<double> xs(m + 1), fy(m + 1);
    double base = ypk;
    for (int i = 0; i <= m; ++i) {
        xs[i] = lpk - span + 2.0 * span * i / m;
        fy[i] = ct(xs[i]);
        base = std::min(base, fy[i]);
    }
    LorentzFit g;
    g.offset = base;
    g.amplitude = ypk - base;
    g.center = lpk;
    g.fwhm = width;
    const auto fit = fit_lorentzian(xs, fy, g);
    if (fit.residual > opt.max_fit_residual)
        throw NumericalError(fmt::format("find_resonance: Lorentzian residual {:.3g} above {:.3g}", fit.residual,
                                         opt.max_fit_residual));

    ResonanceResult r;
    r.resonant_length = fit.center;
    r.linewidth_length = fit.fwhm;
    r.finesse = fsr / fit.fwhm;
    r.linewidth_angular = cavity_linewidth_angular(fit.center, r.finesse);
    r.peak_transmission = ypk;
    r.fit_residual = fit.residual;
    return r;
}

IntracavityAmplitudes intracavity_amplitudes(const CavityGeometry& cav, const ScatterCoefficients* nw, double L)
{
    const auto resp = cavity_response(cav, nw, L);
    const auto m = mode_geometry(cav);
    const double hl = 0.5 * L, hn = 0.5 * cav.length;
    const auto ml = mirror_matrix(cav.reflectivity_left, cav.eta_left);
    const ReducedFieldPair in{1.0, resp.c_r};
    const auto a = hop(m, -hl, -hn, 0.0, 0.0) * (ml * in);
    IntracavityAmplitudes out;
    out.A_plus = a.forward;
    out.A_minus = a.backward;
    if (!nw) {
        out.B_plus = a.forward;
        out.B_minus = a.backward;
        return out;
    }
    const double z0 = nw->z0;
    const auto b = hop(m, z0, z0, 0.0, 0.0) * (nanowire_transfer_matrix(*nw) * (hop(m, -hl, -hn, z0, z0) * (ml * in)));
    out.B_plus = b.forward;
    out.B_minus = b.backward;
    return out;
}

double intracavity_photon_number(const CavityGeometry& cav, const IntracavityAmplitudes& a, double L, double z0,
                                 double p_inc)
{
    const double u = p_inc / c_light *
                     ((std::norm(a.A_plus) + std::norm(a.A_minus)) * (0.5 * L + z0) +
                      (std::norm(a.B_plus) + std::norm(a.B_minus)) * (0.5 * L - z0));
    const double omega = 2.0 * pi * c_light / cav.wavelength;
    return u / (hbar * omega);
}

} // namespace nimcav
