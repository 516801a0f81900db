#include "nimcav/database.hpp"
#include "nimcav/hash.hpp"
#include "nimcav/optomech.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nimcav {

namespace {

// index i with nodes[i] <= v < nodes[i + 1] and the fraction; a value on a node
// gives that node with t = 0 (the upper neighbour then carries zero weight)
std::pair<std::size_t, double> locate(const std::vector<double>& nodes, double v)
{
    const double tol = 1e-9;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (std::abs(v - nodes[i]) <= tol * (std::abs(nodes[i]) + 1e-9)) return {i, 0.0};
    auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    if (it == nodes.begin() || it == nodes.end()) throw std::invalid_argument("CouplingDatabase: position outside the grid");
    const std::size_t i = std::size_t(it - nodes.begin()) - 1;
    return {i, (v - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

} // namespace

double fold_half_period(double z0, double wavelength)
{
    const double p = 0.5 * wavelength;
    if (std::abs(z0) <= 0.5 * p) return z0;   // both ends of the stored range stay put
    return z0 - std::round(z0 / p) * p;
}

CouplingDatabase::CouplingDatabase(NanowireSpec spec, CavityGeometry cav, Polarization pol, CouplingMethod method,
                                   CouplingSettings settings, std::vector<double> x0, std::vector<double> z0)
    : spec_(spec), cav_(cav), mode_(mode_geometry(cav)), pol_(pol), method_(method), settings_(settings), x_(std::move(x0))
{
    if (x_.empty() || z0.empty()) throw std::invalid_argument("CouplingDatabase: empty grid");
    if (!std::is_sorted(x_.begin(), x_.end()) || x_.front() != 0.0)
        throw std::invalid_argument("CouplingDatabase: x0 grid must be sorted and start at 0");
    if (!std::is_sorted(z0.begin(), z0.end()) || z0.front() != 0.0)
        throw std::invalid_argument("CouplingDatabase: z0 grid must be sorted and start at 0");
    if (z0.back() < 0.25 * cav.wavelength * (1.0 - 1e-9))
        throw std::invalid_argument("CouplingDatabase: z0 grid must reach lambda/4");
    if (!is_symmetric(cav)) throw std::invalid_argument("CouplingDatabase: needs a symmetric cavity");
    for (auto it = z0.rbegin(); it != z0.rend(); ++it)
        if (*it > 0.0) z_.push_back(-*it);
    z_.insert(z_.end(), z0.begin(), z0.end());
}

std::vector<double> CouplingDatabase::default_z_grid(const CavityGeometry& cav, double step)
{
    const double q = 0.25 * cav.wavelength;
    auto z = grid_range(0.0, q, step);
    if (q - z.back() > 1e-3 * step) z.push_back(q);
    else z.back() = q;
    return z;
}

std::vector<double> CouplingDatabase::default_x_grid(const CavityGeometry& cav, double step, double x_max)
{
    if (x_max <= 0.0) x_max = 2.0 * mode_geometry(cav).waist;
    auto x = grid_range(0.0, x_max, step);
    if (x_max - x.back() > 1e-3 * step) x.push_back(x_max);
    return x;
}

std::string CouplingDatabase::key_json() const
{
    nlohmann::json j;
    j["kind"] = "coupling-database";
    j["code_version"] = code_version;
    j["wire"] = {{"radius", spec_.radius}, {"index", spec_.refractive_index}};
    j["polarization"] = to_string(pol_);
    j["method"] = to_string(method_);
    j["settings"] = {{"l_max", settings_.l_max},
                     {"expansion_terms", settings_.expansion_terms},
                     {"expansion_delta_k", settings_.expansion_delta_k},
                     {"quadrature_tol", settings_.quadrature_tol},
                     {"max_refinements", settings_.max_refinements}};
    j["cavity"] = {{"length", cav_.length},
                   {"mirror_curvature", cav_.mirror_curvature},
                   {"mirror_size", cav_.mirror_size},
                   {"reflectivity_left", cav_.reflectivity_left},
                   {"reflectivity_right", cav_.reflectivity_right},
                   {"wavelength", cav_.wavelength},
                   {"order", cav_.longitudinal_order},
                   {"eta_left", cav_.eta_left},
                   {"eta_right", cav_.eta_right}};
    j["x0"] = x_;
    j["z0"] = z_;
    return j.dump();
}

std::string CouplingDatabase::key_hash() const { return sha256_hex(key_json()); }

void CouplingDatabase::populate(int threads)
{
    CouplingEngine engine(spec_, cav_, pol_, method_, settings_);
    // mesh fixed at the outermost node so the result does not depend on the evaluation order
    engine.calibrate(x_.back(), z_.back());
    std::vector<std::array<cplx, 2>> e(x_.size() * z_.size());
    parallel_for(e.size(), threads, [&](std::size_t k) {
        const auto f = engine.forward(x_[k / z_.size()], z_[k % z_.size()]);
        e[k] = {f.first, f.second};
    });
    fwd_ = std::move(e);
    populated_ = true;
}

void CouplingDatabase::set_entries(std::vector<std::array<cplx, 2>> e)
{
    if (e.size() != x_.size() * z_.size()) throw std::invalid_argument("CouplingDatabase: entry count mismatch");
    fwd_ = std::move(e);
    populated_ = true;
}

std::pair<cplx, cplx> CouplingDatabase::forward_interp(double x, double zf, double z_true, bool& interpolated) const
{
    const auto [i, tx] = locate(x_, x);
    const auto [j, tz] = locate(z_, zf);
    if (tx != 0.0 || tz != 0.0) interpolated = true;
    const std::size_t nz = z_.size();
    cplx cr = 0.0, ct = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double w = (a ? tx : 1.0 - tx) * (b ? tz : 1.0 - tz);
            if (w == 0.0) continue;
            const std::size_t ii = i + a, jj = j + b;
            const auto& e = fwd_[ii * nz + jj];
            cr += w * e[0] * std::exp(2.0 * I * mode_.phase0(z_[jj]));
            ct += w * e[1];
        }
    // exact nodes: return the stored value untouched
    if (!interpolated && zf == z_true) return {fwd_[i * nz + j][0], fwd_[i * nz + j][1]};
    return {cr * std::exp(-2.0 * I * mode_.phase0(z_true)), ct};
}

ScatterCoefficients CouplingDatabase::query(double x0, double z0) const
{
    if (!populated_) throw std::logic_error("CouplingDatabase::query before populate");
    if (!std::isfinite(x0) || !std::isfinite(z0)) throw std::invalid_argument("CouplingDatabase::query: non-finite position");
    const double ax = std::abs(x0);
    if (!covers(ax))
        throw std::invalid_argument(fmt::format("CouplingDatabase::query: |x0| = {:.4f} um outside the database ({:.4f} um)",
                                                ax * 1e6, x_.back() * 1e6));
    const double zf = fold_half_period(z0, cav_.wavelength);
    bool interp = false;
    const auto plus = forward_interp(ax, zf, z0, interp);
    const auto minus = forward_interp(ax, -zf, -z0, interp);
    auto c = extend_by_symmetry(plus, minus, cav_);
    c.x0 = x0;
    c.z0 = z0;
    c.pol = pol_;
    c.method = method_;
    c.interpolated = interp;
    return c;
}

} // namespace nimcav
