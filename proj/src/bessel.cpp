#include "nimcav/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nimcav {

namespace {

constexpr double euler_gamma = 0.57721566490153286061;
constexpr double asymptotic_threshold = 25.0;

// Hankel's expansion for J_nu, Y_nu with nu = 0 or 1.
void hankel_asymptotic(int nu, double x, double& jv, double& yv)
{
    const double mu = 4.0 * nu * nu;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
        if (std::abs(term) > last) break; // series starts diverging
        last = std::abs(term);
        // term is a_k / x^k; signs alternate in pairs
        if (k % 2 == 1)
            q += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        else
            p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        if (last < 1e-17) break;
    }
    const double chi = x - (0.5 * nu + 0.25) * pi;
    const double amp = std::sqrt(2.0 / (pi * x));
    const double c = std::cos(chi), s = std::sin(chi);
    jv = amp * (p * c - q * s);
    yv = amp * (p * s + q * c);
}

void miller_j(int nmax, double x, std::vector<double>& j, int& top)
{
    const double big = std::max<double>(nmax, x);
    top = 2 * ((static_cast<int>(big) + 20 + static_cast<int>(std::sqrt(60.0 * big))) / 2);
    j.assign(top + 2, 0.0);
    double jp1 = 0.0, jk = 1e-300;
    j[top] = jk;
    for (int k = top; k >= 1; --k) {
        const double jm1 = (2.0 * k / x) * jk - jp1;
        jp1 = jk;
        jk = jm1;
        j[k - 1] = jk;
        if (std::abs(jk) > 1e250) {
            for (int m = k - 1; m <= top; ++m) j[m] *= 1e-250;
            jk *= 1e-250;
            jp1 *= 1e-250;
        }
    }
    double norm = j[0];
    for (int k = 2; k <= top; k += 2) norm += 2.0 * j[k];
    for (auto& v : j) v /= norm;
}

void series_small(int nmax, double x, std::vector<double>& j)
{
    // two-term power series, adequate for x < 1e-6
    j.assign(nmax + 1, 0.0);
    double pw = 1.0, fact = 1.0;
    const double h = 0.5 * x;
    for (int n = 0; n <= nmax; ++n) {
        if (n > 0) {
            pw *= h;
            fact *= n;
        }
        j[n] = pw / fact * (1.0 - h * h / (n + 1));
    }
}

} // namespace

void bessel_jy(int nmax, double x, std::vector<double>& j, std::vector<double>& y)
{
    if (nmax < 0) throw std::invalid_argument("bessel_jy: negative order");
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("bessel_jy: argument must be positive");
    const int n1 = std::max(nmax, 1);
    y.assign(n1 + 1, 0.0);

    if (x >= asymptotic_threshold && nmax < x) {
        j.assign(n1 + 1, 0.0);
        hankel_asymptotic(0, x, j[0], y[0]);
        hankel_asymptotic(1, x, j[1], y[1]);
        for (int n = 1; n < n1; ++n) {
            j[n + 1] = (2.0 * n / x) * j[n] - j[n - 1];
        }
    } else if (x < 1e-6) {
        series_small(n1 + 2, x, j);
        const double lg = std::log(0.5 * x) + euler_gamma;
        y[0] = (2.0 / pi) * lg * j[0];
        y[1] = -2.0 / (pi * x) + (2.0 / pi) * lg * j[1] - j[1] / pi;
    } else {
        int top = 0;
        miller_j(n1 + 2, x, j, top);
        const double lg = std::log(0.5 * x) + euler_gamma;
        double s0 = 0.0, s1 = 0.0;
        for (int k = 1; 2 * k + 1 <= top; ++k) {
            const double sg = (k % 2 == 0) ? 1.0 : -1.0;
            s0 += sg * j[2 * k] / k;
            s1 += sg * (j[2 * k - 1] - j[2 * k + 1]) / k;
        }
        y[0] = (2.0 / pi) * (lg * j[0] - 2.0 * s0);
        y[1] = (2.0 / pi) * (lg * j[1] - j[0] / x + s1);
    }
    for (int n = 1; n < n1; ++n) y[n + 1] = (2.0 * n / x) * y[n] - y[n - 1];
    j.resize(nmax + 1);
    y.resize(nmax + 1);
}

std::vector<double> bessel_j_orders(int nmax, double x)
{
    if (nmax < 0) throw std::invalid_argument("bessel_j_orders: negative order");
    if (x < 0.0 || !std::isfinite(x)) throw std::invalid_argument("bessel_j_orders: argument must be >= 0");
    std::vector<double> j;
    if (x == 0.0) {
        j.assign(nmax + 1, 0.0);
        j[0] = 1.0;
        return j;
    }
    if (x < 1e-6) {
        series_small(nmax, x, j);
        return j;
    }
    if (x >= asymptotic_threshold && nmax < x) {
        std::vector<double> y;
        bessel_jy(nmax, x, j, y);
        return j;
    }
    int top = 0;
    miller_j(nmax, x, j, top);
    j.resize(nmax + 1);
    return j;
}

double bessel_j(int n, double x)
{
    const int an = std::abs(n);
    const double sx = x < 0.0 ? ((an % 2) ? -1.0 : 1.0) : 1.0;
    const double sn = (n < 0 && an % 2) ? -1.0 : 1.0;
    return sx * sn * bessel_j_orders(an, std::abs(x))[an];
}

double bessel_y(int n, double x)
{
    const int an = std::abs(n);
    std::vector<double> j, y;
    bessel_jy(an, x, j, y);
    const double sn = (n < 0 && an % 2) ? -1.0 : 1.0;
    return sn * y[an];
}

cplx hankel1(int n, double x)
{
    const int an = std::abs(n);
    std::vector<double> j, y;
    bessel_jy(an, x, j, y);
    const double sn = (n < 0 && an % 2) ? -1.0 : 1.0;
    return sn * cplx(j[an], y[an]);
}

CylinderFunctions cylinder_functions(int lmax, double x, bool with_hankel)
{
    if (lmax < 0) throw std::invalid_argument("cylinder_functions: negative lmax");
    CylinderFunctions cf;
    cf.lmax = lmax;
    const std::size_t size = 2 * lmax + 1;
    cf.j.resize(size);
    cf.dj.resize(size);
    std::vector<double> j, y;
    if (with_hankel) {
        bessel_jy(lmax + 1, x, j, y);
        cf.h.resize(size);
        cf.dh.resize(size);
    } else {
        j = bessel_j_orders(lmax + 1, x);
    }
    for (int n = 0; n <= lmax; ++n) {
        // Z_n' = Z_{n-1} - (n/x) Z_n with Z_{-1} = -Z_1; at x = 0 only J_1'(0) = 1/2 survives
        double djn;
        if (x == 0.0)
            djn = (n == 1) ? 0.5 : 0.0;
        else
            djn = (n == 0) ? -j[1] : j[n - 1] - n / x * j[n];
        const double sg = (n % 2) ? -1.0 : 1.0;
        cf.j[lmax + n] = j[n];
        cf.dj[lmax + n] = djn;
        cf.j[lmax - n] = sg * j[n];
        cf.dj[lmax - n] = sg * djn;
        if (with_hankel) {
            const double dyn = (n == 0) ? -y[1] : y[n - 1] - n / x * y[n];
            const cplx hn(j[n], y[n]), dhn(djn, dyn);
            cf.h[lmax + n] = hn;
            cf.dh[lmax + n] = dhn;
            cf.h[lmax - n] = sg * hn;
            cf.dh[lmax - n] = sg * dhn;
        }
    }
    return cf;
}

} // namespace nimcav
