#pragma once

#include "nimcav/constants.hpp"

#include <vector>

namespace nimcav {

// Integer-order Bessel functions of real positive argument.
// J uses Miller's downward recurrence normalised by J0 + 2*sum(J_2k) = 1;
// Y0/Y1 come from the Neumann series of those J values and Y_n from upward
// recurrence. Above x = 25 the Hankel asymptotic series seeds orders 0 and 1.
void bessel_jy(int nmax, double x, std::vector<double>& j, std::vector<double>& y);
std::vector<double> bessel_j_orders(int nmax, double x);

double bessel_j(int n, double x);
double bessel_y(int n, double x);
cplx hankel1(int n, double x);

// Cylinder functions for orders -lmax..lmax (index l + lmax), with derivatives.
struct CylinderFunctions {
    int lmax = 0;
    std::vector<double> j, dj;   // J_l(x), J_l'(x)
    std::vector<cplx> h, dh;     // H_l(x), H_l'(x) (first kind)

    double J(int l) const { return j[l + lmax]; }
    double dJ(int l) const { return dj[l + lmax]; }
    cplx H(int l) const { return h[l + lmax]; }
    cplx dH(int l) const { return dh[l + lmax]; }
};

// with_hankel = false skips Y (for interior arguments).
CylinderFunctions cylinder_functions(int lmax, double x, bool with_hankel = true);

} // namespace nimcav
