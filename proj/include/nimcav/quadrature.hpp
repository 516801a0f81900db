#pragma once

#include <functional>
#include <vector>

namespace nimcav {

struct QuadratureRule {
    std::vector<double> nodes, weights; // on [-1, 1]
};

// n-point Gauss-Legendre rule (nodes from Boost.Math), cached per n.
const QuadratureRule& gauss_legendre_rule(int n);

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n);

} // namespace nimcav
