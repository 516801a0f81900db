#include "nimcav/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <map>
#include <mutex>
#include <stdexcept>

namespace nimcav {

const QuadratureRule& gauss_legendre_rule(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre_rule: n must be >= 1");
    static std::mutex mtx;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    // Boost returns the non-negative zeros in ascending order
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    QuadratureRule rule;
    auto weight = [n](double x) {
        const double dp = boost::math::legendre_p_prime<double>(n, x);
        return 2.0 / ((1.0 - x * x) * dp * dp);
    };
    for (auto it2 = zeros.rbegin(); it2 != zeros.rend(); ++it2) {
        if (*it2 == 0.0) continue;
        rule.nodes.push_back(-*it2);
        rule.weights.push_back(weight(*it2));
    }
    for (double z : zeros) {
        rule.nodes.push_back(z);
        rule.weights.push_back(weight(z));
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n)
{
    const auto& rule = gauss_legendre_rule(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

} // namespace nimcav
