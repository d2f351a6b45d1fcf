#include "fleetobs/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fleetobs {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;

// Series for P(a,x), valid and fast for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x), valid for x >= a+1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("reg_lower_gamma: a must be > 0");
    if (x < 0.0) throw std::domain_error("reg_lower_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double erf(double x) {
    if (std::isnan(x)) return x;
    if (x == 0.0) return 0.0;
    const double p = reg_lower_gamma(0.5, x * x);
    return x > 0.0 ? p : -p;
}

double inv_erf(double p) {
    if (!(std::abs(p) < 1.0)) throw std::domain_error("inv_erf: |p| must be < 1");
    if (p == 0.0) return 0.0;
    const double target = std::abs(p);
    // erf(6) is 1 to machine precision, so [0, 6] brackets every attainable p.
    double lo = 0.0, hi = 6.0;
    double x = std::sqrt(-std::log1p(-target));  // rough start
    const double two_over_sqrt_pi = 1.1283791670955126;
    for (int i = 0; i < 200; ++i) {
        double f = erf(x) - target;
        if (f > 0.0) hi = x; else lo = x;
        double deriv = two_over_sqrt_pi * std::exp(-x * x);
        double step = f / deriv;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisect fallback
        if (std::abs(xn - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return p > 0.0 ? x : -x;
}

double inv_reg_lower_gamma(double p, double a) {
    if (!(a > 0.0)) throw std::domain_error("inv_reg_lower_gamma: a must be > 0");
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inv_reg_lower_gamma: p must be in (0,1)");
    // Expanding bracket around the mean of Gamma(a,1).
    double lo = 0.0;
    double hi = a + 1.0;
    while (reg_lower_gamma(a, hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e8) break;
    }
    double x = 0.5 * (lo + hi);
    const double lg = std::lgamma(a);
    for (int i = 0; i < 300; ++i) {
        double f = reg_lower_gamma(a, x) - p;
        if (f > 0.0) hi = x; else lo = x;
        // dP/dx = x^{a-1} e^{-x} / Gamma(a)
        double deriv = std::exp((a - 1.0) * std::log(x) - x - lg);
        double xn = (deriv > 0.0) ? x - f / deriv : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-14 * std::max(1.0, std::abs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

}  // namespace fleetobs
