// Test-only reference implementations, independent of the library's
// evaluation paths: erf by long-double Maclaurin series, the regularized
// incomplete gamma by composite-Simpson quadrature, and seeded Monte Carlo
// samplers for distribution cross-checks.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "fleetobs/rng.hpp"

namespace oracles {

// erf via the Maclaurin series 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1)),
// reliable to ~1e-16 for |x| <= 3.5.
inline long double erf_series(long double x) {
    const long double two_over_sqrt_pi = 1.128379167095512573896158903122L;
    long double term = x;
    long double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-22L * std::abs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

// Bisection on the series; p in (0,1).
inline double inv_erf_bisect(double p) {
    long double lo = 0.0L, hi = 3.5L;
    for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        if (erf_series(mid) < p) lo = mid;
        else hi = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

// Regularized lower incomplete gamma P(a, x) by composite Simpson.
// For a >= 1 the integrand t^(a-1) e^(-t) is smooth on [0, x]; for a < 1
// substitute t = u^(1/a), giving the smooth integrand e^(-u^(1/a)) / a on
// [0, x^a] (the Jacobian cancels the singularity exactly).
inline double reg_lower_gamma_quadrature(double a, double x) {
    if (x <= 0.0) return 0.0;
    const std::size_t intervals = 200000;  // even
    long double sum = 0.0L;
    if (a >= 1.0) {
        const long double h = static_cast<long double>(x) / intervals;
        auto f = [&](long double t) -> long double {
            if (t <= 0.0L) return a == 1.0 ? 1.0L : 0.0L;
            return std::exp((a - 1.0L) * std::log(t) - t);
        };
        sum = f(0.0L) + f(x);
        for (std::size_t i = 1; i < intervals; ++i)
            sum += f(i * h) * ((i % 2) ? 4.0L : 2.0L);
        sum *= h / 3.0L;
    } else {
        const long double upper = std::pow(static_cast<long double>(x),
                                           static_cast<long double>(a));
        const long double h = upper / intervals;
        auto f = [&](long double u) -> long double {
            if (u <= 0.0L) return 1.0L / a;
            return std::exp(-std::pow(u, 1.0L / a)) / a;
        };
        sum = f(0.0L) + f(upper);
        for (std::size_t i = 1; i < intervals; ++i)
            sum += f(i * h) * ((i % 2) ? 4.0L : 2.0L);
        sum *= h / 3.0L;
    }
    return static_cast<double>(sum / std::tgamma(static_cast<long double>(a)));
}

// Marsaglia-Tsang Gamma(a, 1) sampler (a >= 1) on the project RNG.
inline double sample_gamma(fleetobs::RngStream& rng, double a) {
    if (a < 1.0) throw std::invalid_argument("oracle gamma sampler needs a >= 1");
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = rng.standard_normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v)))
            return d * v;
    }
}

}  // namespace oracles
