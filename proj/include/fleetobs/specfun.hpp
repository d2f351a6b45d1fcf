#pragma once

namespace fleetobs {

// Gauss error function, evaluated through the regularized incomplete gamma
// function P(1/2, x^2). Absolute error below 1e-10.
double erf(double x);

// Inverse of erf on (-1, 1), by safeguarded Newton iteration bracketed on
// erf itself. Throws std::domain_error for |p| >= 1.
double inv_erf(double p);

// Regularized lower incomplete gamma function P(a, x) = gamma(a,x)/Gamma(a),
// a > 0, x >= 0. Series expansion for x < a+1, Lentz continued fraction for
// the complement otherwise. Absolute error below 1e-10.
double reg_lower_gamma(double a, double x);

// x such that P(a, x) = p, for p in (0,1), a > 0. Bracketed Newton on
// reg_lower_gamma, accurate to ~1e-12 relative.
double inv_reg_lower_gamma(double p, double a);

}  // namespace fleetobs
