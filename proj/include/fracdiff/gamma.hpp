#pragma once

// Gamma function by the Lanczos approximation (g = 607/128, 15 terms) with the
// reflection formula for arguments below 1/2. Non-positive integers are poles:
// gamma() returns a signed infinity there and rgamma() returns exactly zero,
// which is what series with 1/Gamma coefficients need.

namespace fracdiff {

double gamma(double x);

// 1 / Gamma(x); exactly 0 at the poles x = 0, -1, -2, ...
double rgamma(double x);

// log |Gamma(x)|; +inf at poles. `sign`, when given, receives the sign of Gamma(x).
double lgamma(double x, int* sign = nullptr);

// sin(pi x) with exact zeros at the integers.
double sinpi(double x);

}  // namespace fracdiff
