#pragma once

#include <cstdint>

namespace fracevo {

// Value plus a committed absolute error bound.
struct SpecFunResult {
    double value = 0.0;
    double est_abs_error = 0.0;
};

// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
// Relative error below 1e-12 over the positive axis.
double ln_gamma(double x);

// Euler beta function B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), a, b > 0.
// Evaluated in log space.
double beta(double a, double b);

// Regularized upper incomplete gamma of integer order:
//   Q(n, x) = e^{-x} sum_{j=0}^{n-1} x^j / j!,     n >= 1, x >= 0.
double reg_upper_gamma(int n, double x);

// Regularized incomplete gamma functions of real order a > 0, x >= 0.
// P is computed by the power series for x < a + 1 and as 1 - Q otherwise;
// Q by the Lentz continued fraction. P + Q = 1.
double lower_gamma_reg(double a, double x);
double upper_gamma_reg(double a, double x);

// Modified Bessel function of the second kind, K_nu(x), for x > 0 and
// |nu| <= ~10 (K_{-nu} = K_nu). Evaluated from the integral representation
//   K_nu(x) = int_0^inf exp(-x cosh u) cosh(nu u) du
// on composite Gauss-Legendre panels, truncated where the integrand has
// decayed below 1e-18 of its peak.
double bessel_k(double nu, double x);

// log K_nu(x); the peak of the log-integrand is factored out so the result
// stays representable when K_nu itself would overflow.
double bessel_k_ln(double nu, double x);

// K_nu(x) together with the committed absolute error bound (difference of
// two panel refinements plus the tail bound).
SpecFunResult bessel_k_est(double nu, double x);

}  // namespace fracevo
