#pragma once

// Test-side numerical oracles, kept independent of the library's quadrature
// machinery: plain adaptive Simpson with interval bisection.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double whole, double tol, int depth) {
    const double c = 0.5 * (a + b);
    const double left = simpson(f, a, c);
    const double right = simpson(f, c, b);
    if (depth <= 0) return left + right;
    // Noise floor: once the deficit is at rounding level, refining only
    // grows the tree without gaining accuracy. The children keep the parent
    // tolerance; halving it per level forces full-tree blowups at kinks.
    const double gate = 15.0 * (tol + 1e-15 * std::abs(whole));
    if (std::abs(left + right - whole) < gate)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, c, left, tol, depth - 1) +
           adaptive_simpson_rec(f, c, b, right, tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int depth = 44) {
    return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, depth);
}

// Integrates f over [a, inf) by splitting at a + 2^k until the increment is
// negligible.
inline double integrate_tail(const std::function<double(double)>& f, double a,
                             double tol = 1e-12) {
    double total = 0.0;
    double lo = a;
    double width = 1.0;
    for (int k = 0; k < 80; ++k) {
        const double hi = lo + width;
        const double piece = integrate(f, lo, hi, tol);
        total += piece;
        if (k > 4 && std::abs(piece) < tol) break;
        lo = hi;
        width *= 2.0;
    }
    return total;
}

}  // namespace oracles
