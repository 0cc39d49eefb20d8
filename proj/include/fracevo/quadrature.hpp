#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracevo {

// Gauss-Legendre rule on [-1, 1]. Nodes/weights are computed once per order
// by Newton iteration on the Legendre recurrence and cached.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(std::size_t order);

// Fixed-order Gauss-Legendre on [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    std::size_t order = 32);

// Composite rule: `panels` equal subintervals of [a, b], `order` nodes each.
double integrate_gl_composite(const std::function<double(double)>& f, double a, double b,
                              std::size_t panels, std::size_t order = 16);

// Globally adaptive bisection built on nested GL rules. Error estimate per
// interval is |GL(2k) - GL(k)|. Throws std::runtime_error if the interval
// budget is exhausted before reaching the tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, std::size_t max_intervals = 4000);

// tanh-sinh (double-exponential) rule on a finite interval. Robust for
// integrable endpoint singularities such as x^alpha with alpha > -1.
// With require_convergence the rule throws std::runtime_error instead of
// returning the deepest-level value when the tolerance was not certified.
double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, int max_level = 12,
                           bool require_convergence = false);

// \int_a^\infty f, mapped through r = a + u/(1-u) and integrated adaptively.
// Requires f to decay fast enough to be integrable.
double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double abs_tol);

}  // namespace fracevo
