#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracevo/grid.hpp"
#include "fracevo/sampler.hpp"
#include "fracevo/spectral_model.hpp"

namespace fracevo {

// Initial-value stack xi = (xi_0, ..., xi_{N-1}): derivative order k of the
// process at the start time, one coefficient per mode.
struct MarkovState {
    std::size_t order_count = 1;  // N
    std::size_t modes = 1;        // J
    std::vector<double> coeffs;   // [order][mode]

    MarkovState() = default;
    MarkovState(std::size_t n_orders, std::size_t n_modes)
        : order_count(n_orders), modes(n_modes), coeffs(n_orders * n_modes, 0.0) {}

    double at(std::size_t k, std::size_t j) const { return coeffs[k * modes + j]; }
    double& at(std::size_t k, std::size_t j) { return coeffs[k * modes + j]; }
};

// Sample paths of the process and its first N-1 mean-square derivatives.
struct StackedPath {
    TimeGrid grid;
    std::size_t replicates = 0;
    std::size_t orders = 0;
    std::size_t modes = 0;
    std::vector<double> stack;  // [replicate][order][mode][time]

    double at(std::size_t r, std::size_t ord, std::size_t j, std::size_t k) const {
        return stack[((r * orders + ord) * modes + j) * grid.n + k];
    }
    double& at(std::size_t r, std::size_t ord, std::size_t j, std::size_t k) {
        return stack[((r * orders + ord) * modes + j) * grid.n + k];
    }
};

// Incomplete gamma operator: mode j of Gamma_bar(n, tA) is the scalar
// multiplier Q(n, lambda_j t) = e^{-lambda_j t} sum_{i<n} (lambda_j t)^i / i!.
std::vector<double> inc_gamma_op(int n, double t, const SpectralModel& model);

// Deterministic transition map
//   zeta_N(t | t0) xi = sum_{k<N} ((t-t0)^k / k!) Gamma_bar(N-k, (t-t0)A) xi_k,
// returned per mode.
std::vector<double> zeta(std::size_t n_orders, double t, double t0, const MarkovState& state,
                         const SpectralModel& model);

// Derivatives of zeta_N(t|t0) xi of orders 0..N-1, computed by iterating the
// analytic recurrence (d/dt + A) zeta_N xi = zeta_{N-1} (xi_{k+1} + A xi_k).
// Orders >= 1 are undefined at t = t0 (one-sided limit); signaled.
// Returns [order][mode].
std::vector<std::vector<double>> zeta_derivative_stack(std::size_t n_orders, double t, double t0,
                                                       const MarkovState& state,
                                                       const SpectralModel& model);

// Z_N(t | t0, xi) = zeta_N(t|t0) xi + Z_N(t|t0) and its derivative stack.
// The stochastic part is advanced by the exact exponential map of the N-level
// first-order chain with cell-averaged noise loads; derivative slices are
// exact per-mode linear combinations of the chain levels, never differenced
// paths. The same increments therefore restart the scheme exactly.
StackedPath solve_initial_value(std::size_t n_orders, double t0, const MarkovState& state,
                                const TimeGrid& grid, const NoisePanel& noise,
                                const SpectralModel& model);

struct RestartReport {
    std::size_t n_orders = 0;
    double t0 = 0.0;
    double split = 0.0;
    double max_rel_residual = 0.0;
    std::vector<double> per_mode;  // per-mode max relative residual

    std::string to_json() const;
};

// Chapman-Kolmogorov restart check: solves on [t0, t1], reads the full stack
// at the split s, re-solves on [s, t1] with the identical increments, and
// reports max |left - right| over replicates/orders/modes/times relative to
// the per-mode path scale. s must be a grid node.
RestartReport restart_check(std::size_t n_orders, double t0, double s, const TimeGrid& grid,
                            const MarkovState& state, const NoisePanel& noise,
                            const SpectralModel& model);

struct ReconstructionReport {
    std::size_t n_orders = 0;
    double t0 = 0.0;
    double horizon = 0.0;
    std::vector<double> var_quadrature;  // per mode, route (a)
    std::vector<double> var_zeta_form;   // per mode, route (b)
    double max_rel_discrepancy = 0.0;
    // Monte Carlo cross-estimate (filled when replicates >= 2).
    double mc_estimate = 0.0;
    double mc_standard_error = 0.0;
    bool has_mc = false;

    std::string to_json() const;
};

// Verifies Var of the truncated process zeta_N(t|t0) Z_N-stack(t0) at
// horizon tau = t - t0 two ways: (a) quadrature of the kernel tail integral,
// (b) the zeta form applied to the exact joint covariance of the stationary
// stack (mixed derivatives of matern_cov). With replicates >= 2 an empirical
// estimate over sampled stationary stacks is attached.
ReconstructionReport reconstruction_check(std::size_t n_orders, double t0, double horizon,
                                          const SpectralModel& model, std::size_t replicates = 0,
                                          std::uint64_t seed = 0);

struct TransitionEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

// One solved stack-state at time t starting from the deterministic state x
// at time s, driven by the preassigned Monte Carlo stream `sample_index`.
// Building block of transition_operator; exposed so nested expectations
// (Chapman-Kolmogorov compositions) can reuse the intermediate states.
MarkovState transition_sample(std::size_t n_orders, double s, double t, const MarkovState& x,
                              std::size_t sample_index, std::uint64_t seed,
                              const SpectralModel& model, std::size_t steps = 256);

// Monte Carlo transition operator T_{s,t} phi(x) = E[phi(Z_N-stack(t | s, x))]
// over M independent solves from the deterministic state x, discretized with
// `steps` exact exponential steps.
TransitionEstimate transition_operator(std::size_t n_orders, double s, double t,
                                       const MarkovState& x,
                                       const std::function<double(const MarkovState&)>& phi,
                                       std::size_t mc_samples, std::uint64_t seed,
                                       const SpectralModel& model, std::size_t steps = 256);

// Stationary cross-covariance of mean-square derivatives,
//   Cov(Z^(n1)(t), Z^(n2)(t+h)) = (-1)^{n1} c^{(n1+n2)}(h),
// from the closed-form Matern covariance: exact product-moment algebra at
// h = 0, Bessel recurrences for n1+n2 <= 2, high-order central differences
// otherwise. Requires gamma - max(n1, n2) > 1/2.
double derivative_cov(double gamma, double lambda, double q, int n1, int n2, double h);

}  // namespace fracevo
