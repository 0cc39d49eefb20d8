#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fracevo/grid.hpp"
#include "fracevo/sampler.hpp"
#include "fracevo/spectral_model.hpp"

namespace fracevo {

// Fractional Q-Wiener specification: Hurst parameter plus the spatial
// covariance eigenvalues.
struct FqwSpec {
    double hurst = 0.5;
    SpectralModel model;

    FqwSpec(double h, SpectralModel m);
};

// Moving-average normalization constant
//   C_H = int | (1-r)_+^{H-1/2} - (-r)_+^{H-1/2} |^2 dr
//       = ((3-2H)/(4H)) B(2-2H, H+1/2).
double mvn_constant(double hurst);

// Two-sided moving-average kernel
//   K_H(t, r) = ((t-r)_+^{H-1/2} - (-r)_+^{H-1/2}) / sqrt(C_H),
// with x_+^a = x^a for x > 0 and 0 otherwise. The sqrt normalization makes
// the kernel autocovariance at (1,1) exactly one, i.e. the process variance
// at t = 1 equals the Q-weight.
double mvn_kernel(double hurst, double t, double r);

// Covariance factor (per unit q): (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2.
double fqw_cov(double hurst, double s, double t);

// int_R K_H(s,r) K_H(t,r) dr by singularity-aware quadrature (panels split
// at r in {0, s, t}, double-exponential rules, mapped tail). Absolute error
// <= 1e-6.
double kernel_cov_quadrature(double hurst, double s, double t);

// Per mode, a mean-zero Gaussian vector with covariance q_j fqw_cov(H, t_k, t_l)
// through a symmetric factorization; the grid may be two-sided.
ModeEnsemble sample_fqw(const FqwSpec& spec, const TimeGrid& grid, std::size_t replicates,
                        std::uint64_t seed);

// Mean-square gap between the fractional Q-Wiener process with H = gamma-1/2
// and the shifted mild solution with A = eps Id, per unit trace weight:
//   (I1(t) + I2(t)) / C_{gamma-1/2},
//   I1 = int_0^|t| s^{2g-2} (1-e^{-eps s})^2 ds,
//   I2 = int_0^inf | (|t|+s)^{g-1}(1-e^{-eps(|t|+s)}) - s^{g-1}(1-e^{-eps s}) |^2 ds.
// Requires gamma in (1/2, 3/2).
double limit_mse(double gamma, double epsilon, double t);

// Same quantity with I2 truncated to [0, s_max]: the exact target for a
// Monte Carlo estimate built from increments on [-s_max, |t|].
double limit_mse_truncated(double gamma, double epsilon, double t, double s_max);

struct LimitDiagnostics {
    double gamma = 0.0;
    double t = 0.0;
    std::vector<double> epsilons;
    std::vector<double> mse;
    double fitted_slope = 0.0;  // least squares on log mse vs log eps; expect 3 - 2 gamma

    std::string to_json() const;
};

// Sweeps limit_mse over a decreasing epsilon list (>= 4 values spanning at
// least two decades) and fits the log-log rate.
LimitDiagnostics limit_rate(double gamma, const std::vector<double>& epsilons, double t);

// Builds the fractional process W_hat_{gamma-1/2} and the normalized shifted
// solution Zbar_gamma^eps from the SAME panel increments by cell-exact kernel
// loading. Evaluation times are the nodes of eval_grid, which must be nodes
// of the (finer, wider) noise grid and must include 0.
std::pair<ModeEnsemble, ModeEnsemble> coupled_paths(double gamma, double epsilon,
                                                    const SpectralModel& model,
                                                    const TimeGrid& eval_grid,
                                                    const NoisePanel& noise);

struct SelfSimilarityReport {
    double hurst = 0.0;
    double max_scaling_residual = 0.0;    // |cov(as,at) - a^{2H} cov(s,t)|
    double max_increment_residual = 0.0;  // |Var(W(t+h)-W(t)) - |h|^{2H}|
    bool pass = false;

    std::string to_json() const;
};

// Deterministic covariance-level checks of self-similarity with exponent H
// and stationarity of increments, on a fixed parameter grid, at 1e-12.
SelfSimilarityReport stationarity_and_selfsimilarity_check(double hurst);

}  // namespace fracevo
