#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracevo/grid.hpp"
#include "fracevo/spectral_model.hpp"

namespace fracevo {

// White-noise increments of the two-sided Q-Wiener process over the grid
// cells: increment (r, j, k) ~ N(0, q_j dt), independent across all indices,
// a pure function of (seed, replicate, mode, cell).
struct NoisePanel {
    TimeGrid grid;
    std::size_t replicates = 0;
    std::size_t modes = 0;
    std::uint64_t seed = 0;
    std::vector<double> increments;  // [replicate][mode][cell], cell count = n - 1

    double at(std::size_t r, std::size_t j, std::size_t k) const {
        return increments[(r * modes + j) * (grid.n - 1) + k];
    }
};

// `replicate_offset` shifts the stream keys so a large ensemble can be
// generated in batches without changing any draw: batch b of size B holds
// the increments of global replicates [bB, (b+1)B).
NoisePanel gen_noise(const SpectralModel& model, const TimeGrid& grid,
                     std::size_t replicates, std::uint64_t seed,
                     std::size_t replicate_offset = 0);

// Replicated per-mode sample paths plus a tag recording which sampler
// produced them.
struct ModeEnsemble {
    TimeGrid grid;
    std::size_t replicates = 0;
    std::size_t modes = 0;
    double gamma = 0.0;
    std::string construction;
    std::vector<double> paths;  // [replicate][mode][time]

    double at(std::size_t r, std::size_t j, std::size_t k) const {
        return paths[(r * modes + j) * grid.n + k];
    }
    double& at(std::size_t r, std::size_t j, std::size_t k) {
        return paths[(r * modes + j) * grid.n + k];
    }
};

// Stationary temporal covariance of the mild solution for A = lambda Id:
//   c(h) = q * [2^{1/2-g} lambda^{1-2g} / (sqrt(pi) Gamma(g))]
//              * (lambda|h|)^{g-1/2} K_{g-1/2}(lambda|h|),
// with the analytic limit c(0) = q Gamma(2g-1) / (Gamma(g)^2 (2 lambda)^{2g-1}).
// Requires gamma > 1/2.
double matern_cov(double gamma, double lambda, double q, double h);

// Exact-in-law stationary sampling: per mode, a mean-zero Gaussian vector
// with covariance [matern_cov(gamma, lambda_j, q_j, t_k - t_l)] drawn through
// a symmetric factorization. Modes and replicates are independent streams.
ModeEnsemble sample_stationary(const SpectralModel& model, double gamma,
                               const TimeGrid& grid, std::size_t replicates,
                               std::uint64_t seed);

// Finite-start solution Z_gamma(t | t0) as a discrete stochastic convolution:
// the kernel (t-s)^{gamma-1} e^{-lambda (t-s)} / Gamma(gamma) is integrated
// exactly over every increment cell (incomplete-gamma differences) and
// applied to the panel increments. Requires grid.t0 == t0 up to rounding and
// gamma > 1/2.
ModeEnsemble sample_convolution(const SpectralModel& model, double gamma, double t0,
                                const TimeGrid& grid, const NoisePanel& noise);

// Cell-average weights used by sample_convolution: weight(l) multiplies the
// increment of cell ending l steps before the evaluation time.
std::vector<double> convolution_weights(double gamma, double lambda, double dt,
                                        std::size_t cells);

struct CovEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

// Unbiased cross moment (1/R) sum_r X_r(s) X_r(t) per mode (the processes are
// mean zero by construction), with jackknife standard error.
std::vector<CovEstimate> empirical_cov(const ModeEnsemble& ensemble, std::size_t s_index,
                                       std::size_t t_index);

// Evaluates the spatial field X(t, x) = sum_j path_j(t) e_j(x) for the
// Dirichlet sine basis e_j(x) = sqrt(2/L) sin(j pi x / L). The model must
// carry the interval length L and x must lie in (0, L).
// Returns [replicate][time].
std::vector<std::vector<double>> reconstruct_field(const SpectralModel& model,
                                                   const ModeEnsemble& ensemble, double x);

}  // namespace fracevo
