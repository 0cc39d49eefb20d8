#include "fracevo/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "fracevo/linalg.hpp"
#include "fracevo/rng.hpp"
#include "fracevo/specfun.hpp"
#include "parallel.hpp"

namespace fracevo {

NoisePanel gen_noise(const SpectralModel& model, const TimeGrid& grid,
                     std::size_t replicates, std::uint64_t seed,
                     std::size_t replicate_offset) {
    if (replicates < 1) throw std::invalid_argument("gen_noise: requires replicates >= 1");
    NoisePanel panel;
    panel.grid = grid;
    panel.replicates = replicates;
    panel.modes = model.mode_count();
    panel.seed = seed;
    const std::size_t cells = grid.n - 1;
    panel.increments.assign(replicates * panel.modes * cells, 0.0);
    const double dt = grid.dt();

    detail::parallel_for(replicates, [&](std::size_t r) {
        for (std::size_t j = 0; j < panel.modes; ++j) {
            const double sd = std::sqrt(model.q(j) * dt);
            if (sd == 0.0) continue;
            const CounterRng rng(seed, static_cast<std::uint64_t>(RngDomain::noise_panel),
                                 r + replicate_offset, j);
            double* out = &panel.increments[(r * panel.modes + j) * cells];
            for (std::size_t k = 0; k < cells; ++k) out[k] = sd * rng.normal(k);
        }
    });
    return panel;
}

double matern_cov(double gamma, double lambda, double q, double h) {
    if (!(gamma > 0.5))
        throw std::domain_error("matern_cov: requires gamma > 1/2 (process undefined)");
    if (!(lambda > 0.0)) throw std::domain_error("matern_cov: requires lambda > 0");
    if (q < 0.0) throw std::domain_error("matern_cov: requires q >= 0");
    if (q == 0.0) return 0.0;
    const double ah = std::abs(h);
    if (ah == 0.0) {
        return q * std::exp(ln_gamma(2.0 * gamma - 1.0) - 2.0 * ln_gamma(gamma) -
                            (2.0 * gamma - 1.0) * std::log(2.0 * lambda));
    }
    const double nu = gamma - 0.5;
    const double x = lambda * ah;
    // Log-space evaluation; the prefactor and K_nu can individually overflow.
    const double ln_c = (0.5 - gamma) * M_LN2 + (1.0 - 2.0 * gamma) * std::log(lambda) -
                        0.5 * std::log(M_PI) - ln_gamma(gamma) + nu * std::log(x) +
                        bessel_k_ln(nu, x);
    return q * std::exp(ln_c);
}

namespace {

// Per-mode stationary factor shared across replicates.
struct ModeFactor {
    std::vector<double> chol;  // n x n lower factor; empty when q = 0
};

}  // namespace

ModeEnsemble sample_stationary(const SpectralModel& model, double gamma,
                               const TimeGrid& grid, std::size_t replicates,
                               std::uint64_t seed) {
    const AssumptionReport check = assumption_integral(model, gamma);
    if (!check.satisfied)
        throw std::domain_error("sample_stationary: integrability assumption fails");
    const std::size_t n = grid.n;
    const std::size_t modes = model.mode_count();
    const double dt = grid.dt();

    std::vector<ModeFactor> factors(modes);
    for (std::size_t j = 0; j < modes; ++j) {
        if (model.q(j) == 0.0) continue;
        std::vector<double> cov(n * n);
        std::vector<double> row(n);
        for (std::size_t k = 0; k < n; ++k)
            row[k] = matern_cov(gamma, model.lambda(j), model.q(j), static_cast<double>(k) * dt);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                cov[a * n + b] = row[a > b ? a - b : b - a];
        factors[j].chol = cholesky_psd(std::move(cov), n, 1e-12);
    }

    ModeEnsemble ens;
    ens.grid = grid;
    ens.replicates = replicates;
    ens.modes = modes;
    ens.gamma = gamma;
    ens.construction = "stationary";
    ens.paths.assign(replicates * modes * n, 0.0);

    detail::parallel_for(replicates, [&](std::size_t r) {
        std::vector<double> z(n);
        for (std::size_t j = 0; j < modes; ++j) {
            if (factors[j].chol.empty()) continue;
            const CounterRng rng(seed, static_cast<std::uint64_t>(RngDomain::stationary), r, j);
            for (std::size_t k = 0; k < n; ++k) z[k] = rng.normal(k);
            const std::vector<double> path = lower_tri_apply(factors[j].chol, n, z);
            for (std::size_t k = 0; k < n; ++k) ens.at(r, j, k) = path[k];
        }
    });
    return ens;
}

std::vector<double> convolution_weights(double gamma, double lambda, double dt,
                                        std::size_t cells) {
    // weight(l) = (1/(Gamma(gamma) dt)) int over the cell [(l-1)dt, l dt]
    // (measured backwards from the evaluation time) of r^{gamma-1} e^{-lambda r},
    //           = lambda^{-gamma} [P(gamma, lambda l dt) - P(gamma, lambda (l-1) dt)] / dt.
    // The tail switches to upper-gamma differences to avoid cancellation.
    std::vector<double> w(cells + 1, 0.0);
    const double scale = std::exp(-gamma * std::log(lambda)) / dt;
    std::vector<double> p(cells + 1);
    const double switch_x = gamma + 1.0;
    for (std::size_t l = 0; l <= cells; ++l) {
        const double x = lambda * static_cast<double>(l) * dt;
        p[l] = (x < switch_x) ? lower_gamma_reg(gamma, x) : -upper_gamma_reg(gamma, x);
    }
    for (std::size_t l = 1; l <= cells; ++l) {
        double diff;
        const double x_lo = lambda * static_cast<double>(l - 1) * dt;
        const double x_hi = lambda * static_cast<double>(l) * dt;
        if (x_lo < switch_x && x_hi >= switch_x)
            diff = (1.0 + p[l]) - p[l - 1];  // bridge P- and Q-represented values
        else
            diff = p[l] - p[l - 1];
        w[l] = scale * diff;
    }
    return w;
}

ModeEnsemble sample_convolution(const SpectralModel& model, double gamma, double t0,
                                const TimeGrid& grid, const NoisePanel& noise) {
    if (!(gamma > 0.5)) throw std::domain_error("sample_convolution: requires gamma > 1/2");
    if (std::abs(grid.t0 - t0) > 1e-12 * std::max(1.0, std::abs(t0)))
        throw std::invalid_argument("sample_convolution: grid must start at t0");
    if (!(noise.grid == grid) || noise.modes != model.mode_count())
        throw std::invalid_argument("sample_convolution: grid/noise mismatch");

    const std::size_t n = grid.n;
    const std::size_t cells = n - 1;
    const std::size_t modes = model.mode_count();
    const double dt = grid.dt();

    std::vector<std::vector<double>> weights(modes);
    for (std::size_t j = 0; j < modes; ++j)
        weights[j] = convolution_weights(gamma, model.lambda(j), dt, cells);

    ModeEnsemble ens;
    ens.grid = grid;
    ens.replicates = noise.replicates;
    ens.modes = modes;
    ens.gamma = gamma;
    ens.construction = "convolution";
    ens.paths.assign(noise.replicates * modes * n, 0.0);

    detail::parallel_for(noise.replicates, [&](std::size_t r) {
        for (std::size_t j = 0; j < modes; ++j) {
            const std::vector<double>& w = weights[j];
            for (std::size_t m = 1; m < n; ++m) {
                double acc = 0.0;
                for (std::size_t k = 0; k < m; ++k) acc += w[m - k] * noise.at(r, j, k);
                ens.at(r, j, m) = acc;
            }
        }
    });
    return ens;
}

std::vector<CovEstimate> empirical_cov(const ModeEnsemble& ensemble, std::size_t s_index,
                                       std::size_t t_index) {
    if (s_index >= ensemble.grid.n || t_index >= ensemble.grid.n)
        throw std::invalid_argument("empirical_cov: index out of range");
    if (ensemble.replicates < 2)
        throw std::invalid_argument("empirical_cov: requires at least 2 replicates");
    const std::size_t r_count = ensemble.replicates;
    std::vector<CovEstimate> out(ensemble.modes);
    for (std::size_t j = 0; j < ensemble.modes; ++j) {
        double sum = 0.0;
        for (std::size_t r = 0; r < r_count; ++r)
            sum += ensemble.at(r, j, s_index) * ensemble.at(r, j, t_index);
        const double mean = sum / static_cast<double>(r_count);
        // Jackknife over replicates; for the mean statistic this collapses to
        // the usual SD/sqrt(R), computed in a leave-one-out-stable form.
        double ss = 0.0;
        for (std::size_t r = 0; r < r_count; ++r) {
            const double prod = ensemble.at(r, j, s_index) * ensemble.at(r, j, t_index);
            const double loo = (sum - prod) / static_cast<double>(r_count - 1);
            ss += (loo - mean) * (loo - mean);
        }
        const double jack =
            std::sqrt(ss * static_cast<double>(r_count - 1) / static_cast<double>(r_count));
        out[j] = CovEstimate{mean, jack};
    }
    return out;
}

std::vector<std::vector<double>> reconstruct_field(const SpectralModel& model,
                                                   const ModeEnsemble& ensemble, double x) {
    if (!model.domain_length())
        throw std::invalid_argument("reconstruct_field: model carries no basis metadata");
    const double length = *model.domain_length();
    if (!(x > 0.0) || !(x < length))
        throw std::invalid_argument("reconstruct_field: x outside (0, L)");
    if (ensemble.modes != model.mode_count())
        throw std::invalid_argument("reconstruct_field: mode count mismatch");
    std::vector<double> basis(ensemble.modes);
    for (std::size_t j = 0; j < ensemble.modes; ++j)
        basis[j] = std::sqrt(2.0 / length) *
                   std::sin(static_cast<double>(j + 1) * M_PI * x / length);
    std::vector<std::vector<double>> out(ensemble.replicates,
                                         std::vector<double>(ensemble.grid.n, 0.0));
    for (std::size_t r = 0; r < ensemble.replicates; ++r)
        for (std::size_t j = 0; j < ensemble.modes; ++j)
            for (std::size_t k = 0; k < ensemble.grid.n; ++k)
                out[r][k] += basis[j] * ensemble.at(r, j, k);
    return out;
}

}  // namespace fracevo
