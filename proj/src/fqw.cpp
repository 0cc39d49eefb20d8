#include "fracevo/fqw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fracevo/linalg.hpp"
#include "fracevo/quadrature.hpp"
#include "fracevo/rng.hpp"
#include "fracevo/specfun.hpp"
#include "parallel.hpp"

namespace fracevo {

FqwSpec::FqwSpec(double h, SpectralModel m) : hurst(h), model(std::move(m)) {
    if (!(h > 0.0) || !(h < 1.0)) throw std::domain_error("FqwSpec: requires H in (0,1)");
}

double mvn_constant(double hurst) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw std::domain_error("mvn_constant: requires H in (0,1)");
    return (3.0 - 2.0 * hurst) / (4.0 * hurst) * beta(2.0 - 2.0 * hurst, hurst + 0.5);
}

namespace {

inline double pos_pow(double x, double a) { return x > 0.0 ? std::pow(x, a) : 0.0; }

}  // namespace

double mvn_kernel(double hurst, double t, double r) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw std::domain_error("mvn_kernel: requires H in (0,1)");
    const double a = hurst - 0.5;
    return (pos_pow(t - r, a) - pos_pow(-r, a)) / std::sqrt(mvn_constant(hurst));
}

double fqw_cov(double hurst, double s, double t) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw std::domain_error("fqw_cov: requires H in (0,1)");
    return 0.5 * (std::pow(std::abs(t), 2.0 * hurst) + std::pow(std::abs(s), 2.0 * hurst) -
                  std::pow(std::abs(t - s), 2.0 * hurst));
}

double kernel_cov_quadrature(double hurst, double s, double t) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw std::domain_error("kernel_cov_quadrature: requires H in (0,1)");
    auto f = [&](double r) { return mvn_kernel(hurst, s, r) * mvn_kernel(hurst, t, r); };

    // The product vanishes for r >= max(0, s, t); split at the kernel kinks.
    std::vector<double> pts = {0.0, s, t};
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    double total = 0.0;
    // (-inf, first breakpoint]; the integrand decays like |r|^{2H-3}. Each
    // panel must certify its tolerance or the committed 1e-6 bound is void.
    auto tail = [&](double u) {
        const double denom = 1.0 - u;
        return f(pts.front() - u / denom) / (denom * denom);
    };
    total += integrate_tanh_sinh(tail, 0.0, 1.0, 1e-9, 12, true);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += integrate_tanh_sinh(f, pts[i], pts[i + 1], 1e-9, 12, true);
    return total;
}

ModeEnsemble sample_fqw(const FqwSpec& spec, const TimeGrid& grid, std::size_t replicates,
                        std::uint64_t seed) {
    const std::size_t n = grid.n;
    const std::size_t modes = spec.model.mode_count();

    std::vector<std::vector<double>> factors(modes);
    for (std::size_t j = 0; j < modes; ++j) {
        const double q = spec.model.q(j);
        if (q == 0.0) continue;
        std::vector<double> cov(n * n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b <= a; ++b) {
                const double c = q * fqw_cov(spec.hurst, grid.node(a), grid.node(b));
                cov[a * n + b] = c;
                cov[b * n + a] = c;
            }
        factors[j] = cholesky_psd(std::move(cov), n, 1e-12);
    }

    ModeEnsemble ens;
    ens.grid = grid;
    ens.replicates = replicates;
    ens.modes = modes;
    ens.gamma = spec.hurst;
    ens.construction = "fqw";
    ens.paths.assign(replicates * modes * n, 0.0);
    detail::parallel_for(replicates, [&](std::size_t r) {
        std::vector<double> z(n);
        for (std::size_t j = 0; j < modes; ++j) {
            if (factors[j].empty()) continue;
            const CounterRng rng(seed, static_cast<std::uint64_t>(RngDomain::fqw), r, j);
            for (std::size_t k = 0; k < n; ++k) z[k] = rng.normal(k);
            const std::vector<double> path = lower_tri_apply(factors[j], n, z);
            for (std::size_t k = 0; k < n; ++k) ens.at(r, j, k) = path[k];
        }
    });
    return ens;
}

namespace {

void require_limit_gamma(double gamma) {
    if (!(gamma > 0.5) || !(gamma < 1.5))
        throw std::domain_error("limit diagnostics: requires gamma in (1/2, 3/2)");
}

double limit_i2_integrand(double gamma, double epsilon, double big_t, double s) {
    const double a = pos_pow(big_t + s, gamma - 1.0) * (-std::expm1(-epsilon * (big_t + s)));
    const double b = pos_pow(s, gamma - 1.0) * (-std::expm1(-epsilon * s));
    const double d = a - b;
    return d * d;
}

}  // namespace

double limit_mse_truncated(double gamma, double epsilon, double t, double s_max) {
    require_limit_gamma(gamma);
    if (!(epsilon > 0.0)) throw std::domain_error("limit_mse: requires epsilon > 0");
    const double big_t = std::abs(t);
    if (big_t == 0.0) return 0.0;

    auto i1_f = [&](double s) {
        const double w = -std::expm1(-epsilon * s);
        return std::pow(s, 2.0 * gamma - 2.0) * w * w;
    };
    const double i1 = integrate_tanh_sinh(i1_f, 0.0, big_t, 1e-12);

    auto i2_f = [&](double s) { return limit_i2_integrand(gamma, epsilon, big_t, s); };
    const double split = std::min(std::max(big_t, 1.0), s_max);
    double i2 = integrate_tanh_sinh(i2_f, 0.0, split, 1e-12);
    if (s_max > split) {
        // Algebraic tail; map the remaining range through tanh-sinh as well.
        i2 += integrate_tanh_sinh(i2_f, split, s_max, 1e-12);
    }
    return (i1 + i2) / mvn_constant(gamma - 0.5);
}

double limit_mse(double gamma, double epsilon, double t) {
    require_limit_gamma(gamma);
    if (!(epsilon > 0.0)) throw std::domain_error("limit_mse: requires epsilon > 0");
    const double big_t = std::abs(t);
    if (big_t == 0.0) return 0.0;

    auto i1_f = [&](double s) {
        const double w = -std::expm1(-epsilon * s);
        return std::pow(s, 2.0 * gamma - 2.0) * w * w;
    };
    const double i1 = integrate_tanh_sinh(i1_f, 0.0, big_t, 1e-12);

    auto i2_f = [&](double s) { return limit_i2_integrand(gamma, epsilon, big_t, s); };
    const double split = std::max(big_t, 1.0);
    double i2 = integrate_tanh_sinh(i2_f, 0.0, split, 1e-12);
    // Tail: the integrand saturates past 1/eps and then decays like s^{2g-4}.
    i2 += integrate_to_infinity(i2_f, split, 1e-12);
    return (i1 + i2) / mvn_constant(gamma - 0.5);
}

LimitDiagnostics limit_rate(double gamma, const std::vector<double>& epsilons, double t) {
    require_limit_gamma(gamma);
    if (epsilons.size() < 4)
        throw std::invalid_argument("limit_rate: need at least 4 epsilons");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("limit_rate: epsilons must be strictly decreasing");
    if (!(epsilons.front() / epsilons.back() >= 100.0))
        throw std::invalid_argument("limit_rate: epsilons must span at least two decades");

    LimitDiagnostics diag;
    diag.gamma = gamma;
    diag.t = t;
    diag.epsilons = epsilons;
    diag.mse.resize(epsilons.size());
    detail::parallel_for(epsilons.size(),
                         [&](std::size_t i) { diag.mse[i] = limit_mse(gamma, epsilons[i], t); });

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(epsilons.size());
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        const double x = std::log(epsilons[i]);
        const double y = std::log(diag.mse[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 1e-12)) throw std::runtime_error("limit_rate: degenerate fit");
    diag.fitted_slope = (n * sxy - sx * sy) / denom;
    return diag;
}

namespace {

// Exact cell integrals of the two coupled kernels over [r0, r1].
double cell_int_power(double t, double r0, double r1, double expo) {
    // int_cell (t - r)_+^{expo - 1} dr
    const double hi = std::max(t - r0, 0.0);
    const double lo = std::max(t - r1, 0.0);
    return (std::pow(hi, expo) - std::pow(lo, expo)) / expo;
}

double cell_int_gamma(double t, double r0, double r1, double gamma, double eps) {
    // int_cell (t - r)_+^{gamma-1} e^{-eps (t - r)} dr
    const double hi = std::max(t - r0, 0.0);
    const double lo = std::max(t - r1, 0.0);
    if (hi <= 0.0) return 0.0;
    const double scale = std::exp(ln_gamma(gamma) - gamma * std::log(eps));
    return scale * (lower_gamma_reg(gamma, eps * hi) - lower_gamma_reg(gamma, eps * lo));
}

}  // namespace

std::pair<ModeEnsemble, ModeEnsemble> coupled_paths(double gamma, double epsilon,
                                                    const SpectralModel& model,
                                                    const TimeGrid& eval_grid,
                                                    const NoisePanel& noise) {
    require_limit_gamma(gamma);
    if (!(epsilon > 0.0)) throw std::domain_error("coupled_paths: requires epsilon > 0");
    if (noise.modes != model.mode_count())
        throw std::invalid_argument("coupled_paths: noise/model mode mismatch");
    eval_grid.index_of(0.0);  // throws unless 0 is an eval node
    noise.grid.index_of(0.0);

    const double hurst = gamma - 0.5;
    const double inv_sqrt_c = 1.0 / std::sqrt(mvn_constant(hurst));
    const std::size_t n_eval = eval_grid.n;
    const std::size_t cells = noise.grid.n - 1;
    const double dt = noise.grid.dt();

    // Cell-average weights of the fractional kernel and of the shifted
    // difference kernel, per evaluation time.
    std::vector<double> w_frac(n_eval * cells), w_zbar(n_eval * cells);
    for (std::size_t m = 0; m < n_eval; ++m) {
        noise.grid.index_of(eval_grid.node(m));  // eval nodes must be noise nodes
        const double t = eval_grid.node(m);
        for (std::size_t k = 0; k < cells; ++k) {
            const double r0 = noise.grid.node(k);
            const double r1 = noise.grid.node(k + 1);
            const double frac = cell_int_power(t, r0, r1, hurst + 0.5) -
                                cell_int_power(0.0, r0, r1, hurst + 0.5);
            const double zb = cell_int_gamma(t, r0, r1, gamma, epsilon) -
                              cell_int_gamma(0.0, r0, r1, gamma, epsilon);
            w_frac[m * cells + k] = inv_sqrt_c * frac / dt;
            w_zbar[m * cells + k] = inv_sqrt_c * zb / dt;
        }
    }

    auto make_ens = [&](const char* tag) {
        ModeEnsemble e;
        e.grid = eval_grid;
        e.replicates = noise.replicates;
        e.modes = noise.modes;
        e.gamma = gamma;
        e.construction = tag;
        e.paths.assign(noise.replicates * noise.modes * n_eval, 0.0);
        return e;
    };
    ModeEnsemble frac_ens = make_ens("fqw-kernel");
    ModeEnsemble zbar_ens = make_ens("zbar-kernel");

    detail::parallel_for(noise.replicates, [&](std::size_t r) {
        for (std::size_t j = 0; j < noise.modes; ++j) {
            const double* dw = &noise.increments[(r * noise.modes + j) * cells];
            for (std::size_t m = 0; m < n_eval; ++m) {
                const double* wf = &w_frac[m * cells];
                const double* wz = &w_zbar[m * cells];
                double af = 0.0, az = 0.0;
                for (std::size_t k = 0; k < cells; ++k) {
                    af += wf[k] * dw[k];
                    az += wz[k] * dw[k];
                }
                frac_ens.at(r, j, m) = af;
                zbar_ens.at(r, j, m) = az;
            }
        }
    });
    return {std::move(frac_ens), std::move(zbar_ens)};
}

SelfSimilarityReport stationarity_and_selfsimilarity_check(double hurst) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw std::domain_error("stationarity_and_selfsimilarity_check: requires H in (0,1)");
    SelfSimilarityReport report;
    report.hurst = hurst;
    const double alphas[] = {0.5, 1.0, 2.0, 4.0};
    const double times[] = {-2.0, -0.7, 0.3, 1.0, 2.5};
    const double lags[] = {0.25, 1.0, 3.0};
    for (double s : times) {
        for (double t : times) {
            for (double alpha : alphas) {
                const double lhs = fqw_cov(hurst, alpha * s, alpha * t);
                const double rhs = std::pow(alpha, 2.0 * hurst) * fqw_cov(hurst, s, t);
                report.max_scaling_residual =
                    std::max(report.max_scaling_residual, std::abs(lhs - rhs));
            }
            const double h = t - s;
            const double var_inc = fqw_cov(hurst, t, t) + fqw_cov(hurst, s, s) -
                                   2.0 * fqw_cov(hurst, s, t);
            report.max_increment_residual =
                std::max(report.max_increment_residual,
                         std::abs(var_inc - std::pow(std::abs(h), 2.0 * hurst)));
        }
        for (double h : lags) {
            const double var_inc = fqw_cov(hurst, s + h, s + h) + fqw_cov(hurst, s, s) -
                                   2.0 * fqw_cov(hurst, s, s + h);
            report.max_increment_residual =
                std::max(report.max_increment_residual,
                         std::abs(var_inc - std::pow(h, 2.0 * hurst)));
        }
    }
    report.pass =
        report.max_scaling_residual <= 1e-12 && report.max_increment_residual <= 1e-12;
    return report;
}

std::string LimitDiagnostics::to_json() const {
    nlohmann::json j;
    j["gamma"] = gamma;
    j["t"] = t;
    j["epsilons"] = epsilons;
    j["mse"] = mse;
    j["slope"] = fitted_slope;
    return j.dump(2);
}

std::string SelfSimilarityReport::to_json() const {
    nlohmann::json j;
    j["H"] = hurst;
    j["max_scaling_residual"] = max_scaling_residual;
    j["max_increment_residual"] = max_increment_residual;
    j["pass"] = pass;
    return j.dump(2);
}

}  // namespace fracevo
