#include "fracevo/markov.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fracevo/linalg.hpp"
#include "fracevo/quadrature.hpp"
#include "fracevo/rng.hpp"
#include "fracevo/specfun.hpp"
#include "parallel.hpp"

namespace fracevo {

namespace {

double binom(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return v;
}

// Shift map of the initial-value stack: (S xi)_k = xi_{k+1} + lambda xi_k.
// Returns S^i xi for i = 0..N-1 (lengths N, N-1, ..., 1) for one mode.
std::vector<std::vector<double>> shift_powers(const std::vector<double>& xi, double lambda) {
    std::vector<std::vector<double>> out;
    out.push_back(xi);
    while (out.back().size() > 1) {
        const std::vector<double>& prev = out.back();
        std::vector<double> next(prev.size() - 1);
        for (std::size_t k = 0; k + 1 < prev.size(); ++k)
            next[k] = prev[k + 1] + lambda * prev[k];
        out.push_back(std::move(next));
    }
    return out;
}

// zeta_M(t0 + tau | t0) applied to one mode's stack (length M).
double zeta_scalar(const std::vector<double>& xi, double lambda, double tau) {
    const int m_orders = static_cast<int>(xi.size());
    double tk = 1.0;  // tau^k / k!
    double acc = 0.0;
    for (int k = 0; k < m_orders; ++k) {
        acc += tk * reg_upper_gamma(m_orders - k, lambda * tau) * xi[k];
        tk *= tau / (k + 1);
    }
    return acc;
}

// Order-n derivative of zeta_N(t|t0) xi at tau = t - t0 > 0 for one mode:
//   D^n zeta_N xi = sum_{i<=n} binom(n,i) (-lambda)^{n-i} zeta_{N-i}(S^i xi).
double zeta_derivative_scalar(const std::vector<std::vector<double>>& xi_pows, double lambda,
                              double tau, int order) {
    double acc = 0.0;
    for (int i = 0; i <= order; ++i)
        acc += binom(order, i) * std::pow(-lambda, order - i) *
               zeta_scalar(xi_pows[i], lambda, tau);
    return acc;
}

// One-step exact exponential map of the N-level chain Y_i' + lambda Y_i =
// Y_{i-1} (level 1 driven by the noise increment through a cell-averaged
// load).
struct ModeChain {
    std::size_t levels;
    std::vector<double> map;    // [levels x levels] lower triangular, e^{M dt}
    std::vector<double> loads;  // per level, cell-average kernel weights
};

ModeChain build_chain(std::size_t levels, double lambda, double dt) {
    ModeChain chain;
    chain.levels = levels;
    chain.map.assign(levels * levels, 0.0);
    const double decay = std::exp(-lambda * dt);
    for (std::size_t a = 0; a < levels; ++a) {
        double pw = 1.0;  // dt^{a-b} / (a-b)!
        for (std::size_t d = 0; d <= a; ++d) {
            chain.map[a * levels + (a - d)] = decay * pw;
            pw *= dt / static_cast<double>(d + 1);
        }
    }
    chain.loads.resize(levels);
    for (std::size_t i = 0; i < levels; ++i)
        chain.loads[i] = convolution_weights(static_cast<double>(i + 1), lambda, dt, 1)[1];
    return chain;
}

void chain_step(const ModeChain& chain, std::vector<double>& y, double dw,
                std::vector<double>& scratch) {
    const std::size_t n = chain.levels;
    for (std::size_t a = 0; a < n; ++a) {
        double acc = chain.loads[a] * dw;
        for (std::size_t b = 0; b <= a; ++b) acc += chain.map[a * n + b] * y[b];
        scratch[a] = acc;
    }
    y.swap(scratch);
}

// Combination turning chain levels into the order-n derivative slice:
//   Z_N^{(n)} = sum_{m<=n} (-1)^m binom(n,m) lambda^m Y_{N-n+m}.
double stack_from_chain(const std::vector<double>& y, double lambda, std::size_t n_orders,
                        int order) {
    double acc = 0.0;
    for (int m = 0; m <= order; ++m)
        acc += ((m % 2 == 0) ? 1.0 : -1.0) * binom(order, m) * std::pow(lambda, m) *
               y[n_orders - 1 - order + m];
    return acc;
}

std::vector<double> mode_stack(const MarkovState& state, std::size_t j) {
    std::vector<double> xi(state.order_count);
    for (std::size_t k = 0; k < state.order_count; ++k) xi[k] = state.at(k, j);
    return xi;
}

}  // namespace

std::vector<double> inc_gamma_op(int n, double t, const SpectralModel& model) {
    if (n < 1) throw std::invalid_argument("inc_gamma_op: requires n >= 1");
    if (t < 0.0) throw std::invalid_argument("inc_gamma_op: requires t >= 0");
    std::vector<double> out(model.mode_count());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = reg_upper_gamma(n, model.lambda(j) * t);
    return out;
}

std::vector<double> zeta(std::size_t n_orders, double t, double t0, const MarkovState& state,
                         const SpectralModel& model) {
    if (state.order_count != n_orders) throw std::invalid_argument("zeta: state.N mismatch");
    if (state.modes != model.mode_count()) throw std::invalid_argument("zeta: mode mismatch");
    if (t < t0) throw std::invalid_argument("zeta: requires t >= t0");
    std::vector<double> out(model.mode_count());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = zeta_scalar(mode_stack(state, j), model.lambda(j), t - t0);
    return out;
}

std::vector<std::vector<double>> zeta_derivative_stack(std::size_t n_orders, double t, double t0,
                                                       const MarkovState& state,
                                                       const SpectralModel& model) {
    if (state.order_count != n_orders)
        throw std::invalid_argument("zeta_derivative_stack: state.N mismatch");
    if (state.modes != model.mode_count())
        throw std::invalid_argument("zeta_derivative_stack: mode mismatch");
    if (!(t > t0) && n_orders > 1)
        throw std::invalid_argument(
            "zeta_derivative_stack: only order 0 is defined at t = t0");
    if (t < t0) throw std::invalid_argument("zeta_derivative_stack: requires t >= t0");
    std::vector<std::vector<double>> out(n_orders,
                                         std::vector<double>(model.mode_count(), 0.0));
    for (std::size_t j = 0; j < model.mode_count(); ++j) {
        const double lambda = model.lambda(j);
        const auto xi_pows = shift_powers(mode_stack(state, j), lambda);
        for (std::size_t ord = 0; ord < n_orders; ++ord)
            out[ord][j] =
                zeta_derivative_scalar(xi_pows, lambda, t - t0, static_cast<int>(ord));
    }
    return out;
}

StackedPath solve_initial_value(std::size_t n_orders, double t0, const MarkovState& state,
                                const TimeGrid& grid, const NoisePanel& noise,
                                const SpectralModel& model) {
    if (state.order_count != n_orders)
        throw std::invalid_argument("solve_initial_value: state.N mismatch");
    if (state.modes != model.mode_count() || noise.modes != model.mode_count())
        throw std::invalid_argument("solve_initial_value: mode mismatch");
    if (!(noise.grid == grid))
        throw std::invalid_argument("solve_initial_value: grid/noise mismatch");
    if (std::abs(grid.t0 - t0) > 1e-12 * std::max(1.0, std::abs(t0)))
        throw std::invalid_argument("solve_initial_value: grid must start at t0");

    const std::size_t n = grid.n;
    const std::size_t modes = model.mode_count();
    const double dt = grid.dt();

    // Deterministic part zeta_N^{(ord)}(t_k | t0) xi, shared by replicates.
    // At the first node the right-limit of order n is xi_n itself.
    std::vector<double> zdet(n_orders * modes * n);
    std::vector<ModeChain> chains(modes);
    for (std::size_t j = 0; j < modes; ++j) {
        const double lambda = model.lambda(j);
        chains[j] = build_chain(n_orders, lambda, dt);
        const auto xi_pows = shift_powers(mode_stack(state, j), lambda);
        for (std::size_t ord = 0; ord < n_orders; ++ord) {
            zdet[(ord * modes + j) * n] = state.at(ord, j);
            for (std::size_t k = 1; k < n; ++k)
                zdet[(ord * modes + j) * n + k] = zeta_derivative_scalar(
                    xi_pows, lambda, static_cast<double>(k) * dt, static_cast<int>(ord));
        }
    }

    StackedPath path;
    path.grid = grid;
    path.replicates = noise.replicates;
    path.orders = n_orders;
    path.modes = modes;
    path.stack.assign(noise.replicates * n_orders * modes * n, 0.0);

    detail::parallel_for(noise.replicates, [&](std::size_t r) {
        std::vector<double> y(n_orders), scratch(n_orders);
        for (std::size_t j = 0; j < modes; ++j) {
            const double lambda = model.lambda(j);
            std::fill(y.begin(), y.end(), 0.0);
            for (std::size_t ord = 0; ord < n_orders; ++ord)
                path.at(r, ord, j, 0) = zdet[(ord * modes + j) * n];
            for (std::size_t k = 1; k < n; ++k) {
                chain_step(chains[j], y, noise.at(r, j, k - 1), scratch);
                for (std::size_t ord = 0; ord < n_orders; ++ord)
                    path.at(r, ord, j, k) =
                        zdet[(ord * modes + j) * n + k] +
                        stack_from_chain(y, lambda, n_orders, static_cast<int>(ord));
            }
        }
    });
    return path;
}

RestartReport restart_check(std::size_t n_orders, double t0, double s, const TimeGrid& grid,
                            const MarkovState& state, const NoisePanel& noise,
                            const SpectralModel& model) {
    const std::size_t s_idx = grid.index_of(s);  // throws if s is not a node
    const StackedPath left = solve_initial_value(n_orders, t0, state, grid, noise, model);

    const std::size_t n = grid.n;
    const std::size_t modes = model.mode_count();
    const double dt = grid.dt();
    const double s_node = grid.node(s_idx);
    const std::size_t m = n - s_idx;
    TimeGrid right_grid = grid;
    if (s_idx > 0) right_grid = TimeGrid(s_node, s_node + dt * static_cast<double>(m - 1), m);

    RestartReport report;
    report.n_orders = n_orders;
    report.t0 = t0;
    report.split = s_node;
    report.per_mode.assign(modes, 0.0);

    // Restart each replicate from its own stack read at s, reusing the
    // identical increments on (s, t1].
    NoisePanel right_noise;
    right_noise.grid = right_grid;
    right_noise.replicates = 1;
    right_noise.modes = modes;
    right_noise.seed = noise.seed;
    const std::size_t cells = m - 1;

    for (std::size_t r = 0; r < noise.replicates; ++r) {
        MarkovState restart_state(n_orders, modes);
        for (std::size_t ord = 0; ord < n_orders; ++ord)
            for (std::size_t j = 0; j < modes; ++j)
                restart_state.at(ord, j) = left.at(r, ord, j, s_idx);
        right_noise.increments.assign(modes * cells, 0.0);
        for (std::size_t j = 0; j < modes; ++j)
            for (std::size_t k = 0; k < cells; ++k)
                right_noise.increments[j * cells + k] = noise.at(r, j, s_idx + k);
        const StackedPath right =
            solve_initial_value(n_orders, s_node, restart_state, right_grid, right_noise, model);

        for (std::size_t j = 0; j < modes; ++j) {
            double scale = 0.0, diff = 0.0;
            for (std::size_t ord = 0; ord < n_orders; ++ord) {
                for (std::size_t k = 0; k < m; ++k) {
                    scale = std::max(scale, std::abs(left.at(r, ord, j, s_idx + k)));
                    diff = std::max(diff, std::abs(left.at(r, ord, j, s_idx + k) -
                                                   right.at(0, ord, j, k)));
                }
            }
            report.per_mode[j] =
                std::max(report.per_mode[j], diff / std::max(scale, 1e-300));
        }
    }
    for (double v : report.per_mode) report.max_rel_residual = std::max(report.max_rel_residual, v);
    return report;
}

ReconstructionReport reconstruction_check(std::size_t n_orders, double t0, double horizon,
                                          const SpectralModel& model, std::size_t replicates,
                                          std::uint64_t seed) {
    if (n_orders < 1) throw std::invalid_argument("reconstruction_check: requires N >= 1");
    if (horizon < 0.0) throw std::invalid_argument("reconstruction_check: requires horizon >= 0");
    const auto n_int = static_cast<int>(n_orders);
    const double gamma_n = static_cast<double>(n_orders);
    const std::size_t modes = model.mode_count();

    ReconstructionReport report;
    report.n_orders = n_orders;
    report.t0 = t0;
    report.horizon = horizon;
    report.var_quadrature.resize(modes);
    report.var_zeta_form.resize(modes);

    std::vector<std::vector<double>> stack_cov(modes);
    for (std::size_t j = 0; j < modes; ++j) {
        const double lambda = model.lambda(j);
        const double q = model.q(j);
        // (a) tail of the squared kernel, by quadrature.
        const double inv_norm = std::exp(-ln_gamma(gamma_n));
        auto integrand = [&](double u) {
            const double k = std::pow(u, gamma_n - 1.0) * std::exp(-lambda * u) * inv_norm;
            return q * k * k;
        };
        const double scale = matern_cov(gamma_n, lambda, std::max(q, 1e-30), 0.0);
        report.var_quadrature[j] =
            q == 0.0 ? 0.0 : integrate_to_infinity(integrand, horizon, 1e-13 * scale);

        // (b) zeta form against the exact joint covariance of the stack.
        std::vector<double> a(n_orders);
        double tk = 1.0;
        for (std::size_t k = 0; k < n_orders; ++k) {
            a[k] = tk * reg_upper_gamma(n_int - static_cast<int>(k), lambda * horizon);
            tk *= horizon / static_cast<double>(k + 1);
        }
        std::vector<double> cov(n_orders * n_orders);
        for (std::size_t k = 0; k < n_orders; ++k)
            for (std::size_t l = 0; l <= k; ++l) {
                const double c = derivative_cov(gamma_n, lambda, q, static_cast<int>(k),
                                                static_cast<int>(l), 0.0);
                cov[k * n_orders + l] = c;
                cov[l * n_orders + k] = c;
            }
        double v = 0.0;
        for (std::size_t k = 0; k < n_orders; ++k)
            for (std::size_t l = 0; l < n_orders; ++l) v += a[k] * a[l] * cov[k * n_orders + l];
        report.var_zeta_form[j] = v;
        stack_cov[j] = std::move(cov);

        const double denom =
            std::max({std::abs(report.var_quadrature[j]), std::abs(v), 1e-300});
        report.max_rel_discrepancy = std::max(
            report.max_rel_discrepancy, std::abs(report.var_quadrature[j] - v) / denom);
    }

    if (replicates >= 2) {
        // Empirical cross-check: draw the stationary stack at t0 from its
        // exact joint law, apply zeta, average the squared norm over modes.
        std::vector<std::vector<double>> factors(modes);
        for (std::size_t j = 0; j < modes; ++j)
            factors[j] = model.q(j) == 0.0
                             ? std::vector<double>()
                             : cholesky_psd(stack_cov[j], n_orders, 1e-12);
        double sum = 0.0, sum_sq = 0.0;
        std::vector<double> z(n_orders);
        for (std::size_t r = 0; r < replicates; ++r) {
            double norm_sq = 0.0;
            for (std::size_t j = 0; j < modes; ++j) {
                if (factors[j].empty()) continue;
                const double lambda = model.lambda(j);
                const CounterRng rng(seed, static_cast<std::uint64_t>(RngDomain::stationary) + 16,
                                     r, j);
                for (std::size_t k = 0; k < n_orders; ++k) z[k] = rng.normal(k);
                const std::vector<double> xi = lower_tri_apply(factors[j], n_orders, z);
                double acc = 0.0, tk = 1.0;
                for (std::size_t k = 0; k < n_orders; ++k) {
                    acc += tk * reg_upper_gamma(n_int - static_cast<int>(k), lambda * horizon) *
                           xi[k];
                    tk *= horizon / static_cast<double>(k + 1);
                }
                norm_sq += acc * acc;
            }
            sum += norm_sq;
            sum_sq += norm_sq * norm_sq;
        }
        const double r_count = static_cast<double>(replicates);
        report.mc_estimate = sum / r_count;
        report.mc_standard_error =
            std::sqrt(std::max(0.0, (sum_sq / r_count - report.mc_estimate * report.mc_estimate) /
                                        (r_count - 1.0)));
        report.has_mc = true;
    }
    return report;
}

MarkovState transition_sample(std::size_t n_orders, double s, double t, const MarkovState& x,
                              std::size_t sample_index, std::uint64_t seed,
                              const SpectralModel& model, std::size_t steps) {
    if (x.order_count != n_orders)
        throw std::invalid_argument("transition_sample: state.N mismatch");
    if (x.modes != model.mode_count())
        throw std::invalid_argument("transition_sample: mode mismatch");
    if (!(t >= s)) throw std::invalid_argument("transition_sample: requires t >= s");
    if (t == s) return x;

    const std::size_t modes = model.mode_count();
    const double dt = (t - s) / static_cast<double>(steps);
    const double tau = t - s;
    MarkovState out(n_orders, modes);
    std::vector<double> y(n_orders), scratch(n_orders);
    for (std::size_t j = 0; j < modes; ++j) {
        const double lambda = model.lambda(j);
        const ModeChain chain = build_chain(n_orders, lambda, dt);
        const double sd = std::sqrt(model.q(j) * dt);
        const CounterRng rng(seed, static_cast<std::uint64_t>(RngDomain::transition),
                             sample_index, j);
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t k = 0; k < steps; ++k)
            chain_step(chain, y, sd * rng.normal(k), scratch);
        const auto xi_pows = shift_powers(mode_stack(x, j), lambda);
        for (std::size_t ord = 0; ord < n_orders; ++ord)
            out.at(ord, j) = zeta_derivative_scalar(xi_pows, lambda, tau, static_cast<int>(ord)) +
                             stack_from_chain(y, lambda, n_orders, static_cast<int>(ord));
    }
    return out;
}

TransitionEstimate transition_operator(std::size_t n_orders, double s, double t,
                                       const MarkovState& x,
                                       const std::function<double(const MarkovState&)>& phi,
                                       std::size_t mc_samples, std::uint64_t seed,
                                       const SpectralModel& model, std::size_t steps) {
    if (mc_samples < 2)
        throw std::invalid_argument("transition_operator: requires M >= 2");
    if (t == s) return TransitionEstimate{phi(x), 0.0};

    std::vector<double> values(mc_samples);
    detail::parallel_for(mc_samples, [&](std::size_t m) {
        values[m] = phi(transition_sample(n_orders, s, t, x, m, seed, model, steps));
    });
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(mc_samples);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (static_cast<double>(mc_samples) *
                                      (static_cast<double>(mc_samples) - 1.0)));
    return TransitionEstimate{mean, se};
}

double derivative_cov(double gamma, double lambda, double q, int n1, int n2, double h) {
    if (n1 < 0 || n2 < 0) throw std::invalid_argument("derivative_cov: orders must be >= 0");
    if (!(gamma - std::max(n1, n2) > 0.5))
        throw std::domain_error("derivative_cov: differentiability budget exceeded");
    if (q == 0.0) return 0.0;
    const int m = n1 + n2;
    if (m == 0) return matern_cov(gamma, lambda, q, h);
    if (h == 0.0 && m % 2 == 1) return 0.0;  // even covariance, odd derivative

    if (h == 0.0) {
        // Exact product moments of the auxiliary family Z_beta sharing one
        // noise: Cov(Z_alpha, Z_beta) = q Gamma(a+b-1)/(Gamma(a)Gamma(b)(2l)^{a+b-1}).
        double acc = 0.0;
        for (int a = 0; a <= n1; ++a) {
            for (int b = 0; b <= n2; ++b) {
                const double alpha = gamma - n1 + a;
                const double beta_ = gamma - n2 + b;
                const double cross =
                    q * std::exp(ln_gamma(alpha + beta_ - 1.0) - ln_gamma(alpha) -
                                 ln_gamma(beta_) - (alpha + beta_ - 1.0) * std::log(2.0 * lambda));
                const double sign = ((a + b) % 2 == 0) ? 1.0 : -1.0;
                acc += sign * binom(n1, a) * binom(n2, b) * std::pow(lambda, a + b) * cross;
            }
        }
        return acc;
    }

    const double sign_n1 = (n1 % 2 == 0) ? 1.0 : -1.0;
    const double x = lambda * std::abs(h);
    const double nu = gamma - 0.5;
    const double ln_pref = (0.5 - gamma) * M_LN2 + (1.0 - 2.0 * gamma) * std::log(lambda) -
                           0.5 * std::log(M_PI) - ln_gamma(gamma);
    if (m == 1) {
        // c'(h) = -sgn(h) C lambda x^nu K_{nu-1}(x)
        const double c1 = -((h > 0.0) ? 1.0 : -1.0) * lambda *
                          std::exp(ln_pref + nu * std::log(x) + bessel_k_ln(nu - 1.0, x));
        return sign_n1 * q * c1;
    }
    if (m == 2) {
        // c''(h) = C lambda^2 [x^nu K_{nu-2}(x) - x^{nu-1} K_{nu-1}(x)]
        const double t1 = std::exp(ln_pref + nu * std::log(x) + bessel_k_ln(nu - 2.0, x));
        const double t2 = std::exp(ln_pref + (nu - 1.0) * std::log(x) + bessel_k_ln(nu - 1.0, x));
        return sign_n1 * q * lambda * lambda * (t1 - t2);
    }

    // Central difference stencils (9 points, order 6) for m = 3, 4.
    static const double kD3[9] = {-7.0 / 240.0, 3.0 / 10.0,   -169.0 / 120.0,
                                  61.0 / 30.0,  0.0,          -61.0 / 30.0,
                                  169.0 / 120.0, -3.0 / 10.0, 7.0 / 240.0};
    static const double kD4[9] = {7.0 / 240.0,   -2.0 / 5.0, 169.0 / 60.0,
                                  -122.0 / 15.0, 91.0 / 8.0, -122.0 / 15.0,
                                  169.0 / 60.0,  -2.0 / 5.0, 7.0 / 240.0};
    if (m > 4)
        throw std::invalid_argument("derivative_cov: orders beyond n1+n2 = 4 not supported");
    const double* coef = (m == 3) ? kD3 : kD4;
    double step = std::pow(2.2e-16, 1.0 / (m + 6)) * std::max(1.0, std::abs(h)) / lambda;
    step = std::min(step, std::abs(h) / 5.0);
    double acc = 0.0;
    for (int i = -4; i <= 4; ++i)
        acc += coef[i + 4] * matern_cov(gamma, lambda, q, h + i * step);
    return sign_n1 * acc / std::pow(step, m);
}

std::string RestartReport::to_json() const {
    nlohmann::json j;
    j["N"] = n_orders;
    j["t0"] = t0;
    j["split"] = split;
    j["max_rel_residual"] = max_rel_residual;
    j["per_mode"] = per_mode;
    return j.dump(2);
}

std::string ReconstructionReport::to_json() const {
    nlohmann::json j;
    j["N"] = n_orders;
    j["t0"] = t0;
    j["horizon"] = horizon;
    j["var_quadrature"] = var_quadrature;
    j["var_zeta_form"] = var_zeta_form;
    j["max_rel_residual"] = max_rel_discrepancy;
    if (has_mc) {
        j["mc_estimate"] = mc_estimate;
        j["mc_standard_error"] = mc_standard_error;
    }
    return j.dump(2);
}

}  // namespace fracevo
