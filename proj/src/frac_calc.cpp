#include "fracevo/frac_calc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

#include "fracevo/quadrature.hpp"
#include "fracevo/specfun.hpp"
#include "fft.hpp"
#include "parallel.hpp"

namespace fracevo {

GridFunction bump(const TimeGrid& grid, double center, double halfwidth) {
    if (!(halfwidth > 0.0)) throw std::invalid_argument("bump: requires halfwidth > 0");
    GridFunction out(grid);
    for (std::size_t k = 0; k < grid.n; ++k) {
        const double u = (grid.node(k) - center) / halfwidth;
        if (std::abs(u) < 1.0) out.values[k] = std::exp(-1.0 / (1.0 - u * u));
    }
    return out;
}

GridFunction plateau(const TimeGrid& grid, double a, double b, double ramp) {
    if (!(b > a) || !(ramp > 0.0) || 2.0 * ramp > (b - a))
        throw std::invalid_argument("plateau: requires a < b and 2*ramp <= b - a");
    // C^inf ramp built from the standard mollifier transition.
    auto edge = [](double u) {  // 0 at u<=0, 1 at u>=1, smooth between
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        const double e1 = std::exp(-1.0 / u);
        const double e2 = std::exp(-1.0 / (1.0 - u));
        return e1 / (e1 + e2);
    };
    GridFunction out(grid);
    for (std::size_t k = 0; k < grid.n; ++k) {
        const double t = grid.node(k);
        out.values[k] = edge((t - a) / ramp) * edge((b - t) / ramp);
    }
    return out;
}

namespace {

// Cubic Lagrange bases as polynomial coefficients in tau (constant term
// first). Centered stencil nodes {-1, 0, 1, 2}, one-sided nodes {0, 1, 2, 3}.
constexpr double kCentered[4][4] = {
    {0.0, -1.0 / 3.0, 0.5, -1.0 / 6.0},   // node -1
    {1.0, -0.5, -1.0, 0.5},               // node 0
    {0.0, 1.0, 0.5, -0.5},                // node 1
    {0.0, -1.0 / 6.0, 0.0, 1.0 / 6.0},    // node 2
};
constexpr double kOneSided[4][4] = {
    {1.0, -11.0 / 6.0, 1.0, -1.0 / 6.0},  // node 0
    {0.0, 3.0, -2.5, 0.5},                // node 1
    {0.0, -1.5, 2.0, -0.5},               // node 2
    {0.0, 1.0 / 3.0, -0.5, 1.0 / 6.0},    // node 3
};

// Product-integration weights for k(r) = r^{gamma-1} e^{-lambda r} / Gamma(gamma)
// on a uniform cell partition of step h.
struct ConvolutionWeights {
    std::vector<double> composed;  // composed[j] multiplies f_{k-j}
    std::vector<double> edge_wm1;  // centered node(-1) weight of cell l (phantom-cell fix)
};

// Moments of the kernel over cell 0, int_0^h r^{gamma+p-1} e^{-lambda r} dr
// relative to tau = r/h, p = 0..3. Exact: series in lambda*h when small,
// incomplete-gamma closed form otherwise.
void cell0_moments(double gamma, double lambda, double h, double inv_gamma_fn,
                   double moments[4]) {
    for (int p = 0; p < 4; ++p) {
        const double a = gamma + p;
        double raw;
        if (lambda * h < 1.0) {
            double term = std::pow(h, a);  // (-lambda)^m/m! * h^{a+m}/(a+m)
            double sum = term / a;
            for (int m = 1; m < 60; ++m) {
                term *= -lambda * h / m;
                const double contrib = term / (a + m);
                sum += contrib;
                if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
            }
            raw = sum;
        } else {
            raw = std::exp(ln_gamma(a) - a * std::log(lambda)) * lower_gamma_reg(a, lambda * h);
        }
        moments[p] = raw * std::pow(h, -static_cast<double>(p)) * inv_gamma_fn;
    }
}

ConvolutionWeights build_weights(double gamma, double lambda, double h, std::size_t n_cells) {
    ConvolutionWeights w;
    w.composed.assign(n_cells + 2, 0.0);
    w.edge_wm1.assign(n_cells, 0.0);
    const double inv_gamma_fn = std::exp(-ln_gamma(gamma));

    // Cell 0: exact singular moments, one-sided stencil (lags j = 0..3).
    double m0[4];
    cell0_moments(gamma, lambda, h, inv_gamma_fn, m0);
    for (int i = 0; i < 4; ++i) {
        double wi = 0.0;
        for (int p = 0; p < 4; ++p) wi += kOneSided[i][p] * m0[p];
        w.composed[i] += wi;
    }

    // Cells l >= 1: smooth integrand, fixed Gauss-Legendre in tau.
    const GaussLegendre& rule = gauss_legendre(16);
    for (std::size_t l = 1; l < n_cells; ++l) {
        if (lambda * (static_cast<double>(l) * h) > 745.0) break;  // kernel underflowed
        double mom[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double tau = 0.5 * (rule.nodes[g] + 1.0);
            const double r = (static_cast<double>(l) + tau) * h;
            const double kval = std::pow(r, gamma - 1.0) * std::exp(-lambda * r);
            const double wq = 0.5 * rule.weights[g] * h * kval;
            double tp = 1.0;
            for (int p = 0; p < 4; ++p, tp *= tau) mom[p] += wq * tp;
        }
        for (int i = 0; i < 4; ++i) {
            double wi = 0.0;
            for (int p = 0; p < 4; ++p) wi += kCentered[i][p] * mom[p];
            wi *= inv_gamma_fn;
            w.composed[l + i - 1] += wi;
            if (i == 0) w.edge_wm1[l] = wi;
        }
    }
    return w;
}

void support_bounds(const std::vector<double>& v, std::size_t& lo, std::size_t& hi) {
    lo = v.size();
    hi = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) {
            if (lo == v.size()) lo = i;
            hi = i;
        }
    }
}

}  // namespace

GridFunction frac_integral(const GridFunction& f, double gamma, double lambda) {
    if (!(gamma > 0.0)) throw std::invalid_argument("frac_integral: requires gamma > 0");
    if (lambda < 0.0) throw std::invalid_argument("frac_integral: requires lambda >= 0");
    if (f.values.empty()) throw std::invalid_argument("frac_integral: empty input");
    if (f.values.front() != 0.0)
        throw std::invalid_argument("frac_integral: f must vanish at the first grid node");

    const std::size_t n = f.grid.n;
    const double h = f.grid.dt();
    std::size_t lo, hi;
    support_bounds(f.values, lo, hi);
    GridFunction out(f.grid);
    if (lo > hi) return out;  // f identically zero

    const ConvolutionWeights w = build_weights(gamma, lambda, h, n);
    const double f1 = f.values.size() > 1 ? f.values[1] : 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        double acc = 0.0;
        if (k >= lo) {
            const std::size_t j_lo = k > hi ? k - hi : 0;
            const std::size_t j_hi = k - lo;
            for (std::size_t j = j_lo; j <= j_hi; ++j)
                acc += w.composed[j] * f.values[k - j];
        }
        // The composed weights treat the partition as bi-infinite; cell k
        // (which lies beyond the integration range [0, k h]) contributed a
        // spurious node(-1) term hitting f_1. Remove it.
        if (f1 != 0.0 && k < w.edge_wm1.size()) acc -= w.edge_wm1[k] * f1;
        out.values[k] = acc;
    }
    return out;
}

namespace {

// One application of (d/dt + lambda) with the centered 6th-order stencil,
// trimming 3 nodes per side.
GridFunction apply_first_order(const GridFunction& u, double lambda) {
    const std::size_t n = u.grid.n;
    if (n < 8) throw std::invalid_argument("frac_derivative: trimming exhausts the grid");
    const double h = u.grid.dt();
    const std::size_t m = n - 6;
    TimeGrid trimmed(u.grid.node(3), u.grid.node(n - 4), m);
    GridFunction out(trimmed);
    const double inv = 1.0 / (60.0 * h);
    const std::vector<double>& v = u.values;
    for (std::size_t k = 3; k + 3 < n; ++k) {
        const double d = (-v[k - 3] + 9.0 * v[k - 2] - 45.0 * v[k - 1] + 45.0 * v[k + 1] -
                          9.0 * v[k + 2] + v[k + 3]) *
                         inv;
        out.values[k - 3] = d + lambda * v[k];
    }
    return out;
}

}  // namespace

GridFunction frac_derivative(const GridFunction& f, double gamma, double lambda) {
    if (gamma < 0.0) throw std::invalid_argument("frac_derivative: requires gamma >= 0");
    if (lambda < 0.0) throw std::invalid_argument("frac_derivative: requires lambda >= 0");
    if (gamma == 0.0) return f;
    const int m = static_cast<int>(std::ceil(gamma));
    const double frac_order = static_cast<double>(m) - gamma;
    GridFunction cur = frac_order > 0.0 ? frac_integral(f, frac_order, lambda) : f;
    for (int i = 0; i < m; ++i) cur = apply_first_order(cur, lambda);
    return cur;
}

GridFunction frac_derivative_fourier(const GridFunction& f, double gamma, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("frac_derivative_fourier: requires lambda > 0");
    const std::size_t n = f.grid.n;
    const double h = f.grid.dt();
    const std::size_t n_pad = detail::next_pow2(4 * n);
    std::vector<std::complex<double>> buf(n_pad, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) buf[k] = f.values[k];
    detail::fft_radix2(buf, false);
    const double d_omega = 2.0 * M_PI / (static_cast<double>(n_pad) * h);
    for (std::size_t k = 0; k < n_pad; ++k) {
        const double freq = (k <= n_pad / 2) ? static_cast<double>(k)
                                             : static_cast<double>(k) - static_cast<double>(n_pad);
        const std::complex<double> symbol =
            std::pow(std::complex<double>(lambda, freq * d_omega), gamma);
        buf[k] *= symbol;
    }
    detail::fft_radix2(buf, true);
    GridFunction out(f.grid);
    for (std::size_t k = 0; k < n; ++k) out.values[k] = buf[k].real();
    return out;
}

double locality_functional(double gamma, double lambda, const GridFunction& phi,
                           const GridFunction& psi) {
    if (!(phi.grid == psi.grid))
        throw std::invalid_argument("locality_functional: grid mismatch");
    const GridFunction dphi = frac_derivative(phi, gamma, lambda);
    const GridFunction dpsi = frac_derivative(psi, gamma, lambda);
    const std::size_t m = dphi.values.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) acc += dphi.values[k] * dpsi.values[k];
    acc -= 0.5 * (dphi.values.front() * dpsi.values.front() +
                  dphi.values.back() * dpsi.values.back());
    return std::abs(acc * dphi.grid.dt());
}

LocalityTable locality_table(const std::vector<double>& gammas,
                             const std::vector<double>& deltas, double lambda, double dt) {
    if (gammas.empty() || deltas.empty())
        throw std::invalid_argument("locality_table: empty parameter lists");
    LocalityTable table;
    table.deltas = deltas;
    table.gammas = gammas;
    table.values.assign(deltas.size() * gammas.size(), 0.0);

    detail::parallel_for(deltas.size() * gammas.size(), [&](std::size_t cell) {
        const std::size_t di = cell / gammas.size();
        const std::size_t gi = cell % gammas.size();
        const double delta = deltas[di];
        const double t_end = (3.0 + delta) + 40.0 / lambda;
        const auto n = static_cast<std::size_t>(std::llround((t_end + 1.0) / dt)) + 1;
        const TimeGrid grid(-1.0, -1.0 + dt * static_cast<double>(n - 1), n);
        const GridFunction phi = bump(grid, 0.0, 1.0);
        const GridFunction psi = bump(grid, 2.0 + delta, 1.0);
        table.values[cell] = locality_functional(gammas[gi], lambda, phi, psi);
    });
    return table;
}

LocalityTable locality_reference() {
    LocalityTable t;
    t.gammas = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
    t.deltas = {1e-1, 1e-2, 1e-3};
    t.values = {
        0.004, 0.007, 0.007, 0.0, 0.016, 0.042, 0.059, 0.0, 0.298, 1.078, 2.111, 0.0,
        0.005, 0.009, 0.009, 0.0, 0.024, 0.065, 0.098, 0.0, 0.622, 2.568, 5.829, 0.0,
        0.005, 0.009, 0.009, 0.0, 0.025, 0.068, 0.104, 0.0, 0.678, 2.850, 6.601, 0.0,
    };
    return t;
}

std::string LocalityTable::to_csv() const {
    std::string out = "delta,gamma,value\n";
    char line[96];
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
            std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g\n", deltas[di], gammas[gi],
                          at(di, gi));
            out += line;
        }
    }
    return out;
}

std::vector<GridFunction> apply_coloring(const SpectralModel& model, double gamma,
                                         const std::vector<GridFunction>& per_mode) {
    if (per_mode.size() != model.mode_count())
        throw std::invalid_argument("apply_coloring: mode count mismatch");
    for (std::size_t j = 1; j < per_mode.size(); ++j)
        if (!(per_mode[j].grid == per_mode[0].grid))
            throw std::invalid_argument("apply_coloring: modes must share one grid");
    std::vector<GridFunction> out(per_mode.size());
    detail::parallel_for(per_mode.size(), [&](std::size_t j) {
        const double sq = std::sqrt(model.q(j));
        if (sq == 0.0) {
            out[j] = GridFunction(per_mode[j].grid);
            return;
        }
        GridFunction scaled = per_mode[j];
        for (double& v : scaled.values) v *= sq;
        out[j] = frac_integral(scaled, gamma, model.lambda(j));
    });
    return out;
}

}  // namespace fracevo
