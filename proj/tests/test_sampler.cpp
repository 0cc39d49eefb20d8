#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fracevo/sampler.hpp"
#include "oracles.hpp"

using namespace fracevo;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Kernel autocorrelation q int_0^inf k(s) k(s+h) ds with
// k(t) = t^{gamma-1} e^{-lambda t} / Gamma(gamma); the s^{2gamma-2} endpoint
// singularity is flattened by s = v^{1/(2gamma-1)}.
double matern_quad_oracle(double gamma, double lambda, double q, double h) {
    const double a = 2.0 * gamma - 1.0;
    const double lg = std::lgamma(gamma);
    auto k = [&](double t) { return std::exp((gamma - 1.0) * std::log(t) - lambda * t - lg); };
    return q * oracles::integrate_tail(
                   [&](double v) {
                       if (v <= 0.0) return 0.0;
                       const double s = std::pow(v, 1.0 / a);
                       const double jac = std::pow(v, 1.0 / a - 1.0) / a;
                       return std::exp((gamma - 1.0) * std::log(s) - lambda * s - lg) *
                              k(s + h) * jac;
                   },
                   0.0, 1e-15);
}

}  // namespace

TEST_CASE("gen_noise determinism and scaling") {
    const SpectralModel model({1.0, 3.0}, {0.5, 0.0});
    const TimeGrid grid(0.0, 1.0, 101);
    const NoisePanel a = gen_noise(model, grid, 4, 42);
    const NoisePanel b = gen_noise(model, grid, 4, 42);
    CHECK(a.increments == b.increments);
    const NoisePanel c = gen_noise(model, grid, 4, 43);
    CHECK(a.increments != c.increments);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t k = 0; k < 100; ++k) CHECK(a.at(r, 1, k) == 0.0);
}

TEST_CASE("gen_noise increment variance within 4 standard errors") {
    const SpectralModel model({2.0}, {0.7});
    const TimeGrid grid(0.0, 1.0, 1001);
    const std::size_t reps = 100;  // 1e5 increments total
    const NoisePanel panel = gen_noise(model, grid, reps, 7);
    const double want = 0.7 * grid.dt();
    double sum_sq = 0.0, mean = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t k = 0; k < 1000; ++k) {
            mean += panel.at(r, 0, k);
            sum_sq += panel.at(r, 0, k) * panel.at(r, 0, k);
            ++count;
        }
    mean /= static_cast<double>(count);
    const double var = sum_sq / static_cast<double>(count) - mean * mean;
    const double se = want * std::sqrt(2.0 / static_cast<double>(count));
    CHECK(std::abs(var - want) < 4.0 * se);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(want / static_cast<double>(count)));
}

TEST_CASE("matern_cov closed-form values") {
    CHECK(rel_err(matern_cov(1.0, 1.0, 1.0, 1.0), std::exp(-1.0) / 2.0) < 1e-10);
    CHECK(rel_err(matern_cov(1.0, 2.0, 1.0, 0.0), 0.25) < 1e-13);
    for (double h : {0.2, 1.0, 3.5})
        CHECK(matern_cov(1.3, 0.7, 2.0, h) == matern_cov(1.3, 0.7, 2.0, -h));
    CHECK_THROWS_AS(matern_cov(0.5, 1.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(matern_cov(1.0, 0.0, 1.0, 1.0), std::domain_error);
    CHECK(matern_cov(0.8, 1.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("matern_cov h->0 limit consistency (duplication identity)") {
    for (double gamma : {0.6, 0.75, 1.0, 1.6, 2.5, 4.0}) {
        for (double lambda : {0.5, 1.0, 2.0}) {
            const double nu = gamma - 0.5;
            const double limit =
                std::exp((0.5 - gamma) * M_LN2 + (1.0 - 2.0 * gamma) * std::log(lambda) -
                         0.5 * std::log(M_PI) - std::lgamma(gamma) + (nu - 1.0) * M_LN2 +
                         std::lgamma(nu));
            const double closed = matern_cov(gamma, lambda, 1.0, 0.0);
            CHECK(rel_err(limit, closed) < 1e-10);
        }
    }
}

TEST_CASE("matern_cov against kernel autocorrelation quadrature") {
    for (double gamma : {0.75, 1.0, 1.6, 2.5})
        for (double lambda : {0.5, 2.0})
            for (double h : {0.0, 0.3, 1.0, 3.0}) {
                const double got = matern_cov(gamma, lambda, 1.3, h);
                const double want = matern_quad_oracle(gamma, lambda, 1.3, h);
                CHECK(rel_err(got, want) < 1e-6);
            }
}

TEST_CASE("sample_stationary: OU law and reproducibility") {
    const SpectralModel model({1.5}, {0.8});
    const TimeGrid grid(0.0, 2.0, 41);
    const std::size_t reps = 20000;
    const ModeEnsemble ens = sample_stationary(model, 1.0, grid, reps, 11);
    const ModeEnsemble ens2 = sample_stationary(model, 1.0, grid, reps, 11);
    CHECK(ens.paths == ens2.paths);

    const double c0 = matern_cov(1.0, 1.5, 0.8, 0.0);
    for (std::size_t lag : {std::size_t(0), std::size_t(1), std::size_t(8), std::size_t(20)}) {
        const auto est = empirical_cov(ens, 5, 5 + lag);
        const double want = matern_cov(1.0, 1.5, 0.8, grid.dt() * static_cast<double>(lag));
        CHECK(std::abs(est[0].estimate - want) < 4.0 * est[0].standard_error + 1e-12);
        CHECK(rel_err(want / c0, std::exp(-1.5 * grid.dt() * static_cast<double>(lag))) <
              1e-12);
    }
}

TEST_CASE("sample_stationary: fractional law against matern_cov") {
    const SpectralModel model({1.0, 2.5}, {1.0, 0.6});
    const TimeGrid grid(0.0, 1.5, 31);
    const ModeEnsemble ens = sample_stationary(model, 0.8, grid, 20000, 5);
    const auto est = empirical_cov(ens, 3, 17);
    for (std::size_t j = 0; j < 2; ++j) {
        const double want =
            matern_cov(0.8, model.lambda(j), model.q(j), grid.node(17) - grid.node(3));
        CHECK(std::abs(est[j].estimate - want) < 4.0 * est[j].standard_error);
    }
}

TEST_CASE("sample_stationary: zero noise stays zero, bad gamma rejected") {
    const SpectralModel model({1.0}, {0.0});
    const TimeGrid grid(0.0, 1.0, 9);
    const ModeEnsemble ens = sample_stationary(model, 1.0, grid, 3, 1);
    for (double v : ens.paths) CHECK(v == 0.0);
    const SpectralModel live({1.0}, {1.0});
    CHECK_THROWS_AS(sample_stationary(live, 0.5, grid, 3, 1), std::domain_error);
}

TEST_CASE("sample_convolution: start value, variance ramp, isometry") {
    const SpectralModel model({1.2}, {0.9});
    const TimeGrid grid(0.0, 3.0, 301);
    const std::size_t reps = 20000;
    const NoisePanel noise = gen_noise(model, grid, reps, 99);
    const ModeEnsemble ens = sample_convolution(model, 1.0, 0.0, grid, noise);

    for (std::size_t r = 0; r < 20; ++r) CHECK(ens.at(r, 0, 0) == 0.0);

    for (double t : {0.25, 1.0, 3.0}) {
        const std::size_t idx = grid.index_of(t);
        const auto est = empirical_cov(ens, idx, idx);
        const double want = 0.9 * (1.0 - std::exp(-2.0 * 1.2 * t)) / (2.0 * 1.2);
        CHECK(std::abs(est[0].estimate - want) < 4.0 * est[0].standard_error);
    }

    // Discrete Ito isometry: Var(sum w_l dW) = sum w_l^2 q dt in the exact law.
    const std::vector<double> w = convolution_weights(1.0, 1.2, grid.dt(), 300);
    const std::size_t idx = grid.index_of(1.0);
    double discrete_var = 0.0;
    for (std::size_t l = 1; l <= idx; ++l) discrete_var += w[l] * w[l] * 0.9 * grid.dt();
    const auto est = empirical_cov(ens, idx, idx);
    CHECK(std::abs(est[0].estimate - discrete_var) < 4.0 * est[0].standard_error);

    CHECK_THROWS_AS(sample_convolution(model, 0.5, 0.0, grid, noise), std::domain_error);
    CHECK_THROWS_AS(sample_convolution(model, 1.0, 0.5, grid, noise), std::invalid_argument);
}

TEST_CASE("two-sampler agreement after burn-in") {
    const SpectralModel model({0.9}, {1.1});
    const double t_burn = 10.0 / 0.9;
    const TimeGrid grid(0.0, t_burn + 1.0, 257);
    const std::size_t reps = 20000;
    const NoisePanel noise = gen_noise(model, grid, reps, 123);
    for (double gamma : {1.0, 1.4}) {
        const ModeEnsemble ens = sample_convolution(model, gamma, 0.0, grid, noise);
        const std::size_t i = grid.n - 9;
        const std::size_t k = grid.n - 1;
        const auto est = empirical_cov(ens, i, k);
        const double want = matern_cov(gamma, 0.9, 1.1, grid.node(k) - grid.node(i));
        const double tol = std::max(4.0 * est[0].standard_error, 0.01 * std::abs(want));
        CHECK(std::abs(est[0].estimate - want) < tol);
    }
}

TEST_CASE("empirical_cov: degenerate and antithetic ensembles") {
    const TimeGrid grid(0.0, 1.0, 5);
    ModeEnsemble ens;
    ens.grid = grid;
    ens.replicates = 6;
    ens.modes = 1;
    ens.paths.assign(6 * 5, 0.0);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t k = 0; k < 5; ++k) ens.at(r, 0, k) = 1.0 + 0.5 * k;
    const auto est = empirical_cov(ens, 0, 2);
    CHECK(est[0].estimate == doctest::Approx(2.0));
    CHECK(est[0].standard_error == doctest::Approx(0.0).epsilon(1e-12));

    const SpectralModel model({1.0}, {1.0});
    const ModeEnsemble base = sample_stationary(model, 1.0, grid, 400, 3);
    ModeEnsemble anti;
    anti.grid = grid;
    anti.replicates = 800;
    anti.modes = 1;
    anti.paths.assign(800 * 5, 0.0);
    for (std::size_t r = 0; r < 400; ++r)
        for (std::size_t k = 0; k < 5; ++k) {
            anti.at(2 * r, 0, k) = base.at(r, 0, k);
            anti.at(2 * r + 1, 0, k) = -base.at(r, 0, k);
        }
    const auto e_base = empirical_cov(base, 0, 3);
    const auto e_anti = empirical_cov(anti, 0, 3);
    CHECK(e_anti[0].estimate == doctest::Approx(e_base[0].estimate).epsilon(1e-12));
    CHECK(e_anti[0].standard_error < e_base[0].standard_error);

    CHECK_THROWS_AS(empirical_cov(ens, 0, 99), std::invalid_argument);
}

TEST_CASE("reconstruct_field: sine basis evaluation") {
    const SpectralModel model = build_whittle_matern(1.0, 1.0, 2.0, 1, QProfile::constant(1.0));
    const TimeGrid grid(0.0, 1.0, 11);
    const ModeEnsemble ens = sample_stationary(model, 1.0, grid, 3, 21);
    const auto field = reconstruct_field(model, ens, 1.0);  // x = L/2, j = 1 peak
    const double basis = std::sqrt(2.0 / 2.0) * std::sin(M_PI * 0.5);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t k = 0; k < grid.n; ++k)
            CHECK(field[r][k] == doctest::Approx(basis * ens.at(r, 0, k)).epsilon(1e-14));
    const auto near_zero = reconstruct_field(model, ens, 1e-9);
    CHECK(std::abs(near_zero[0][0]) < 1e-8);
    CHECK_THROWS_AS(reconstruct_field(model, ens, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(reconstruct_field(model, ens, 2.5), std::invalid_argument);
    const SpectralModel bare({1.0}, {1.0});
    CHECK_THROWS_AS(reconstruct_field(bare, ens, 0.5), std::invalid_argument);
}

TEST_CASE("reconstruct_field: Parseval variance at a spatial point") {
    const SpectralModel model = build_whittle_matern(1.0, 1.0, 1.0, 3, QProfile::constant(1.0));
    const TimeGrid grid(0.0, 0.5, 3);
    const std::size_t reps = 20000;
    const ModeEnsemble ens = sample_stationary(model, 1.0, grid, reps, 77);
    const double x = 0.3;
    const auto field = reconstruct_field(model, ens, x);
    double want = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const double e = std::sqrt(2.0) * std::sin((j + 1) * M_PI * x);
        want += matern_cov(1.0, model.lambda(j), model.q(j), 0.0) * e * e;
    }
    double mean_sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) mean_sq += field[r][1] * field[r][1];
    mean_sq /= static_cast<double>(reps);
    const double se = want * std::sqrt(2.0 / static_cast<double>(reps));
    CHECK(std::abs(mean_sq - want) < 4.0 * se);
}

TEST_CASE("mean-square continuity rate over a dyadic sweep") {
    for (double gamma : {0.75, 1.25}) {
        const double alpha = std::min(2.0 * gamma - 1.0, 1.0);
        const SpectralModel model({1.0}, {1.0});
        std::vector<double> dts = {0.4, 0.2, 0.1, 0.05, 0.025};
        std::vector<double> second_moment;
        for (double dt : dts) {
            const TimeGrid grid(0.0, 2.0 * dt, 3);
            const ModeEnsemble ens = sample_stationary(model, gamma, grid, 8000, 31);
            double acc = 0.0;
            for (std::size_t r = 0; r < ens.replicates; ++r) {
                const double d = ens.at(r, 0, 1) - ens.at(r, 0, 0);
                acc += d * d;
            }
            second_moment.push_back(acc / static_cast<double>(ens.replicates));
            const double want = 2.0 * (matern_cov(gamma, 1.0, 1.0, 0.0) -
                                       matern_cov(gamma, 1.0, 1.0, dt));
            const double se = want * std::sqrt(2.0 / 8000.0);
            CHECK(std::abs(second_moment.back() - want) < 4.0 * se);
        }
        double c_fit = 0.0;
        for (std::size_t i = 0; i < dts.size(); ++i)
            c_fit = std::max(c_fit, second_moment[i] / std::pow(dts[i], alpha));
        for (std::size_t i = 1; i < dts.size(); ++i) {
            CHECK(second_moment[i] < second_moment[i - 1]);
            CHECK(second_moment[i] <= c_fit * std::pow(dts[i], alpha) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("gen_noise replicate offset reproduces the monolithic panel") {
    const SpectralModel model({1.0, 2.0}, {0.5, 1.0});
    const TimeGrid grid(0.0, 1.0, 17);
    const NoisePanel whole = gen_noise(model, grid, 10, 77);
    const NoisePanel head = gen_noise(model, grid, 4, 77, 0);
    const NoisePanel tail = gen_noise(model, grid, 6, 77, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 16; ++k)
                CHECK(head.at(r, j, k) == whole.at(r, j, k));
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 16; ++k)
                CHECK(tail.at(r, j, k) == whole.at(r + 4, j, k));
}

TEST_CASE("empirical_cov requires at least two replicates") {
    ModeEnsemble ens;
    ens.grid = TimeGrid(0.0, 1.0, 3);
    ens.replicates = 1;
    ens.modes = 1;
    ens.paths.assign(3, 1.0);
    CHECK_THROWS_AS(empirical_cov(ens, 0, 1), std::invalid_argument);
}

#include "fracevo/linalg.hpp"

TEST_CASE("cholesky_psd: strict, semidefinite and indefinite matrices") {
    // strictly positive definite 2x2
    std::vector<double> spd = {4.0, 2.0, 2.0, 3.0};
    double jitter = -1.0;
    const auto l = fracevo::cholesky_psd(spd, 2, 1e-12, &jitter);
    CHECK(jitter == 0.0);
    CHECK(l[0] == doctest::Approx(2.0));
    CHECK(l[2] == doctest::Approx(1.0));
    CHECK(l[3] == doctest::Approx(std::sqrt(2.0)));

    // rank-one PSD: pinned direction gets a zero pivot, no jitter
    std::vector<double> psd = {1.0, 1.0, 1.0, 1.0};
    const auto lp = fracevo::cholesky_psd(psd, 2, 1e-12, &jitter);
    CHECK(jitter == 0.0);
    CHECK(lp[3] == 0.0);

    // indefinite: jitter cannot rescue it; reported as a factorization error
    std::vector<double> bad = {1.0, 2.0, 2.0, 1.0};
    CHECK_THROWS_AS(fracevo::cholesky_psd(bad, 2, 1e-12), fracevo::FactorizationError);
}
