#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fracevo/spectral_model.hpp"
#include "oracles.hpp"

using namespace fracevo;

TEST_CASE("whittle-matern builder eigenvalues") {
    const SpectralModel m = build_whittle_matern(1.0, 1.0, M_PI, 2, QProfile::constant(1.0));
    REQUIRE(m.mode_count() == 2);
    CHECK(m.lambda(0) == doctest::Approx(2.0).epsilon(1e-14));  // kappa^2 + 1
    CHECK(m.lambda(1) == doctest::Approx(5.0).epsilon(1e-14));  // kappa^2 + 4
    CHECK(m.q(0) == 1.0);
    CHECK(m.stability_margin() == doctest::Approx(2.0));
    CHECK(m.trace_q() == doctest::Approx(2.0));

    const SpectralModel half = build_whittle_matern(2.0, 0.5, M_PI, 1, QProfile::constant(1.0));
    CHECK(half.lambda(0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("builder rejects bad parameters") {
    CHECK_THROWS_AS(build_whittle_matern(0.0, 1.0, 1.0, 3, QProfile::constant(1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_whittle_matern(1.0, -1.0, 1.0, 3, QProfile::constant(1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_whittle_matern(1.0, 1.0, 1.0, 0, QProfile::constant(1.0)),
                    std::invalid_argument);
}

TEST_CASE("q profile with spectral decay") {
    const SpectralModel m = build_whittle_matern(1.0, 1.0, M_PI, 3, QProfile::power(2.0));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(m.q(j) == doctest::Approx(std::pow(m.lambda(j), -2.0)).epsilon(1e-14));
}

TEST_CASE("assumption integral closed form") {
    const SpectralModel m({1.0, 4.0}, {1.0, 1.0});
    const AssumptionReport r = assumption_integral(m, 1.0);
    REQUIRE(r.satisfied);
    CHECK(r.per_mode[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(r.per_mode[1] == doctest::Approx(0.125).epsilon(1e-13));
    CHECK(r.total == doctest::Approx(0.625).epsilon(1e-13));
}

TEST_CASE("assumption integral divergence flag at gamma0 <= 1/2") {
    const SpectralModel m({1.0}, {1.0});
    for (double g0 : {0.5, 0.3, 0.0, -2.0}) {
        const AssumptionReport r = assumption_integral(m, g0);
        CHECK_FALSE(r.satisfied);
        CHECK(r.diverges);
        CHECK(r.per_mode.empty());
    }
}

TEST_CASE("zero noise gives zero integral") {
    const SpectralModel m({1.0}, {0.0});
    const AssumptionReport r = assumption_integral(m, 2.0);
    CHECK(r.satisfied);
    CHECK(r.total == 0.0);
}

TEST_CASE("per-mode values agree with adaptive quadrature") {
    const SpectralModel m({0.7, 2.0, 11.0}, {1.0, 0.4, 2.5});
    for (double g0 : {0.6, 1.0, 1.7, 3.1}) {
        const AssumptionReport r = assumption_integral(m, g0);
        for (std::size_t j = 0; j < m.mode_count(); ++j) {
            // t^{2g0-2} has an integrable singularity for g0 < 1; flatten it
            // with t = v^{1/(2g0-1)} before applying Simpson.
            const double a = 2.0 * g0 - 1.0;
            const double lam = m.lambda(j);
            const double want =
                m.q(j) * oracles::integrate_tail(
                             [&](double v) {
                                 const double t = std::pow(v, 1.0 / a);
                                 return std::exp(-2.0 * lam * t) / a;
                             },
                             0.0, 1e-14);
            CHECK(std::abs(r.per_mode[j] - want) <= 1e-8 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("monotone extension in gamma") {
    const SpectralModel m({0.9, 3.0}, {1.0, 0.2});
    bool seen_satisfied = false;
    for (double g = 0.2; g < 4.0; g += 0.1) {
        const AssumptionReport r = assumption_integral(m, g);
        if (seen_satisfied) CHECK(r.satisfied);
        if (r.satisfied) seen_satisfied = true;
    }
    CHECK(seen_satisfied);
}

TEST_CASE("json round trip") {
    const SpectralModel m = build_whittle_matern(1.5, 0.8, 2.0, 4, QProfile::power(1.0, 0.7));
    const SpectralModel back = SpectralModel::from_json(m.to_json());
    REQUIRE(back.mode_count() == m.mode_count());
    for (std::size_t j = 0; j < m.mode_count(); ++j) {
        CHECK(back.lambda(j) == doctest::Approx(m.lambda(j)).epsilon(1e-15));
        CHECK(back.q(j) == doctest::Approx(m.q(j)).epsilon(1e-15));
    }
    REQUIRE(back.domain_length().has_value());
    CHECK(*back.domain_length() == doctest::Approx(2.0));

    const SpectralModel built = SpectralModel::from_json(
        R"({"kappa": 1.0, "beta": 1.0, "L": 3.14159265358979323846, "J": 2})");
    CHECK(built.lambda(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("model invariant violations throw") {
    CHECK_THROWS_AS(SpectralModel({1.0, -2.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralModel({1.0}, {-0.5}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralModel({}, {}), std::invalid_argument);
}
