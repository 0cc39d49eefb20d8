#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fracevo {

// Uniform time grid with n nodes t_k = t0 + k*dt on [t0, t1].
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t n = 2;

    TimeGrid() = default;
    TimeGrid(double t0_, double t1_, std::size_t n_) : t0(t0_), t1(t1_), n(n_) {
        if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: requires t1 > t0");
        if (n < 2) throw std::invalid_argument("TimeGrid: requires n >= 2");
    }

    double dt() const { return (t1 - t0) / static_cast<double>(n - 1); }
    double node(std::size_t k) const { return t0 + static_cast<double>(k) * dt(); }

    // Index of a node coinciding with t (within a half-step); throws otherwise.
    std::size_t index_of(double t) const {
        const double pos = (t - t0) / dt();
        const auto k = static_cast<long long>(std::llround(pos));
        if (k < 0 || k >= static_cast<long long>(n) ||
            std::abs(pos - static_cast<double>(k)) > 1e-9)
            throw std::invalid_argument("TimeGrid: t is not a grid node");
        return static_cast<std::size_t>(k);
    }

    bool operator==(const TimeGrid& o) const { return t0 == o.t0 && t1 == o.t1 && n == o.n; }
};

// Scalar function sampled on a TimeGrid.
struct GridFunction {
    TimeGrid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const TimeGrid& g) : grid(g), values(g.n, 0.0) {}
    GridFunction(const TimeGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.n)
            throw std::invalid_argument("GridFunction: value count does not match grid");
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

}  // namespace fracevo
