#include "fracevo/linalg.hpp"

#include <cmath>

namespace fracevo {

namespace {

bool try_factor(const std::vector<double>& a, std::size_t n, double zero_tol,
                std::vector<double>& out) {
    out.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= out[i * n + k] * out[j * n + k];
            if (i == j) {
                if (s < -zero_tol) return false;
                out[i * n + i] = s > zero_tol ? std::sqrt(s) : 0.0;
            } else {
                const double d = out[j * n + j];
                out[i * n + j] = d > 0.0 ? s / d : 0.0;
            }
        }
    }
    return true;
}

}  // namespace

std::vector<double> cholesky_psd(std::vector<double> matrix, std::size_t n,
                                 double jitter_rel, double* applied_jitter) {
    if (matrix.size() != n * n) throw std::invalid_argument("cholesky_psd: bad dimensions");
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(matrix[i * n + i]));
    const double zero_tol = 1e-12 * std::max(max_diag, 1e-300);
    if (applied_jitter) *applied_jitter = 0.0;

    std::vector<double> factor;
    if (try_factor(matrix, n, zero_tol, factor)) return factor;

    const double jitter = jitter_rel * max_diag;
    for (std::size_t i = 0; i < n; ++i) matrix[i * n + i] += jitter;
    if (try_factor(matrix, n, zero_tol, factor)) {
        if (applied_jitter) *applied_jitter = jitter;
        return factor;
    }
    throw FactorizationError("cholesky_psd: matrix is not positive semidefinite");
}

std::vector<double> lower_tri_apply(const std::vector<double>& factor, std::size_t n,
                                    const std::vector<double>& x) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += factor[i * n + k] * x[k];
        y[i] = s;
    }
    return y;
}

}  // namespace fracevo
