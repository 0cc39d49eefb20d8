#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fracevo {

struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lower-triangular factor of a symmetric positive semidefinite matrix
// (row-major n x n). Pivots within tol_rel * max_diag of zero are clamped to
// zero (degenerate directions, e.g. a process pinned at t = 0). If a pivot is
// negative beyond that band, one retry adds `jitter_rel * max_diag` to the
// diagonal; the jitter actually applied is reported through `applied_jitter`.
// Throws FactorizationError if the retry also fails.
std::vector<double> cholesky_psd(std::vector<double> matrix, std::size_t n,
                                 double jitter_rel, double* applied_jitter = nullptr);

// y = L * x for a lower-triangular row-major factor.
std::vector<double> lower_tri_apply(const std::vector<double>& factor, std::size_t n,
                                    const std::vector<double>& x);

}  // namespace fracevo
