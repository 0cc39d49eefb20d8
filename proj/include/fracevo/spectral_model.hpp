#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fracevo {

// Per-mode decay profile for the noise covariance eigenvalues.
struct QProfile {
    // q_j = scale * (kappa^2 + (j pi / L)^2)^{-alpha}; alpha = 0 gives a
    // constant profile.
    double scale = 1.0;
    double alpha = 0.0;

    static QProfile constant(double c) { return QProfile{c, 0.0}; }
    static QProfile power(double alpha, double scale = 1.0) { return QProfile{scale, alpha}; }
};

// The operator pair (A, Q) truncated to J shared eigenmodes: A e_j = lambda_j e_j,
// Q e_j = q_j e_j. Immutable after construction.
class SpectralModel {
public:
    SpectralModel(std::vector<double> lambdas, std::vector<double> qs,
                  std::optional<double> domain_length = std::nullopt);

    std::size_t mode_count() const { return lambdas_.size(); }
    const std::vector<double>& lambdas() const { return lambdas_; }
    const std::vector<double>& qs() const { return qs_; }
    double lambda(std::size_t j) const { return lambdas_[j]; }
    double q(std::size_t j) const { return qs_[j]; }

    // Exponential stability margin w = min_j lambda_j (M0 = 1 in the
    // self-adjoint diagonal case).
    double stability_margin() const { return margin_; }
    double trace_q() const { return trace_q_; }

    // Interval length of the Dirichlet sine basis, when the model was built
    // from one; required by field reconstruction.
    std::optional<double> domain_length() const { return domain_length_; }

    std::string to_json() const;
    static SpectralModel from_json(const std::string& text);

private:
    std::vector<double> lambdas_;
    std::vector<double> qs_;
    std::optional<double> domain_length_;
    double margin_ = 0.0;
    double trace_q_ = 0.0;
};

// lambda_j = (kappa^2 + (j pi / L)^2)^beta for the Dirichlet Laplacian power
// A = (kappa^2 - Delta)^beta on (0, L), truncated to J sine modes.
SpectralModel build_whittle_matern(double kappa, double beta, double length, std::size_t modes,
                                   const QProfile& q_profile);

// Report for the mode-wise integrability condition
//   int_0^inf || t^{g0-1} S(t) Q^{1/2} ||^2 dt  =  sum_j q_j Gamma(2 g0 - 1) / (2 lambda_j)^{2 g0 - 1},
// which holds iff g0 > 1/2.
struct AssumptionReport {
    double gamma0 = 0.0;
    bool satisfied = false;
    bool diverges = false;           // true iff gamma0 <= 1/2
    std::vector<double> per_mode;    // empty when diverges
    double total = 0.0;              // sum of per_mode when satisfied

    std::string to_json() const;
};

AssumptionReport assumption_integral(const SpectralModel& model, double gamma0);

}  // namespace fracevo
