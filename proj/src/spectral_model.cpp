#include "fracevo/spectral_model.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fracevo/specfun.hpp"

namespace fracevo {

SpectralModel::SpectralModel(std::vector<double> lambdas, std::vector<double> qs,
                             std::optional<double> domain_length)
    : lambdas_(std::move(lambdas)), qs_(std::move(qs)), domain_length_(domain_length) {
    if (lambdas_.empty() || lambdas_.size() != qs_.size())
        throw std::invalid_argument("SpectralModel: need matching nonempty lambda/q arrays");
    margin_ = lambdas_.front();
    for (double l : lambdas_) {
        if (!(l > 0.0))
            throw std::invalid_argument("SpectralModel: eigenvalues must be positive");
        margin_ = std::min(margin_, l);
    }
    for (double q : qs_) {
        if (q < 0.0) throw std::invalid_argument("SpectralModel: q_j must be >= 0");
        trace_q_ += q;
    }
}

SpectralModel build_whittle_matern(double kappa, double beta, double length,
                                   std::size_t modes, const QProfile& q_profile) {
    if (!(kappa > 0.0) || !(beta > 0.0) || !(length > 0.0) || modes < 1)
        throw std::invalid_argument("build_whittle_matern: parameters must be positive");
    std::vector<double> lambdas(modes), qs(modes);
    for (std::size_t j = 1; j <= modes; ++j) {
        const double mu = kappa * kappa + std::pow(j * M_PI / length, 2);
        lambdas[j - 1] = std::pow(mu, beta);
        qs[j - 1] = q_profile.scale * std::pow(mu, -q_profile.alpha);
    }
    return SpectralModel(std::move(lambdas), std::move(qs), length);
}

AssumptionReport assumption_integral(const SpectralModel& model, double gamma0) {
    AssumptionReport report;
    report.gamma0 = gamma0;
    if (gamma0 <= 0.5) {
        // The mode integral int_0^inf t^{2 g0 - 2} e^{-2 lambda t} dt diverges
        // at t = 0 for every mode with q_j > 0, and the zero-noise value is
        // not informative; no numbers are emitted.
        report.diverges = true;
        report.satisfied = false;
        return report;
    }
    report.per_mode.reserve(model.mode_count());
    const double lg = ln_gamma(2.0 * gamma0 - 1.0);
    for (std::size_t j = 0; j < model.mode_count(); ++j) {
        const double q = model.q(j);
        const double v =
            q == 0.0 ? 0.0
                     : q * std::exp(lg - (2.0 * gamma0 - 1.0) * std::log(2.0 * model.lambda(j)));
        report.per_mode.push_back(v);
        report.total += v;
    }
    report.satisfied = true;
    return report;
}

std::string SpectralModel::to_json() const {
    nlohmann::json j;
    j["lambdas"] = lambdas_;
    j["qs"] = qs_;
    if (domain_length_) j["L"] = *domain_length_;
    return j.dump(2);
}

SpectralModel SpectralModel::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("lambdas") && j.contains("qs")) {
        std::optional<double> length;
        if (j.contains("L")) length = j["L"].get<double>();
        return SpectralModel(j["lambdas"].get<std::vector<double>>(),
                             j["qs"].get<std::vector<double>>(), length);
    }
    // Builder form.
    const double kappa = j.at("kappa").get<double>();
    const double beta = j.at("beta").get<double>();
    const double length = j.at("L").get<double>();
    const auto modes = j.at("J").get<std::size_t>();
    QProfile profile;
    if (j.contains("q_alpha")) profile.alpha = j["q_alpha"].get<double>();
    if (j.contains("q_const")) profile.scale = j["q_const"].get<double>();
    return build_whittle_matern(kappa, beta, length, modes, profile);
}

std::string AssumptionReport::to_json() const {
    nlohmann::json j;
    j["gamma0"] = gamma0;
    j["satisfied"] = satisfied;
    j["diverges"] = diverges;
    if (!diverges) {
        j["per_mode"] = per_mode;
        j["total"] = total;
    }
    return j.dump(2);
}

}  // namespace fracevo
