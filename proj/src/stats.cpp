#include "distfit/stats.hpp"

#include <cmath>
#include <numbers>

#include "distfit/error.hpp"

namespace distfit {

namespace {

void require_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("lognormal sigma must be positive");
}

}  // namespace

LognormalMoments lognormal_moments(double sigma, double mu) {
    require_sigma(sigma);
    const double s2 = sigma * sigma;
    const double w = std::exp(s2);
    const double wm1 = std::expm1(s2);
    const double mean = std::exp(mu + 0.5 * s2);
    return {mean, mean * std::sqrt(wm1), (w + 2.0) * std::sqrt(wm1),
            std::exp(4.0 * s2) + 2.0 * std::exp(3.0 * s2) + 3.0 * std::exp(2.0 * s2) - 6.0};
}

double fisher_information(double sigma) {
    require_sigma(sigma);
    return 1.0 / (sigma * sigma);
}

double renyi_entropy(double sigma, double mu, double alpha) {
    require_sigma(sigma);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("Renyi order must be positive");
    const double base = mu + std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
    if (alpha == 1.0) return base + 0.5;
    const double am1 = alpha - 1.0;
    // ln(alpha)/(alpha-1) via log1p keeps the expression smooth through alpha = 1.
    return base + std::log1p(am1) / (2.0 * am1) - am1 * sigma * sigma / (2.0 * alpha);
}

double SummaryRow::renyi_at(double alpha) const {
    for (std::size_t i = 0; i < renyi_orders.size(); ++i) {
        if (renyi_orders[i] == alpha) return renyi[i];
    }
    throw DomainError("Renyi order not in the summary grid");
}

SummaryRow summarize(double sigma, double mu, std::string label) {
    const LognormalMoments m = lognormal_moments(sigma, mu);
    SummaryRow row;
    row.label = std::move(label);
    row.sigma = sigma;
    row.mu = mu;
    row.mean = m.mean;
    row.stdev = m.stdev;
    row.ln_skewness = std::log(m.skewness);
    row.ln_kurtosis_excess = std::log(m.kurtosis_excess);
    row.fisher_information = fisher_information(sigma);
    for (std::size_t i = 0; i < renyi_orders.size(); ++i) row.renyi[i] = renyi_entropy(sigma, mu, renyi_orders[i]);
    return row;
}

SummaryRow summarize(const FitResult& fit, std::string label) {
    if (fit.family != FamilyId::Lognormal2P) {
        throw DomainError("summary statistics need a Lognormal_2P fit, got " + std::string(family_name(fit.family)));
    }
    if (!fit.converged) throw DomainError("summary of a non-converged fit");
    return summarize(fit.params[0], fit.params[1], std::move(label));
}

}  // namespace distfit
