#pragma once

// Derived statistics of a fitted lognormal: moments, Fisher information and
// Renyi entropies.

#include <array>
#include <string>

#include "distfit/mle.hpp"

namespace distfit {

struct LognormalMoments {
    double mean;
    double stdev;
    double skewness;
    double kurtosis_excess;
};

// Throws DomainError for sigma <= 0.
LognormalMoments lognormal_moments(double sigma, double mu);

// Information for mu, 1/sigma^2.
double fisher_information(double sigma);

// H_alpha in nats; alpha == 1 gives the Shannon entropy.
double renyi_entropy(double sigma, double mu, double alpha);

inline constexpr std::array<double, 4> renyi_orders = {0.5, 1.0, 2.0, 3.0};

struct SummaryRow {
    std::string label;
    double sigma = 0.0;
    double mu = 0.0;
    double mean = 0.0;
    double stdev = 0.0;
    double ln_skewness = 0.0;
    double ln_kurtosis_excess = 0.0;
    double fisher_information = 0.0;
    std::array<double, 4> renyi{};  // indexed like renyi_orders

    double renyi_at(double alpha) const;  // throws for an order outside the grid
    bool operator==(const SummaryRow&) const = default;
};

// Throws DomainError unless the fit is a converged Lognormal_2P.
SummaryRow summarize(const FitResult& fit, std::string label);
SummaryRow summarize(double sigma, double mu, std::string label);

}  // namespace distfit
