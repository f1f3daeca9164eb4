#pragma once

// The sixteen candidate families for abundance data. Each family has a fixed
// parameter order (see parameter_names) and a standard closed-form density.
//
//   Dagum_3P              (k, alpha, beta)      F = (1 + (x/beta)^-alpha)^-k
//   Frechet_2P/3P         (alpha, beta[, gamma]) F = exp(-(beta/(x-gamma))^alpha)
//   FisherTippett_3P      (k, sigma, mu)        GEV, F = exp(-(1 + k z)^(-1/k)), Gumbel at k = 0
//   InverseGaussian_2P/3P (lambda, mu[, gamma])
//   Levy_1P/2P            (sigma[, gamma])      F = erfc(sqrt(sigma / (2 (x-gamma))))
//   LogLogistic_2P        (alpha, beta)         F = 1 / (1 + (beta/x)^alpha)
//   Lognormal_2P          (sigma, mu)
//   Pareto2_2P            (alpha, beta)         Lomax, F = 1 - (1 + x/beta)^-alpha
//   Pearson5_2P/3P        (alpha, beta[, gamma]) inverse gamma
//   Pearson6_3P           (alpha1, alpha2, beta) scaled beta prime
//   PhasedBiExponential_4P (lambda1, lambda2, gamma1, gamma2), rate lambda1 on
//                          [gamma1, gamma2), rate lambda2 beyond, survival continuous
//   Weibull_2P            (alpha, beta)         F = 1 - exp(-(x/beta)^alpha)

#include <array>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace distfit {

struct AbundanceSample;

enum class FamilyId {
    Dagum3P,
    Frechet2P,
    Frechet3P,
    FisherTippett3P,
    InverseGaussian2P,
    InverseGaussian3P,
    Levy1P,
    Levy2P,
    LogLogistic2P,
    Lognormal2P,
    Pareto2_2P,
    Pearson5_2P,
    Pearson5_3P,
    Pearson6_3P,
    PhasedBiExponential4P,
    Weibull2P,
};

inline constexpr std::array<FamilyId, 16> all_families = {
    FamilyId::Dagum3P,           FamilyId::Frechet2P,       FamilyId::Frechet3P,
    FamilyId::FisherTippett3P,   FamilyId::InverseGaussian2P, FamilyId::InverseGaussian3P,
    FamilyId::Levy1P,            FamilyId::Levy2P,          FamilyId::LogLogistic2P,
    FamilyId::Lognormal2P,       FamilyId::Pareto2_2P,      FamilyId::Pearson5_2P,
    FamilyId::Pearson5_3P,       FamilyId::Pearson6_3P,     FamilyId::PhasedBiExponential4P,
    FamilyId::Weibull2P,
};

// Report spelling, e.g. "Lognormal_2P".
std::string_view family_name(FamilyId family) noexcept;

// Accepts the report spelling ("Lognormal_2P") and the identifier spelling
// ("Lognormal2P").
std::optional<FamilyId> parse_family(std::string_view name) noexcept;

std::size_t parameter_count(FamilyId family) noexcept;
std::span<const std::string_view> parameter_names(FamilyId family) noexcept;

// True when the lower support bound is >= 0 for every admissible parameter
// vector, i.e. the family has no free location parameter.
bool strictly_positive_by_definition(FamilyId family) noexcept;

// Parameter values for one family, validated on construction.
class ParamVector {
public:
    // Throws DomainError when the length or any value is inadmissible.
    ParamVector(FamilyId family, std::vector<double> values);
    ParamVector(FamilyId family, std::initializer_list<double> values)
        : ParamVector(family, std::vector<double>(values)) {}

    static bool admissible(FamilyId family, std::span<const double> values) noexcept;

    FamilyId family() const noexcept { return family_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

    bool operator==(const ParamVector&) const = default;

private:
    FamilyId family_;
    std::vector<double> values_;
};

struct Support {
    double lower;  // may be -inf
    bool lower_inclusive;
    double upper;  // may be +inf
    bool strictly_positive_by_definition;
};

double pdf(const ParamVector& p, double x) noexcept;
double log_pdf(const ParamVector& p, double x) noexcept;
double cdf(const ParamVector& p, double x) noexcept;
// 1 - cdf, computed without cancellation where the family allows it.
double survival(const ParamVector& p, double x) noexcept;
// Throws DomainError unless 0 < q < 1.
double quantile(const ParamVector& p, double q);
Support support(const ParamVector& p) noexcept;

// Sum of log densities; -inf when any observation is outside the support.
double log_likelihood(const ParamVector& p, std::span<const double> xs) noexcept;
double log_likelihood(const ParamVector& p, const AbundanceSample& s) noexcept;

std::string describe(const ParamVector& p);

}  // namespace distfit
