#include "distfit/distzoo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "distfit/dataset.hpp"
#include "distfit/error.hpp"
#include "text_util.hpp"

namespace distfit {

namespace {

namespace bm = boost::math;
using QuietPolicy = bm::policies::policy<
    bm::policies::domain_error<bm::policies::errno_on_error>,
    bm::policies::pole_error<bm::policies::errno_on_error>,
    bm::policies::overflow_error<bm::policies::errno_on_error>,
    bm::policies::evaluation_error<bm::policies::errno_on_error>,
    bm::policies::promote_double<false>>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kGumbelThreshold = 1e-12;

struct FamilyInfo {
    std::string_view name;
    std::string_view ident;
    std::array<std::string_view, 4> params;
    std::size_t count;
    bool positive_support;
};

constexpr std::array<FamilyInfo, 16> kFamilies = {{
    {"Dagum_3P", "Dagum3P", {"k", "alpha", "beta"}, 3, true},
    {"Frechet_2P", "Frechet2P", {"alpha", "beta"}, 2, true},
    {"Frechet_3P", "Frechet3P", {"alpha", "beta", "gamma"}, 3, false},
    {"FisherTippett_3P", "FisherTippett3P", {"k", "sigma", "mu"}, 3, false},
    {"InverseGaussian_2P", "InverseGaussian2P", {"lambda", "mu"}, 2, true},
    {"InverseGaussian_3P", "InverseGaussian3P", {"lambda", "mu", "gamma"}, 3, false},
    {"Levy_1P", "Levy1P", {"sigma"}, 1, true},
    {"Levy_2P", "Levy2P", {"sigma", "gamma"}, 2, false},
    {"LogLogistic_2P", "LogLogistic2P", {"alpha", "beta"}, 2, true},
    {"Lognormal_2P", "Lognormal2P", {"sigma", "mu"}, 2, true},
    {"Pareto2_2P", "Pareto2_2P", {"alpha", "beta"}, 2, true},
    {"Pearson5_2P", "Pearson5_2P", {"alpha", "beta"}, 2, true},
    {"Pearson5_3P", "Pearson5_3P", {"alpha", "beta", "gamma"}, 3, false},
    {"Pearson6_3P", "Pearson6_3P", {"alpha1", "alpha2", "beta"}, 3, true},
    {"PhasedBiExponential_4P", "PhasedBiExponential4P", {"lambda1", "lambda2", "gamma1", "gamma2"}, 4, false},
    {"Weibull_2P", "Weibull2P", {"alpha", "beta"}, 2, true},
}};

const FamilyInfo& info(FamilyId f) noexcept { return kFamilies[static_cast<std::size_t>(f)]; }

// log(1 + e^t) without overflow.
double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// log(erfc(z)) for z >= 0, continued beyond the underflow point of erfc.
double log_erfc(double z) noexcept {
    if (z < 25.0) return std::log(std::erfc(z));
    const double z2 = z * z;
    const double inv = 1.0 / (2.0 * z2);
    const double series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv * inv * inv;
    return -z2 - std::log(z * std::sqrt(std::numbers::pi)) + std::log(series);
}

// Location of the lower support bound for shifted families, else 0.
double location(const ParamVector& p) noexcept {
    switch (p.family()) {
        case FamilyId::Frechet3P:
        case FamilyId::InverseGaussian3P:
        case FamilyId::Pearson5_3P:
            return p[2];
        case FamilyId::Levy2P:
            return p[1];
        default:
            return 0.0;
    }
}

struct Gev {
    double k, sigma, mu;
};

Gev gev(const ParamVector& p) noexcept { return {p[0], p[1], p[2]}; }

// Inverse Gaussian on y > 0: Phi(a) + exp(2 lambda / mu) Phi(-b).
double ig_survival(double lambda, double mu, double y) noexcept {
    const double r = std::sqrt(lambda / y);
    const double a = r * (y / mu - 1.0);
    const double b = r * (y / mu + 1.0);
    const double second = std::exp(2.0 * lambda / mu + log_erfc(b / std::numbers::sqrt2) - std::numbers::ln2);
    return std::clamp(normal_cdf(-a) - second, 0.0, 1.0);
}

double ig_cdf(double lambda, double mu, double y) noexcept {
    if (y > mu) return 1.0 - ig_survival(lambda, mu, y);
    const double r = std::sqrt(lambda / y);
    const double a = r * (y / mu - 1.0);
    const double b = r * (y / mu + 1.0);
    const double second = std::exp(2.0 * lambda / mu + log_erfc(b / std::numbers::sqrt2) - std::numbers::ln2);
    return std::clamp(normal_cdf(a) + second, 0.0, 1.0);
}

// Bracketed bisection on y > 0 for a monotone cdf.
template <class Cdf>
double invert_positive(Cdf&& f, double q, double start) noexcept {
    double lo = start, hi = start;
    for (int i = 0; i < 2000 && f(hi) < q; ++i) hi *= 2.0;
    for (int i = 0; i < 2000 && f(lo) >= q && lo > std::numeric_limits<double>::min(); ++i) lo *= 0.5;
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::string_view family_name(FamilyId family) noexcept { return info(family).name; }

std::optional<FamilyId> parse_family(std::string_view name) noexcept {
    for (FamilyId f : all_families) {
        if (info(f).name == name || info(f).ident == name) return f;
    }
    return std::nullopt;
}

std::size_t parameter_count(FamilyId family) noexcept { return info(family).count; }

std::span<const std::string_view> parameter_names(FamilyId family) noexcept {
    return {info(family).params.data(), info(family).count};
}

bool strictly_positive_by_definition(FamilyId family) noexcept { return info(family).positive_support; }

bool ParamVector::admissible(FamilyId family, std::span<const double> v) noexcept {
    if (v.size() != parameter_count(family)) return false;
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    const auto positive = [&](std::initializer_list<std::size_t> idx) {
        return std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return v[i] > 0.0; });
    };
    switch (family) {
        case FamilyId::Dagum3P:
        case FamilyId::Pearson6_3P:
            return positive({0, 1, 2});
        case FamilyId::Frechet2P:
        case FamilyId::Frechet3P:
        case FamilyId::InverseGaussian2P:
        case FamilyId::InverseGaussian3P:
        case FamilyId::LogLogistic2P:
        case FamilyId::Pareto2_2P:
        case FamilyId::Pearson5_2P:
        case FamilyId::Pearson5_3P:
        case FamilyId::Weibull2P:
            return positive({0, 1});
        case FamilyId::FisherTippett3P:
            return positive({1});
        case FamilyId::Levy1P:
        case FamilyId::Levy2P:
        case FamilyId::Lognormal2P:
            return positive({0});
        case FamilyId::PhasedBiExponential4P:
            return positive({0, 1}) && v[2] < v[3];
    }
    return false;
}

ParamVector::ParamVector(FamilyId family, std::vector<double> values) : family_(family), values_(std::move(values)) {
    if (!admissible(family_, values_)) {
        std::string msg = "inadmissible parameters for " + std::string(family_name(family_)) + ":";
        for (double x : values_) msg += " " + detail::format_shortest(x);
        throw DomainError(msg);
    }
}

double log_pdf(const ParamVector& p, double x) noexcept {
    if (std::isnan(x)) return kNaN;
    switch (p.family()) {
        case FamilyId::Dagum3P: {
            if (x <= 0.0) return -kInf;
            const double k = p[0], a = p[1], b = p[2];
            const double lz = std::log(x / b);
            return std::log(a * k) + (a * k - 1.0) * lz - std::log(b) - (k + 1.0) * softplus(a * lz);
        }
        case FamilyId::Frechet2P:
        case FamilyId::Frechet3P: {
            const double y = x - location(p);
            if (y <= 0.0) return -kInf;
            const double a = p[0], b = p[1];
            const double lt = a * (std::log(b) - std::log(y));
            return std::log(a) - std::log(b) + (a + 1.0) / a * lt - std::exp(lt);
        }
        case FamilyId::FisherTippett3P: {
            const auto [k, sigma, mu] = gev(p);
            const double z = (x - mu) / sigma;
            if (std::fabs(k) < kGumbelThreshold) return -std::log(sigma) - z - std::exp(-z);
            if (1.0 + k * z <= 0.0) return -kInf;
            const double s = std::log1p(k * z);
            return -std::log(sigma) - (1.0 / k + 1.0) * s - std::exp(-s / k);
        }
        case FamilyId::InverseGaussian2P:
        case FamilyId::InverseGaussian3P: {
            const double y = x - location(p);
            if (y <= 0.0) return -kInf;
            const double lambda = p[0], mu = p[1];
            const double d = y - mu;
            return 0.5 * (std::log(lambda) - 3.0 * std::log(y)) - kLogSqrt2Pi - lambda * d * d / (2.0 * mu * mu * y);
        }
        case FamilyId::Levy1P:
        case FamilyId::Levy2P: {
            const double y = x - location(p);
            if (y <= 0.0) return -kInf;
            const double sigma = p[0];
            return 0.5 * std::log(sigma) - kLogSqrt2Pi - sigma / (2.0 * y) - 1.5 * std::log(y);
        }
        case FamilyId::LogLogistic2P: {
            if (x <= 0.0) return -kInf;
            const double a = p[0], b = p[1];
            const double lz = std::log(x / b);
            return std::log(a) - std::log(b) + (a - 1.0) * lz - 2.0 * softplus(a * lz);
        }
        case FamilyId::Lognormal2P: {
            if (x <= 0.0) return -kInf;
            const double sigma = p[0], mu = p[1];
            const double lx = std::log(x);
            const double z = (lx - mu) / sigma;
            return -0.5 * z * z - lx - std::log(sigma) - kLogSqrt2Pi;
        }
        case FamilyId::Pareto2_2P: {
            if (x < 0.0) return -kInf;
            const double a = p[0], b = p[1];
            return std::log(a) - std::log(b) - (a + 1.0) * std::log1p(x / b);
        }
        case FamilyId::Pearson5_2P:
        case FamilyId::Pearson5_3P: {
            const double y = x - location(p);
            if (y <= 0.0) return -kInf;
            const double a = p[0], b = p[1];
            return a * std::log(b) - (a + 1.0) * std::log(y) - b / y - bm::lgamma(a, QuietPolicy());
        }
        case FamilyId::Pearson6_3P: {
            if (x <= 0.0) return -kInf;
            const double a1 = p[0], a2 = p[1], b = p[2];
            const double z = x / b;
            const double lbeta =
                bm::lgamma(a1, QuietPolicy()) + bm::lgamma(a2, QuietPolicy()) - bm::lgamma(a1 + a2, QuietPolicy());
            return (a1 - 1.0) * std::log(z) - std::log(b) - lbeta - (a1 + a2) * std::log1p(z);
        }
        case FamilyId::PhasedBiExponential4P: {
            const double l1 = p[0], l2 = p[1], g1 = p[2], g2 = p[3];
            if (x < g1) return -kInf;
            if (x < g2) return std::log(l1) - l1 * (x - g1);
            return std::log(l2) - l1 * (g2 - g1) - l2 * (x - g2);
        }
        case FamilyId::Weibull2P: {
            if (x <= 0.0) return -kInf;
            const double a = p[0], b = p[1];
            const double lz = std::log(x / b);
            return std::log(a) - std::log(b) + (a - 1.0) * lz - std::exp(a * lz);
        }
    }
    return kNaN;
}

double pdf(const ParamVector& p, double x) noexcept { return std::exp(log_pdf(p, x)); }

double cdf(const ParamVector& p, double x) noexcept {
    if (std::isnan(x)) return kNaN;
    switch (p.family()) {
        case FamilyId::Dagum3P: {
            if (x <= 0.0) return 0.0;
            const double k = p[0], a = p[1], b = p[2];
            return std::exp(-k * softplus(-a * std::log(x / b)));
        }
        case FamilyId::Frechet2P:
        case FamilyId::Frechet3P: {
            const double y = x - location(p);
            if (y <= 0.0) return 0.0;
            return std::exp(-std::pow(p[1] / y, p[0]));
        }
        case FamilyId::FisherTippett3P: {
            const auto [k, sigma, mu] = gev(p);
            const double z = (x - mu) / sigma;
            if (std::fabs(k) < kGumbelThreshold) return std::exp(-std::exp(-z));
            if (1.0 + k * z <= 0.0) return k > 0.0 ? 0.0 : 1.0;
            return std::exp(-std::exp(-std::log1p(k * z) / k));
        }
        case FamilyId::InverseGaussian2P:
        case FamilyId::InverseGaussian3P: {
            const double y = x - location(p);
            if (y <= 0.0) return 0.0;
            return ig_cdf(p[0], p[1], y);
        }
        case FamilyId::Levy1P:
        case FamilyId::Levy2P: {
            const double y = x - location(p);
            if (y <= 0.0) return 0.0;
            return std::erfc(std::sqrt(p[0] / (2.0 * y)));
        }
        case FamilyId::LogLogistic2P: {
            if (x <= 0.0) return 0.0;
            return std::exp(-softplus(-p[0] * std::log(x / p[1])));
        }
        case FamilyId::Lognormal2P: {
            if (x <= 0.0) return 0.0;
            return normal_cdf((std::log(x) - p[1]) / p[0]);
        }
        case FamilyId::Pareto2_2P: {
            if (x <= 0.0) return 0.0;
            return -std::expm1(-p[0] * std::log1p(x / p[1]));
        }
        case FamilyId::Pearson5_2P:
        case FamilyId::Pearson5_3P: {
            const double y = x - location(p);
            if (y <= 0.0) return 0.0;
            return bm::gamma_q(p[0], p[1] / y, QuietPolicy());
        }
        case FamilyId::Pearson6_3P: {
            if (x <= 0.0) return 0.0;
            const double z = x / p[2];
            return bm::ibeta(p[0], p[1], z / (1.0 + z), QuietPolicy());
        }
        case FamilyId::PhasedBiExponential4P: {
            const double l1 = p[0], l2 = p[1], g1 = p[2], g2 = p[3];
            if (x <= g1) return 0.0;
            if (x < g2) return -std::expm1(-l1 * (x - g1));
            return -std::expm1(-l1 * (g2 - g1) - l2 * (x - g2));
        }
        case FamilyId::Weibull2P: {
            if (x <= 0.0) return 0.0;
            return -std::expm1(-std::pow(x / p[1], p[0]));
        }
    }
    return kNaN;
}

double survival(const ParamVector& p, double x) noexcept {
    if (std::isnan(x)) return kNaN;
    switch (p.family()) {
        case FamilyId::Dagum3P: {
            if (x <= 0.0) return 1.0;
            return -std::expm1(-p[0] * softplus(-p[1] * std::log(x / p[2])));
        }
        case FamilyId::Frechet2P:
        case FamilyId::Frechet3P: {
            const double y = x - location(p);
            if (y <= 0.0) return 1.0;
            return -std::expm1(-std::pow(p[1] / y, p[0]));
        }
        case FamilyId::FisherTippett3P: {
            const auto [k, sigma, mu] = gev(p);
            const double z = (x - mu) / sigma;
            if (std::fabs(k) < kGumbelThreshold) return -std::expm1(-std::exp(-z));
            if (1.0 + k * z <= 0.0) return k > 0.0 ? 1.0 : 0.0;
            return -std::expm1(-std::exp(-std::log1p(k * z) / k));
        }
        case FamilyId::InverseGaussian2P:
        case FamilyId::InverseGaussian3P: {
            const double y = x - location(p);
            if (y <= 0.0) return 1.0;
            return ig_survival(p[0], p[1], y);
        }
        case FamilyId::Levy1P:
        case FamilyId::Levy2P: {
            const double y = x - location(p);
            if (y <= 0.0) return 1.0;
            return std::erf(std::sqrt(p[0] / (2.0 * y)));
        }
        case FamilyId::LogLogistic2P: {
            if (x <= 0.0) return 1.0;
            return std::exp(-softplus(p[0] * std::log(x / p[1])));
        }
        case FamilyId::Lognormal2P: {
            if (x <= 0.0) return 1.0;
            return normal_cdf(-(std::log(x) - p[1]) / p[0]);
        }
        case FamilyId::Pareto2_2P: {
            if (x <= 0.0) return 1.0;
            return std::exp(-p[0] * std::log1p(x / p[1]));
        }
        case FamilyId::Pearson5_2P:
        case FamilyId::Pearson5_3P: {
            const double y = x - location(p);
            if (y <= 0.0) return 1.0;
            return bm::gamma_p(p[0], p[1] / y, QuietPolicy());
        }
        case FamilyId::Pearson6_3P: {
            if (x <= 0.0) return 1.0;
            const double z = x / p[2];
            return bm::ibeta(p[1], p[0], 1.0 / (1.0 + z), QuietPolicy());
        }
        case FamilyId::PhasedBiExponential4P: {
            const double l1 = p[0], l2 = p[1], g1 = p[2], g2 = p[3];
            if (x <= g1) return 1.0;
            if (x < g2) return std::exp(-l1 * (x - g1));
            return std::exp(-l1 * (g2 - g1) - l2 * (x - g2));
        }
        case FamilyId::Weibull2P: {
            if (x <= 0.0) return 1.0;
            return std::exp(-std::pow(x / p[1], p[0]));
        }
    }
    return kNaN;
}

double quantile(const ParamVector& p, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("quantile probability " + detail::format_shortest(q) + " outside (0, 1)");
    }
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    switch (p.family()) {
        case FamilyId::Dagum3P: {
            const double k = p[0], a = p[1], b = p[2];
            return b * std::exp(-std::log(std::expm1(-log_q / k)) / a);
        }
        case FamilyId::Frechet2P:
        case FamilyId::Frechet3P:
            return location(p) + p[1] * std::pow(-log_q, -1.0 / p[0]);
        case FamilyId::FisherTippett3P: {
            const auto [k, sigma, mu] = gev(p);
            const double w = std::log(-log_q);
            if (std::fabs(k) < kGumbelThreshold) return mu - sigma * w;
            return mu + sigma * std::expm1(-k * w) / k;
        }
        case FamilyId::InverseGaussian2P:
        case FamilyId::InverseGaussian3P: {
            const double lambda = p[0], mu = p[1];
            return location(p) + invert_positive([&](double y) { return ig_cdf(lambda, mu, y); }, q, mu);
        }
        case FamilyId::Levy1P:
        case FamilyId::Levy2P: {
            const double e = bm::erfc_inv(q, QuietPolicy());
            return location(p) + p[0] / (2.0 * e * e);
        }
        case FamilyId::LogLogistic2P:
            return p[1] * std::exp((log_q - log_1mq) / p[0]);
        case FamilyId::Lognormal2P:
            return std::exp(p[1] - p[0] * std::numbers::sqrt2 * bm::erfc_inv(2.0 * q, QuietPolicy()));
        case FamilyId::Pareto2_2P:
            return p[1] * std::expm1(-log_1mq / p[0]);
        case FamilyId::Pearson5_2P:
        case FamilyId::Pearson5_3P:
            return location(p) + p[1] / bm::gamma_q_inv(p[0], q, QuietPolicy());
        case FamilyId::Pearson6_3P: {
            const double a1 = p[0], a2 = p[1], b = p[2];
            if (q <= 0.5) {
                const double t = bm::ibeta_inv(a1, a2, q, QuietPolicy());
                return b * t / (1.0 - t);
            }
            const double s = bm::ibeta_inv(a2, a1, 1.0 - q, QuietPolicy());
            return b * (1.0 - s) / s;
        }
        case FamilyId::PhasedBiExponential4P: {
            const double l1 = p[0], l2 = p[1], g1 = p[2], g2 = p[3];
            const double hazard = -log_1mq;
            const double first_phase = l1 * (g2 - g1);
            if (hazard < first_phase) return g1 + hazard / l1;
            return g2 + (hazard - first_phase) / l2;
        }
        case FamilyId::Weibull2P:
            return p[1] * std::pow(-log_1mq, 1.0 / p[0]);
    }
    return kNaN;
}

Support support(const ParamVector& p) noexcept {
    const bool positive = strictly_positive_by_definition(p.family());
    switch (p.family()) {
        case FamilyId::FisherTippett3P: {
            const auto [k, sigma, mu] = gev(p);
            if (std::fabs(k) < kGumbelThreshold) return {-kInf, false, kInf, false};
            if (k > 0.0) return {mu - sigma / k, false, kInf, false};
            return {-kInf, false, mu - sigma / k, false};
        }
        case FamilyId::PhasedBiExponential4P:
            return {p[2], true, kInf, false};
        case FamilyId::Pareto2_2P:
            return {0.0, true, kInf, positive};
        default:
            return {location(p), false, kInf, positive};
    }
}

double log_likelihood(const ParamVector& p, std::span<const double> xs) noexcept {
    double total = 0.0;
    for (double x : xs) {
        const double lp = log_pdf(p, x);
        if (!(lp > -kInf)) return -kInf;  // also catches NaN
        total += lp;
    }
    return std::isnan(total) ? -kInf : total;
}

double log_likelihood(const ParamVector& p, const AbundanceSample& s) noexcept { return log_likelihood(p, s.values); }

std::string describe(const ParamVector& p) {
    std::string out(family_name(p.family()));
    out += '(';
    const auto names = parameter_names(p.family());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += "; ";
        out += std::string(names[i]) + '=' + detail::format_shortest(p[i]);
    }
    out += ')';
    return out;
}

}  // namespace distfit
